//! Exact subsample distributions `ω = S(x)` for the three sampling schemes.

use crate::amplification::SubsamplingScheme;
use crate::measure::DiscreteMeasure;
use crate::numeric::{binomial, ln_binomial};
use crate::oracle::dataset::{Dataset, Universe};
use crate::{Error, Result};

/// Largest dataset Poisson enumeration accepts (`2^16` subsets).
pub const POISSON_MAX_SIZE: usize = 16;
/// Largest number of distinct subsamples enumerated for WOR and WR.
pub const MAX_OUTCOMES: u128 = 1_000_000;

/// Calls `f` on every count vector `y` with `0 ≤ y_i ≤ bounds_i` and, when
/// `total` is set, `Σ y_i = total`. Vectors are visited in lexicographic order.
fn for_each_count_vector(bounds: &[u32], total: Option<u32>, f: &mut dyn FnMut(&[u32])) {
    fn rec(i: usize, bounds: &[u32], left: Option<u32>, cur: &mut Vec<u32>, f: &mut dyn FnMut(&[u32])) {
        if i == bounds.len() {
            if left.is_none_or(|l| l == 0) {
                f(cur);
            }
            return;
        }
        let hi = match left {
            Some(l) => bounds[i].min(l),
            None => bounds[i],
        };
        // With a fixed total, the remaining coordinates must be able to absorb what is left.
        let rest: u64 = bounds[i + 1..].iter().map(|&b| u64::from(b)).sum();
        for c in 0..=hi {
            if let Some(l) = left {
                if u64::from(l - c) > rest {
                    continue;
                }
            }
            cur[i] = c;
            rec(i + 1, bounds, left.map(|l| l - c), cur, f);
        }
        cur[i] = 0;
    }
    let mut cur = vec![0; bounds.len()];
    rec(0, bounds, total, &mut cur, f);
}

fn too_large(what: &'static str, cardinality: u128) -> Error {
    Error::InstanceTooLarge { what, cardinality }
}

/// Distribution of the subsample of `x` under `scheme`, keyed by canonical encoding.
///
/// The scheme's `n` is informational here: the actual size of `x` is used, so
/// the same scheme can be applied to both members of a remove/add pair.
pub fn enumerate_subsamples(scheme: &SubsamplingScheme, x: &Dataset) -> Result<DiscreteMeasure> {
    scheme.validate()?;
    let universe = x.universe();
    let counts = x.counts();
    let n = x.size();
    let mut entries: Vec<(String, f64)> = Vec::new();
    match *scheme {
        SubsamplingScheme::Poisson { gamma } => {
            if n > POISSON_MAX_SIZE {
                return Err(too_large("Poisson dataset size", n as u128));
            }
            for_each_count_vector(counts, None, &mut |y| {
                let mut p = 1.0;
                for (&xu, &yu) in counts.iter().zip(y) {
                    p *= binomial(u64::from(xu), u64::from(yu)) as f64
                        * gamma.powi(yu as i32)
                        * (1.0 - gamma).powi((xu - yu) as i32);
                }
                entries.push((universe.encode(y), p));
            });
        }
        SubsamplingScheme::Wor { m, .. } => {
            if m > n {
                return Err(Error::BadParams(format!("cannot draw {m} of {n} without replacement")));
            }
            let total = binomial(n as u64, m as u64);
            if total > MAX_OUTCOMES {
                return Err(too_large("without-replacement subsets", total));
            }
            let denom = total as f64;
            for_each_count_vector(counts, Some(m as u32), &mut |y| {
                let ways: u128 = counts
                    .iter()
                    .zip(y)
                    .map(|(&xu, &yu)| binomial(u64::from(xu), u64::from(yu)))
                    .product();
                entries.push((universe.encode(y), ways as f64 / denom));
            });
        }
        SubsamplingScheme::Wr { m, .. } => {
            if n == 0 {
                return Err(Error::BadParams("cannot sample with replacement from an empty dataset".into()));
            }
            let total = multiset_count(x.support_size(), m);
            if total > MAX_OUTCOMES {
                return Err(too_large("with-replacement multisets", total));
            }
            let bounds: Vec<u32> = counts.iter().map(|&c| if c > 0 { m as u32 } else { 0 }).collect();
            let nf = n as f64;
            for_each_count_vector(&bounds, Some(m as u32), &mut |y| {
                // Multinomial: m!/Π y_u! · Π (x_u/n)^{y_u}.
                let mut ln_p = 0.0;
                let mut left = m as u64;
                for (&xu, &yu) in counts.iter().zip(y) {
                    if yu == 0 {
                        continue;
                    }
                    ln_p += ln_binomial(left, u64::from(yu)) + f64::from(yu) * (f64::from(xu) / nf).ln();
                    left -= u64::from(yu);
                }
                entries.push((universe.encode(y), ln_p.exp()));
            });
        }
    }
    DiscreteMeasure::new(entries)
}

/// Number of multisets of size `m` over `s` elements, `C(s + m − 1, m)`.
pub fn multiset_count(s: usize, m: usize) -> u128 {
    if s == 0 {
        return u128::from(m == 0);
    }
    binomial((s + m - 1) as u64, m as u64)
}

/// Every subsample `scheme` can produce from datasets over `universe` that
/// are sets: all subsets for Poisson, `m`-subsets for WOR, `m`-multisets for WR.
pub fn subsample_domain(scheme: &SubsamplingScheme, universe: &Universe) -> Result<Vec<Dataset>> {
    scheme.validate()?;
    let u = universe.len();
    let (bounds, total, cardinality) = match *scheme {
        SubsamplingScheme::Poisson { .. } => {
            if u > POISSON_MAX_SIZE {
                return Err(too_large("Poisson subsample domain", 1u128 << u.min(127)));
            }
            (vec![1; u], None, 1u128 << u)
        }
        SubsamplingScheme::Wor { m, .. } => (vec![1; u], Some(m as u32), binomial(u as u64, m as u64)),
        SubsamplingScheme::Wr { m, .. } => (vec![m as u32; u], Some(m as u32), multiset_count(u, m)),
    };
    if cardinality > MAX_OUTCOMES {
        return Err(too_large("subsample domain", cardinality));
    }
    let mut out = Vec::with_capacity(cardinality as usize);
    let mut err = None;
    for_each_count_vector(&bounds, total, &mut |y| match Dataset::from_counts(universe, y.to_vec()) {
        Ok(d) => out.push(d),
        Err(e) => err = Some(e),
    });
    match err {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(u: &Universe, names: &[&str]) -> Dataset {
        Dataset::from_elements(u, names).unwrap()
    }

    #[test]
    fn poisson_single_element() {
        let u = Universe::new(["a"]).unwrap();
        let w = enumerate_subsamples(&SubsamplingScheme::Poisson { gamma: 0.5 }, &set(&u, &["a"])).unwrap();
        assert_eq!(w.len(), 2);
        assert_eq!(w.mass(""), 0.5);
        assert_eq!(w.mass("a:1"), 0.5);
    }

    #[test]
    fn wor_is_uniform() {
        let u = Universe::new(["a", "b", "c"]).unwrap();
        let w = enumerate_subsamples(&SubsamplingScheme::Wor { n: 3, m: 2 }, &set(&u, &["a", "b", "c"])).unwrap();
        assert_eq!(w.len(), 3);
        for k in ["a:1|b:1", "a:1|c:1", "b:1|c:1"] {
            assert!((w.mass(k) - 1.0 / 3.0).abs() < 1e-16);
        }
    }

    #[test]
    fn wr_is_multinomial() {
        let u = Universe::new(["a", "b"]).unwrap();
        let w = enumerate_subsamples(&SubsamplingScheme::Wr { n: 2, m: 2 }, &set(&u, &["a", "b"])).unwrap();
        assert!((w.mass("a:2") - 0.25).abs() < 1e-15);
        assert!((w.mass("a:1|b:1") - 0.5).abs() < 1e-15);
        assert!((w.mass("b:2") - 0.25).abs() < 1e-15);
    }

    #[test]
    fn masses_sum_to_one() {
        let u = Universe::indexed(8).unwrap();
        let names: Vec<&str> = u.names().iter().map(String::as_str).collect();
        let x = set(&u, &names[..7]);
        for scheme in [
            SubsamplingScheme::Poisson { gamma: 0.3 },
            SubsamplingScheme::Wor { n: 7, m: 3 },
            SubsamplingScheme::Wr { n: 7, m: 4 },
        ] {
            let w = enumerate_subsamples(&scheme, &x).unwrap();
            assert!((w.total_mass() - 1.0).abs() < 1e-12, "{scheme:?}");
        }
        let multi = Dataset::from_elements(&u, &["u0", "u0", "u1"]).unwrap();
        for scheme in [
            SubsamplingScheme::Poisson { gamma: 0.3 },
            SubsamplingScheme::Wor { n: 3, m: 2 },
            SubsamplingScheme::Wr { n: 3, m: 2 },
        ] {
            let w = enumerate_subsamples(&scheme, &multi).unwrap();
            assert!((w.total_mass() - 1.0).abs() < 1e-12, "{scheme:?}");
        }
    }

    #[test]
    fn limits_are_errors() {
        let u = Universe::indexed(40).unwrap();
        let names: Vec<&str> = u.names().iter().map(String::as_str).collect();
        let x = set(&u, &names);
        assert!(matches!(
            enumerate_subsamples(&SubsamplingScheme::Poisson { gamma: 0.5 }, &x),
            Err(Error::InstanceTooLarge { cardinality: 40, .. })
        ));
        assert!(matches!(
            enumerate_subsamples(&SubsamplingScheme::Wor { n: 40, m: 20 }, &x),
            Err(Error::InstanceTooLarge { .. })
        ));
        assert!(matches!(
            enumerate_subsamples(&SubsamplingScheme::Wr { n: 40, m: 10 }, &x),
            Err(Error::InstanceTooLarge { .. })
        ));
    }

    #[test]
    fn domains() {
        let u = Universe::indexed(4).unwrap();
        assert_eq!(subsample_domain(&SubsamplingScheme::Poisson { gamma: 0.5 }, &u).unwrap().len(), 16);
        assert_eq!(subsample_domain(&SubsamplingScheme::Wor { n: 4, m: 2 }, &u).unwrap().len(), 6);
        assert_eq!(subsample_domain(&SubsamplingScheme::Wr { n: 4, m: 3 }, &u).unwrap().len(), 20);
        assert_eq!(multiset_count(4, 3), 20);
    }
}
