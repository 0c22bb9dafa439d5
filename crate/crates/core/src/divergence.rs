//! Hockey-stick divergences, total variation, maximal couplings and the
//! advanced joint convexity identity on finite measures.
//!
//! `D_α(μ ‖ μ') = Σ_z [μ(z) − α μ'(z)]_+`. All functions accept arbitrary
//! non-negative measures unless stated otherwise; the range `[0, 1]` is only
//! guaranteed for probability measures and `α ≥ 1`.

use std::borrow::Cow;
use std::collections::BTreeMap;

use crate::measure::{DiscreteMeasure, Outcome};
use crate::numeric::{positive_part, CompensatedSum};
use crate::{Error, Result};

/// Below this, `η` (or `1 − η`) is treated as exactly zero.
pub const DEGENERATE_ETA: f64 = 1e-14;

/// Hockey-stick divergence `D_α(μ ‖ μ')`.
pub fn hockey_stick(mu: &DiscreteMeasure, mu_prime: &DiscreteMeasure, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::NonPositiveAlpha(alpha));
    }
    Ok(hockey_stick_unchecked(mu, mu_prime, alpha))
}

pub(crate) fn hockey_stick_unchecked(mu: &DiscreteMeasure, mu_prime: &DiscreteMeasure, alpha: f64) -> f64 {
    // Outcomes outside supp(μ) contribute [0 − α μ'(z)]_+ = 0.
    let mut acc = CompensatedSum::new();
    for (z, m) in mu.iter() {
        acc.add(positive_part(m - alpha * mu_prime.mass(z.as_str())));
    }
    acc.value()
}

/// Total variation distance `1 − Σ_y min(ν(y), ν'(y))` between probability measures.
pub fn total_variation(nu: &DiscreteMeasure, nu_prime: &DiscreteMeasure) -> Result<f64> {
    nu.require_normalized()?;
    nu_prime.require_normalized()?;
    Ok((1.0 - overlap(nu, nu_prime)).clamp(0.0, 1.0))
}

fn overlap(nu: &DiscreteMeasure, nu_prime: &DiscreteMeasure) -> f64 {
    let mut acc = CompensatedSum::new();
    for (y, m) in nu.iter() {
        acc.add(m.min(nu_prime.mass(y.as_str())));
    }
    acc.value()
}

/// Which (if any) of the mixture components is undefined.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Degeneracy {
    /// `0 < η < 1`: all three components are present.
    None,
    /// `η = 0`: the inputs coincide; only `ω0` is present.
    Identical,
    /// `η = 1`: the inputs have disjoint supports; `ω0` is absent.
    Disjoint,
}

/// Overlapping mixture decomposition `ν = (1−η)ω0 + ηω1`, `ν' = (1−η)ω0 + ηω1'`
/// obtained by projecting the maximal coupling on its marginals.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingDecomposition {
    pub eta: f64,
    pub omega0: Option<DiscreteMeasure>,
    pub omega1: Option<DiscreteMeasure>,
    pub omega1_prime: Option<DiscreteMeasure>,
    pub degeneracy: Degeneracy,
}

impl CouplingDecomposition {
    /// `(1−η)·ω0 + η·ω1`.
    pub fn recompose_first(&self) -> Result<DiscreteMeasure> {
        self.recompose(self.omega1.as_ref())
    }

    /// `(1−η)·ω0 + η·ω1'`.
    pub fn recompose_second(&self) -> Result<DiscreteMeasure> {
        self.recompose(self.omega1_prime.as_ref())
    }

    fn recompose(&self, one: Option<&DiscreteMeasure>) -> Result<DiscreteMeasure> {
        let mut parts = Vec::with_capacity(2);
        if let Some(w0) = &self.omega0 {
            parts.push((1.0 - self.eta, w0));
        }
        if let Some(w1) = one {
            parts.push((self.eta, w1));
        }
        DiscreteMeasure::mixture(parts)
    }

    /// The maximal coupling `π = (1−η)π0 + ηπ1` as an explicit transport plan.
    pub fn plan(&self) -> TransportPlan {
        let mut joint: BTreeMap<(Outcome, Outcome), f64> = BTreeMap::new();
        if let Some(w0) = &self.omega0 {
            for (y, m) in w0.iter() {
                joint.insert((y.clone(), y.clone()), (1.0 - self.eta) * m);
            }
        }
        if let (Some(w1), Some(w1p)) = (&self.omega1, &self.omega1_prime) {
            for (y, a) in w1.iter() {
                for (yp, b) in w1p.iter() {
                    *joint.entry((y.clone(), yp.clone())).or_insert(0.0) += self.eta * a * b;
                }
            }
        }
        TransportPlan { joint }
    }
}

/// Maximal coupling construction with `ν0(y) = min{ν(y), ν'(y)}`.
pub fn maximal_coupling(nu: &DiscreteMeasure, nu_prime: &DiscreteMeasure) -> Result<CouplingDecomposition> {
    let eta = total_variation(nu, nu_prime)?;
    if eta <= DEGENERATE_ETA {
        return Ok(CouplingDecomposition {
            eta,
            omega0: Some(nu.clone()),
            omega1: None,
            omega1_prime: None,
            degeneracy: Degeneracy::Identical,
        });
    }
    if 1.0 - eta <= DEGENERATE_ETA {
        return Ok(CouplingDecomposition {
            eta,
            omega0: None,
            omega1: Some(nu.clone()),
            omega1_prime: Some(nu_prime.clone()),
            degeneracy: Degeneracy::Disjoint,
        });
    }
    let common = nu.iter().map(|(y, m)| (y.clone(), m.min(nu_prime.mass(y.as_str()))));
    let omega0 = DiscreteMeasure::new(common)?.scale(1.0 / (1.0 - eta))?;
    // ν − ν0 = [ν − ν']_+, so ω1 and ω1' have disjoint supports by construction.
    let excess = |a: &DiscreteMeasure, b: &DiscreteMeasure| {
        DiscreteMeasure::new(a.iter().map(|(y, m)| (y.clone(), positive_part(m - b.mass(y.as_str())) / eta)))
    };
    Ok(CouplingDecomposition {
        eta,
        omega0: Some(omega0),
        omega1: Some(excess(nu, nu_prime)?),
        omega1_prime: Some(excess(nu_prime, nu)?),
        degeneracy: Degeneracy::None,
    })
}

/// Both sides of the advanced joint convexity identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointConvexityCheck {
    pub alpha_prime: f64,
    pub beta: f64,
    pub lhs: f64,
    pub rhs: f64,
}

impl JointConvexityCheck {
    pub fn gap(&self) -> f64 {
        (self.lhs - self.rhs).abs()
    }
}

/// Evaluates `D_{α'}((1−η)μ0+ημ1 ‖ (1−η)μ0+ημ1')` and `η·D_α(μ1 ‖ (1−β)μ0+βμ1')`
/// with `α' = 1 + η(α−1)` and `β = α'/α`. The two agree exactly in exact arithmetic.
pub fn advanced_joint_convexity(
    mu0: &DiscreteMeasure,
    mu1: &DiscreteMeasure,
    mu1_prime: &DiscreteMeasure,
    eta: f64,
    alpha: f64,
) -> Result<JointConvexityCheck> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::EtaOutOfRange(eta));
    }
    if !(alpha >= 1.0) {
        return Err(Error::BadParams(format!("advanced joint convexity needs alpha >= 1, got {alpha}")));
    }
    for m in [mu0, mu1, mu1_prime] {
        m.require_normalized()?;
    }
    let alpha_prime = 1.0 + eta * (alpha - 1.0);
    let beta = alpha_prime / alpha;
    let mu = DiscreteMeasure::mixture([(1.0 - eta, mu0), (eta, mu1)])?;
    let mu_prime = DiscreteMeasure::mixture([(1.0 - eta, mu0), (eta, mu1_prime)])?;
    let lhs = hockey_stick(&mu, &mu_prime, alpha_prime)?;
    let reference = DiscreteMeasure::mixture([(1.0 - beta, mu0), (beta, mu1_prime)])?;
    let rhs = eta * hockey_stick(mu1, &reference, alpha)?;
    Ok(JointConvexityCheck {
        alpha_prime,
        beta,
        lhs,
        rhs,
    })
}

/// A Markov kernel from input outcomes to output distributions.
pub trait Kernel {
    /// Output distribution for `input`, or `None` when the kernel is undefined there.
    fn output(&self, input: &Outcome) -> Option<Cow<'_, DiscreteMeasure>>;
}

impl Kernel for BTreeMap<Outcome, DiscreteMeasure> {
    fn output(&self, input: &Outcome) -> Option<Cow<'_, DiscreteMeasure>> {
        self.get(input).map(Cow::Borrowed)
    }
}

/// Kernel that ignores its input.
#[derive(Debug, Clone)]
pub struct ConstantKernel(pub DiscreteMeasure);

impl Kernel for ConstantKernel {
    fn output(&self, _input: &Outcome) -> Option<Cow<'_, DiscreteMeasure>> {
        Some(Cow::Borrowed(&self.0))
    }
}

impl<K: Kernel + ?Sized> Kernel for &K {
    fn output(&self, input: &Outcome) -> Option<Cow<'_, DiscreteMeasure>> {
        (**self).output(input)
    }
}

/// Mixture `ωM = Σ_y ω(y)·M(y)`.
pub fn pushforward<K: Kernel + ?Sized>(omega: &DiscreteMeasure, kernel: &K) -> Result<DiscreteMeasure> {
    let mut acc: BTreeMap<Outcome, CompensatedSum> = BTreeMap::new();
    for (y, w) in omega.iter() {
        let out = kernel
            .output(y)
            .ok_or_else(|| Error::MissingKernelEntry(y.to_string()))?;
        out.require_normalized()?;
        for (z, m) in out.iter() {
            acc.entry(z.clone()).or_default().add(w * m);
        }
    }
    DiscreteMeasure::new(acc.into_iter().map(|(z, s)| (z, s.value())))
}

/// Joint distribution over pairs of outcomes.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TransportPlan {
    pub joint: BTreeMap<(Outcome, Outcome), f64>,
}

impl TransportPlan {
    pub fn first_marginal(&self) -> Result<DiscreteMeasure> {
        DiscreteMeasure::new(self.joint.iter().map(|((y, _), &m)| (y.clone(), m)))
    }

    pub fn second_marginal(&self) -> Result<DiscreteMeasure> {
        DiscreteMeasure::new(self.joint.iter().map(|((_, y), &m)| (y.clone(), m)))
    }

    /// Mass placed off the diagonal, `Pr_π[y ≠ y']`.
    pub fn off_diagonal_mass(&self) -> f64 {
        self.joint
            .iter()
            .filter(|((a, b), _)| a != b)
            .map(|(_, &m)| m)
            .sum()
    }

    /// Largest marginal violation against the given marginals.
    pub fn marginal_error(&self, nu: &DiscreteMeasure, nu_prime: &DiscreteMeasure) -> Result<f64> {
        Ok(self
            .first_marginal()?
            .max_abs_diff(nu)
            .max(self.second_marginal()?.max_abs_diff(nu_prime)))
    }
}
