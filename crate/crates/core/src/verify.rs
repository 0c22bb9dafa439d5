//! Seeded verification suites comparing every bound and identity with the
//! exact oracle. The CLI `verify` command and the acceptance tests run these.

use std::fmt;
use std::str::FromStr;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::amplification::{GroupProfiles, NeighborRelation, SubsamplingScheme};
use crate::divergence::{advanced_joint_convexity, pushforward, total_variation, Kernel};
use crate::measure::DiscreteMeasure;
use crate::oracle::kernel::random_distribution;
use crate::oracle::{
    check_bound, coupling_check, empirical_group_profiles, subsample_decomposition, subsample_domain, verify_tightness,
    BoundCheck, Dataset, MechanismKernel, Universe,
};
use crate::profiles::{group_whitebox, PrivacyProfile};
use crate::{Error, Result};

/// Tolerance for bounds that must hold with equality.
pub const TIGHTNESS_TOLERANCE: f64 = 1e-12;
/// Tolerance for `bound ≥ exact`.
pub const DOMINANCE_TOLERANCE: f64 = 1e-10;
/// Tolerance for the joint convexity identity.
pub const AJC_TOLERANCE: f64 = 1e-12;
/// Tolerance for the coupling identity.
pub const COUPLING_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Suite {
    Tightness,
    Ajc,
    Dominance,
    Coupling,
    PoissonSubstitute,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::Tightness, Suite::Ajc, Suite::Dominance, Suite::Coupling, Suite::PoissonSubstitute];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Tightness => "tightness",
            Suite::Ajc => "ajc",
            Suite::Dominance => "dominance",
            Suite::Coupling => "coupling",
            Suite::PoissonSubstitute => "poisson-substitute",
        }
    }

    /// Number of random trials when none is given.
    pub fn default_trials(&self) -> usize {
        match self {
            Suite::Ajc => 1000,
            Suite::Dominance => 200,
            Suite::Coupling => 100,
            Suite::Tightness | Suite::PoissonSubstitute => 0,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown suite {s:?}")))
    }
}

/// A single verified quantity. `reference` is what the oracle computes,
/// `candidate` what is being checked against it.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub label: String,
    pub reference: f64,
    pub candidate: f64,
    pub gap: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub suite: Suite,
    pub seed: u64,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    /// Most negative `gap` (or largest absolute gap for identities).
    pub fn worst_gap(&self) -> f64 {
        self.checks.iter().map(|c| c.gap).fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuiteOptions {
    pub trials: Option<usize>,
    pub seed: u64,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions { trials: None, seed: 7 }
    }
}

pub fn run_suite(suite: Suite, opts: &SuiteOptions) -> Result<SuiteReport> {
    let trials = opts.trials.unwrap_or(suite.default_trials());
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let checks = match suite {
        Suite::Tightness => tightness_suite()?,
        Suite::Ajc => ajc_suite(trials, &mut rng)?,
        Suite::Dominance => dominance_suite(trials, &mut rng)?,
        Suite::Coupling => coupling_suite(trials, &mut rng)?,
        Suite::PoissonSubstitute => poisson_substitute_suite()?,
    };
    Ok(SuiteReport {
        suite,
        seed: opts.seed,
        checks,
    })
}

fn bound_check(label: String, r: &BoundCheck, tight: bool) -> Check {
    let pass = if tight {
        r.gap.abs() <= TIGHTNESS_TOLERANCE
    } else {
        r.gap >= -DOMINANCE_TOLERANCE
    };
    Check {
        label,
        reference: r.exact,
        candidate: r.bound,
        gap: r.gap,
        pass,
    }
}

/// `x = {u0..u(n−1)}` over `u0..un`, plus its remove/add and substitution neighbours.
pub struct Instance {
    pub x: Dataset,
    pub removed: Dataset,
    pub substituted: Dataset,
}

pub fn standard_instance(n: usize) -> Result<Instance> {
    let u = Universe::indexed(n + 1)?;
    let names: Vec<&str> = u.names()[..n].iter().map(String::as_str).collect();
    let x = Dataset::from_elements(&u, &names)?;
    let last = &u.names()[n - 1];
    let removed = x.without(last)?;
    let substituted = removed.with(&u.names()[n])?;
    Ok(Instance { x, removed, substituted })
}

const TIGHTNESS_EPS: [f64; 3] = [0.0, std::f64::consts::LN_2, 1.0];
const TIGHTNESS_P: [f64; 3] = [0.6, 0.75, 0.9];

/// Randomized membership against the Poisson, WOR and WR bounds.
pub fn tightness_suite() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let mut run = |scheme: SubsamplingScheme, relation, x: &Dataset, xp: &Dataset| -> Result<()> {
        for p in TIGHTNESS_P {
            for eps in TIGHTNESS_EPS {
                let r = verify_tightness(&scheme, relation, p, eps, x, xp)?;
                let label = format!("{} {scheme:?} p={p} eps={eps:.6}", r.amplifier);
                out.push(bound_check(label, &r, true));
            }
        }
        Ok(())
    };
    for n in 1..=8 {
        let inst = standard_instance(n)?;
        for gamma in [0.1, 0.3, 0.5] {
            run(SubsamplingScheme::Poisson { gamma }, NeighborRelation::RemoveAdd, &inst.x, &inst.removed)?;
        }
        for m in 1..=n.min(4) {
            run(SubsamplingScheme::Wor { n, m }, NeighborRelation::Substitute, &inst.x, &inst.substituted)?;
        }
        if n <= 6 {
            for m in 1..=4 {
                run(SubsamplingScheme::Wr { n, m }, NeighborRelation::Substitute, &inst.x, &inst.substituted)?;
            }
        }
    }
    Ok(out)
}

/// Poisson under substitution with randomized membership.
pub fn poisson_substitute_suite() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for n in [3, 4, 5] {
        let inst = standard_instance(n)?;
        for gamma in [0.2, 0.5] {
            for p in TIGHTNESS_P {
                for eps in [0.0, std::f64::consts::LN_2] {
                    let scheme = SubsamplingScheme::Poisson { gamma };
                    let r = verify_tightness(&scheme, NeighborRelation::Substitute, p, eps, &inst.x, &inst.substituted)?;
                    let label = format!("poisson-substitute n={n} gamma={gamma} p={p} eps={eps:.6}");
                    out.push(bound_check(label, &r, false));
                }
            }
        }
    }
    Ok(out)
}

fn random_measure<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Result<DiscreteMeasure> {
    random_distribution(k, rng)
}

/// The joint convexity identity on random mixtures and on real subsampling
/// decompositions pushed through random kernels.
pub fn ajc_suite<R: Rng + ?Sized>(trials: usize, rng: &mut R) -> Result<Vec<Check>> {
    let alphas = [1.0, 2.0, std::f64::consts::E, 10.0];
    let mut out = Vec::new();
    let mut push = |label: String, lhs: f64, rhs: f64| {
        let gap = (lhs - rhs).abs();
        out.push(Check {
            label,
            reference: lhs,
            candidate: rhs,
            gap,
            pass: gap <= AJC_TOLERANCE,
        });
    };
    for t in 0..trials {
        let mu0 = random_measure(5, rng)?;
        let mu1 = random_measure(5, rng)?;
        let mu1p = random_measure(5, rng)?;
        let eta: f64 = 1.0 - rng.random::<f64>();
        for alpha in alphas {
            let c = advanced_joint_convexity(&mu0, &mu1, &mu1p, eta, alpha)?;
            push(format!("mixture trial={t} eta={eta:.6} alpha={alpha:.6}"), c.lhs, c.rhs);
        }
    }
    for t in 0..trials.div_ceil(20) {
        let (scheme, relation, x, xp) = random_instance(rng, t % 3)?;
        let domain = subsample_domain(&scheme, x.universe())?;
        let kernel = MechanismKernel::random(&domain, rng.random_range(2..=4), rng)?;
        let d = subsample_decomposition(&scheme, &x, &xp)?;
        let (Some(w1), Some(w1p)) = (&d.omega1, &d.omega1_prime) else {
            continue;
        };
        let m1 = pushforward(w1, &kernel)?;
        let m1p = pushforward(w1p, &kernel)?;
        let m0 = match &d.omega0 {
            Some(w0) => pushforward(w0, &kernel)?,
            None => m1.clone(),
        };
        for alpha in alphas {
            let c = advanced_joint_convexity(&m0, &m1, &m1p, d.eta, alpha)?;
            let direct = crate::oracle::exact_subsampled_divergence(&scheme, &kernel, &x, &xp, c.alpha_prime)?;
            push(
                format!("decomposition {} {scheme:?} alpha={alpha:.6}", relation.name()),
                direct,
                c.rhs,
            );
        }
    }
    Ok(out)
}

/// A random neighbouring pair for one of the amplification bounds:
/// 0 Poisson/remove-add, 1 WOR/substitute, 2 WR/substitute,
/// 3 WR/remove-add (hybrid), 4 Poisson/substitute.
pub fn random_instance<R: Rng + ?Sized>(
    rng: &mut R,
    case: usize,
) -> Result<(SubsamplingScheme, NeighborRelation, Dataset, Dataset)> {
    let n = rng.random_range(2..=5usize);
    let inst = standard_instance(n)?;
    let gamma = [0.1, 0.25, 0.5, 0.8].choose(rng).copied().unwrap_or(0.5);
    Ok(match case {
        0 => {
            let (x, xp) = if rng.random_bool(0.5) {
                (inst.x, inst.removed)
            } else {
                (inst.removed, inst.x)
            };
            (SubsamplingScheme::Poisson { gamma }, NeighborRelation::RemoveAdd, x, xp)
        }
        1 => {
            let m = rng.random_range(1..=n);
            (SubsamplingScheme::Wor { n, m }, NeighborRelation::Substitute, inst.x, inst.substituted)
        }
        2 => {
            let m = rng.random_range(1..=3usize);
            (SubsamplingScheme::Wr { n, m }, NeighborRelation::Substitute, inst.x, inst.substituted)
        }
        3 => {
            let m = rng.random_range(1..=3usize);
            let (x, xp) = if rng.random_bool(0.5) {
                (inst.x, inst.removed)
            } else {
                (inst.removed, inst.x)
            };
            (SubsamplingScheme::Wr { n, m }, NeighborRelation::RemoveAdd, x, xp)
        }
        _ => (SubsamplingScheme::Poisson { gamma }, NeighborRelation::Substitute, inst.x, inst.substituted),
    })
}

/// Group profiles of `kernel` with respect to the relation the bound assumes
/// for the base mechanism.
fn bound_groups<K: Kernel + ?Sized>(
    scheme: &SubsamplingScheme,
    relation: NeighborRelation,
    kernel: &K,
    domain: &[Dataset],
) -> Result<GroupProfiles> {
    let (rel, max_k) = match *scheme {
        SubsamplingScheme::Poisson { .. } => (relation, 1),
        SubsamplingScheme::Wor { .. } => (NeighborRelation::Substitute, 1),
        SubsamplingScheme::Wr { m, .. } => (NeighborRelation::Substitute, m),
    };
    Ok(GroupProfiles::Explicit(empirical_group_profiles(kernel, domain, rel, max_k)?))
}

/// Random kernels on small instances: every bound must dominate the exact divergence.
pub fn dominance_suite<R: Rng + ?Sized>(trials: usize, rng: &mut R) -> Result<Vec<Check>> {
    let eps_choices = [0.0, 0.1, 0.5, std::f64::consts::LN_2, 1.0, 2.0];
    let mut out = Vec::new();
    for t in 0..trials {
        for case in 0..5 {
            let (scheme, relation, x, xp) = random_instance(rng, case)?;
            let domain = subsample_domain(&scheme, x.universe())?;
            let kernel = MechanismKernel::random(&domain, rng.random_range(2..=4), rng)?;
            let groups = bound_groups(&scheme, relation, &kernel, &domain)?;
            let eps = eps_choices.choose(rng).copied().unwrap_or(0.0);
            let r = check_bound(&scheme, relation, &kernel, &groups, &x, &xp, eps)?;
            let label = format!(
                "trial={t} {} {scheme:?} |x|={} |x'|={} eps={eps:.6}",
                r.amplifier,
                x.size(),
                xp.size()
            );
            out.push(bound_check(label, &r, false));
        }
    }
    Ok(out)
}

/// Laplace white-box group profile values `δ_k(ε)` used as coupling costs.
fn laplace_groups(theta: f64, eps: f64) -> Result<impl Fn(usize) -> f64> {
    let base = PrivacyProfile::laplace(theta)?;
    let values: Vec<f64> = (1..=8)
        .map(|k| group_whitebox(&base, k).map(|p| p.evaluate(eps)))
        .collect::<Result<_>>()?;
    Ok(move |k: usize| values[(k - 1).min(values.len() - 1)])
}

/// The coupling identity on WOR/WR decompositions, the incompatible Poisson
/// decomposition, and random pairs where the optimal coupling can only be larger.
pub fn coupling_suite<R: Rng + ?Sized>(trials: usize, rng: &mut R) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let delta = laplace_groups(1.0, 0.5)?;
    let mut compatible_case = |label: String, scheme: SubsamplingScheme, x: &Dataset, xp: &Dataset| -> Result<()> {
        let d = subsample_decomposition(&scheme, x, xp)?;
        let (Some(w1), Some(w1p)) = (&d.omega1, &d.omega1_prime) else {
            return Ok(());
        };
        let c = coupling_check(w1, w1p, NeighborRelation::Substitute, &delta)?;
        let gap = c.min_cost - c.class_bound;
        out.push(Check {
            label: format!("{label} compatible={} certified={}", c.compatible, c.certified),
            reference: c.class_bound,
            candidate: c.min_cost,
            gap,
            pass: c.compatible && c.certified && gap.abs() <= COUPLING_TOLERANCE,
        });
        Ok(())
    };
    for n in 2..=6 {
        let inst = standard_instance(n)?;
        for m in 1..n {
            compatible_case(format!("wor n={n} m={m}"), SubsamplingScheme::Wor { n, m }, &inst.x, &inst.substituted)?;
        }
        for m in 1..=4 {
            compatible_case(format!("wr n={n} m={m}"), SubsamplingScheme::Wr { n, m }, &inst.x, &inst.substituted)?;
        }
    }
    for n in 2..=6 {
        let inst = standard_instance(n)?;
        for gamma in [0.2, 0.4] {
            let d = subsample_decomposition(&SubsamplingScheme::Poisson { gamma }, &inst.x, &inst.substituted)?;
            let (Some(w1), Some(w0)) = (&d.omega1, &d.omega0) else {
                return Err(Error::BadParams("Poisson decomposition is degenerate".into()));
            };
            let compatible = crate::oracle::is_distance_compatible(w1, w0, NeighborRelation::Substitute)?;
            out.push(Check {
                label: format!("poisson-substitute omega1 vs omega0 n={n} gamma={gamma} compatible={compatible}"),
                reference: 0.0,
                candidate: 0.0,
                gap: 0.0,
                pass: !compatible,
            });
        }
    }
    // Random distributions over 2-subsets: the coupling bound can only exceed the class sum.
    let u = Universe::indexed(5)?;
    let domain = subsample_domain(&SubsamplingScheme::Wor { n: 5, m: 2 }, &u)?;
    for t in 0..trials {
        let pick = |rng: &mut R| -> Result<DiscreteMeasure> {
            let k = rng.random_range(1..=4usize);
            let chosen: Vec<&Dataset> = domain.choose_multiple(rng, k).collect();
            let w = random_distribution(k, rng)?;
            let masses: Vec<f64> = w.iter().map(|(_, m)| m).collect();
            DiscreteMeasure::new(chosen.iter().zip(masses).map(|(y, m)| (y.outcome(), m)))?.normalize()
        };
        let nu = pick(rng)?;
        let nup = pick(rng)?;
        if total_variation(&nu, &nup)? == 0.0 {
            continue;
        }
        let c = coupling_check(&nu, &nup, NeighborRelation::Substitute, &delta)?;
        let gap = c.min_cost - c.class_bound;
        let pass = c.certified && gap >= -COUPLING_TOLERANCE && (!c.compatible || gap.abs() <= COUPLING_TOLERANCE);
        out.push(Check {
            label: format!("random trial={t} compatible={}", c.compatible),
            reference: c.class_bound,
            candidate: c.min_cost,
            gap,
            pass,
        });
    }
    Ok(out)
}
