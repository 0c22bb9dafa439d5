//! Exact brute-force oracle for subsampled mechanisms on small instances.
//!
//! Everything here enumerates: subsample distributions are computed outcome
//! by outcome, pushed through an explicit kernel, and compared with the
//! hockey-stick divergence. Instances beyond the enumeration limits are
//! rejected rather than approximated.

pub mod dataset;
pub mod enumerate;
pub mod kernel;
pub mod scenario;
pub mod transport;

use crate::amplification::{Amplifier, GroupProfiles, NeighborRelation, SubsamplingScheme};
use crate::divergence::{hockey_stick, maximal_coupling, pushforward, CouplingDecomposition, Kernel};
use crate::measure::{DiscreteMeasure, Outcome};
use crate::profiles::PrivacyProfile;
use crate::{Error, Result};

pub use dataset::{encoded_distance, path_distance, Dataset, Universe};
pub use enumerate::{enumerate_subsamples, subsample_domain};
pub use kernel::{membership_kernel, MechanismKernel, MembershipKernel};
pub use transport::{is_distance_compatible, min_cost_coupling, CostedCoupling};

/// Output distribution `S(x)M` of the subsampled mechanism.
pub fn subsampled_output<K: Kernel + ?Sized>(scheme: &SubsamplingScheme, kernel: &K, x: &Dataset) -> Result<DiscreteMeasure> {
    pushforward(&enumerate_subsamples(scheme, x)?, kernel)
}

/// `D_α(S(x)M ‖ S(x')M)` by full enumeration.
pub fn exact_subsampled_divergence<K: Kernel + ?Sized>(
    scheme: &SubsamplingScheme,
    kernel: &K,
    x: &Dataset,
    x_prime: &Dataset,
    alpha: f64,
) -> Result<f64> {
    let mu = subsampled_output(scheme, kernel, x)?;
    let mu_prime = subsampled_output(scheme, kernel, x_prime)?;
    hockey_stick(&mu, &mu_prime, alpha)
}

/// One comparison between an amplification bound and the exact divergence.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundCheck {
    pub eps: f64,
    pub eps_out: f64,
    pub exact: f64,
    pub bound: f64,
    /// `bound − exact`; negative values mean the bound failed.
    pub gap: f64,
    pub amplifier: &'static str,
}

/// Size of the dataset the amplification bound for `relation` is stated at:
/// the common size for substitution, the larger size for remove/add.
fn context_size(x: &Dataset, x_prime: &Dataset) -> usize {
    x.size().max(x_prime.size())
}

/// Checks that `(x, x')` are neighbours at the sizes the scheme assumes.
pub fn check_neighbours(scheme: &SubsamplingScheme, relation: NeighborRelation, x: &Dataset, x_prime: &Dataset) -> Result<()> {
    let d = path_distance(x, x_prime, relation)?;
    if d != 1 {
        return Err(Error::BadParams(format!(
            "datasets are at {} distance {d}, not neighbours",
            relation.name()
        )));
    }
    let n = context_size(x, x_prime);
    match *scheme {
        SubsamplingScheme::Wor { n: sn, .. } | SubsamplingScheme::Wr { n: sn, .. } if sn != n => Err(Error::BadParams(
            format!("scheme is stated for n = {sn} but the larger dataset has {n} elements"),
        )),
        _ => Ok(()),
    }
}

/// Amplification bound for `(x, x')` against the exact divergence at `α = e^{ε'}`.
pub fn check_bound<K: Kernel + ?Sized>(
    scheme: &SubsamplingScheme,
    relation: NeighborRelation,
    kernel: &K,
    groups: &GroupProfiles,
    x: &Dataset,
    x_prime: &Dataset,
    eps: f64,
) -> Result<BoundCheck> {
    check_neighbours(scheme, relation, x, x_prime)?;
    let amplifier = Amplifier::new(*scheme, relation, Some(context_size(x, x_prime)))?;
    let b = amplifier.bound(groups, eps)?;
    let exact = exact_subsampled_divergence(scheme, kernel, x, x_prime, b.eps_out.exp())?;
    Ok(BoundCheck {
        eps,
        eps_out: b.eps_out,
        exact,
        bound: b.delta_out,
        gap: b.delta_out - exact,
        amplifier: amplifier.name(),
    })
}

/// The first element with higher multiplicity in `x` than in `x'`.
pub fn distinguishing_element(x: &Dataset, x_prime: &Dataset) -> Result<String> {
    x.excess_over(x_prime)?
        .into_iter()
        .next()
        .ok_or_else(|| Error::BadParams("x has no element missing from x'".into()))
}

/// Randomized membership on the element distinguishing `x` from `x'`, with
/// every group profile equal to `ψ_p`.
pub fn verify_tightness(
    scheme: &SubsamplingScheme,
    relation: NeighborRelation,
    p: f64,
    eps: f64,
    x: &Dataset,
    x_prime: &Dataset,
) -> Result<BoundCheck> {
    let v = distinguishing_element(x, x_prime)?;
    let kernel = membership_kernel(&v, p)?;
    let groups = GroupProfiles::Constant(PrivacyProfile::randomized_response(p)?);
    check_bound(scheme, relation, &kernel, &groups, x, x_prime, eps)
}

/// Group profiles `δ_1..δ_{max_k}` of `kernel` restricted to `domain`:
/// `δ_k(ε)` is the largest divergence over ordered pairs at distance `1..=k`.
pub fn empirical_group_profiles<K: Kernel + ?Sized>(
    kernel: &K,
    domain: &[Dataset],
    relation: NeighborRelation,
    max_k: usize,
) -> Result<Vec<PrivacyProfile>> {
    let mut by_distance: Vec<Vec<(Outcome, Outcome)>> = vec![Vec::new(); max_k + 1];
    for y in domain {
        for yp in domain {
            match path_distance(y, yp, relation) {
                Ok(d) if (1..=max_k).contains(&d) => by_distance[d].push((y.outcome(), yp.outcome())),
                Ok(_) | Err(Error::Unreachable(_)) => {}
                Err(e) => return Err(e),
            }
        }
    }
    let mut pairs = Vec::new();
    let mut out = Vec::with_capacity(max_k);
    for group in by_distance.into_iter().skip(1) {
        pairs.extend(group);
        out.push(PrivacyProfile::empirical(kernel, &pairs)?);
    }
    Ok(out)
}

/// Maximal-coupling decomposition of `(S(x), S(x'))`.
pub fn subsample_decomposition(scheme: &SubsamplingScheme, x: &Dataset, x_prime: &Dataset) -> Result<CouplingDecomposition> {
    maximal_coupling(&enumerate_subsamples(scheme, x)?, &enumerate_subsamples(scheme, x_prime)?)
}

/// Outcome of the coupling check on one pair `(ν, ν')`.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingCheck {
    pub compatible: bool,
    /// `min_π Σ π(y, y')·δ_{d(y, y')}(ε)`.
    pub min_cost: f64,
    /// `Σ_k ν(Y_k)·δ_k(ε)`.
    pub class_bound: f64,
    pub certified: bool,
}

/// Solves the optimal coupling with cost `δ_{d(y,y')}(ε)` (zero on the diagonal)
/// and compares it with the distance-class sum.
pub fn coupling_check<G>(nu: &DiscreteMeasure, nu_prime: &DiscreteMeasure, relation: NeighborRelation, mut delta: G) -> Result<CouplingCheck>
where
    G: FnMut(usize) -> f64,
{
    let distance = transport::relation_distance(relation);
    let compatible = is_distance_compatible(nu, nu_prime, relation)?;
    let mut cost_err = None;
    let coupling = min_cost_coupling(nu, nu_prime, |a, b| match distance(a, b) {
        Ok(Some(0)) => 0.0,
        Ok(Some(k)) => delta(k),
        // Unreachable pairs can never be used by a finite-cost plan; price them at 1.
        Ok(None) => 1.0,
        Err(e) => {
            cost_err = Some(e);
            0.0
        }
    })?;
    if let Some(e) = cost_err {
        return Err(e);
    }
    let class_bound = transport::distance_class_bound(nu, nu_prime, &distance, &mut delta)?;
    Ok(CouplingCheck {
        compatible,
        min_cost: coupling.value,
        class_bound,
        certified: coupling.certified,
    })
}
