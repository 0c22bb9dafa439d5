//! Amplification by subsampling: maps a base profile (or its group profiles)
//! and an input `ε` to the amplified pair `(ε', δ')` with
//! `e^{ε'} = 1 + η(e^ε − 1)`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::numeric::{binomial_pmf, CompensatedSum};
use crate::profiles::{group_blackbox, group_whitebox, Curve, GroupMode, PrivacyProfile};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SubsamplingScheme {
    /// Each record kept independently with probability `gamma`.
    Poisson { gamma: f64 },
    /// Uniform subset of size `m` from a set of size `n`.
    Wor { n: usize, m: usize },
    /// `m` independent uniform draws (a multiset) from a set of size `n`.
    Wr { n: usize, m: usize },
}

impl SubsamplingScheme {
    pub fn name(&self) -> &'static str {
        match self {
            SubsamplingScheme::Poisson { .. } => "poisson",
            SubsamplingScheme::Wor { .. } => "wor",
            SubsamplingScheme::Wr { .. } => "wr",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            SubsamplingScheme::Poisson { gamma } if !(gamma > 0.0 && gamma <= 1.0) => {
                Err(Error::BadParams(format!("Poisson rate {gamma} outside (0, 1]")))
            }
            SubsamplingScheme::Wor { n, m } if n == 0 || m == 0 || m > n => {
                Err(Error::BadParams(format!("without replacement needs 1 <= m <= n, got n={n}, m={m}")))
            }
            SubsamplingScheme::Wr { n, m } if n == 0 || m == 0 => {
                Err(Error::BadParams(format!("with replacement needs n, m >= 1, got n={n}, m={m}")))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NeighborRelation {
    /// Datasets differ by the presence of one record.
    RemoveAdd,
    /// Datasets of equal size differ in one record.
    Substitute,
}

impl NeighborRelation {
    pub fn name(&self) -> &'static str {
        match self {
            NeighborRelation::RemoveAdd => "remove-add",
            NeighborRelation::Substitute => "substitute",
        }
    }
}

impl fmt::Display for NeighborRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Result of applying one amplification bound at one input `ε`.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplificationBound {
    pub eps_in: f64,
    pub eps_out: f64,
    pub delta_out: f64,
    pub eta: f64,
    /// `(k, w_k)` coefficients on `δ_k(ε)` for the with-replacement bounds.
    pub weights: Option<Vec<(usize, f64)>>,
    /// Set when some term used the conservative extension of a tabulated profile.
    pub conservative_extension: bool,
}

/// `ε' = ln(1 + η(e^ε − 1))`.
pub fn amplified_epsilon(eta: f64, eps: f64) -> Result<f64> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::EtaOutOfRange(eta));
    }
    if !(eps >= 0.0) {
        return Err(Error::NegativeEpsilon(eps));
    }
    if eps > 700.0 {
        // e^ε overflows; ε' = ε + ln η + ln(1 + (1 − η)/(η(e^ε − 1)))) ≈ ε + ln η.
        return Ok(eps + eta.ln() + ((1.0 - eta) * (-eps).exp() / eta).ln_1p());
    }
    Ok((eta * eps.exp_m1()).ln_1p())
}

/// `1 − (1 − 1/n)^m`.
pub fn wr_eta(n: usize, m: usize) -> f64 {
    if n == 1 {
        return 1.0;
    }
    -(m as f64 * (-1.0 / n as f64).ln_1p()).exp_m1()
}

/// `w_k = C(m,k)(1/n)^k(1 − 1/n)^{m−k}` for `k = 1..=m`, computed in log space.
pub fn wr_weights(n: usize, m: usize) -> Result<Vec<(usize, f64)>> {
    if n == 0 || m == 0 {
        return Err(Error::BadParams(format!("with-replacement weights need n, m >= 1, got n={n}, m={m}")));
    }
    if n == 1 {
        return Ok((1..=m).map(|k| (k, if k == m { 1.0 } else { 0.0 })).collect());
    }
    let ln_odds = -((n - 1) as f64).ln();
    let mut ln_w = m as f64 * (-1.0 / n as f64).ln_1p();
    let mut out = Vec::with_capacity(m);
    for k in 1..=m {
        ln_w += ((m - k + 1) as f64 / k as f64).ln() + ln_odds;
        out.push((k, ln_w.exp()));
    }
    Ok(out)
}

/// Group-privacy profiles `k ↦ δ_k` fed to the with-replacement bounds.
#[derive(Debug, Clone, PartialEq)]
pub enum GroupProfiles {
    /// Derived from one base profile via black-box or white-box group privacy.
    Derived { base: PrivacyProfile, mode: GroupMode },
    /// `profiles[k − 1]` is `δ_k`.
    Explicit(Vec<PrivacyProfile>),
    /// The same profile for every `k`.
    Constant(PrivacyProfile),
}

impl GroupProfiles {
    pub fn single(base: PrivacyProfile) -> Self {
        GroupProfiles::Explicit(vec![base])
    }

    /// `δ_1`.
    pub fn base(&self) -> Result<&PrivacyProfile> {
        match self {
            GroupProfiles::Derived { base, .. } | GroupProfiles::Constant(base) => Ok(base),
            GroupProfiles::Explicit(v) => v.first().ok_or(Error::MissingGroupProfile(1)),
        }
    }

    pub fn delta(&self, k: usize, eps: f64) -> Result<f64> {
        if k == 0 {
            return Err(Error::BadK(0));
        }
        match self {
            GroupProfiles::Derived { base, .. } if k == 1 => Ok(base.evaluate(eps)),
            GroupProfiles::Derived { base, mode } => match mode {
                GroupMode::WhiteBox => Ok(group_whitebox(base, k)?.evaluate(eps)),
                GroupMode::BlackBox => group_blackbox(base, k, eps),
            },
            GroupProfiles::Explicit(v) => v
                .get(k - 1)
                .map(|p| p.evaluate(eps))
                .ok_or(Error::MissingGroupProfile(k)),
            GroupProfiles::Constant(p) => Ok(p.evaluate(eps)),
        }
    }

    /// Checks that `δ_1..δ_m` can all be produced.
    pub fn check_up_to(&self, m: usize) -> Result<()> {
        match self {
            GroupProfiles::Explicit(v) if v.len() < m => Err(Error::MissingGroupProfile(v.len() + 1)),
            GroupProfiles::Derived {
                base,
                mode: GroupMode::WhiteBox,
            } if m > 1 => group_whitebox(base, 2).map(|_| ()),
            _ => Ok(()),
        }
    }
}

fn bound(eta: f64, eps: f64, delta: f64) -> Result<AmplificationBound> {
    Ok(AmplificationBound {
        eps_in: eps,
        eps_out: amplified_epsilon(eta, eps)?,
        delta_out: delta.min(eta).max(0.0),
        eta,
        weights: None,
        conservative_extension: false,
    })
}

/// Poisson subsampling under remove/add: `δ' = γ·δ(ε)`.
pub fn amplify_poisson<C: Curve + ?Sized>(profile: &C, gamma: f64, eps: f64) -> Result<AmplificationBound> {
    SubsamplingScheme::Poisson { gamma }.validate()?;
    bound(gamma, eps, gamma * profile.delta(eps))
}

/// Sampling `m` of `n` without replacement under substitution: `δ' = (m/n)·δ(ε)`.
pub fn amplify_wor<C: Curve + ?Sized>(profile: &C, n: usize, m: usize, eps: f64) -> Result<AmplificationBound> {
    SubsamplingScheme::Wor { n, m }.validate()?;
    let eta = m as f64 / n as f64;
    bound(eta, eps, eta * profile.delta(eps))
}

/// Sampling `m` times with replacement from `n` under substitution:
/// `δ' = Σ_k w_k·δ_k(ε)`.
pub fn amplify_wr(groups: &GroupProfiles, n: usize, m: usize, eps: f64) -> Result<AmplificationBound> {
    SubsamplingScheme::Wr { n, m }.validate()?;
    groups.check_up_to(m)?;
    let eta = wr_eta(n, m);
    let weights = wr_weights(n, m)?;
    let mut acc = CompensatedSum::new();
    for &(k, w) in &weights {
        if w == 0.0 {
            continue;
        }
        acc.add(w * groups.delta(k, eps)?);
    }
    let mut b = bound(eta, eps, acc.value())?;
    b.weights = Some(weights);
    Ok(b)
}

/// With-replacement sampling analysed under remove/add for inputs of size `n`
/// (the larger of the two neighbours). Same numbers as [`amplify_wr`].
pub fn amplify_wr_hybrid(groups: &GroupProfiles, n: usize, m: usize, eps: f64) -> Result<AmplificationBound> {
    amplify_wr(groups, n, m, eps)
}

/// Poisson subsampling under substitution on datasets of size `n`:
///
/// `δ' = γβδ(ε) + γ(1−β)(Σ_{k<n} γ̃_k δ(ε_k) + γ̃_n)` with `β = e^{ε'−ε}`,
/// `ε_k = ε + ln(γ/(1−γ)·(n/k − 1))` and `γ̃_k = C(n−1,k−1)γ^{k−1}(1−γ)^{n−k}`.
///
/// Some `ε_k` are negative. Closed-form and empirical profiles are evaluated
/// exactly there; tabulated profiles fall back to their conservative extension
/// and the result is flagged.
pub fn amplify_poisson_substitution(
    profile: &PrivacyProfile,
    n: usize,
    gamma: f64,
    eps: f64,
) -> Result<AmplificationBound> {
    if n < 2 {
        return Err(Error::BadParams(format!("Poisson under substitution needs n >= 2, got {n}")));
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::BadParams(format!("Poisson rate {gamma} outside (0, 1)")));
    }
    let eps_out = amplified_epsilon(gamma, eps)?;
    let beta = (eps_out - eps).exp();
    let shift = eps + (gamma / (1.0 - gamma)).ln();
    let mut conservative = !profile.is_exact_at(eps);
    let mut tail = CompensatedSum::new();
    for k in 1..n {
        let weight = shifted_binomial(n, k, gamma);
        if weight == 0.0 {
            continue;
        }
        let eps_k = shift + ((n - k) as f64 / k as f64).ln();
        conservative |= !profile.is_exact_at(eps_k);
        tail.add(weight * profile.evaluate(eps_k));
    }
    tail.add(shifted_binomial(n, n, gamma));
    let delta = gamma * beta * profile.evaluate(eps) + gamma * (1.0 - beta) * tail.value();
    Ok(AmplificationBound {
        eps_in: eps,
        eps_out,
        delta_out: delta.clamp(0.0, gamma),
        eta: gamma,
        weights: None,
        conservative_extension: conservative,
    })
}

/// `γ̃_k = C(n−1, k−1) γ^{k−1} (1−γ)^{n−k}`, the size distribution of a Poisson
/// subsample that is forced to contain one fixed record.
pub fn shifted_binomial(n: usize, k: usize, gamma: f64) -> f64 {
    if k == 0 || k > n {
        return 0.0;
    }
    binomial_pmf((n - 1) as u64, (k - 1) as u64, gamma)
}

/// A supported (scheme, relation) pairing with everything needed to evaluate its bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Amplifier {
    Poisson { gamma: f64 },
    PoissonSubstitute { gamma: f64, n: usize },
    Wor { n: usize, m: usize },
    Wr { n: usize, m: usize },
    WrHybrid { n: usize, m: usize },
}

impl Amplifier {
    /// `n_context` is the dataset size; it is only consulted for Poisson under substitution.
    pub fn new(scheme: SubsamplingScheme, relation: NeighborRelation, n_context: Option<usize>) -> Result<Self> {
        scheme.validate()?;
        use NeighborRelation::*;
        Ok(match (scheme, relation) {
            (SubsamplingScheme::Poisson { gamma }, RemoveAdd) => Amplifier::Poisson { gamma },
            (SubsamplingScheme::Poisson { gamma }, Substitute) => match n_context {
                Some(n) => Amplifier::PoissonSubstitute { gamma, n },
                None => {
                    return Err(Error::UnsupportedPairing {
                        scheme: "poisson",
                        relation: "substitute (without a dataset size)",
                    })
                }
            },
            (SubsamplingScheme::Wor { n, m }, Substitute) => Amplifier::Wor { n, m },
            (SubsamplingScheme::Wor { .. }, RemoveAdd) => {
                return Err(Error::UnsupportedPairing {
                    scheme: "wor",
                    relation: "remove-add",
                })
            }
            (SubsamplingScheme::Wr { n, m }, Substitute) => Amplifier::Wr { n, m },
            // The smaller neighbour has n − 1 elements and must be non-empty.
            (SubsamplingScheme::Wr { n, .. }, RemoveAdd) if n < 2 => {
                return Err(Error::UnsupportedPairing {
                    scheme: "wr",
                    relation: "remove-add (needs n >= 2)",
                })
            }
            (SubsamplingScheme::Wr { n, m }, RemoveAdd) => Amplifier::WrHybrid { n, m },
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Amplifier::Poisson { .. } => "poisson",
            Amplifier::PoissonSubstitute { .. } => "poisson-substitute",
            Amplifier::Wor { .. } => "wor",
            Amplifier::Wr { .. } => "wr",
            Amplifier::WrHybrid { .. } => "wr-hybrid",
        }
    }

    /// Total variation between subsample distributions of worst-case neighbours.
    pub fn eta(&self) -> f64 {
        match *self {
            Amplifier::Poisson { gamma } | Amplifier::PoissonSubstitute { gamma, .. } => gamma,
            Amplifier::Wor { n, m } => m as f64 / n as f64,
            Amplifier::Wr { n, m } | Amplifier::WrHybrid { n, m } => wr_eta(n, m),
        }
    }

    pub fn bound(&self, profiles: &GroupProfiles, eps: f64) -> Result<AmplificationBound> {
        match *self {
            Amplifier::Poisson { gamma } => amplify_poisson(profiles.base()?, gamma, eps),
            Amplifier::PoissonSubstitute { gamma, n } => amplify_poisson_substitution(profiles.base()?, n, gamma, eps),
            Amplifier::Wor { n, m } => amplify_wor(profiles.base()?, n, m, eps),
            Amplifier::Wr { n, m } => amplify_wr(profiles, n, m, eps),
            Amplifier::WrHybrid { n, m } => amplify_wr_hybrid(profiles, n, m, eps),
        }
    }
}

/// `η` for a scheme/relation pairing.
pub fn scheme_eta(scheme: SubsamplingScheme, relation: NeighborRelation, n_context: Option<usize>) -> Result<f64> {
    Ok(Amplifier::new(scheme, relation, n_context)?.eta())
}

/// One bound per grid point, in grid order.
pub fn amplified_bounds(amplifier: &Amplifier, profiles: &GroupProfiles, eps_grid: &[f64]) -> Result<Vec<AmplificationBound>> {
    if eps_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::BadParams("epsilon grid must be strictly increasing".into()));
    }
    eps_grid.iter().map(|&e| amplifier.bound(profiles, e)).collect()
}

/// Tabulated amplified profile `ε' ↦ δ'`.
///
/// Each knot takes the running minimum of the bounds seen so far: the true
/// profile is non-increasing, so any earlier bound also bounds later `ε'`.
pub fn amplified_profile_curve(amplifier: &Amplifier, profiles: &GroupProfiles, eps_grid: &[f64]) -> Result<PrivacyProfile> {
    let bounds = amplified_bounds(amplifier, profiles, eps_grid)?;
    let mut points: Vec<(f64, f64)> = Vec::with_capacity(bounds.len());
    for b in bounds {
        match points.last_mut() {
            Some(last) if b.eps_out <= last.0 => last.1 = last.1.min(b.delta_out),
            Some(last) => {
                let d = last.1.min(b.delta_out);
                points.push((b.eps_out, d));
            }
            None => points.push((b.eps_out, b.delta_out)),
        }
    }
    PrivacyProfile::tabulated(points)
}
