//! Privacy loss distributions, the profile/loss identity, and the moment
//! generating function of the privacy loss expressed through privacy profiles.

use crate::divergence::hockey_stick_unchecked;
use crate::measure::{DiscreteMeasure, NORMALIZATION_TOLERANCE};
use crate::numeric::CompensatedSum;
use crate::profiles::Curve;
use crate::quadrature::{integrate_half_line, QuadratureSpec};
use crate::{Error, Result};

/// Distribution of `L = ln(μ(z)/μ'(z))` for `z ~ μ`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrivacyLossDistribution {
    /// `(loss, probability)` sorted by loss.
    atoms: Vec<(f64, f64)>,
    /// `μ(supp μ ∖ supp μ')`, the mass of the `+∞` atom.
    infinite_mass: f64,
}

impl PrivacyLossDistribution {
    /// Builds a loss distribution from explicit atoms.
    pub fn from_atoms(mut atoms: Vec<(f64, f64)>, infinite_mass: f64) -> Result<Self> {
        if atoms.iter().any(|&(l, p)| !l.is_finite() || !(p >= 0.0)) || !(infinite_mass >= 0.0) {
            return Err(Error::BadParams("loss atoms need finite losses and non-negative probabilities".into()));
        }
        let mut total = CompensatedSum::new();
        total.extend(atoms.iter().map(|&(_, p)| p));
        total.add(infinite_mass);
        let total = total.value();
        if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::BadLossDistribution(total));
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(PrivacyLossDistribution { atoms, infinite_mass })
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn infinite_mass(&self) -> f64 {
        self.infinite_mass
    }

    /// `Pr[L > t]`, counting the `+∞` atom.
    pub fn prob_greater(&self, t: f64) -> f64 {
        let idx = self.atoms.partition_point(|&(l, _)| l <= t);
        let mut acc = CompensatedSum::new();
        acc.extend(self.atoms[idx..].iter().map(|&(_, p)| p));
        acc.add(self.infinite_mass);
        acc.value()
    }

    /// `Pr[L < t]`.
    pub fn prob_less(&self, t: f64) -> f64 {
        let idx = self.atoms.partition_point(|&(l, _)| l < t);
        let mut acc = CompensatedSum::new();
        acc.extend(self.atoms[..idx].iter().map(|&(_, p)| p));
        acc.value()
    }

    /// `E[e^{sL}]`; infinite (an error) when `s > 0` and a `+∞` atom exists.
    pub fn mgf(&self, s: f64) -> Result<f64> {
        if s == 0.0 {
            return Ok(1.0);
        }
        if s > 0.0 && self.infinite_mass > 0.0 {
            return Err(Error::InfiniteLoss);
        }
        let mut acc = CompensatedSum::new();
        acc.extend(self.atoms.iter().map(|&(l, p)| p * (s * l).exp()));
        Ok(acc.value())
    }
}

/// One atom per support point of `μ`, plus the `+∞` atom for points outside `supp μ'`.
pub fn loss_distribution(mu: &DiscreteMeasure, mu_prime: &DiscreteMeasure) -> Result<PrivacyLossDistribution> {
    mu.require_normalized()?;
    mu_prime.require_normalized()?;
    let mut atoms = Vec::with_capacity(mu.len());
    let mut infinite = CompensatedSum::new();
    for (z, m) in mu.iter() {
        let m2 = mu_prime.mass(z.as_str());
        if m2 > 0.0 {
            atoms.push(((m / m2).ln(), m));
        } else {
            infinite.add(m);
        }
    }
    // Masses already passed the normalisation check, so only the sort remains.
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(PrivacyLossDistribution {
        atoms,
        infinite_mass: infinite.value(),
    })
}

/// `δ(ε) = Pr[L > ε] − e^ε·Pr[L' < −ε]` for the loss `L` of `(μ, μ')` and `L'` of `(μ', μ)`.
pub fn profile_from_loss(fwd: &PrivacyLossDistribution, rev: &PrivacyLossDistribution, eps: f64) -> f64 {
    fwd.prob_greater(eps) - eps.exp() * rev.prob_less(-eps)
}

/// The tail bound `Pr[L > ε]`.
pub fn tail_bound_profile(pld: &PrivacyLossDistribution, eps: f64) -> f64 {
    pld.prob_greater(eps)
}

/// Exact profile `ε ↦ D_{e^ε}(μ ‖ μ')` of a single pair of distributions.
#[derive(Debug, Clone, PartialEq)]
pub struct PairCurve {
    mu: DiscreteMeasure,
    mu_prime: DiscreteMeasure,
}

impl PairCurve {
    pub fn new(mu: DiscreteMeasure, mu_prime: DiscreteMeasure) -> Self {
        PairCurve { mu, mu_prime }
    }

    /// The curve of `(μ', μ)`.
    pub fn reversed(&self) -> Self {
        PairCurve::new(self.mu_prime.clone(), self.mu.clone())
    }
}

impl Curve for PairCurve {
    fn delta(&self, eps: f64) -> f64 {
        hockey_stick_unchecked(&self.mu, &self.mu_prime, eps.exp())
    }

    fn kinks(&self) -> Vec<f64> {
        self.mu
            .iter()
            .filter_map(|(z, m)| {
                let m2 = self.mu_prime.mass(z.as_str());
                (m2 > 0.0).then(|| (m / m2).ln())
            })
            .collect()
    }
}

fn weighted(log_weight: f64, ln_delta: f64) -> f64 {
    if ln_delta == f64::NEG_INFINITY {
        0.0
    } else {
        (log_weight + ln_delta).exp()
    }
}

/// `φ(s) = 1 + s(s+1)∫₀^∞ (e^{sε}δ(ε) + e^{−(s+1)ε}δ'(ε)) dε`, where `δ` is the
/// profile of `(μ, μ')` and `δ'` that of `(μ', μ)`.
pub fn mgf_from_profiles(fwd: &dyn Curve, rev: &dyn Curve, s: f64, quad: &QuadratureSpec) -> Result<f64> {
    if !(s >= 0.0 && s.is_finite()) {
        return Err(Error::BadParams(format!("MGF order s must be finite and >= 0, got {s}")));
    }
    if s == 0.0 {
        return Ok(1.0);
    }
    let mut kinks = fwd.kinks();
    kinks.extend(rev.kinks());
    let integral = integrate_half_line(
        |e| weighted(s * e, fwd.ln_delta(e)) + weighted(-(s + 1.0) * e, rev.ln_delta(e)),
        &kinks,
        quad,
    )?;
    Ok(1.0 + s * (s + 1.0) * integral)
}

/// [`mgf_from_profiles`] when `D(μ‖μ') = D(μ'‖μ)`.
pub fn mgf_symmetric(profile: &dyn Curve, s: f64, quad: &QuadratureSpec) -> Result<f64> {
    mgf_from_profiles(profile, profile, s, quad)
}

/// Rényi DP level `ln φ(λ − 1) / (λ − 1)` from `φ(λ − 1)`.
pub fn renyi_epsilon(mgf_value: f64, lambda: f64) -> Result<f64> {
    if !(lambda > 1.0) || !lambda.is_finite() {
        return Err(Error::BadLambda(lambda));
    }
    if !(mgf_value > 0.0) || !mgf_value.is_finite() {
        return Err(Error::BadParams(format!("MGF value must be positive and finite, got {mgf_value}")));
    }
    Ok(mgf_value.ln() / (lambda - 1.0))
}
