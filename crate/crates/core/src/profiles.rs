//! Privacy profiles `ε ↦ δ(ε)` and group-privacy profiles `ε ↦ δ_k(ε)`.

use std::borrow::Cow;
use std::fmt::Write as _;
use std::sync::Arc;

use crate::divergence::{hockey_stick_unchecked, Kernel};
use crate::measure::{DiscreteMeasure, Outcome};
use crate::numeric::{format_significant, ln_expm1, positive_part};
use crate::special::{mills_ratio, std_normal_cdf, std_normal_ln_pdf};
use crate::{Error, Result};

/// Anything that can be evaluated as a privacy curve.
pub trait Curve {
    fn delta(&self, eps: f64) -> f64;

    /// `ln δ(ε)`; `−∞` where the curve is zero. Overridden where the value
    /// is representable in log space beyond the range of `f64`.
    fn ln_delta(&self, eps: f64) -> f64 {
        self.delta(eps).ln()
    }

    /// Points where the curve is not smooth; used to split quadrature panels.
    fn kinks(&self) -> Vec<f64> {
        Vec::new()
    }
}

impl<C: Curve + ?Sized> Curve for &C {
    fn delta(&self, eps: f64) -> f64 {
        (**self).delta(eps)
    }

    fn ln_delta(&self, eps: f64) -> f64 {
        (**self).ln_delta(eps)
    }

    fn kinks(&self) -> Vec<f64> {
        (**self).kinks()
    }
}

/// Wraps a closure as a [`Curve`].
pub struct FnCurve<F>(pub F);

impl<F: Fn(f64) -> f64> Curve for FnCurve<F> {
    fn delta(&self, eps: f64) -> f64 {
        (self.0)(eps)
    }
}

/// Output distributions of a finite set of neighbouring pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalProfile {
    pairs: Arc<Vec<(DiscreteMeasure, DiscreteMeasure)>>,
}

impl EmpiricalProfile {
    /// Resolves every `(x, x')` through `kernel`. The list should already contain
    /// both orientations of each pair when the relation is symmetric.
    pub fn new<K: Kernel + ?Sized>(kernel: &K, pairs: &[(Outcome, Outcome)]) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::EmptyPairList);
        }
        let resolve = |x: &Outcome| -> Result<DiscreteMeasure> {
            let out = kernel.output(x).ok_or_else(|| Error::MissingKernelEntry(x.to_string()))?;
            out.require_normalized()?;
            Ok(out.into_owned())
        };
        let resolved = pairs
            .iter()
            .map(|(x, xp)| Ok((resolve(x)?, resolve(xp)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(EmpiricalProfile {
            pairs: Arc::new(resolved),
        })
    }

    pub fn pairs(&self) -> &[(DiscreteMeasure, DiscreteMeasure)] {
        &self.pairs
    }

    pub fn evaluate(&self, eps: f64) -> f64 {
        let alpha = eps.exp();
        self.pairs
            .iter()
            .map(|(mu, nu)| hockey_stick_unchecked(mu, nu, alpha))
            .fold(0.0, f64::max)
    }
}

/// A privacy profile of a concrete mechanism family.
#[derive(Debug, Clone, PartialEq)]
pub enum PrivacyProfile {
    /// Laplace output perturbation with `θ = Δ/b`.
    Laplace { theta: f64 },
    /// Gaussian output perturbation with `θ = Δ/σ`.
    Gaussian { theta: f64 },
    /// Randomized response keeping the bit with probability `p`.
    RandomizedResponse { p: f64 },
    /// Knots `(ε_i, δ_i)`, strictly increasing in `ε`, non-increasing in `δ`.
    Tabulated(Arc<Vec<(f64, f64)>>),
    Empirical(EmpiricalProfile),
}

impl PrivacyProfile {
    pub fn laplace(theta: f64) -> Result<Self> {
        check_theta(theta)?;
        Ok(PrivacyProfile::Laplace { theta })
    }

    pub fn gaussian(theta: f64) -> Result<Self> {
        check_theta(theta)?;
        Ok(PrivacyProfile::Gaussian { theta })
    }

    pub fn randomized_response(p: f64) -> Result<Self> {
        if !(0.5..=1.0).contains(&p) {
            return Err(Error::POutOfRange(p));
        }
        Ok(PrivacyProfile::RandomizedResponse { p })
    }

    pub fn tabulated(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidTable("no points".into()));
        }
        for (i, &(e, d)) in points.iter().enumerate() {
            if !e.is_finite() || !d.is_finite() {
                return Err(Error::InvalidTable(format!("row {i} is not finite")));
            }
            if !(0.0..=1.0).contains(&d) {
                return Err(Error::InvalidTable(format!("row {i}: delta {d} outside [0, 1]")));
            }
            if i > 0 {
                let (pe, pd) = points[i - 1];
                if e <= pe {
                    return Err(Error::InvalidTable(format!("row {i}: epsilon not strictly increasing")));
                }
                if d > pd {
                    return Err(Error::InvalidTable(format!("row {i}: delta increases")));
                }
            }
        }
        Ok(PrivacyProfile::Tabulated(Arc::new(points)))
    }

    /// Sup over `pairs` of `D_{e^ε}(M(x) ‖ M(x'))`.
    pub fn empirical<K: Kernel + ?Sized>(kernel: &K, pairs: &[(Outcome, Outcome)]) -> Result<Self> {
        Ok(PrivacyProfile::Empirical(EmpiricalProfile::new(kernel, pairs)?))
    }

    pub fn family(&self) -> &'static str {
        match self {
            PrivacyProfile::Laplace { .. } => "laplace",
            PrivacyProfile::Gaussian { .. } => "gaussian",
            PrivacyProfile::RandomizedResponse { .. } => "randomized-response",
            PrivacyProfile::Tabulated(_) => "tabulated",
            PrivacyProfile::Empirical(_) => "empirical",
        }
    }

    /// Whether the value at `eps` is the exact divergence rather than the
    /// conservative extension used below the first tabulated knot.
    pub fn is_exact_at(&self, eps: f64) -> bool {
        match self {
            PrivacyProfile::Tabulated(points) => eps >= points[0].0,
            _ => true,
        }
    }

    /// `true` for every family except tabulated profiles, which are only known
    /// from their first knot onward.
    pub fn supports_negative_eps(&self) -> bool {
        !matches!(self, PrivacyProfile::Tabulated(_))
    }

    /// `δ(ε)`, clamped to `[0, 1]`. Negative `ε` (i.e. `α < 1`) is allowed.
    pub fn evaluate(&self, eps: f64) -> f64 {
        let raw = match self {
            PrivacyProfile::Laplace { theta } => laplace_delta(*theta, eps),
            PrivacyProfile::Gaussian { theta } => gaussian_delta(*theta, eps),
            PrivacyProfile::RandomizedResponse { p } => rr_delta(*p, eps),
            PrivacyProfile::Tabulated(points) => tabulated_delta(points, eps),
            PrivacyProfile::Empirical(e) => e.evaluate(eps),
        };
        raw.clamp(0.0, 1.0)
    }

    /// Serialises a tabulated profile as `epsilon,delta` CSV.
    pub fn to_csv(&self) -> Result<String> {
        let PrivacyProfile::Tabulated(points) = self else {
            return Err(Error::UnsupportedFamily(self.family()));
        };
        let mut out = String::from("epsilon,delta\n");
        for &(e, d) in points.iter() {
            let _ = writeln!(out, "{},{}", format_significant(e, 15), format_significant(d, 15));
        }
        Ok(out)
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        match lines.next().map(str::trim) {
            Some("epsilon,delta") => {}
            other => return Err(Error::Parse(format!("expected header `epsilon,delta`, got {other:?}"))),
        }
        let mut points = Vec::new();
        for (i, line) in lines.enumerate() {
            let (e, d) = line
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("row {}: expected two columns", i + 1)))?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|err| Error::Parse(format!("row {}: {err}", i + 1)))
            };
            points.push((parse(e)?, parse(d)?));
        }
        Self::tabulated(points)
    }
}

impl Curve for PrivacyProfile {
    fn delta(&self, eps: f64) -> f64 {
        self.evaluate(eps)
    }

    fn ln_delta(&self, eps: f64) -> f64 {
        match self {
            PrivacyProfile::Gaussian { theta } => gaussian_ln_delta(*theta, eps),
            _ => self.evaluate(eps).ln(),
        }
    }

    fn kinks(&self) -> Vec<f64> {
        match self {
            PrivacyProfile::Laplace { theta } => vec![-theta, *theta],
            PrivacyProfile::Gaussian { .. } => Vec::new(),
            PrivacyProfile::RandomizedResponse { p } => {
                if *p < 1.0 && *p > 0.5 {
                    let l = (p / (1.0 - p)).ln();
                    vec![-l, l]
                } else {
                    Vec::new()
                }
            }
            PrivacyProfile::Tabulated(points) => points.iter().map(|&(e, _)| e).collect(),
            PrivacyProfile::Empirical(e) => {
                let mut out = Vec::new();
                for (mu, nu) in e.pairs() {
                    for (z, m) in mu.iter() {
                        let q = nu.mass(z.as_str());
                        if q > 0.0 {
                            out.push((m / q).ln());
                        }
                    }
                }
                out
            }
        }
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if theta > 0.0 && theta.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveTheta(theta))
    }
}

fn laplace_delta(theta: f64, eps: f64) -> f64 {
    if eps >= theta {
        0.0
    } else if eps >= -theta {
        -((eps - theta) / 2.0).exp_m1()
    } else {
        // The whole line satisfies the likelihood-ratio condition: D = 1 − α.
        -eps.exp_m1()
    }
}

/// Past this point `δ = φ(a)·(M(a) − M(b))` with `M` the Mills ratio, which
/// avoids cancelling `Φ(−a)` against `e^ε·Φ(−b)`.
const GAUSSIAN_TAIL: f64 = 5.0;

fn gaussian_ln_delta(theta: f64, eps: f64) -> f64 {
    let a = eps / theta - theta / 2.0;
    if a < GAUSSIAN_TAIL {
        return gaussian_delta(theta, eps).ln();
    }
    // e^ε·φ(b) = φ(a) since b² − a² = 2ε.
    let b = a + theta;
    std_normal_ln_pdf(a) + (mills_ratio(a) - mills_ratio(b)).ln()
}

fn gaussian_delta(theta: f64, eps: f64) -> f64 {
    if eps / theta - theta / 2.0 >= GAUSSIAN_TAIL {
        return gaussian_ln_delta(theta, eps).exp();
    }
    let upper = std_normal_cdf(theta / 2.0 - eps / theta);
    let tail = std_normal_cdf(-theta / 2.0 - eps / theta);
    let scaled = if tail == 0.0 { 0.0 } else { (eps + tail.ln()).exp() };
    positive_part(upper - scaled)
}

fn rr_delta(p: f64, eps: f64) -> f64 {
    let alpha = eps.exp();
    // The second term only matters for α < 1.
    positive_part(p - alpha * (1.0 - p)) + positive_part((1.0 - p) - alpha * p)
}

/// Right-continuous step interpolation. Below the first knot `(ε0, δ0)` uses
/// `D_α ≤ D_{α0} + (α0 − α)`, valid for `α ≤ α0`.
fn tabulated_delta(points: &[(f64, f64)], eps: f64) -> f64 {
    let idx = points.partition_point(|&(e, _)| e <= eps);
    if idx == 0 {
        let (e0, d0) = points[0];
        return (d0 + e0.exp() - eps.exp()).min(1.0);
    }
    points[idx - 1].1
}

/// Parametric families with a closed-form profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Laplace,
    Gaussian,
    RandomizedResponse,
}

impl Family {
    /// `θ` for Laplace and Gaussian, `p` for randomized response.
    pub fn build(self, param: f64) -> Result<PrivacyProfile> {
        match self {
            Family::Laplace => PrivacyProfile::laplace(param),
            Family::Gaussian => PrivacyProfile::gaussian(param),
            Family::RandomizedResponse => PrivacyProfile::randomized_response(param),
        }
    }
}

/// Finds the parameter giving `δ(0) = target` by bisection; `δ(0)` increases
/// with `θ` and with `p`.
pub fn calibrate_delta0(family: Family, target: f64) -> Result<(f64, PrivacyProfile)> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::BadParams(format!("target delta(0) must lie in (0, 1), got {target}")));
    }
    let delta0 = |x: f64| family.build(x).map(|p| p.evaluate(0.0));
    let (mut lo, mut hi) = match family {
        Family::RandomizedResponse => (0.5, 1.0),
        _ => {
            let mut hi = 1.0;
            while delta0(hi)? < target {
                hi *= 2.0;
            }
            (0.0, hi)
        }
    };
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = if mid > 0.0 { delta0(mid)? } else { 0.0 };
        if v < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((hi, family.build(hi)?))
}

/// `ψ_p(ε) = [p − e^ε(1 − p)]_+`.
pub fn psi(p: f64, eps: f64) -> f64 {
    positive_part(p - eps.exp() * (1.0 - p))
}

/// How group profiles are derived from a base profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GroupMode {
    /// Generic group-privacy conversion, valid for any base profile.
    BlackBox,
    /// Sensitivity scaling `θ ↦ kθ`; Laplace and Gaussian only.
    WhiteBox,
}

impl GroupMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            GroupMode::BlackBox => "blackbox",
            GroupMode::WhiteBox => "whitebox",
        }
    }
}

/// `δ_k` derived from a base profile.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupProfile {
    base: PrivacyProfile,
    k: usize,
    mode: GroupMode,
    scaled: Option<PrivacyProfile>,
}

impl GroupProfile {
    pub fn new(base: PrivacyProfile, k: usize, mode: GroupMode) -> Result<Self> {
        if k == 0 {
            return Err(Error::BadK(k));
        }
        let scaled = match mode {
            GroupMode::WhiteBox => Some(group_whitebox(&base, k)?),
            GroupMode::BlackBox => None,
        };
        Ok(GroupProfile { base, k, mode, scaled })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn mode(&self) -> GroupMode {
        self.mode
    }

    pub fn base(&self) -> &PrivacyProfile {
        &self.base
    }

    pub fn evaluate(&self, eps: f64) -> f64 {
        if self.k == 1 {
            return self.base.evaluate(eps);
        }
        match (&self.scaled, self.mode) {
            (Some(p), _) => p.evaluate(eps),
            (None, _) if eps >= 0.0 => blackbox_value(&self.base, self.k, eps),
            // Extension below zero as for tabulated profiles, anchored at ε = 0.
            (None, _) => (blackbox_value(&self.base, self.k, 0.0) + 1.0 - eps.exp()).min(1.0),
        }
    }
}

impl Curve for GroupProfile {
    fn delta(&self, eps: f64) -> f64 {
        self.evaluate(eps)
    }

    fn ln_delta(&self, eps: f64) -> f64 {
        match &self.scaled {
            Some(p) => p.ln_delta(eps),
            None => self.evaluate(eps).ln(),
        }
    }

    fn kinks(&self) -> Vec<f64> {
        match &self.scaled {
            Some(p) => p.kinks(),
            None => self.base.kinks().into_iter().map(|e| e * self.k as f64).collect(),
        }
    }
}

fn blackbox_value(base: &PrivacyProfile, k: usize, eps: f64) -> f64 {
    let kf = k as f64;
    if eps == 0.0 {
        return (kf * base.evaluate(0.0)).min(1.0);
    }
    let inner = base.evaluate(eps / kf);
    if inner == 0.0 {
        return 0.0;
    }
    let factor = (ln_expm1(eps) - ln_expm1(eps / kf)).exp();
    (factor * inner).min(1.0)
}

/// Black-box group bound `(e^ε − 1)·δ(ε/k)/(e^{ε/k} − 1)`, with limit `k·δ(0)` at `ε = 0`.
pub fn group_blackbox(base: &PrivacyProfile, k: usize, eps: f64) -> Result<f64> {
    if k == 0 {
        return Err(Error::BadK(k));
    }
    if eps < 0.0 {
        return Err(Error::NegativeEpsilon(eps));
    }
    if k == 1 {
        return Ok(base.evaluate(eps));
    }
    Ok(blackbox_value(base, k, eps))
}

/// White-box group profile: the same family with `θ` replaced by `kθ`.
pub fn group_whitebox(base: &PrivacyProfile, k: usize) -> Result<PrivacyProfile> {
    if k == 0 {
        return Err(Error::BadK(k));
    }
    let kf = k as f64;
    match base {
        PrivacyProfile::Laplace { theta } => PrivacyProfile::laplace(kf * theta),
        PrivacyProfile::Gaussian { theta } => PrivacyProfile::gaussian(kf * theta),
        other => Err(Error::UnsupportedFamily(other.family())),
    }
}

/// Sup over `pairs` of `D_{e^ε}(M(x) ‖ M(x'))` for a single `ε`.
pub fn empirical_profile<K: Kernel + ?Sized>(kernel: &K, pairs: &[(Outcome, Outcome)], eps: f64) -> Result<f64> {
    Ok(EmpiricalProfile::new(kernel, pairs)?.evaluate(eps))
}

/// Kernel backed by a closure; handy for quick empirical profiles.
pub struct FnKernel<F>(pub F);

impl<F: Fn(&Outcome) -> Option<DiscreteMeasure>> Kernel for FnKernel<F> {
    fn output(&self, input: &Outcome) -> Option<Cow<'_, DiscreteMeasure>> {
        (self.0)(input).map(Cow::Owned)
    }
}
