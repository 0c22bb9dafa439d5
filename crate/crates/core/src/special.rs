//! Standard normal distribution function.

use std::f64::consts::FRAC_1_SQRT_2;

/// `Φ(t) = ½·erfc(−t/√2)`.
///
/// `erfc` keeps full relative precision in the lower tail, so `Φ(−t)` for large
/// `t` is accurate to a few ulps rather than cancelling against 1.
pub fn std_normal_cdf(t: f64) -> f64 {
    0.5 * libm::erfc(-t * FRAC_1_SQRT_2)
}

/// `1 − Φ(t)` without cancellation.
pub fn std_normal_sf(t: f64) -> f64 {
    std_normal_cdf(-t)
}

/// Standard normal density.
pub fn std_normal_pdf(t: f64) -> f64 {
    (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// `ln φ(t)`.
pub fn std_normal_ln_pdf(t: f64) -> f64 {
    -0.5 * t * t - 0.5 * (2.0 * std::f64::consts::PI).ln()
}

/// Mills ratio `Φ(−x)/φ(x)` for `x ≥ 0`, accurate where both factors underflow.
pub fn mills_ratio(x: f64) -> f64 {
    if x < 26.0 {
        return std_normal_sf(x) / std_normal_pdf(x);
    }
    // 1/(x + 1/(x + 2/(x + 3/(x + ...)))), evaluated from the bottom.
    let mut tail = x;
    for k in (1..=60).rev() {
        tail = x + k as f64 / tail;
    }
    1.0 / tail
}
