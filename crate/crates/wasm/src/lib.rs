//! Browser bindings: profile curves, amplified curves, and a WOR vs WR
//! comparison, each returned as a flat `Float64Array`.

use privamp::amplification::{Amplifier, GroupProfiles, NeighborRelation, SubsamplingScheme};
use privamp::profiles::{calibrate_delta0, Family};
use privamp::{GroupMode, PrivacyProfile};
use wasm_bindgen::prelude::*;

fn family(mech: &str) -> Result<Family, String> {
    match mech {
        "laplace" => Ok(Family::Laplace),
        "gaussian" => Ok(Family::Gaussian),
        "rr" => Ok(Family::RandomizedResponse),
        other => Err(format!("unknown mechanism {other:?}")),
    }
}

fn grid(eps_max: f64, points: usize) -> Result<Vec<f64>, String> {
    if !(eps_max > 0.0 && eps_max.is_finite()) || points < 2 {
        return Err("need eps_max > 0 and at least 2 points".into());
    }
    Ok((0..points).map(|i| eps_max * i as f64 / (points - 1) as f64).collect())
}

fn groups(base: PrivacyProfile, group: &str) -> Result<GroupProfiles, String> {
    Ok(match group {
        "whitebox" => GroupProfiles::Derived {
            base,
            mode: GroupMode::WhiteBox,
        },
        "blackbox" => GroupProfiles::Derived {
            base,
            mode: GroupMode::BlackBox,
        },
        "base-only" => GroupProfiles::Constant(base),
        other => Err(format!("unknown group mode {other:?}"))?,
    })
}

/// `[ε_0, δ_0, ε_1, δ_1, …]` for one mechanism.
pub fn profile_points(mech: &str, param: f64, eps_max: f64, points: usize) -> Result<Vec<f64>, String> {
    let profile = family(mech)?.build(param).map_err(|e| e.to_string())?;
    Ok(grid(eps_max, points)?.into_iter().flat_map(|e| [e, profile.evaluate(e)]).collect())
}

/// Parameter (`θ` or `p`) with `δ(0) = delta0`.
pub fn calibrated_param(mech: &str, delta0: f64) -> Result<f64, String> {
    calibrate_delta0(family(mech)?, delta0).map(|(p, _)| p).map_err(|e| e.to_string())
}

/// `[ε'_0, δ'_0, δ(ε'_0), …]`: the amplified curve and the base profile at the same `ε'`.
#[allow(clippy::too_many_arguments)]
pub fn amplified_points(
    mech: &str,
    param: f64,
    scheme: &str,
    gamma: f64,
    n: usize,
    m: usize,
    group: &str,
    eps_max: f64,
    points: usize,
) -> Result<Vec<f64>, String> {
    let base = family(mech)?.build(param).map_err(|e| e.to_string())?;
    let (scheme, relation) = match scheme {
        "poisson" => (SubsamplingScheme::Poisson { gamma }, NeighborRelation::RemoveAdd),
        "wor" => (SubsamplingScheme::Wor { n, m }, NeighborRelation::Substitute),
        "wr" => (SubsamplingScheme::Wr { n, m }, NeighborRelation::Substitute),
        other => return Err(format!("unknown scheme {other:?}")),
    };
    let amp = Amplifier::new(scheme, relation, Some(n)).map_err(|e| e.to_string())?;
    let groups = groups(base.clone(), group)?;
    let mut out = Vec::with_capacity(3 * points);
    let mut running = f64::INFINITY;
    for eps in grid(eps_max, points)? {
        let b = amp.bound(&groups, eps).map_err(|e| e.to_string())?;
        running = running.min(b.delta_out);
        out.extend([b.eps_out, running, base.evaluate(b.eps_out)]);
    }
    Ok(out)
}

#[wasm_bindgen]
pub fn profile_curve(mech: &str, param: f64, eps_max: f64, points: usize) -> Result<Vec<f64>, JsError> {
    profile_points(mech, param, eps_max, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn calibrate(mech: &str, delta0: f64) -> Result<f64, JsError> {
    calibrated_param(mech, delta0).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn amplified_curve(
    mech: &str,
    param: f64,
    scheme: &str,
    gamma: f64,
    n: usize,
    m: usize,
    group: &str,
    eps_max: f64,
    points: usize,
) -> Result<Vec<f64>, JsError> {
    amplified_points(mech, param, scheme, gamma, n, m, group, eps_max, points).map_err(|e| JsError::new(&e))
}
