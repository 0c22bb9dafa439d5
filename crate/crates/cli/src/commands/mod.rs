pub mod amplify;
pub mod figures;
pub mod mgf;
pub mod profile;
pub mod verify;

use clap::ValueEnum;
use privamp::profiles::Family;
use privamp::PrivacyProfile;
use serde::{Deserialize, Serialize};

use crate::error::{config_error, CliError};
use crate::grid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mech {
    Laplace,
    Gaussian,
    Rr,
}

impl Mech {
    pub fn name(self) -> &'static str {
        match self {
            Mech::Laplace => "laplace",
            Mech::Gaussian => "gaussian",
            Mech::Rr => "rr",
        }
    }

    pub fn family(self) -> Family {
        match self {
            Mech::Laplace => Family::Laplace,
            Mech::Gaussian => Family::Gaussian,
            Mech::Rr => Family::RandomizedResponse,
        }
    }

    /// Builds the profile from `--theta` (Laplace, Gaussian) or `--p` (RR).
    pub fn profile(self, theta: Option<f64>, p: Option<f64>) -> Result<PrivacyProfile, CliError> {
        match self {
            Mech::Laplace | Mech::Gaussian => {
                let theta = theta.ok_or_else(|| config_error("--theta", format!("required for {}", self.name())))?;
                let built = if self == Mech::Laplace {
                    PrivacyProfile::laplace(theta)
                } else {
                    PrivacyProfile::gaussian(theta)
                };
                built.map_err(|e| CliError::from(e).context("--theta"))
            }
            Mech::Rr => {
                let p = p.ok_or_else(|| config_error("--p", "required for rr"))?;
                PrivacyProfile::randomized_response(p).map_err(|e| CliError::from(e).context("--p"))
            }
        }
    }
}

/// Parses an ε grid flag and requires it to be non-negative and strictly increasing.
pub fn eps_grid(flag: &str, spec: Option<&str>, default: &str, log: bool) -> Result<Vec<f64>, CliError> {
    let g = grid::parse_grid(spec.unwrap_or(default), log).map_err(|e| config_error(flag, e))?;
    grid::check_increasing(&g).map_err(|e| config_error(flag, e))?;
    Ok(g)
}

/// Replaces each value by the minimum of itself and everything before it.
pub fn running_min(values: &mut [f64]) {
    for i in 1..values.len() {
        if values[i] > values[i - 1] {
            values[i] = values[i - 1];
        }
    }
}
