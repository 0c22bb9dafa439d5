use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use privamp::profiles::calibrate_delta0;
use privamp::PrivacyProfile;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use super::{eps_grid, Mech};
use crate::config::{emit, resolve, Meta};
use crate::error::{config_error, CliError};
use crate::table::{Cell, Table};

pub const DEFAULT_EPS: &str = "0:3:31";

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProfileArgs {
    /// Mechanisms, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub mech: Vec<Mech>,
    /// Noise parameter for laplace (scale) and gaussian (1/σ).
    #[arg(long)]
    pub theta: Option<f64>,
    /// Truth probability for randomized response.
    #[arg(long)]
    pub p: Option<f64>,
    /// ε grid: start:stop:count or a comma list (`ln2` allowed).
    #[arg(long)]
    pub eps: Option<String>,
    /// Geometric spacing for start:stop:count grids.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub log: Option<bool>,
    /// Pick θ and p so every curve has this δ at ε = 0.
    #[arg(long)]
    pub calibrate_delta0: Option<f64>,
    /// Output CSV path; stdout when absent. A `.meta.json` sidecar is written next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON config file; flags given on the command line win.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

pub fn run(args: &ProfileArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let cfg = resolve(args, args.config.as_deref())?;
    let (table, calibrated) = build(&cfg)?;
    let mut meta = Meta::new("profile", &cfg);
    if !calibrated.is_empty() {
        meta = meta.derived("calibrated", Value::Object(calibrated));
    }
    emit(cfg.out.as_deref(), &table.render(), &meta, stdout)
}

pub fn build(cfg: &ProfileArgs) -> Result<(Table, Map<String, Value>), CliError> {
    if cfg.mech.is_empty() {
        return Err(config_error("--mech", "at least one mechanism is required"));
    }
    let grid = eps_grid("--eps", cfg.eps.as_deref(), DEFAULT_EPS, cfg.log.unwrap_or(false))?;
    let mut calibrated = Map::new();
    let mut profiles = Vec::new();
    for &mech in &cfg.mech {
        let profile = match cfg.calibrate_delta0 {
            Some(target) => {
                let (param, profile) = calibrate(mech, target)?;
                let key = if mech == Mech::Rr { "p" } else { "theta" };
                calibrated.insert(mech.name().into(), json!({ key: param }));
                profile
            }
            None => mech.profile(cfg.theta, cfg.p)?,
        };
        profiles.push((mech, profile));
    }
    let header: Vec<String> = if profiles.len() == 1 {
        vec!["epsilon".into(), "delta".into()]
    } else {
        std::iter::once("epsilon".to_string())
            .chain(profiles.iter().map(|(m, _)| format!("delta_{}", m.name())))
            .collect()
    };
    let mut table = Table::new(header);
    for &eps in &grid {
        let mut row = vec![Cell::Num(eps)];
        row.extend(profiles.iter().map(|(_, p)| Cell::Num(p.evaluate(eps))));
        table.push(row);
    }
    Ok((table, calibrated))
}

/// Parameter giving `δ(0) = target`.
pub fn calibrate(mech: Mech, target: f64) -> Result<(f64, PrivacyProfile), CliError> {
    calibrate_delta0(mech.family(), target).map_err(|e| CliError::from(e).context("--calibrate-delta0"))
}
