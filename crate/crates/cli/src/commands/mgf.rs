use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use privamp::mgf::{mgf_symmetric, renyi_epsilon};
use privamp::quadrature::QuadratureSpec;
use serde::{Deserialize, Serialize};

use super::Mech;
use crate::config::{emit, resolve, Meta};
use crate::error::{config_error, CliError};
use crate::grid::parse_grid;
use crate::table::{Cell, Table};

pub const DEFAULT_S: &str = "0,0.5,1,2,5";

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MgfArgs {
    /// Base mechanism.
    #[arg(long)]
    pub mech: Option<Mech>,
    /// Noise parameter for laplace (scale) and gaussian (1/σ).
    #[arg(long)]
    pub theta: Option<f64>,
    /// Truth probability for randomized response.
    #[arg(long)]
    pub p: Option<f64>,
    /// Orders s: start:stop:count or a comma list.
    #[arg(long)]
    pub s: Option<String>,
    /// Output CSV path; stdout when absent. A `.meta.json` sidecar is written next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON config file; flags given on the command line win.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

pub fn run(args: &MgfArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let cfg = resolve(args, args.config.as_deref())?;
    let table = build(&cfg)?;
    emit(cfg.out.as_deref(), &table.render(), &Meta::new("mgf", &cfg), stdout)
}

/// `s,phi,renyi_lambda,renyi_eps` with `λ = s + 1`; the Rényi cell is empty at `s = 0`.
pub fn build(cfg: &MgfArgs) -> Result<Table, CliError> {
    let mech = cfg.mech.ok_or_else(|| config_error("--mech", "required"))?;
    let profile = mech.profile(cfg.theta, cfg.p)?;
    let orders = parse_grid(cfg.s.as_deref().unwrap_or(DEFAULT_S), false).map_err(|e| config_error("--s", e))?;
    if let Some(bad) = orders.iter().find(|&&s| s < 0.0) {
        return Err(config_error("--s", format!("orders must be non-negative, got {bad}")));
    }
    let quad = QuadratureSpec::default();
    let mut table = Table::new(["s", "phi", "renyi_lambda", "renyi_eps"]);
    for &s in &orders {
        let phi = mgf_symmetric(&profile, s, &quad)?;
        let lambda = s + 1.0;
        let renyi = if s > 0.0 {
            Cell::Num(renyi_epsilon(phi, lambda)?)
        } else {
            Cell::Empty
        };
        table.push(vec![Cell::Num(s), Cell::Num(phi), Cell::Num(lambda), renyi]);
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn phi(t: &Table, row: usize) -> f64 {
        match t.rows[row][1] {
            Cell::Num(v) => v,
            _ => panic!(),
        }
    }

    #[test]
    fn gaussian_and_rr() {
        let cfg = MgfArgs {
            mech: Some(Mech::Gaussian),
            theta: Some(1.0),
            s: Some("0,1".into()),
            ..MgfArgs::default()
        };
        let t = build(&cfg).unwrap();
        assert_eq!(phi(&t, 0), 1.0);
        assert_eq!(t.rows[0][3], Cell::Empty);
        assert!((phi(&t, 1) / std::f64::consts::E - 1.0).abs() < 1e-6);
        let cfg = MgfArgs {
            mech: Some(Mech::Rr),
            p: Some(0.75),
            s: Some("1".into()),
            ..MgfArgs::default()
        };
        // 0.75·3 + 0.25/3
        assert!((phi(&build(&cfg).unwrap(), 0) - 7.0 / 3.0).abs() < 1e-8);
    }
}
