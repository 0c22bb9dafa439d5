//! The four plot-data bundles: calibrated base profiles, WOR vs WR, the
//! group-privacy effect under WR, and white-box vs black-box group privacy.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::Args;
use privamp::amplification::{Amplifier, NeighborRelation, SubsamplingScheme};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::amplify::{amplified_table, CurveSpec, GroupArg};
use super::profile::{self, ProfileArgs};
use super::{eps_grid, Mech};
use crate::config::{resolve, write_with_meta, Meta};
use crate::error::{config_error, CliError};

pub const BUNDLES: [&str; 4] = ["profiles", "wor_vs_wr", "wr_group_effect", "group_modes"];

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FiguresArgs {
    /// Directory receiving one sub-directory per bundle.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Common δ(0) for the calibrated profile curves.
    #[arg(long)]
    pub delta0: Option<f64>,
    /// Base θ for the Laplace amplification curves.
    #[arg(long)]
    pub laplace_theta: Option<f64>,
    /// Base θ for the Gaussian amplification curves.
    #[arg(long)]
    pub gaussian_theta: Option<f64>,
    /// Dataset size for the amplification curves.
    #[arg(long)]
    pub n: Option<usize>,
    /// Subsample sizes, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub m: Vec<usize>,
    /// ε grid for all bundles.
    #[arg(long)]
    pub eps: Option<String>,
    /// Geometric spacing for start:stop:count grids.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub log: Option<bool>,
    /// JSON config file; flags given on the command line win.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

/// Effective parameters with defaults filled in.
#[derive(Debug, Clone, Serialize)]
pub struct FigureParams {
    pub delta0: f64,
    pub laplace_theta: f64,
    pub gaussian_theta: f64,
    pub n: usize,
    pub m: Vec<usize>,
    pub eps: String,
    pub log: bool,
}

impl FigureParams {
    pub fn from_args(a: &FiguresArgs) -> Self {
        FigureParams {
            delta0: a.delta0.unwrap_or(0.25),
            laplace_theta: a.laplace_theta.unwrap_or(2.0),
            gaussian_theta: a.gaussian_theta.unwrap_or(1.0),
            n: a.n.unwrap_or(100),
            m: if a.m.is_empty() { vec![5, 10, 20] } else { a.m.clone() },
            eps: a.eps.clone().unwrap_or_else(|| "0:3:121".into()),
            log: a.log.unwrap_or(false),
        }
    }
}

pub fn run(args: &FiguresArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let cfg = resolve(args, args.config.as_deref())?;
    let dir = cfg.out_dir.clone().ok_or_else(|| config_error("--out-dir", "required"))?;
    let params = FigureParams::from_args(&cfg);
    let files = write_bundles(&dir, &params)?;
    for f in files {
        writeln!(stdout, "{}", f.display()).map_err(|e| config_error("stdout", e))?;
    }
    Ok(())
}

/// Writes every bundle below `dir` and returns the CSV paths in write order.
pub fn write_bundles(dir: &Path, params: &FigureParams) -> Result<Vec<PathBuf>, CliError> {
    let grid = eps_grid("--eps", Some(&params.eps), "", params.log)?;
    let mut written = Vec::new();

    let profile_cfg = ProfileArgs {
        mech: vec![Mech::Laplace, Mech::Gaussian, Mech::Rr],
        eps: Some(params.eps.clone()),
        log: Some(params.log),
        calibrate_delta0: Some(params.delta0),
        ..ProfileArgs::default()
    };
    let (table, calibrated) = profile::build(&profile_cfg)?;
    let path = dir.join("profiles").join("profiles.csv");
    let meta = Meta::new("figures profiles", params).derived("calibrated", Value::Object(calibrated));
    write_with_meta(&path, &table.render(), &meta)?;
    written.push(path);

    for (mech, theta) in [(Mech::Laplace, params.laplace_theta), (Mech::Gaussian, params.gaussian_theta)] {
        let base = mech.profile(Some(theta), None)?;
        let n = params.n;
        let mut bundles: Vec<(&str, Vec<CurveSpec>)> = vec![
            ("wor_vs_wr", Vec::new()),
            ("wr_group_effect", Vec::new()),
            ("group_modes", Vec::new()),
        ];
        for &m in &params.m {
            let wor = Amplifier::new(SubsamplingScheme::Wor { n, m }, NeighborRelation::Substitute, Some(n))?;
            let wr = Amplifier::new(SubsamplingScheme::Wr { n, m }, NeighborRelation::Substitute, Some(n))?;
            let curve = |tag: String, amplifier: Amplifier, g: GroupArg| CurveSpec {
                tag,
                amplifier,
                groups: g.profiles(base.clone()),
            };
            bundles[0].1.push(curve(format!("wor-m{m}"), wor, GroupArg::BaseOnly));
            bundles[0].1.push(curve(format!("wr-m{m}"), wr, GroupArg::Whitebox));
            bundles[1].1.push(curve(format!("wr-m{m}-whitebox"), wr, GroupArg::Whitebox));
            bundles[1].1.push(curve(format!("wr-m{m}-base-only"), wr, GroupArg::BaseOnly));
            bundles[2].1.push(curve(format!("wr-m{m}-whitebox"), wr, GroupArg::Whitebox));
            bundles[2].1.push(curve(format!("wr-m{m}-blackbox"), wr, GroupArg::Blackbox));
        }
        for (bundle, curves) in bundles {
            let table = amplified_table(&curves, &grid, true)?;
            let path = dir.join(bundle).join(format!("{}.csv", mech.name()));
            let mut derived = Map::new();
            derived.insert("mech".into(), mech.name().into());
            derived.insert("theta".into(), theta.into());
            let command = format!("figures {bundle}");
            let meta = Meta::new(&command, params).derived("base", Value::Object(derived));
            write_with_meta(&path, &table.render(), &meta)?;
            written.push(path);
        }
    }
    written.sort();
    Ok(written)
}
