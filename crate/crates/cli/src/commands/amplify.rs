use std::io::Write;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use privamp::amplification::{Amplifier, GroupProfiles, NeighborRelation, SubsamplingScheme};
use privamp::{GroupMode, PrivacyProfile};
use serde::{Deserialize, Serialize};

use super::{eps_grid, running_min, Mech};
use crate::config::{emit, resolve, Meta};
use crate::error::{config_error, CliError};
use crate::table::{Cell, Table};

pub const DEFAULT_EPS: &str = "0:3:31";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeKind {
    Poisson,
    Wor,
    Wr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RelationArg {
    RemoveAdd,
    Substitute,
}

impl From<RelationArg> for NeighborRelation {
    fn from(r: RelationArg) -> Self {
        match r {
            RelationArg::RemoveAdd => NeighborRelation::RemoveAdd,
            RelationArg::Substitute => NeighborRelation::Substitute,
        }
    }
}

/// How `δ_k` is obtained for the with-replacement bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GroupArg {
    Whitebox,
    Blackbox,
    /// `δ_k = δ_1` for every k, i.e. ignoring the group-privacy effect.
    BaseOnly,
}

impl GroupArg {
    pub fn name(self) -> &'static str {
        match self {
            GroupArg::Whitebox => "whitebox",
            GroupArg::Blackbox => "blackbox",
            GroupArg::BaseOnly => "base-only",
        }
    }

    pub fn profiles(self, base: PrivacyProfile) -> GroupProfiles {
        match self {
            GroupArg::Whitebox => GroupProfiles::Derived {
                base,
                mode: GroupMode::WhiteBox,
            },
            GroupArg::Blackbox => GroupProfiles::Derived {
                base,
                mode: GroupMode::BlackBox,
            },
            GroupArg::BaseOnly => GroupProfiles::Constant(base),
        }
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AmplifyArgs {
    /// Subsampling schemes, comma separated; several give one column group each.
    #[arg(long, value_delimiter = ',')]
    pub scheme: Vec<SchemeKind>,
    /// Poisson sampling rate.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Dataset size.
    #[arg(long)]
    pub n: Option<usize>,
    /// Subsample sizes, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub m: Vec<usize>,
    /// Neighbouring relation; defaults to remove-add for poisson and substitute otherwise.
    #[arg(long)]
    pub relation: Option<RelationArg>,
    /// Base mechanism.
    #[arg(long)]
    pub mech: Option<Mech>,
    /// Noise parameter for laplace (scale) and gaussian (1/σ).
    #[arg(long)]
    pub theta: Option<f64>,
    /// Truth probability for randomized response.
    #[arg(long)]
    pub p: Option<f64>,
    /// Group-privacy modes for with-replacement, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub group: Vec<GroupArg>,
    /// ε grid: start:stop:count or a comma list (`ln2` allowed).
    #[arg(long)]
    pub eps: Option<String>,
    /// Geometric spacing for start:stop:count grids.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub log: Option<bool>,
    /// Output CSV path; stdout when absent. A `.meta.json` sidecar is written next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON config file; flags given on the command line win.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

/// One amplified curve.
#[derive(Debug, Clone)]
pub struct CurveSpec {
    pub tag: String,
    pub amplifier: Amplifier,
    pub groups: GroupProfiles,
}

pub fn run(args: &AmplifyArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let cfg = resolve(args, args.config.as_deref())?;
    let table = build(&cfg)?;
    emit(cfg.out.as_deref(), &table.render(), &Meta::new("amplify", &cfg), stdout)
}

pub fn build(cfg: &AmplifyArgs) -> Result<Table, CliError> {
    let grid = eps_grid("--eps", cfg.eps.as_deref(), DEFAULT_EPS, cfg.log.unwrap_or(false))?;
    let curves = curves(cfg)?;
    amplified_table(&curves, &grid, false)
}

fn natural_relation(kind: SchemeKind) -> NeighborRelation {
    match kind {
        SchemeKind::Poisson => NeighborRelation::RemoveAdd,
        SchemeKind::Wor | SchemeKind::Wr => NeighborRelation::Substitute,
    }
}

pub fn curves(cfg: &AmplifyArgs) -> Result<Vec<CurveSpec>, CliError> {
    if cfg.scheme.is_empty() {
        return Err(config_error("--scheme", "at least one scheme is required"));
    }
    let mech = cfg.mech.ok_or_else(|| config_error("--mech", "required"))?;
    let base = mech.profile(cfg.theta, cfg.p)?;
    let mut out = Vec::new();
    for &kind in &cfg.scheme {
        let relation = cfg.relation.map(NeighborRelation::from).unwrap_or(natural_relation(kind));
        match kind {
            SchemeKind::Poisson => {
                let gamma = cfg.gamma.ok_or_else(|| config_error("--gamma", "required for poisson"))?;
                let scheme = SubsamplingScheme::Poisson { gamma };
                scheme.validate().map_err(|e| CliError::from(e).context("--gamma"))?;
                let amplifier = Amplifier::new(scheme, relation, cfg.n)?;
                out.push(CurveSpec {
                    tag: amplifier.name().to_string(),
                    amplifier,
                    groups: GroupArg::BaseOnly.profiles(base.clone()),
                });
            }
            SchemeKind::Wor | SchemeKind::Wr => {
                let n = cfg.n.ok_or_else(|| config_error("--n", format!("required for {}", kind_name(kind))))?;
                if cfg.m.is_empty() {
                    return Err(config_error("--m", format!("required for {}", kind_name(kind))));
                }
                for &m in &cfg.m {
                    let scheme = if kind == SchemeKind::Wor {
                        SubsamplingScheme::Wor { n, m }
                    } else {
                        SubsamplingScheme::Wr { n, m }
                    };
                    scheme.validate().map_err(|e| CliError::from(e).context("--n/--m"))?;
                    let amplifier = Amplifier::new(scheme, relation, Some(n))?;
                    let suffix = if cfg.m.len() > 1 { format!("-m{m}") } else { String::new() };
                    if kind == SchemeKind::Wor {
                        out.push(CurveSpec {
                            tag: format!("{}{suffix}", amplifier.name()),
                            amplifier,
                            groups: GroupArg::BaseOnly.profiles(base.clone()),
                        });
                        continue;
                    }
                    let modes = if cfg.group.is_empty() {
                        vec![default_group(mech)]
                    } else {
                        cfg.group.clone()
                    };
                    for g in &modes {
                        let mode_suffix = if modes.len() > 1 { format!("-{}", g.name()) } else { String::new() };
                        let groups = g.profiles(base.clone());
                        groups.check_up_to(m).map_err(|e| CliError::from(e).context("--group"))?;
                        out.push(CurveSpec {
                            tag: format!("{}{suffix}{mode_suffix}", amplifier.name()),
                            amplifier,
                            groups,
                        });
                    }
                }
            }
        }
    }
    Ok(out)
}

fn kind_name(kind: SchemeKind) -> &'static str {
    match kind {
        SchemeKind::Poisson => "poisson",
        SchemeKind::Wor => "wor",
        SchemeKind::Wr => "wr",
    }
}

/// White-box group profiles exist in closed form for Laplace and Gaussian only.
fn default_group(mech: Mech) -> GroupArg {
    match mech {
        Mech::Laplace | Mech::Gaussian => GroupArg::Whitebox,
        Mech::Rr => GroupArg::Blackbox,
    }
}

/// `eps_in` followed by `eps_out,delta_out` per curve (prefixed by the tag when
/// there are several), optionally with the base profile at each `eps_out`.
pub fn amplified_table(curves: &[CurveSpec], grid: &[f64], with_base: bool) -> Result<Table, CliError> {
    let single = curves.len() == 1;
    let mut header = vec!["eps_in".to_string()];
    let mut columns: Vec<Vec<f64>> = Vec::new();
    for c in curves {
        let prefix = if single { String::new() } else { format!("{}_", c.tag) };
        header.push(format!("{prefix}eps_out"));
        header.push(format!("{prefix}delta_out"));
        if with_base {
            header.push(format!("{prefix}base_delta"));
        }
        let mut eps_out = Vec::with_capacity(grid.len());
        let mut delta_out = Vec::with_capacity(grid.len());
        for &eps in grid {
            let b = c.amplifier.bound(&c.groups, eps)?;
            eps_out.push(b.eps_out);
            delta_out.push(b.delta_out);
        }
        running_min(&mut delta_out);
        if with_base {
            let base = c.groups.base()?;
            let base_delta: Vec<f64> = eps_out.iter().map(|&e| base.evaluate(e)).collect();
            columns.extend([eps_out, delta_out, base_delta]);
        } else {
            columns.extend([eps_out, delta_out]);
        }
    }
    let mut table = Table::new(header);
    for (i, &eps) in grid.iter().enumerate() {
        let mut row = vec![Cell::Num(eps)];
        row.extend(columns.iter().map(|col| Cell::Num(col[i])));
        table.push(row);
    }
    Ok(table)
}
