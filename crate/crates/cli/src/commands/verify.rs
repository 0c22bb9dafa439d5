use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use privamp::numeric::format_significant;
use privamp::oracle::scenario::{load_scenarios, report_csv};
use privamp::verify::{run_suite, Check, Suite, SuiteOptions};
use serde::{Deserialize, Serialize};

use crate::config::{resolve, write_with_meta, Meta};
use crate::error::{config_error, CliError};
use crate::table::{Cell, Table};

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyArgs {
    /// Built-in suite: tightness, ajc, dominance, coupling, poisson-substitute or all.
    #[arg(long)]
    pub suite: Option<String>,
    /// Random trials for the randomized suites.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Seed for the randomized suites.
    #[arg(long)]
    pub seed: Option<u64>,
    /// JSON scenario file (one scenario or an array).
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Print only failing checks and the summary.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub quiet: Option<bool>,
    /// CSV report path.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON config file; flags given on the command line win.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

pub fn run(args: &VerifyArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let cfg = resolve(args, args.config.as_deref())?;
    let quiet = cfg.quiet.unwrap_or(false);
    let (csv, failed, total) = match (&cfg.suite, &cfg.scenario) {
        (Some(_), Some(_)) => return Err(config_error("--suite", "cannot be combined with --scenario")),
        (None, None) => return Err(config_error("--suite", "either --suite or --scenario is required")),
        (Some(name), None) => run_suites(name, &cfg, quiet, stdout)?,
        (None, Some(path)) => run_scenarios(path, quiet, stdout)?,
    };
    writeln!(stdout, "{} of {total} checks passed", total - failed).map_err(io)?;
    if let Some(path) = &cfg.out {
        write_with_meta(path, &csv, &Meta::new("verify", &cfg))?;
    }
    if failed > 0 {
        return Err(CliError::Failed(format!("{failed} of {total} checks failed")));
    }
    Ok(())
}

fn io(e: std::io::Error) -> CliError {
    config_error("stdout", e)
}

fn line(status: bool, head: &str, reference: f64, candidate: f64, gap: f64, names: [&str; 2]) -> String {
    let f = |v: f64| format_significant(v, 15);
    format!(
        "{} {head} {}={} {}={} gap={}",
        if status { "PASS" } else { "FAIL" },
        names[0],
        f(reference),
        names[1],
        f(candidate),
        f(gap)
    )
}

fn run_suites(name: &str, cfg: &VerifyArgs, quiet: bool, stdout: &mut dyn Write) -> Result<(String, usize, usize), CliError> {
    let suites: Vec<Suite> = if name == "all" {
        Suite::ALL.to_vec()
    } else {
        vec![name.parse().map_err(|e| config_error("--suite", e))?]
    };
    let opts = SuiteOptions {
        trials: cfg.trials,
        seed: cfg.seed.unwrap_or(SuiteOptions::default().seed),
    };
    let mut table = Table::new(["suite", "check", "reference", "candidate", "gap", "pass"]);
    let (mut failed, mut total) = (0, 0);
    for suite in suites {
        let report = run_suite(suite, &opts)?;
        for Check {
            label,
            reference,
            candidate,
            gap,
            pass,
        } in &report.checks
        {
            total += 1;
            if !pass {
                failed += 1;
            }
            if !quiet || !pass {
                let head = format!("{suite} {label}");
                writeln!(stdout, "{}", line(*pass, &head, *reference, *candidate, *gap, ["reference", "candidate"]))
                    .map_err(io)?;
            }
            table.push(vec![
                Cell::Text(suite.name().into()),
                Cell::Text(label.clone()),
                Cell::Num(*reference),
                Cell::Num(*candidate),
                Cell::Num(*gap),
                Cell::Text(pass.to_string()),
            ]);
        }
    }
    Ok((table.render(), failed, total))
}

fn run_scenarios(path: &std::path::Path, quiet: bool, stdout: &mut dyn Write) -> Result<(String, usize, usize), CliError> {
    let what = format!("--scenario {}", path.display());
    let text = fs::read_to_string(path).map_err(|e| config_error(&what, e))?;
    // Every validation failure of a scenario file is a configuration error.
    let scenarios = load_scenarios(&text).map_err(|e| config_error(&what, e))?;
    let mut results = Vec::new();
    for s in &scenarios {
        let rows = s.run().map_err(|e| CliError::from(e).context(&format!("scenario {}", s.name)))?;
        results.push((s.name.as_str(), rows));
    }
    let (mut failed, mut total) = (0, 0);
    for (name, rows) in &results {
        for r in rows {
            total += 1;
            let pass = r.gap >= -privamp::verify::DOMINANCE_TOLERANCE;
            if !pass {
                failed += 1;
            }
            if !quiet || !pass {
                let head = format!("{name} {} eps={}", r.amplifier, format_significant(r.eps, 15));
                writeln!(stdout, "{}", line(pass, &head, r.exact, r.bound, r.gap, ["exact", "bound"])).map_err(io)?;
            }
        }
    }
    let csv = report_csv(results.iter().flat_map(|(name, rows)| rows.iter().map(move |r| (*name, r))));
    Ok((csv, failed, total))
}
