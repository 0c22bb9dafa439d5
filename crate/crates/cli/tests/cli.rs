use std::fs;
use std::path::Path;
use std::process::Command;

use privamp::amplification::amplify_poisson_substitution;
use privamp::oracle::scenario::REPORT_HEADER;
use privamp::PrivacyProfile;
use tempfile::tempdir;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn privamp(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_privamp")).args(args).output().unwrap();
    Run {
        code: out.status.code().unwrap(),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn ok(args: &[&str]) -> String {
    let r = privamp(args);
    assert_eq!(r.code, 0, "{args:?}: {}", r.stderr);
    r.stdout
}

fn parse_csv(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(|c| c.parse().unwrap()).collect()).collect();
    (header, rows)
}

fn column(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name} in {header:?}"))
}

#[test]
fn laplace_profile_grid() {
    let (header, rows) = parse_csv(&ok(&["profile", "--mech", "laplace", "--theta", "1", "--eps", "0:3:31"]));
    assert_eq!(header, ["epsilon", "delta"]);
    assert_eq!(rows.len(), 31);
    let at_one = rows.iter().find(|r| (r[0] - 1.0).abs() < 1e-12).unwrap();
    assert_eq!(at_one[1], 0.0);
    // δ(0) = 1 − e^{−1/2}
    assert!((rows[0][1] - (1.0 - (-0.5f64).exp())).abs() < 1e-14);
}

#[test]
fn gaussian_profile_at_zero() {
    let (_, rows) = parse_csv(&ok(&["profile", "--mech", "gaussian", "--theta", "1", "--eps", "0"]));
    // 2Φ(1/2) − 1 = erf(1/(2√2))
    assert!((rows[0][1] - 0.382_924_922_548_026).abs() < 1e-12);
}

#[test]
fn calibrated_profiles_share_delta0() {
    let (header, rows) = parse_csv(&ok(&[
        "profile",
        "--calibrate-delta0",
        "0.25",
        "--mech",
        "laplace,gaussian,rr",
        "--eps",
        "0:2:5",
    ]));
    assert_eq!(header, ["epsilon", "delta_laplace", "delta_gaussian", "delta_rr"]);
    for v in &rows[0][1..] {
        assert!((v - 0.25).abs() < 1e-9);
    }
}

#[test]
fn calibration_is_recorded_in_sidecar() {
    let dir = tempdir().unwrap();
    let out = dir.path().join("p.csv");
    ok(&["profile", "--calibrate-delta0", "0.25", "--mech", "laplace", "--out", out.to_str().unwrap()]);
    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("p.csv.meta.json")).unwrap()).unwrap();
    let theta = meta["derived"]["calibrated"]["laplace"]["theta"].as_f64().unwrap();
    assert!((theta + 2.0 * 0.75f64.ln()).abs() < 1e-12);
}

#[test]
fn poisson_amplify_example() {
    let (header, rows) = parse_csv(&ok(&[
        "amplify", "--scheme", "poisson", "--gamma", "0.1", "--mech", "laplace", "--theta", "1", "--eps", "ln2",
    ]));
    assert_eq!(header, ["eps_in", "eps_out", "delta_out"]);
    let ln2 = std::f64::consts::LN_2;
    assert!((rows[0][0] - ln2).abs() < 1e-14);
    assert!((rows[0][1] - 1.1f64.ln()).abs() < 1e-14);
    let lap = 1.0 - ((ln2 - 1.0) / 2.0).exp();
    assert!((rows[0][2] - 0.1 * lap).abs() < 1e-15);
}

#[test]
fn wor_and_wr_comparison() {
    let (header, rows) = parse_csv(&ok(&[
        "amplify", "--scheme", "wor,wr", "--n", "100", "--m", "10", "--group", "whitebox", "--mech", "gaussian", "--theta",
        "1", "--eps", "0:3:31",
    ]));
    assert_eq!(header, ["eps_in", "wor_eps_out", "wor_delta_out", "wr_eps_out", "wr_delta_out"]);
    assert_eq!(rows.len(), 31);
    // η = m/n for WOR and 1 − (1 − 1/n)^m for WR.
    let eta_wr = 1.0 - 0.99f64.powi(10);
    let r = &rows[10];
    assert!((r[1] - (0.1 * r[0].exp_m1()).ln_1p()).abs() < 1e-14);
    assert!((r[3] - (eta_wr * r[0].exp_m1()).ln_1p()).abs() < 1e-14);
    for j in [2, 4] {
        assert!(rows.windows(2).all(|w| w[1][j] <= w[0][j]));
        assert!(rows.iter().all(|r| (0.0..=1.0).contains(&r[j])));
    }
}

#[test]
fn poisson_substitution_column() {
    let (header, rows) = parse_csv(&ok(&[
        "amplify", "--scheme", "poisson", "--relation", "substitute", "--n", "50", "--gamma", "0.1", "--mech", "laplace",
        "--theta", "1", "--eps", "0,0.5",
    ]));
    let j = column(&header, "delta_out");
    let base = PrivacyProfile::laplace(1.0).unwrap();
    for r in &rows {
        let b = amplify_poisson_substitution(&base, 50, 0.1, r[0]).unwrap();
        assert!((r[j] - b.delta_out).abs() < 1e-15);
    }
    let (header, _) = parse_csv(&ok(&[
        "amplify", "--scheme", "poisson,wor", "--relation", "substitute", "--n", "50", "--m", "5", "--gamma", "0.1",
        "--mech", "laplace", "--theta", "1",
    ]));
    column(&header, "poisson-substitute_delta_out");
}

#[test]
fn unsupported_pairing_exits_3() {
    let r = privamp(&[
        "amplify", "--scheme", "wor", "--relation", "remove-add", "--n", "10", "--m", "2", "--mech", "laplace", "--theta",
        "1",
    ]);
    assert_eq!(r.code, 3);
    assert!(r.stderr.contains("wor") && r.stderr.contains("remove-add"), "{}", r.stderr);
}

#[test]
fn config_errors_exit_2_and_name_the_field() {
    let r = privamp(&["profile", "--mech", "laplace", "--eps", "0:1:3"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("--theta"), "{}", r.stderr);
    let r = privamp(&["profile", "--mech", "laplace", "--theta", "1", "--eps", "1:0:3"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("--eps"), "{}", r.stderr);
    let r = privamp(&["profile", "--mech", "rr", "--p", "1.5"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("--p"), "{}", r.stderr);
    assert_eq!(privamp(&["profile", "--mech", "nope"]).code, 2);
    assert_eq!(privamp(&["bogus"]).code, 2);
}

#[test]
fn verify_suites() {
    let r = privamp(&["verify", "--suite", "tightness"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.lines().filter(|l| l.starts_with("PASS")).count() > 600);
    assert!(!r.stdout.contains("FAIL"));
    let r = privamp(&["verify", "--suite", "ajc", "--trials", "1000", "--seed", "7", "--quiet"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.contains("4200 of 4200 checks passed"), "{}", r.stdout);
    assert_eq!(privamp(&["verify", "--suite", "nonsense"]).code, 2);
    assert_eq!(privamp(&["verify"]).code, 2);
}

const GOOD: &str = r#"{
    "name": "wr-membership",
    "universe": ["a", "b", "c", "d"],
    "x": ["a", "b", "c"],
    "x_prime": ["a", "b", "d"],
    "scheme": {"kind": "wr", "n": 3, "m": 2},
    "relation": "substitute",
    "p": 0.75,
    "epsilons": [0, 0.5, 1]
}"#;

#[test]
fn verify_scenario_writes_report() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("good.json");
    fs::write(&path, GOOD).unwrap();
    let out = dir.path().join("report.csv");
    let r = privamp(&["verify", "--scenario", path.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(r.stdout.lines().filter(|l| l.starts_with("PASS wr-membership")).count(), 3);
    let report = fs::read_to_string(&out).unwrap();
    assert!(report.starts_with(&format!("{REPORT_HEADER}\n")));
    assert_eq!(report.lines().count(), 4);
    assert!(Path::new(&format!("{}.meta.json", out.display())).exists());
}

#[test]
fn malformed_scenario_exits_2() {
    let dir = tempdir().unwrap();
    let bad = r#"{
        "name": "bad",
        "universe": ["a", "b"],
        "x": ["a"],
        "x_prime": ["b"],
        "scheme": {"kind": "wor", "n": 1, "m": 1},
        "relation": "substitute",
        "kernel": {"a:1": {"z0": 0.5, "z1": 0.4}, "b:1": {"z0": 1.0}},
        "epsilons": [0]
    }"#;
    let path = dir.path().join("bad.json");
    fs::write(&path, bad).unwrap();
    let r = privamp(&["verify", "--scenario", path.to_str().unwrap()]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("not normalized"), "{}", r.stderr);
    fs::write(&path, "{ not json").unwrap();
    assert_eq!(privamp(&["verify", "--scenario", path.to_str().unwrap()]).code, 2);
}

#[test]
fn mgf_examples() {
    let (header, rows) = parse_csv(
        &ok(&["mgf", "--mech", "gaussian", "--theta", "1", "--s", "0,1"]).replace(",\n", ",nan\n"),
    );
    assert_eq!(header, ["s", "phi", "renyi_lambda", "renyi_eps"]);
    assert_eq!(rows[0][1], 1.0);
    assert!(rows[0][3].is_nan());
    assert!((rows[1][1] / std::f64::consts::E - 1.0).abs() < 1e-6);
    assert_eq!(rows[1][2], 2.0);
    let (_, rows) = parse_csv(&ok(&["mgf", "--mech", "rr", "--p", "0.75", "--s", "1"]));
    assert!((rows[0][1] - 7.0 / 3.0).abs() < 1e-8);
    let r = privamp(&["mgf", "--mech", "gaussian", "--theta", "2", "--s", "30"]);
    assert_eq!(r.code, 3, "{}", r.stderr);
}

#[test]
fn flags_override_config_and_sidecar_echoes_it() {
    let dir = tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"mech": ["laplace"], "theta": 2.0, "eps": "0:1:3"}"#).unwrap();
    let out = dir.path().join("nested/out.csv");
    ok(&["profile", "--config", cfg.to_str().unwrap(), "--theta", "1", "--out", out.to_str().unwrap()]);
    let (_, rows) = parse_csv(&fs::read_to_string(&out).unwrap());
    assert_eq!(rows.len(), 3);
    assert!((rows[0][1] - (1.0 - (-0.5f64).exp())).abs() < 1e-15);
    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("nested/out.csv.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["command"], "profile");
    assert_eq!(meta["config"]["theta"], 1.0);
    assert_eq!(meta["config"]["eps"], "0:1:3");
    fs::write(&cfg, r#"{"mech": ["laplace"], "thetta": 2.0}"#).unwrap();
    let r = privamp(&["profile", "--config", cfg.to_str().unwrap()]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("thetta"), "{}", r.stderr);
}

#[test]
fn outputs_are_byte_identical() {
    let args = [
        "amplify", "--scheme", "wr", "--n", "20", "--m", "4,8", "--group", "whitebox,blackbox", "--mech", "laplace",
        "--theta", "1", "--eps", "0.01:5:40", "--log",
    ];
    let a = ok(&args);
    assert_eq!(a, ok(&args));
    assert!(!a.contains('\r'));
    let (header, rows) = parse_csv(&a);
    assert_eq!(header.len(), 1 + 4 * 2);
    assert!((rows[0][0] - 0.01).abs() < 1e-15 && rows[39][0] == 5.0);
}

#[test]
fn figures_bundles() {
    let dir = tempdir().unwrap();
    let listing = ok(&["figures", "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(listing.lines().count(), 7);
    for bundle in ["profiles", "wor_vs_wr", "wr_group_effect", "group_modes"] {
        assert!(dir.path().join(bundle).is_dir(), "{bundle}");
    }
    let text = fs::read_to_string(dir.path().join("wor_vs_wr/laplace.csv")).unwrap();
    let (header, _) = parse_csv(&text);
    for name in ["eps_in", "wor-m10_delta_out", "wr-m10_delta_out", "wr-m10_base_delta"] {
        column(&header, name);
    }
}
