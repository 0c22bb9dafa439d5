//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Every criterion recomputes its reference values independently of the code
//! under test where that is possible: adaptive Simpson quadrature for the
//! noise profiles, naive hockey-stick sums over arrays, closed-form
//! distance-class sums, and byte comparison of two CLI runs.

use std::collections::BTreeMap;
use std::f64::consts::LN_2;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use privamp::amplification::{NeighborRelation, SubsamplingScheme};
use privamp::divergence::{advanced_joint_convexity, hockey_stick};
use privamp::mgf::{loss_distribution, mgf_symmetric, profile_from_loss};
use privamp::oracle::{coupling_check, is_distance_compatible, subsample_decomposition, verify_tightness};
use privamp::profiles::group_blackbox;
use privamp::quadrature::QuadratureSpec;
use privamp::verify::{poisson_substitute_suite, dominance_suite, standard_instance};
use privamp::{DiscreteMeasure, GroupMode, GroupProfile, PrivacyProfile};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 7;

type Verdict = Result<String, String>;

fn criterion(id: usize, name: &str, limit: Option<Duration>, f: impl FnOnce() -> Verdict) -> bool {
    let start = Instant::now();
    let verdict = f();
    let elapsed = start.elapsed();
    let verdict = match (verdict, limit) {
        (Ok(_), Some(l)) if elapsed > l => Err(format!("took {elapsed:.2?}, limit {l:?}")),
        (v, _) => v,
    };
    let (tag, detail) = match &verdict {
        Ok(d) => ("PASS", d),
        Err(d) => ("FAIL", d),
    };
    println!("{tag} {id:>2} {name}: {detail} [{elapsed:.2?}]");
    verdict.is_ok()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn lib<T>(r: privamp::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

/// Random probability vector on `k` points; some entries are exactly zero.
fn random_probs(rng: &mut ChaCha8Rng, k: usize, zero_rate: f64) -> Vec<f64> {
    loop {
        let w: Vec<f64> = (0..k)
            .map(|_| if rng.random_bool(zero_rate) { 0.0 } else { rng.random::<f64>() + 1e-3 })
            .collect();
        let total: f64 = w.iter().sum();
        if total > 0.0 {
            return w.iter().map(|v| v / total).collect();
        }
    }
}

fn measure(probs: &[f64]) -> Result<DiscreteMeasure, String> {
    lib(DiscreteMeasure::new(probs.iter().enumerate().map(|(i, &p)| (format!("o{i}"), p))))
}

/// `Σ [a_i − α b_i]_+`.
fn naive_hockey(a: &[f64], b: &[f64], alpha: f64) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - alpha * y).max(0.0)).sum()
}

fn mix(w: f64, a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| (1.0 - w) * x + w * y).collect()
}

fn ajc() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst: f64 = 0.0;
    let mut worst_naive: f64 = 0.0;
    for _ in 0..1000 {
        let m0 = random_probs(&mut rng, 5, 0.2);
        let m1 = random_probs(&mut rng, 5, 0.2);
        let m1p = random_probs(&mut rng, 5, 0.2);
        let eta: f64 = rng.random();
        for alpha in [1.0, 2.0, std::f64::consts::E, 10.0] {
            let c = lib(advanced_joint_convexity(&measure(&m0)?, &measure(&m1)?, &measure(&m1p)?, eta, alpha))?;
            worst = worst.max(c.gap());
            let ap = 1.0 + eta * (alpha - 1.0);
            let naive = naive_hockey(&mix(eta, &m0, &m1), &mix(eta, &m0, &m1p), ap);
            worst_naive = worst_naive.max((naive - c.lhs).abs());
        }
    }
    ensure(worst <= 1e-12 && worst_naive <= 1e-12, || {
        format!("max |lhs-rhs| = {worst:e}, max |lhs-naive| = {worst_naive:e}")
    })?;
    Ok(format!("4000 cases, max |lhs-rhs| = {worst:.1e}"))
}

/// Profile of randomized response: `[p − e^ε(1−p)]_+`.
fn rr_profile(p: f64, eps: f64) -> f64 {
    (p - eps.exp() * (1.0 - p)).max(0.0)
}

fn tightness() -> Verdict {
    let mut count = 0;
    let mut worst_gap: f64 = 0.0;
    let mut worst_closed: f64 = 0.0;
    let mut check = |scheme: SubsamplingScheme, relation, eta: f64, x: &_, xp: &_| -> Result<(), String> {
        for p in [0.6, 0.75, 0.9] {
            for eps in [0.0, LN_2, 1.0] {
                let r = lib(verify_tightness(&scheme, relation, p, eps, x, xp))?;
                worst_gap = worst_gap.max(r.gap.abs());
                worst_closed = worst_closed.max((r.exact - eta * rr_profile(p, eps)).abs());
                count += 1;
            }
        }
        Ok(())
    };
    for n in 1..=8usize {
        let inst = lib(standard_instance(n))?;
        for gamma in [0.1, 0.3, 0.5] {
            check(SubsamplingScheme::Poisson { gamma }, NeighborRelation::RemoveAdd, gamma, &inst.x, &inst.removed)?;
        }
        for m in 1..=n.min(4) {
            let eta = m as f64 / n as f64;
            check(SubsamplingScheme::Wor { n, m }, NeighborRelation::Substitute, eta, &inst.x, &inst.substituted)?;
        }
        if n <= 6 {
            for m in 1..=4 {
                let eta = 1.0 - (1.0 - 1.0 / n as f64).powi(m as i32);
                check(SubsamplingScheme::Wr { n, m }, NeighborRelation::Substitute, eta, &inst.x, &inst.substituted)?;
            }
        }
    }
    ensure(worst_gap <= 1e-12 && worst_closed <= 1e-12, || {
        format!("max |bound-exact| = {worst_gap:e}, max |exact-eta*psi| = {worst_closed:e}")
    })?;
    Ok(format!("{count} cases, max |bound-exact| = {worst_gap:.1e}"))
}

fn dominance() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let checks = lib(dominance_suite(200, &mut rng))?;
    let worst = checks.iter().map(|c| c.gap).fold(f64::INFINITY, f64::min);
    let failed: Vec<_> = checks.iter().filter(|c| c.gap < -1e-10).map(|c| c.label.clone()).collect();
    ensure(failed.is_empty(), || format!("{} failures, first: {}", failed.len(), failed[0]))?;
    Ok(format!("{} bound checks, min gap = {worst:.3e}", checks.len()))
}

/// Adaptive Simpson on `[a, b]` with absolute tolerance `tol`.
fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn step<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// `∫ [p(x) − e^ε q(x)]_+ dx` split at the given kinks and at the sign changes of `p − e^ε q`.
fn divergence_integral(p: impl Fn(f64) -> f64, q: impl Fn(f64) -> f64, eps: f64, lo: f64, hi: f64, kinks: &[f64]) -> f64 {
    let a = eps.exp();
    let g = |x: f64| p(x) - a * q(x);
    let mut cuts = vec![lo, hi];
    cuts.extend(kinks.iter().copied().filter(|k| *k > lo && *k < hi));
    let steps = 20_000;
    for i in 0..steps {
        let (mut l, mut r) = (lo + (hi - lo) * i as f64 / steps as f64, lo + (hi - lo) * (i + 1) as f64 / steps as f64);
        if g(l).signum() * g(r).signum() < 0.0 {
            for _ in 0..200 {
                let mid = 0.5 * (l + r);
                if g(mid).signum() == g(l).signum() {
                    l = mid;
                } else {
                    r = mid;
                }
            }
            cuts.push(0.5 * (l + r));
        }
    }
    cuts.sort_by(f64::total_cmp);
    let f = |x: f64| g(x).max(0.0);
    cuts.windows(2).map(|w| simpson(&f, w[0], w[1], 1e-14)).sum()
}

fn profiles() -> Verdict {
    let mut worst: f64 = 0.0;
    let mut zero_fail = Vec::new();
    for theta in [0.5, 1.0, 2.0] {
        let lap = lib(PrivacyProfile::laplace(theta))?;
        let gau = lib(PrivacyProfile::gaussian(theta))?;
        // Laplace with scale 1/θ and Gaussian with σ = 1/θ, sensitivity 1.
        let lap_pdf = move |mu: f64| move |x: f64| 0.5 * theta * (-theta * (x - mu).abs()).exp();
        let sigma = 1.0 / theta;
        let gau_pdf = move |mu: f64| {
            move |x: f64| (-(x - mu).powi(2) / (2.0 * sigma * sigma)).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
        };
        for eps in [0.0, 0.25 * theta, 0.5 * theta, theta, 2.0 * theta] {
            let lq = divergence_integral(lap_pdf(0.0), lap_pdf(1.0), eps, -60.0 / theta, 1.0 + 60.0 / theta, &[0.0, 1.0]);
            let gq = divergence_integral(gau_pdf(0.0), gau_pdf(1.0), eps, -14.0 * sigma, 1.0 + 14.0 * sigma, &[]);
            worst = worst.max((lq - lap.evaluate(eps)).abs()).max((gq - gau.evaluate(eps)).abs());
        }
        for eps in [theta, 1.5 * theta, 2.0 * theta, 10.0 * theta] {
            if lap.evaluate(eps) != 0.0 {
                zero_fail.push(format!("theta={theta} eps={eps}"));
            }
        }
    }
    ensure(worst <= 1e-9, || format!("max |closed-quadrature| = {worst:e}"))?;
    ensure(zero_fail.is_empty(), || format!("Laplace non-zero at {zero_fail:?}"))?;
    Ok(format!("30 points, max |closed-quadrature| = {worst:.1e}; Laplace exactly 0 for eps >= theta"))
}

fn loss_identity() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst: f64 = 0.0;
    for _ in 0..500 {
        let k = rng.random_range(1..=6);
        let a = random_probs(&mut rng, k, 0.25);
        let b = random_probs(&mut rng, k, 0.25);
        let (mu, mup) = (measure(&a)?, measure(&b)?);
        let fwd = lib(loss_distribution(&mu, &mup))?;
        let rev = lib(loss_distribution(&mup, &mu))?;
        for eps in [0.0, 0.5, 1.0, 2.0] {
            let got = profile_from_loss(&fwd, &rev, eps);
            let lib_hs = lib(hockey_stick(&mu, &mup, eps.exp()))?;
            let naive = naive_hockey(&a, &b, eps.exp());
            worst = worst.max((got - naive).abs()).max((got - lib_hs).abs());
        }
    }
    ensure(worst <= 1e-12, || format!("max deviation {worst:e}"))?;
    Ok(format!("500 pairs x 4 eps, max deviation = {worst:.1e}"))
}

fn mgf() -> Verdict {
    let quad = QuadratureSpec::default();
    let mut worst_gauss: f64 = 0.0;
    for theta in [0.5, 1.0, 2.0] {
        let profile = lib(PrivacyProfile::gaussian(theta))?;
        for s in [0.5, 1.0, 2.0, 5.0] {
            let phi = lib(mgf_symmetric(&profile, s, &quad))?;
            let exact = (theta * theta * s * (s + 1.0) / 2.0).exp();
            worst_gauss = worst_gauss.max((phi / exact - 1.0).abs());
        }
    }
    let mut worst_rr: f64 = 0.0;
    for p in [0.6, 0.75] {
        let profile = lib(PrivacyProfile::randomized_response(p))?;
        let r = p / (1.0 - p);
        for s in [0.5, 1.0, 2.0, 5.0] {
            let phi = lib(mgf_symmetric(&profile, s, &quad))?;
            let exact = p * r.powf(s) + (1.0 - p) * r.powf(-s);
            worst_rr = worst_rr.max((phi - exact).abs());
        }
    }
    ensure(worst_gauss <= 1e-6 && worst_rr <= 1e-8, || {
        format!("gaussian rel err {worst_gauss:e}, rr abs err {worst_rr:e}")
    })?;
    Ok(format!("gaussian max rel err = {worst_gauss:.1e}, rr max abs err = {worst_rr:.1e}"))
}

/// Laplace θ = 1 white-box group profiles at ε = 0.5: `δ_k = [1 − e^{(ε − k)/2}]_+`.
fn laplace_group_delta(k: usize) -> f64 {
    let eps = 0.5;
    if eps >= k as f64 {
        0.0
    } else {
        1.0 - ((eps - k as f64) / 2.0).exp()
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn coupling() -> Verdict {
    let mut cases = 0;
    let mut worst: f64 = 0.0;
    for n in 2..=6usize {
        let inst = lib(standard_instance(n))?;
        let mut schemes: Vec<(SubsamplingScheme, f64)> = Vec::new();
        for m in 1..n {
            schemes.push((SubsamplingScheme::Wor { n, m }, laplace_group_delta(1)));
        }
        for m in 1..=4usize {
            // Multiplicity of the substituted element given that it was drawn at least once.
            let q = 1.0 / n as f64;
            let eta = 1.0 - (1.0 - q).powi(m as i32);
            let class_sum: f64 = (1..=m)
                .map(|k| binomial(m, k) * q.powi(k as i32) * (1.0 - q).powi((m - k) as i32) / eta * laplace_group_delta(k))
                .sum();
            schemes.push((SubsamplingScheme::Wr { n, m }, class_sum));
        }
        for (scheme, expected) in schemes {
            let d = lib(subsample_decomposition(&scheme, &inst.x, &inst.substituted))?;
            let (Some(w1), Some(w1p)) = (&d.omega1, &d.omega1_prime) else {
                return Err(format!("{scheme:?}: degenerate decomposition"));
            };
            let c = lib(coupling_check(w1, w1p, NeighborRelation::Substitute, laplace_group_delta))?;
            ensure(c.compatible, || format!("{scheme:?}: not distance-compatible"))?;
            ensure(c.certified, || format!("{scheme:?}: optimality certificate failed"))?;
            worst = worst.max((c.min_cost - expected).abs());
            cases += 1;
        }
        for gamma in [0.2, 0.5] {
            let d = lib(subsample_decomposition(&SubsamplingScheme::Poisson { gamma }, &inst.x, &inst.substituted))?;
            let (Some(w1), Some(w0)) = (&d.omega1, &d.omega0) else {
                return Err("Poisson decomposition is degenerate".into());
            };
            let compatible = lib(is_distance_compatible(w1, w0, NeighborRelation::Substitute))?;
            ensure(!compatible, || format!("Poisson n={n} gamma={gamma}: omega1/omega0 reported compatible"))?;
        }
    }
    ensure(worst <= 1e-10, || format!("max |min cost - class sum| = {worst:e}"))?;
    Ok(format!("{cases} decompositions, max |min cost - class sum| = {worst:.1e}; Poisson omega1/omega0 incompatible"))
}

fn poisson_substitute() -> Verdict {
    let checks = lib(poisson_substitute_suite())?;
    let worst = checks.iter().map(|c| c.gap).fold(f64::INFINITY, f64::min);
    ensure(worst >= -1e-10, || format!("min gap {worst:e}"))?;
    ensure(checks.len() == 36, || format!("expected 36 cases, got {}", checks.len()))?;
    Ok(format!("{} cases, min gap = {worst:.3e}", checks.len()))
}

fn group_ordering() -> Verdict {
    let mut worst: f64 = f64::INFINITY;
    let mut formula_err: f64 = 0.0;
    for theta in [0.5, 1.0, 2.0] {
        for (family, make) in [
            ("laplace", PrivacyProfile::laplace as fn(f64) -> privamp::Result<PrivacyProfile>),
            ("gaussian", PrivacyProfile::gaussian),
        ] {
            let base = lib(make(theta))?;
            for k in [2usize, 3, 5] {
                let white = lib(GroupProfile::new(base.clone(), k, GroupMode::WhiteBox))?;
                let scaled = lib(make(k as f64 * theta))?;
                let top = 2.0 * k as f64 * theta;
                for i in 0..100 {
                    let eps = top * i as f64 / 99.0;
                    let wb = white.evaluate(eps);
                    let bb = lib(group_blackbox(&base, k, eps))?;
                    let bb_formula = if eps == 0.0 {
                        k as f64 * base.evaluate(0.0)
                    } else {
                        eps.exp_m1() / (eps / k as f64).exp_m1() * base.evaluate(eps / k as f64)
                    };
                    formula_err = formula_err.max((wb - scaled.evaluate(eps)).abs()).max((bb - bb_formula.min(1.0)).abs());
                    if bb - wb < worst {
                        worst = bb - wb;
                    }
                    if wb > bb + 1e-12 {
                        return Err(format!("{family} theta={theta} k={k} eps={eps}: white {wb} > black {bb}"));
                    }
                }
            }
        }
    }
    ensure(formula_err <= 1e-12, || format!("group profiles deviate from closed forms by {formula_err:e}"))?;
    Ok(format!("1800 points, min (black - white) = {worst:.3e}"))
}

fn read_tree(dir: &Path) -> Result<BTreeMap<String, Vec<u8>>, String> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).map_err(|e| e.to_string())? {
            let path = entry.map_err(|e| e.to_string())?.path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(dir).map_err(|e| e.to_string())?.to_string_lossy().into_owned();
                out.insert(rel, std::fs::read(&path).map_err(|e| e.to_string())?);
            }
        }
    }
    Ok(out)
}

fn run_figures(dir: &Path) -> Result<(), String> {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = privamp_cli::run(["privamp", "figures", "--out-dir", dir.to_str().unwrap()], &mut out, &mut err);
    ensure(code == 0, || format!("figures exited {code}: {}", String::from_utf8_lossy(&err)))
}

fn figures() -> Verdict {
    let (a, b) = (tempfile::tempdir().map_err(|e| e.to_string())?, tempfile::tempdir().map_err(|e| e.to_string())?);
    run_figures(a.path())?;
    run_figures(b.path())?;
    let (ta, tb) = (read_tree(a.path())?, read_tree(b.path())?);
    ensure(ta == tb, || "two runs produced different bytes".into())?;
    for bundle in privamp_cli::commands::figures::BUNDLES {
        ensure(ta.keys().any(|k| k.starts_with(&format!("{bundle}/")) && k.ends_with(".csv")), || {
            format!("bundle {bundle} missing")
        })?;
    }
    let mut curves = 0;
    let mut min_margin = f64::INFINITY;
    for (name, bytes) in ta.iter().filter(|(k, _)| k.ends_with(".csv")) {
        let text = String::from_utf8(bytes.clone()).map_err(|e| e.to_string())?;
        ensure(!text.contains('\r'), || format!("{name}: CR line ending"))?;
        let mut lines = text.lines();
        let header: Vec<&str> = lines.next().unwrap_or_default().split(',').collect();
        let rows: Vec<Vec<f64>> = lines
            .map(|l| l.split(',').map(|c| c.parse::<f64>().map_err(|e| format!("{name}: {e}"))).collect())
            .collect::<Result<_, _>>()?;
        for (j, col) in header.iter().enumerate() {
            if !col.contains("delta") {
                continue;
            }
            let values: Vec<f64> = rows.iter().map(|r| r[j]).collect();
            ensure(values.iter().all(|v| (0.0..=1.0).contains(v)), || format!("{name}:{col} outside [0,1]"))?;
            ensure(values.windows(2).all(|w| w[1] <= w[0]), || format!("{name}:{col} increases"))?;
            if let Some(tag) = col.strip_suffix("delta_out") {
                let base = header
                    .iter()
                    .position(|h| *h == format!("{tag}base_delta"))
                    .ok_or_else(|| format!("{name}: no base column for {col}"))?;
                curves += 1;
                for r in &rows {
                    min_margin = min_margin.min(r[base] - r[j]);
                    ensure(r[j] <= r[base] + 1e-12, || {
                        format!("{name}:{col} at eps_in={}: {} above base {}", r[0], r[j], r[base])
                    })?;
                }
            }
        }
    }
    Ok(format!(
        "{} files byte-identical across runs, {curves} amplified curves below base (min margin {min_margin:.3e})",
        ta.len()
    ))
}

fn main() -> ExitCode {
    let s = Duration::from_secs;
    let results = [
        criterion(1, "advanced joint convexity", Some(s(5)), ajc),
        criterion(2, "tightness", Some(s(30)), tightness),
        criterion(3, "dominance", Some(s(60)), dominance),
        criterion(4, "profile correctness", None, profiles),
        criterion(5, "loss-RV identity", None, loss_identity),
        criterion(6, "MGF identity", None, mgf),
        criterion(7, "coupling", None, coupling),
        criterion(8, "Poisson under substitution", None, poisson_substitute),
        criterion(9, "group-profile ordering", None, group_ordering),
        criterion(10, "figure reproduction", None, figures),
    ];
    let passed = results.iter().filter(|&&r| r).count();
    println!("{passed}/{} criteria passed", results.len());
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
