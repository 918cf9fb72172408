//! Acceptance criteria on the bundled fixtures. Each test writes one
//! `criterion N: PASS|FAIL ...` line to stderr (uncaptured) and then asserts.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::OnceLock;
use std::time::Instant;

use fraqdim::{Experiment, ExperimentConfig};
use fraqdim_core::dims::{alpha_bounds, estimate_quantization_dimension};
use fraqdim_core::ifs::System;
use fraqdim_core::markov::StochasticMatrix;
use fraqdim_core::measure::Target;
use fraqdim_core::quantizer::{dp_1d_points, eval_log_error, verify_decomposition_inequalities, Codebook, QuantizationCurve};
use fraqdim_core::rng::SplitRng;
use fraqdim_core::symbolic::{antichain_by_probability, birkhoff_check, chaos_game, p_hat, verify_antichain};

const FIXTURES: [&str; 4] = ["cantor", "twostate", "affine2d", "uniform"];

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(format!("{name}.json"))
}

fn config(name: &str) -> ExperimentConfig {
    ExperimentConfig::load(&fixture(name)).unwrap()
}

fn experiment(name: &str) -> Experiment {
    Experiment::new(config(name)).unwrap()
}

fn system(name: &str) -> System {
    config(name).build_system().unwrap()
}

fn report(id: u32, pass: bool, started: Instant, detail: String) {
    let status = if pass { "PASS" } else { "FAIL" };
    let secs = started.elapsed().as_secs_f64();
    let _ = writeln!(std::io::stderr(), "criterion {id}: {status} ({secs:.1}s) {detail}");
    assert!(pass, "criterion {id}: {detail}");
}

/// Curves are shared between the dimension and monotonicity criteria.
fn curve(name: &str) -> &'static QuantizationCurve {
    static CELLS: [OnceLock<QuantizationCurve>; 4] = [OnceLock::new(), OnceLock::new(), OnceLock::new(), OnceLock::new()];
    let idx = FIXTURES.iter().position(|f| *f == name).unwrap();
    CELLS[idx].get_or_init(|| experiment(name).curve().unwrap().clone())
}

fn random_irreducible(rng: &mut SplitRng, n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| {
            let mut row: Vec<f64> = (0..n).map(|_| if rng.uniform() < 0.4 { 0.0 } else { rng.uniform() }).collect();
            // A positive cycle keeps the chain irreducible.
            row[(i + 1) % n] += 0.1;
            let s: f64 = row.iter().sum();
            row.iter().map(|v| v / s).collect()
        })
        .collect()
}

#[test]
fn criterion_01_stationary_equation() {
    let t = Instant::now();
    let mut worst = 0.0f64;
    let mut positive = true;
    let mut check = |m: &StochasticMatrix| {
        let p = m.stationary(1e-12).unwrap().p;
        let n = p.len();
        for j in 0..n {
            let lhs: f64 = (0..n).map(|i| p[i] * m.get(i, j)).sum();
            worst = worst.max((lhs - p[j]).abs());
        }
        positive &= p.iter().all(|&q| q > 0.0);
    };
    for name in FIXTURES {
        check(&StochasticMatrix::validate(&config(name).system.matrix).unwrap());
    }
    let mut rng = SplitRng::new(2026);
    for _ in 0..50 {
        check(&StochasticMatrix::validate(&random_irreducible(&mut rng, 10)).unwrap());
    }
    let fast = t.elapsed().as_secs_f64() < 1.0;
    report(1, worst <= 1e-12 && positive && fast, t, format!("max residual {worst:.2e}, all positive {positive}"));
}

#[test]
fn criterion_02_antichain_partition() {
    let t = Instant::now();
    let mut worst = 0.0f64;
    let mut within_bound = true;
    let mut problems = Vec::new();
    for name in FIXTURES {
        let ifs = system(name).ifs;
        let ph = p_hat(&ifs);
        for eps in [0.3, 0.05, 0.01, 0.001] {
            match antichain_by_probability(&ifs, eps) {
                Ok(ac) => {
                    let chk = verify_antichain(&ifs, &ac).unwrap();
                    worst = worst.max((chk.total_weight - 1.0).abs());
                    within_bound &= ac.len() as f64 <= 1.0 / (eps * ph * ph);
                }
                Err(e) => problems.push(format!("{name} eps={eps}: {e}")),
            }
        }
    }
    let pass = worst <= 1e-12 && within_bound && problems.is_empty();
    report(2, pass, t, format!("max |sum-1| {worst:.2e}, size bound held {within_bound}, errors {problems:?}"));
}

#[test]
fn criterion_03_birkhoff_convergence() {
    let t = Instant::now();
    let mut worst = 0.0f64;
    for name in FIXTURES {
        let sys = system(name);
        let traj = chaos_game(&sys, 1_001_000, 1000, 31).unwrap();
        worst = worst.max(birkhoff_check(&sys.ifs, &traj).unwrap().max_deviation());
    }
    report(3, worst <= 1e-2, t, format!("max deviation {worst:.2e} over 1e6-step chains"));
}

#[test]
fn criterion_04_frostman_trend() {
    let t = Instant::now();
    let mut exp = experiment("cantor");
    let eta = 0.5f64.ln() / (1.0f64 / 3.0).ln();
    let rep = exp.frostman().unwrap().clone();
    let lo = rep.rows.iter().map(|r| r.eps).fold(f64::INFINITY, f64::min);
    let hi = rep.rows.iter().map(|r| r.eps).fold(0.0, f64::max);
    let spans = (lo - 3f64.powi(-8)).abs() < 1e-12 && (hi - 3f64.powi(-2)).abs() < 1e-12;
    let pass = (rep.eta - eta).abs() < 1e-12 && spans && rep.trend_slope >= -0.05;
    report(4, pass, t, format!("eta {:.5}, trend slope {:.4}, C {:.3}", rep.eta, rep.trend_slope, rep.constant));
}

/// Exhaustive search over contiguous partitions; each cell's best point is
/// found among the breakpoints of the floored log cost, then checked
/// against a dense grid.
fn exhaustive(xs: &[f64], ws: &[f64], delta: f64, n: usize) -> f64 {
    let m = xs.len();
    let cell = |i: usize, j: usize| {
        let cost = |a: f64| (i..j).map(|q| ws[q] * (xs[q] - a).abs().max(delta).ln()).sum::<f64>();
        let mut cands: Vec<f64> = (i..j).flat_map(|q| [xs[q] - delta, xs[q], xs[q] + delta]).collect();
        let (lo, hi) = (xs[i] - delta, xs[j - 1] + delta);
        cands.extend((0..=2000).map(|k| lo + (hi - lo) * k as f64 / 2000.0));
        cands.into_iter().map(cost).fold(f64::INFINITY, f64::min)
    };
    let mut best = f64::INFINITY;
    for mask in 0u32..(1 << (m - 1)) {
        if mask.count_ones() as usize + 1 != n.min(m) {
            continue;
        }
        let (mut total, mut start) = (0.0, 0);
        for b in 0..m - 1 {
            if mask >> b & 1 == 1 {
                total += cell(start, b + 1);
                start = b + 1;
            }
        }
        best = best.min(total + cell(start, m));
    }
    best
}

#[test]
fn criterion_05_dp_matches_exhaustive_search() {
    let t = Instant::now();
    let mut rng = SplitRng::new(5);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let m = 1 + (rng.uniform() * 12.0) as usize;
        let n = 1 + (rng.uniform() * 3.0) as usize;
        let mut xs: Vec<f64> = (0..m).map(|_| rng.uniform()).collect();
        xs.sort_by(f64::total_cmp);
        let raw: Vec<f64> = (0..m).map(|_| 0.05 + rng.uniform()).collect();
        let s: f64 = raw.iter().sum();
        let ws: Vec<f64> = raw.iter().map(|w| w / s).collect();
        let delta = 1e-3 + 0.02 * rng.uniform();
        let dp = dp_1d_points(&xs, &ws, delta, n, None).unwrap().objective;
        worst = worst.max((dp - exhaustive(&xs, &ws, delta, n)).abs());
    }
    let fast = t.elapsed().as_secs_f64() < 10.0;
    report(5, worst <= 1e-9 && fast, t, format!("max |dp - exhaustive| {worst:.2e} over 100 instances"));
}

#[test]
fn criterion_06_uniform_calibration() {
    let t = Instant::now();
    let mut exp = experiment("uniform");
    let settings = exp.quant_settings().unwrap();
    let mut enclosed = true;
    let mut notes = Vec::new();
    for n in [1usize, 2, 4, 8] {
        let mids: Vec<f64> = (0..n).map(|k| (2 * k + 1) as f64 / (2 * n) as f64).collect();
        let cb = Codebook::from_scalars(&mids).unwrap();
        let enc = eval_log_error(&exp.system, &cb, Target::Full, settings.tol_gap, settings.depth_cap, settings.tail).unwrap();
        let exact = (1.0 / (2 * n) as f64).ln() - 1.0;
        enclosed &= enc.contains(exact);
        notes.push(format!("n={n} [{:.5}, {:.5}]", enc.lo, enc.hi));
    }
    let d = estimate_quantization_dimension(curve("uniform")).unwrap();
    let pass = enclosed && (d.d - 1.0).abs() <= 0.05;
    report(6, pass, t, format!("{} D={:.4}", notes.join(" "), d.d));
}

#[test]
fn criterion_07_quantization_dimension_sandwich() {
    let t = Instant::now();
    let target = 2f64.ln() / 3f64.ln();
    let cantor = estimate_quantization_dimension(curve("cantor")).unwrap().d;
    let cantor_ok = (cantor - target).abs() <= 0.1 * target;
    let bounds = alpha_bounds(&system("affine2d").ifs);
    let affine = estimate_quantization_dimension(curve("affine2d")).unwrap().d;
    let affine_ok = bounds.alpha1 * 0.9 <= affine && affine <= bounds.alpha2 * 1.1;
    report(
        7,
        cantor_ok && affine_ok,
        t,
        format!(
            "cantor D={cantor:.5} (target {target:.5}); affine2d D={affine:.4} in [{:.4}, {:.4}]",
            bounds.alpha1 * 0.9,
            bounds.alpha2 * 1.1
        ),
    );
}

#[test]
fn criterion_08_local_dimension_sandwich() {
    let t = Instant::now();
    let mut cantor = experiment("cantor");
    let c = cantor.local_dimension_check().unwrap();
    let mut affine = experiment("affine2d");
    let a = affine.local_dimension_check().unwrap();
    let pass = c.stats.count + c.stats.failed == 200
        && c.fraction >= 0.95
        && (cantor.config.dims.bands.local_dimension - 0.1).abs() < 1e-12
        && a.fraction >= 0.9
        && (affine.config.dims.bands.local_dimension - 0.15).abs() < 1e-12;
    report(8, pass, t, format!("cantor fraction {:.3}, affine2d fraction {:.3}", c.fraction, a.fraction));
}

#[test]
fn criterion_09_strict_monotonicity() {
    let t = Instant::now();
    let bad: Vec<&str> = FIXTURES.into_iter().filter(|f| !curve(f).is_strictly_decreasing()).collect();
    report(9, bad.is_empty(), t, format!("curves not strictly decreasing: {bad:?}"));
}

#[test]
fn criterion_10_mixture_lower_bound() {
    let t = Instant::now();
    let mut exp = experiment("cantor");
    let settings = exp.quant_settings().unwrap();
    let ssc = exp.ssc();
    let dec = verify_decomposition_inequalities(&exp.system, &[2, 4, 8], &settings, 9, &ssc).unwrap();
    let rows: Vec<_> = dec.checks.iter().filter(|c| c.name == "mixture-lower").collect();
    // Slack is ê_n(μ) − Σ p_i ê_n(μ̂_i); widths are twice the half-widths.
    let pass = rows.len() == 3 && rows.iter().all(|c| c.slack >= -2.0 * c.uncertainty);
    let detail = rows.iter().map(|c| format!("n={} slack={:+.4}", c.n, c.slack)).collect::<Vec<_>>().join(" ");
    report(10, pass, t, detail);
}

#[test]
fn criterion_11_report_determinism() {
    let t = Instant::now();
    let mut cfg = config("twostate");
    cfg.quantization.n_list = vec![2, 4, 8, 16];
    cfg.dims.sample_count = 20;
    cfg.birkhoff.steps = 201_000;
    cfg.frostman.samples = 20;
    cfg.decomposition.n_list = vec![2, 4];
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("small.json");
    std::fs::write(&cfg_path, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
    let run = |out: &str, threads: &str| {
        let out_dir = dir.path().join(out);
        let status = Command::new(env!("CARGO_BIN_EXE_fraqdim"))
            .args(["report", "--config", cfg_path.to_str().unwrap(), "--out", out_dir.to_str().unwrap()])
            .args(["--threads", threads])
            .output()
            .unwrap();
        assert!(status.status.code().is_some_and(|c| c == 0 || c == 2), "{status:?}");
        out_dir
    };
    let (a, b) = (run("a", "1"), run("b", "3"));
    let files = [
        "stationary.json",
        "attractor.csv",
        "samples.csv",
        "antichain.csv",
        "curve.csv",
        "codebooks.json",
        "dims.json",
        "localdims.csv",
        "verify.txt",
    ];
    let differing: Vec<&str> =
        files.into_iter().filter(|f| std::fs::read(a.join(f)).ok() != std::fs::read(b.join(f)).ok() || !a.join(f).exists()).collect();
    report(11, differing.is_empty(), t, format!("{} files compared, differing or missing: {differing:?}", files.len()));
}
