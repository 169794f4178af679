//! Acceptance suite: one line per criterion, non-zero exit if any fails.
//!
//! Experiment criteria run the configs in `configs/` at the repository root
//! and keep their output under the cargo target tmp directory.

use std::f64::consts::{PI, TAU};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use kuramoto_core::graph::{deviation_norm_exact, deviation_norm_heuristic, gen_erdos_renyi};
use kuramoto_core::mean_field::{pde_rhs, pde_solve, solve_sync_state, FixedPoint, FourierDensity, PdeParams};
use kuramoto_core::torus::{empirical_spectrum, hminus1_distance, wrap_all, EmpiricalSpectrum, TorusAngle};
use kuramoto_lab::config::ExperimentConfig;
use kuramoto_lab::experiments::{self, ExperimentReport};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ORDER: usize = 64;
const RUN_THREADS: usize = 2;
const RERUN_THREADS: usize = 1;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn out_root() -> PathBuf {
    Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance")
}

fn run_config(name: &str) -> ExperimentReport {
    let cfg = ExperimentConfig::load(&repo_root().join("configs").join(format!("{name}.json"))).unwrap();
    let dir = out_root().join(name);
    let _ = std::fs::remove_dir_all(&dir);
    experiments::run(&cfg, &dir, Some(RUN_THREADS)).unwrap()
}

fn check_value(report: &ExperimentReport, prefix: &str) -> f64 {
    report
        .summary
        .checks
        .iter()
        .find(|c| c.name.starts_with(prefix))
        .unwrap_or_else(|| panic!("no check `{prefix}`"))
        .value
}

fn random_angles(rng: &mut ChaCha8Rng) -> Vec<TorusAngle> {
    let n = rng.random_range(1..=40);
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..TAU)).collect();
    wrap_all(&raw).unwrap()
}

fn metric() -> Outcome {
    let psi = wrap_all(&[1.3]).unwrap()[0];
    let order = 10_000;
    let d = hminus1_distance(&EmpiricalSpectrum::point_mass(psi, order), &EmpiricalSpectrum::uniform(order))
        .unwrap()
        .value;
    let analytic = PI / 6f64.sqrt();
    let point_err = (d - analytic).abs();

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut worst_triangle, mut worst_rotation) = (f64::NEG_INFINITY, 0.0f64);
    for _ in 0..1000 {
        let spectra: Vec<_> = (0..3)
            .map(|_| empirical_spectrum(&random_angles(&mut rng), ORDER).unwrap())
            .collect();
        let dist = |a: &EmpiricalSpectrum, b: &EmpiricalSpectrum| hminus1_distance(a, b).unwrap().value;
        let (ab, bc, ac) = (dist(&spectra[0], &spectra[1]), dist(&spectra[1], &spectra[2]), dist(&spectra[0], &spectra[2]));
        worst_triangle = worst_triangle.max(ac - ab - bc);

        let alpha = rng.random_range(-10.0..10.0);
        let angles = random_angles(&mut rng);
        let moved: Vec<TorusAngle> = angles.iter().map(|a| a.rotate(alpha)).collect();
        let direct = empirical_spectrum(&moved, ORDER).unwrap();
        let rotated = empirical_spectrum(&angles, ORDER).unwrap().rotate(alpha);
        worst_rotation = worst_rotation.max(dist(&direct, &rotated));
        let shifted = dist(&spectra[0].rotate(alpha), &spectra[1].rotate(alpha));
        worst_rotation = worst_rotation.max((shifted - ab).abs());
    }
    outcome(
        point_err <= 1e-3 && worst_triangle <= 1e-12 && worst_rotation <= 1e-12,
        format!(
            "point vs uniform |d - pi/sqrt6| = {point_err:.2e} (<= 1e-3); triangle slack {worst_triangle:.2e} (<= 1e-12); rotation error {worst_rotation:.2e} (<= 1e-12)"
        ),
    )
}

fn norm_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut equal, mut exceeded) = (0, 0);
    for trial in 0..100u64 {
        let n = rng.random_range(4..=12);
        let p = rng.random_range(0.2..0.8);
        let g = gen_erdos_renyi(n, p, 1000 + trial, trial % 2 == 0).unwrap();
        let exact = deviation_norm_exact(&g).unwrap().value;
        let heuristic = deviation_norm_heuristic(&g, 64, trial).unwrap().value;
        let slack = 1e-9 * exact.max(1.0);
        if heuristic > exact + slack {
            exceeded += 1;
        }
        if (heuristic - exact).abs() <= slack {
            equal += 1;
        }
    }
    outcome(
        equal >= 95 && exceeded == 0,
        format!("heuristic = exact on {equal}/100 (>= 95); heuristic > exact on {exceeded} (= 0)"),
    )
}

fn graph_concentration() -> Outcome {
    let er = run_config("graph_scaling_er");
    let regular = run_config("graph_scaling_regular");
    let er_gap = check_value(&er, "max(norm - bound)");
    let er_trend = check_value(&er, "mean norm strictly decreasing");
    let reg_gap = check_value(&regular, "max(norm - bound)");
    outcome(
        er_gap <= 0.0 && er_trend < 0.0 && reg_gap <= 0.0,
        format!(
            "ER max(norm - 2/sqrt(np)) = {er_gap:.4} (<= 0); largest step in ER means = {er_trend:.4} (< 0); regular max(norm - 4lambda/d) = {reg_gap:.4} (<= 0)"
        ),
    )
}

/// Right-hand side from the density on a grid: pointwise product with the
/// directly convolved interaction field, then a discrete Fourier transform.
fn pseudo_spectral_rhs(c: &[Complex64], k: f64) -> Vec<Complex64> {
    let order = c.len() - 1;
    let n = 4 * order.max(2);
    let thetas: Vec<f64> = (0..n).map(|j| TAU * j as f64 / n as f64).collect();
    let f: Vec<f64> = thetas
        .iter()
        .map(|&t| {
            c[0].re
                + c.iter()
                    .enumerate()
                    .skip(1)
                    .map(|(l, cl)| 2.0 * (cl * Complex64::from_polar(1.0, l as f64 * t)).re)
                    .sum::<f64>()
        })
        .collect();
    let h = TAU / n as f64;
    let field: Vec<f64> = thetas
        .iter()
        .map(|&t| thetas.iter().zip(&f).map(|(&s, &fs)| -k * (t - s).sin() * fs * h).sum())
        .collect();
    (1..=order)
        .map(|l| {
            let g: Complex64 = thetas
                .iter()
                .zip(f.iter().zip(&field))
                .map(|(&t, (&fv, &vv))| fv * vv * Complex64::from_polar(1.0, -(l as f64) * t))
                .sum::<Complex64>()
                / n as f64;
            let lf = l as f64;
            c[l] * (-0.5 * lf * lf) - Complex64::new(0.0, lf) * g
        })
        .collect()
}

fn max_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn random_density(order: usize, rng: &mut ChaCha8Rng) -> FourierDensity {
    let mut c = vec![Complex64::new(1.0 / TAU, 0.0)];
    for l in 1..=order {
        let scale = 0.5 / TAU / l as f64;
        c.push(Complex64::new(rng.random_range(-scale..scale), rng.random_range(-scale..scale)));
    }
    FourierDensity::from_coeffs(c).unwrap()
}

fn pde_solver() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst_rel: f64 = 0.0;
    for trial in 0..100 {
        let order = if trial % 10 == 0 { 64 } else { 16 };
        let k = rng.random_range(0.0..5.0);
        let d = random_density(order, &mut rng);
        let oracle = pseudo_spectral_rhs(d.coeffs(), k);
        let err = pde_rhs(&d, k).iter().zip(&oracle).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        worst_rel = worst_rel.max(err / max_norm(&oracle));
    }

    let d = random_density(32, &mut rng);
    let mass = d.coeff(0);
    let traj = pde_solve(&d, &PdeParams::new(2.0, 0.01, 5.0, 10)).unwrap();
    let mass_exact = traj.records.iter().all(|(_, s)| s.coeff(0) == mass);

    let mut worst_rate: f64 = 0.0;
    for k in [0.2, 0.5, 0.8] {
        let init = FourierDensity::cosine(64, 1e-3, 0.0).unwrap();
        let traj = pde_solve(&init, &PdeParams::new(k, 0.01, 10.0, 100)).unwrap();
        let at = |t: f64| traj.records.iter().find(|(s, _)| (s - t).abs() < 1e-9).unwrap().1.coeff(1).norm();
        let rate = -(at(10.0) / at(1.0)).ln() / 9.0;
        let expected = (1.0 - k) / 2.0;
        worst_rate = worst_rate.max(((rate - expected) / expected).abs());
    }

    let q = solve_sync_state(2.0, 128).unwrap().sync().unwrap().density(0.0);
    let residual = max_norm(&pde_rhs(&q, 2.0));
    outcome(
        worst_rel <= 1e-10 && mass_exact && worst_rate <= 0.05 && residual <= 1e-8,
        format!(
            "rhs vs oracle rel {worst_rel:.2e} (<= 1e-10); mass exact: {mass_exact}; decay rate rel err {worst_rate:.4} (<= 0.05); residual at q {residual:.2e} (<= 1e-8)"
        ),
    )
}

/// First moment of `e^{x cos θ}` normalized, by a 20000-node trapezoid rule.
fn tilted_mean(x: f64) -> f64 {
    let n = 20_000;
    let (mut num, mut den) = (0.0, 0.0);
    for j in 0..n {
        let t = TAU * j as f64 / n as f64;
        let w = (x * (t.cos() - 1.0)).exp();
        num += t.cos() * w;
        den += w;
    }
    num / den
}

fn fixed_point() -> Outcome {
    let mut worst: f64 = 0.0;
    for k in [1.2, 2.0, 5.0] {
        let s = solve_sync_state(k, 16).unwrap().sync().unwrap();
        worst = worst.max((s.r - tilted_mean(2.0 * k * s.r)).abs());
        worst = worst.max((s.moments[0] - s.r).abs());
    }
    let no_sync = [0.0, 0.5, 0.99]
        .iter()
        .all(|&k| solve_sync_state(k, 16).unwrap() == FixedPoint::NoSync);
    outcome(
        worst <= 1e-10 && no_sync,
        format!("max |r - Psi(2Kr)|, |m1(q) - r| = {worst:.2e} (<= 1e-10); NoSync for K in {{0, 0.5, 0.99}}: {no_sync}"),
    )
}

fn finite_time() -> Outcome {
    let r = run_config("finite_time");
    let trend = check_value(&r, "mean sup non-increasing");
    let last = check_value(&r, "mean sup at n=2000");
    outcome(
        r.pass && trend <= 0.0 && last <= 0.15,
        format!("largest step in per-n mean sup = {trend:.4} (<= 0); mean sup at n=2000 = {last:.4} (<= 0.15)"),
    )
}

fn longtime_super() -> Outcome {
    let r = run_config("longtime_super");
    let sup = check_value(&r, "max sup at n=1000");
    outcome(r.pass && sup <= 0.1, format!("max over seeds of sup dist to M = {sup:.4} (<= 0.1)"))
}

fn longtime_sub() -> Outcome {
    let r = run_config("longtime_sub");
    let sup = check_value(&r, "max sup at n=1000");
    outcome(r.pass && sup <= 0.15, format!("max over seeds of sup dist to uniform = {sup:.4} (<= 0.15)"))
}

fn brownian() -> Outcome {
    let r = run_config("brownian_maximal");
    let spread = check_value(&r, "fitted constant spread");
    let scaling = check_value(&r, "deviation from 1/n scaling");
    outcome(
        r.pass && spread < 3.0 && scaling <= 0.25,
        format!("fitted constant spread = {spread:.3} (< 3); worst deviation from 1/n = {scaling:.3} (<= 0.25)"),
    )
}

fn adversarial() -> Outcome {
    let r = run_config("adversarial_init");
    let connected = check_value(&r, "connected max sup");
    let split = check_value(&r, "split min final distance");
    outcome(
        r.pass && connected <= 0.15 && split >= 0.3,
        format!("connected sup dist = {connected:.4} (<= 0.15); split distance at t=50 = {split:.4} (>= 0.3)"),
    )
}

/// Rerun the first replica of every experiment from its stored config.json
/// with a different thread count and compare series bytes.
fn reproducibility() -> Outcome {
    let names = [
        "graph_scaling_er",
        "graph_scaling_regular",
        "finite_time",
        "longtime_super",
        "longtime_sub",
        "brownian_maximal",
        "adversarial_init",
    ];
    let (mut compared, mut differing) = (0, Vec::new());
    for name in names {
        let original = out_root().join(name);
        if !original.join(experiments::CONFIG_FILE).exists() {
            run_config(name);
        }
        let mut cfg = ExperimentConfig::load(&original.join(experiments::CONFIG_FILE)).unwrap();
        cfg.replicas.truncate(1);
        let rerun = out_root().join(format!("{name}_rerun"));
        let _ = std::fs::remove_dir_all(&rerun);
        experiments::run(&cfg, &rerun, Some(RERUN_THREADS)).unwrap();
        for (a, b) in experiments::series_files(&cfg, &original).iter().zip(experiments::series_files(&cfg, &rerun)) {
            compared += 1;
            if std::fs::read(a).unwrap() != std::fs::read(&b).unwrap() {
                differing.push(b.display().to_string());
            }
        }
    }
    outcome(
        differing.is_empty() && compared > 0,
        format!("{compared} series rerun at {RERUN_THREADS} thread(s) vs {RUN_THREADS}; differing: {differing:?}"),
    )
}

type Criterion = (&'static str, fn() -> Outcome, Duration);

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("h_minus_one_metric", metric, Duration::from_secs(10)),
        ("norm_oracle_equivalence", norm_oracle, Duration::from_secs(60)),
        ("graph_concentration", graph_concentration, Duration::from_secs(300)),
        ("pde_solver", pde_solver, Duration::from_secs(120)),
        ("fixed_point", fixed_point, Duration::from_secs(10)),
        ("finite_time_shadow", finite_time, Duration::from_secs(1200)),
        ("supercritical_long_time", longtime_super, Duration::from_secs(900)),
        ("subcritical_long_time", longtime_sub, Duration::from_secs(900)),
        ("brownian_maximal_inequality", brownian, Duration::from_secs(1200)),
        ("adversarial_initial_data", adversarial, Duration::from_secs(600)),
        ("reproducibility", reproducibility, Duration::MAX),
    ];
    let only: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failures = 0;
    for (i, (name, check, budget)) in criteria.iter().enumerate() {
        if !only.is_empty() && !only.iter().any(|o| name.contains(o.as_str())) {
            continue;
        }
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let in_time = elapsed <= *budget;
        let pass = result.pass && in_time;
        if !pass {
            failures += 1;
        }
        let budget_note = if *budget == Duration::MAX {
            String::new()
        } else {
            format!(" <= {}s", budget.as_secs())
        };
        println!(
            "[{}] {:>2} {name}: {} | runtime {:.2}s{budget_note}",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            result.detail,
            elapsed.as_secs_f64(),
        );
    }
    println!("acceptance: {} failed", failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
