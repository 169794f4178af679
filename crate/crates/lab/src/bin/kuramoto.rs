use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use kuramoto_core::graph::{
    audit, bernstein_bound, deviation_norm_exact, deviation_norm_heuristic, gen_complete,
    gen_erdos_renyi, gen_random_regular, mixing_bound, NormKind, EXACT_SEARCH_CAP,
};
use kuramoto_core::manifold::{track_phase, ManifoldChart};
use kuramoto_core::mean_field::{
    density_moments, pde_solve, solve_sync_state, FixedPoint, FourierDensity, PdeParams,
};
use kuramoto_core::particle::{simulate, BlockSplit, InitialCondition, SimParams};
use kuramoto_core::torus::wrap;
use kuramoto_lab::calibrate::{calibrate, calibration_config};
use kuramoto_lab::config::ExperimentConfig;
use kuramoto_lab::experiments::{self, render_markdown};
use kuramoto_lab::formats::{
    load_density, load_edge_list, load_trajectory, save_edge_list, save_phase_track, save_trajectory,
};
use kuramoto_lab::{LabError, Result};
use serde_json::json;

#[derive(Parser)]
#[command(name = "kuramoto", version, about = "Stochastic Kuramoto model on graph sequences")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum GraphKind {
    Complete,
    Er,
    Regular,
}

#[derive(Clone, Copy, ValueEnum)]
enum NormMode {
    Exact,
    Heuristic,
    Bounds,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a graph and write it as an edge list.
    GraphGen {
        #[arg(long, value_enum)]
        kind: GraphKind,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        d: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        sym: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Degree homogeneity, connectivity and deviation norm of a graph.
    GraphAudit {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 0.2)]
        delta: f64,
        #[arg(long, value_enum, default_value = "heuristic")]
        norm: NormMode,
        #[arg(long, default_value_t = 64)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
    /// Simulate the particle system and write its moment trajectory.
    Simulate {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long = "K")]
        k: f64,
        #[arg(long)]
        dt: f64,
        #[arg(long)]
        t_end: f64,
        #[arg(long, default_value_t = 1)]
        record_every: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long = "L", default_value_t = 64)]
        order: usize,
        /// uniform | density:FILE | point:PSI | twoblock:PSI1,PSI2
        #[arg(long, default_value = "uniform")]
        init: String,
        /// Permit steps above the stability guard.
        #[arg(long)]
        allow_large_dt: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve the mean-field equation and write its moment trajectory.
    PdeSolve {
        #[arg(long = "K")]
        k: f64,
        #[arg(long = "L", default_value_t = 128)]
        order: usize,
        #[arg(long)]
        dt: f64,
        #[arg(long)]
        t_end: f64,
        /// uniform | sync | file:PATH | mode1:EPS
        #[arg(long, default_value = "uniform")]
        init: String,
        #[arg(long, default_value_t = 1)]
        record_every: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Degree of synchronization and profile moments for a coupling.
    SyncState {
        #[arg(long = "K")]
        k: f64,
        #[arg(long)]
        json: bool,
    },
    /// Distance and phase relative to the synchronized circle along a trajectory.
    ManifoldTrack {
        #[arg(long)]
        traj: PathBuf,
        #[arg(long = "K")]
        k: f64,
        #[arg(long = "L", default_value_t = 64)]
        order: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run an experiment from a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Recompute and print the summary of an experiment directory.
    Report {
        #[arg(long)]
        dir: PathBuf,
        #[arg(long, conflicts_with = "markdown")]
        json: bool,
        #[arg(long)]
        markdown: bool,
    },
    /// Measure the tolerance scale on the complete graph.
    Calibrate {
        #[arg(long, value_delimiter = ',', default_value = "250,500,1000,2000")]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 10)]
        replicas: u64,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long, default_value = "calibration")]
        out: PathBuf,
    },
}

fn usage(msg: impl Into<String>) -> LabError {
    LabError::Usage(msg.into())
}

fn parse_f64(s: &str, what: &str) -> Result<f64> {
    s.trim().parse().map_err(|_| usage(format!("{what}: `{s}` is not a number")))
}

fn particle_init(spec: &str, n: usize, seed: u64) -> Result<InitialCondition> {
    let (head, arg) = spec.split_once(':').unwrap_or((spec, ""));
    Ok(match head {
        "uniform" => InitialCondition::IidUniform { seed },
        "density" => InitialCondition::IidFromDensity { density: load_density(Path::new(arg))?, seed },
        "point" => InitialCondition::PointMass(wrap(parse_f64(arg, "point phase")?)?),
        "twoblock" => {
            let (a, b) = arg.split_once(',').ok_or_else(|| usage("twoblock needs PSI1,PSI2"))?;
            InitialCondition::TwoBlock {
                first: wrap(parse_f64(a, "first phase")?)?,
                second: wrap(parse_f64(b, "second phase")?)?,
                split: BlockSplit::IndexBelow(n / 2),
            }
        }
        _ => return Err(usage(format!("unknown --init `{spec}`"))),
    })
}

fn pde_init(spec: &str, k: f64, order: usize) -> Result<FourierDensity> {
    let (head, arg) = spec.split_once(':').unwrap_or((spec, ""));
    Ok(match head {
        "uniform" => FourierDensity::uniform(order),
        "sync" => solve_sync_state(k, order)?
            .sync()
            .ok_or_else(|| usage(format!("no synchronized state for K = {k}")))?
            .density(0.0),
        "file" => load_density(Path::new(arg))?.with_order(order),
        "mode1" => FourierDensity::cosine(order, parse_f64(arg, "mode1 amplitude")?, 0.0)?,
        _ => return Err(usage(format!("unknown --init `{spec}`"))),
    })
}

fn print_json(value: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("json value serializes"));
}

fn execute(command: Command) -> Result<bool> {
    match command {
        Command::GraphGen { kind, n, p, d, seed, sym, out } => {
            let g = match kind {
                GraphKind::Complete => gen_complete(n)?,
                GraphKind::Er => {
                    let p = p.ok_or_else(|| usage("--kind er needs --p"))?;
                    gen_erdos_renyi(n, p, seed, sym)?
                }
                GraphKind::Regular => {
                    let d = d.ok_or_else(|| usage("--kind regular needs --d"))?;
                    gen_random_regular(n, d, seed)?
                }
            };
            save_edge_list(&g, &out)?;
            Ok(true)
        }
        Command::GraphAudit { input, delta, norm, restarts, seed, json } => {
            let g = load_edge_list(&input)?;
            let n = g.n();
            let a = audit(&g, delta)?;
            let (value, label) = match norm {
                NormMode::Exact => {
                    if n > EXACT_SEARCH_CAP {
                        return Err(usage(format!("exact norm needs n ≤ {EXACT_SEARCH_CAP}")));
                    }
                    let e = deviation_norm_exact(&g)?;
                    (e.normalized(n), e.kind.label())
                }
                NormMode::Heuristic => {
                    let e = deviation_norm_heuristic(&g, restarts, seed)?;
                    (e.normalized(n), e.kind.label())
                }
                NormMode::Bounds => match mixing_bound(&g) {
                    Ok(m) => (m.bound, NormKind::UpperBound.label()),
                    Err(_) => (bernstein_bound(n, g.dilution())?, NormKind::UpperBound.label()),
                },
            };
            let report = json!({
                "n": n,
                "entries": g.nnz(),
                "dilution": g.dilution(),
                "symmetric": g.is_symmetric(),
                "delta": delta,
                "bad_fraction": a.bad_fraction,
                "giant_fraction": a.giant_fraction,
                "component_count": a.component_count,
                "normalized_norm": value,
                "norm_label": label,
            });
            if json {
                print_json(&report);
            } else {
                println!("n = {n}, entries = {}, dilution = {}", g.nnz(), g.dilution());
                println!("bad fraction (δ = {delta}) = {}", a.bad_fraction);
                println!("giant fraction = {}, components = {}", a.giant_fraction, a.component_count);
                println!("normalized deviation norm = {value} ({label})");
            }
            Ok(true)
        }
        Command::Simulate { graph, k, dt, t_end, record_every, seed, order, init, allow_large_dt, out } => {
            let g = load_edge_list(&graph)?;
            let init = particle_init(&init, g.n(), seed)?;
            let mut params = SimParams::new(k, dt, t_end, record_every, seed, order);
            params.allow_large_dt = allow_large_dt;
            let traj = simulate(&g, &params, &init)?;
            save_trajectory(&traj.records, &out)?;
            Ok(true)
        }
        Command::PdeSolve { k, order, dt, t_end, init, record_every, out } => {
            let init = pde_init(&init, k, order)?;
            let traj = pde_solve(&init, &PdeParams::new(k, dt, t_end, record_every))?;
            let records = traj
                .records
                .iter()
                .map(|(t, d)| Ok((*t, density_moments(d, order)?)))
                .collect::<Result<Vec<_>>>()?;
            save_trajectory(&records, &out)?;
            if traj.positivity_violations > 0 {
                eprintln!(
                    "warning: {} recorded states dipped below zero (min {})",
                    traj.positivity_violations, traj.min_density
                );
            }
            Ok(true)
        }
        Command::SyncState { k, json } => {
            let (r, z, moments) = match solve_sync_state(k, 16)? {
                FixedPoint::NoSync => (0.0, 2.0 * std::f64::consts::PI, vec![0.0; 16]),
                FixedPoint::Sync(s) => (s.r, s.z, s.moments),
            };
            if json {
                print_json(&json!({ "k": k, "r": r, "z": z, "moments": moments }));
            } else {
                println!("K = {k}\nr = {r}\nZ = {z}");
                for (l, m) in moments.iter().enumerate() {
                    println!("m_{} = {m}", l + 1);
                }
            }
            Ok(true)
        }
        Command::ManifoldTrack { traj, k, order, out } => {
            let records = load_trajectory(&traj)?
                .into_iter()
                .map(|(t, s)| Ok((t, s.truncate(order)?)))
                .collect::<Result<Vec<_>>>()?;
            let chart = ManifoldChart::solve(k, order)?;
            save_phase_track(&track_phase(&records, &chart)?, &out)?;
            Ok(true)
        }
        Command::Run { config, threads, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let report = experiments::run(&cfg, &out, threads)?;
            print!("{}", render_markdown(&report.kind, &report.summary));
            Ok(report.pass)
        }
        Command::Report { dir, json, markdown: _ } => {
            let (cfg, summary) = experiments::summarize_dir(&dir)?;
            let stored = experiments::load_report(&dir)?;
            let consistent = stored.summary == summary;
            if !consistent {
                eprintln!("warning: report.json disagrees with the summary recomputed from the series");
            }
            if json {
                print_json(&json!({
                    "kind": cfg.kind.name(),
                    "summary": summary,
                    "matches_stored_report": consistent,
                }));
            } else {
                print!("{}", render_markdown(cfg.kind.name(), &summary));
            }
            Ok(summary.pass && consistent)
        }
        Command::Calibrate { sizes, replicas, threads, out } => {
            let cfg = calibration_config(sizes, (1..=replicas).collect());
            let cal = calibrate(&cfg, &out, threads)?;
            print_json(&serde_json::to_value(&cal)?);
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
