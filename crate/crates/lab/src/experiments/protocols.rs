//! One replica of each experiment: build the graph, run the dynamics and
//! return the series table that gets stored under `series/`.

use kuramoto_core::graph::{
    audit, bernstein_bound, deviation_norm_heuristic, gen_complete, gen_erdos_renyi,
    gen_random_regular, mixing_bound, SparseGraph,
};
use kuramoto_core::manifold::{dist_to_manifold, ManifoldChart};
use kuramoto_core::mean_field::{
    density_moments, pde_solve, solve_sync_state, FourierDensity, PdeParams,
};
use kuramoto_core::particle::{simulate_with, BlockSplit, InitialCondition, SimParams};
use kuramoto_core::torus::{
    empirical_spectrum, hminus1_distance, wrap, EmpiricalSpectrum, TorusAngle,
};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, ExperimentKind, GraphFamily, InitSpec};
use crate::error::{LabError, Result};

/// Which run of a replica a series belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Main,
    /// Adversarial start on a connected graph.
    Connected,
    /// Adversarial start on two disjoint halves.
    Split,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct JobSeeds {
    pub graph: u64,
    pub init: u64,
    pub noise: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Job {
    pub name: String,
    /// System size; 0 for jobs that sweep all sizes.
    pub n: usize,
    pub replica: u64,
    pub variant: Variant,
    pub seeds: JobSeeds,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    fn new(names: &[&str]) -> Self {
        Table {
            header: names.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for a sub-stream, fully determined by the config's seeds.
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    parts.iter().fold(splitmix(base), |acc, &p| splitmix(acc ^ splitmix(p)))
}

const TAG_GRAPH: u64 = 1;
const TAG_INIT: u64 = 2;
const TAG_NOISE: u64 = 3;

fn seeds_for(cfg: &ExperimentConfig, n: usize, replica: u64, variant: u64) -> JobSeeds {
    JobSeeds {
        graph: derive_seed(cfg.graph.seed, &[TAG_GRAPH, n as u64, replica, variant]),
        init: derive_seed(replica, &[TAG_INIT, n as u64, variant]),
        noise: derive_seed(replica, &[TAG_NOISE, n as u64, variant]),
    }
}

/// Every series an experiment produces, in a fixed order.
pub fn jobs(cfg: &ExperimentConfig) -> Vec<Job> {
    let mut out = Vec::new();
    if cfg.kind == ExperimentKind::GraphScaling {
        for &r in &cfg.replicas {
            out.push(Job {
                name: format!("g{r}"),
                n: 0,
                replica: r,
                variant: Variant::Main,
                seeds: seeds_for(cfg, 0, r, 0),
            });
        }
        return out;
    }
    for &n in &cfg.graph.sizes {
        for &r in &cfg.replicas {
            if cfg.kind == ExperimentKind::AdversarialInit {
                out.push(Job {
                    name: format!("connected_n{n}_r{r}"),
                    n,
                    replica: r,
                    variant: Variant::Connected,
                    seeds: seeds_for(cfg, n, r, 1),
                });
                out.push(Job {
                    name: format!("split_n{n}_r{r}"),
                    n,
                    replica: r,
                    variant: Variant::Split,
                    seeds: seeds_for(cfg, n, r, 2),
                });
            } else {
                out.push(Job {
                    name: format!("n{n}_r{r}"),
                    n,
                    replica: r,
                    variant: Variant::Main,
                    seeds: seeds_for(cfg, n, r, 0),
                });
            }
        }
    }
    out
}

pub fn build_graph(family: &GraphFamily, n: usize, seed: u64) -> Result<SparseGraph> {
    Ok(match family {
        GraphFamily::Complete => gen_complete(n)?,
        GraphFamily::ErdosRenyi { p, symmetric } => gen_erdos_renyi(n, *p, seed, *symmetric)?,
        GraphFamily::Regular { degree } => {
            let d = degree.unwrap_or_else(|| (n as f64).sqrt().ceil() as usize);
            gen_random_regular(n, d, seed)?
        }
    })
}

/// Two independent copies of the family on `n/2` vertices each, normalized
/// as a single graph on `n` vertices with half the dilution. Each half then
/// sees the same coupling scale as the connected graph.
pub fn build_split_graph(family: &GraphFamily, n: usize, seed: u64) -> Result<SparseGraph> {
    if !n.is_multiple_of(2) || n < 4 {
        return Err(LabError::Config(format!("split graph needs an even n ≥ 4, got {n}")));
    }
    let a = build_graph(family, n / 2, derive_seed(seed, &[0]))?;
    let b = build_graph(family, n / 2, derive_seed(seed, &[1]))?;
    Ok(a.disjoint_union(&b, a.dilution() / 2.0)?)
}

fn two_block_spectrum(first: f64, second: f64, n: usize, order: usize) -> Result<EmpiricalSpectrum> {
    let m = n / 2;
    let w1 = m as f64 / n as f64;
    let moments = (1..=order)
        .map(|l| {
            let l = l as f64;
            Complex64::from_polar(w1, l * first) + Complex64::from_polar(1.0 - w1, l * second)
        })
        .collect();
    Ok(EmpiricalSpectrum::from_moments(moments, 0)?)
}

/// Law of the initial condition as a mean-field state.
pub fn mean_field_init(spec: &InitSpec, n: usize, k: f64, order: usize) -> Result<FourierDensity> {
    Ok(match spec {
        InitSpec::Uniform => FourierDensity::uniform(order),
        InitSpec::Cosine { amplitude, phase } => FourierDensity::cosine(order, *amplitude, *phase)?,
        InitSpec::SyncProfile { phase } => solve_sync_state(k, order)?
            .sync()
            .ok_or_else(|| LabError::Config(format!("no synchronized profile for K = {k}")))?
            .density(*phase),
        InitSpec::Point { phase } => {
            FourierDensity::from_spectrum(&EmpiricalSpectrum::point_mass(wrap(*phase)?, order))
        }
        InitSpec::TwoBlock { first, second } => {
            FourierDensity::from_spectrum(&two_block_spectrum(*first, *second, n, order)?)
        }
    })
}

pub fn particle_init(spec: &InitSpec, n: usize, k: f64, order: usize, seed: u64) -> Result<InitialCondition> {
    Ok(match spec {
        InitSpec::Uniform => InitialCondition::IidUniform { seed },
        InitSpec::Cosine { .. } | InitSpec::SyncProfile { .. } => InitialCondition::IidFromDensity {
            density: mean_field_init(spec, n, k, order)?,
            seed,
        },
        InitSpec::Point { phase } => InitialCondition::PointMass(wrap(*phase)?),
        InitSpec::TwoBlock { first, second } => InitialCondition::TwoBlock {
            first: wrap(*first)?,
            second: wrap(*second)?,
            split: BlockSplit::IndexBelow(n / 2),
        },
    })
}

fn sim_params(cfg: &ExperimentConfig, t_end: f64, noise: u64) -> SimParams {
    let m = &cfg.model;
    let mut p = SimParams::new(m.k, m.dt, t_end, m.record_every, noise, m.order);
    // Without coupling the scheme is exact in law for any step.
    p.allow_large_dt = m.k == 0.0;
    p
}

/// Spectra of the particle system at every record.
fn particle_spectra(
    g: &SparseGraph,
    params: &SimParams,
    init: &InitialCondition,
) -> Result<Vec<(f64, EmpiricalSpectrum)>> {
    let mut out = Vec::new();
    simulate_with(g, params, init, |t, angles: &[TorusAngle]| {
        out.push((t, empirical_spectrum(angles, params.order)?));
        Ok(())
    })?;
    Ok(out)
}

/// Moments of the mean-field solution at the particle record times.
fn mean_field_spectra(cfg: &ExperimentConfig, init: &FourierDensity, t_end: f64) -> Result<Vec<(f64, EmpiricalSpectrum)>> {
    let m = &cfg.model;
    let traj = pde_solve(init, &PdeParams::new(m.k, m.dt, t_end, m.record_every))?;
    traj.records
        .iter()
        .map(|(t, d)| Ok((*t, density_moments(d, m.order)?)))
        .collect()
}

fn check_aligned(a: &[(f64, EmpiricalSpectrum)], b: &[(f64, EmpiricalSpectrum)]) -> Result<()> {
    if a.len() != b.len() || a.iter().zip(b).any(|(x, y)| x.0 != y.0) {
        return Err(LabError::Config("particle and mean-field record times differ".into()));
    }
    Ok(())
}

type Records = Vec<(f64, EmpiricalSpectrum)>;

fn distance_to_mean_field(
    cfg: &ExperimentConfig,
    g: &SparseGraph,
    job: &Job,
    t_end: f64,
) -> Result<(Records, Records)> {
    let m = &cfg.model;
    let init = particle_init(&cfg.init, job.n, m.k, m.pde_order, job.seeds.init)?;
    let particles = particle_spectra(g, &sim_params(cfg, t_end, job.seeds.noise), &init)?;
    let mean_field = mean_field_spectra(cfg, &mean_field_init(&cfg.init, job.n, m.k, m.pde_order)?, t_end)?;
    check_aligned(&particles, &mean_field)?;
    Ok((particles, mean_field))
}

fn finite_time(cfg: &ExperimentConfig, job: &Job) -> Result<Table> {
    let g = build_graph(&cfg.graph.family, job.n, job.seeds.graph)?;
    let (particles, mean_field) = distance_to_mean_field(cfg, &g, job, cfg.model.t_end)?;
    let mut table = Table::new(&["t", "dist"]);
    for ((t, a), (_, b)) in particles.iter().zip(&mean_field) {
        table.rows.push(vec![*t, hminus1_distance(a, b)?.value]);
    }
    Ok(table)
}

fn longtime_sub(cfg: &ExperimentConfig, job: &Job) -> Result<Table> {
    let m = &cfg.model;
    let g = build_graph(&cfg.graph.family, job.n, job.seeds.graph)?;
    let init = particle_init(&cfg.init, job.n, m.k, m.pde_order, job.seeds.init)?;
    let uniform = EmpiricalSpectrum::uniform(m.order);
    let mut table = Table::new(&["t", "dist"]);
    simulate_with(&g, &sim_params(cfg, m.t_end, job.seeds.noise), &init, |t, angles| {
        let s = empirical_spectrum(angles, m.order)?;
        table.rows.push(vec![t, hminus1_distance(&s, &uniform)?.value]);
        Ok(())
    })?;
    Ok(table)
}

fn longtime_super(cfg: &ExperimentConfig, job: &Job) -> Result<Table> {
    let m = &cfg.model;
    let g = build_graph(&cfg.graph.family, job.n, job.seeds.graph)?;
    let chart = ManifoldChart::solve(m.k, m.order)?;
    let init = particle_init(&cfg.init, job.n, m.k, m.pde_order, job.seeds.init)?;
    let records = particle_spectra(&g, &sim_params(cfg, m.t_end, job.seeds.noise), &init)?;
    let track = kuramoto_core::manifold::track_phase(&records, &chart)?;
    let mut table = Table::new(&["t", "dist", "psi"]);
    table.rows = track.iter().map(|r| vec![r.time, r.dist, r.psi]).collect();
    Ok(table)
}

fn graph_scaling(cfg: &ExperimentConfig, job: &Job) -> Result<Table> {
    let scaling = cfg.scaling.as_ref().expect("validated");
    let mut table = Table::new(&["n", "norm", "bound", "giant_fraction", "bad_fraction"]);
    for &n in &cfg.graph.sizes {
        let seed = derive_seed(job.seeds.graph, &[n as u64]);
        let g = build_graph(&cfg.graph.family, n, seed)?;
        let norm = deviation_norm_heuristic(&g, scaling.restarts, derive_seed(seed, &[TAG_NOISE]))?
            .normalized(n);
        let bound = match &cfg.graph.family {
            GraphFamily::ErdosRenyi { p, .. } => bernstein_bound(n, *p)?,
            GraphFamily::Regular { .. } | GraphFamily::Complete => mixing_bound(&g)?.bound,
        };
        let a = audit(&g, scaling.delta)?;
        table.rows.push(vec![n as f64, norm, bound, a.giant_fraction, a.bad_fraction]);
    }
    Ok(table)
}

fn adversarial(cfg: &ExperimentConfig, job: &Job) -> Result<Table> {
    let adv = cfg.adversarial.as_ref().expect("validated");
    match job.variant {
        Variant::Connected => {
            let g = build_graph(&cfg.graph.family, job.n, job.seeds.graph)?;
            let (particles, mean_field) = distance_to_mean_field(cfg, &g, job, adv.converge_horizon)?;
            let mut table = Table::new(&["t", "dist"]);
            for ((t, a), (_, b)) in particles.iter().zip(&mean_field) {
                table.rows.push(vec![*t, hminus1_distance(a, b)?.value]);
            }
            Ok(table)
        }
        Variant::Split | Variant::Main => {
            let g = build_split_graph(&cfg.graph.family, job.n, job.seeds.graph)?;
            let (particles, mean_field) = distance_to_mean_field(cfg, &g, job, cfg.model.t_end)?;
            let chart = ManifoldChart::solve(cfg.model.k, cfg.model.order)?;
            let uniform = EmpiricalSpectrum::uniform(cfg.model.order);
            let mut table = Table::new(&["t", "dist_mean_field", "dist_manifold", "dist_uniform"]);
            for ((t, a), (_, b)) in particles.iter().zip(&mean_field) {
                table.rows.push(vec![
                    *t,
                    hminus1_distance(a, b)?.value,
                    dist_to_manifold(a, &chart)?.dist,
                    hminus1_distance(a, &uniform)?.value,
                ]);
            }
            Ok(table)
        }
    }
}

fn brownian(cfg: &ExperimentConfig, job: &Job) -> Result<Table> {
    // Same observable as the subcritical run, at K = 0.
    longtime_sub(cfg, job)
}

pub fn run_job(cfg: &ExperimentConfig, job: &Job) -> Result<Table> {
    match cfg.kind {
        ExperimentKind::FiniteTime => finite_time(cfg, job),
        ExperimentKind::LongtimeSub => longtime_sub(cfg, job),
        ExperimentKind::LongtimeSuper => longtime_super(cfg, job),
        ExperimentKind::BrownianMaximal => brownian(cfg, job),
        ExperimentKind::GraphScaling => graph_scaling(cfg, job),
        ExperimentKind::AdversarialInit => adversarial(cfg, job),
    }
}
