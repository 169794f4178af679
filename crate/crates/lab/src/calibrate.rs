//! Calibration of the tolerance scale `c` in `ε(n) = c/√n`.
//!
//! Runs the finite-time comparison on the complete graph, where the graph
//! contributes nothing and only sampling and noise fluctuations remain, and
//! takes the worst observed `√n · sup_t dist` times a safety factor.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, ExperimentKind, GraphFamily, GraphSpec, InitSpec, ModelSpec, Tolerance};
use crate::error::{LabError, Result};
use crate::experiments::{self, Table};
use crate::formats::read_table;

/// Margin between the worst calibration run and the frozen scale.
pub const SAFETY_FACTOR: f64 = 1.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationPoint {
    pub n: usize,
    pub mean_sup: f64,
    pub max_sup: f64,
    /// `√n · max_sup`.
    pub scaled_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub points: Vec<CalibrationPoint>,
    pub safety_factor: f64,
    pub scale: f64,
}

/// The calibration experiment: K = 2, T = 5, cosine start, complete graph.
pub fn calibration_config(sizes: Vec<usize>, replicas: Vec<u64>) -> ExperimentConfig {
    ExperimentConfig {
        kind: ExperimentKind::FiniteTime,
        graph: GraphSpec { family: GraphFamily::Complete, sizes, seed: 0 },
        model: ModelSpec { k: 2.0, dt: 0.005, t_end: 5.0, record_every: 10, order: 64, pde_order: 128 },
        init: InitSpec::Cosine { amplitude: 0.8, phase: 0.0 },
        replicas,
        tolerance: Tolerance::Absolute(f64::MAX),
        transient: 0.0,
        brownian: None,
        scaling: None,
        adversarial: None,
    }
}

pub fn calibrate(cfg: &ExperimentConfig, out_dir: &Path, threads: Option<usize>) -> Result<Calibration> {
    if cfg.kind != ExperimentKind::FiniteTime || cfg.graph.family != GraphFamily::Complete {
        return Err(LabError::Config("calibration runs finite_time on the complete graph".into()));
    }
    experiments::run(cfg, out_dir, threads)?;
    let mut points = Vec::new();
    for &n in &cfg.graph.sizes {
        let mut sups = Vec::new();
        for job in experiments::jobs(cfg).iter().filter(|j| j.n == n) {
            let (header, rows) = read_table(&out_dir.join(format!("series/{}.csv", job.name)))?;
            let table = Table { header, rows };
            sups.push(table.rows.iter().map(|r| r[1]).fold(f64::NEG_INFINITY, f64::max));
        }
        let max_sup = sups.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        points.push(CalibrationPoint {
            n,
            mean_sup: sups.iter().sum::<f64>() / sups.len() as f64,
            max_sup,
            scaled_max: max_sup * (n as f64).sqrt(),
        });
    }
    let worst = points.iter().map(|p| p.scaled_max).fold(0.0, f64::max);
    Ok(Calibration { points, safety_factor: SAFETY_FACTOR, scale: SAFETY_FACTOR * worst })
}
