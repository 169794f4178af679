//! Experiment harness.
//!
//! A run writes one directory:
//!
//! ```text
//! <out>/config.json
//! <out>/series/<replica>.csv
//! <out>/report.json
//! ```
//!
//! Replicas run on a rayon pool. Every replica draws only from seeds derived
//! from the config, so the series do not depend on the thread count.

pub mod protocols;
pub mod summary;

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use protocols::{derive_seed, jobs, run_job, Job, JobSeeds, Table, Variant};
pub use summary::{summarize, Check, Relation, Row, Summary};

use crate::config::ExperimentConfig;
use crate::error::{io_err, LabError, Result};
use crate::formats::{read_table, write_table};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fingerprint {
    pub version: String,
    pub threads: usize,
    pub os: String,
    pub arch: String,
}

impl Fingerprint {
    pub fn current(threads: usize) -> Self {
        Fingerprint {
            version: env!("CARGO_PKG_VERSION").to_string(),
            threads,
            os: std::env::consts::OS.to_string(),
            arch: std::env::consts::ARCH.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesEntry {
    pub name: String,
    /// Relative to the experiment directory.
    pub path: String,
    pub n: usize,
    pub replica: u64,
    pub seeds: JobSeeds,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub kind: String,
    pub config: ExperimentConfig,
    pub fingerprint: Fingerprint,
    pub series: Vec<SeriesEntry>,
    pub summary: Summary,
    pub pass: bool,
}

pub const CONFIG_FILE: &str = "config.json";
pub const REPORT_FILE: &str = "report.json";
pub const SERIES_DIR: &str = "series";

fn series_path(job: &Job) -> String {
    format!("{SERIES_DIR}/{}.csv", job.name)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(io_err(path))
}

/// Run every replica of `cfg` and write the experiment directory.
///
/// `threads = None` uses rayon's default. A failing replica aborts the run;
/// series already written stay on disk.
pub fn run(cfg: &ExperimentConfig, out_dir: &Path, threads: Option<usize>) -> Result<ExperimentReport> {
    cfg.validate()?;
    std::fs::create_dir_all(out_dir.join(SERIES_DIR)).map_err(io_err(out_dir))?;
    write_json(&out_dir.join(CONFIG_FILE), cfg)?;

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| LabError::Config(e.to_string()))?;
    let thread_count = pool.current_num_threads();

    let jobs = jobs(cfg);
    let outcomes: Vec<Result<()>> = pool.install(|| {
        jobs.par_iter()
            .map(|job| {
                let table = run_job(cfg, job)?;
                write_table(&out_dir.join(series_path(job)), &table.header, &table.rows)
            })
            .collect()
    });
    outcomes.into_iter().collect::<Result<Vec<()>>>()?;

    let summary = summarize_series(cfg, out_dir, &jobs)?;
    let report = ExperimentReport {
        kind: cfg.kind.name().to_string(),
        config: cfg.clone(),
        fingerprint: Fingerprint::current(thread_count),
        series: jobs
            .iter()
            .map(|j| SeriesEntry {
                name: j.name.clone(),
                path: series_path(j),
                n: j.n,
                replica: j.replica,
                seeds: j.seeds,
            })
            .collect(),
        pass: summary.pass,
        summary,
    };
    write_json(&out_dir.join(REPORT_FILE), &report)?;
    Ok(report)
}

fn summarize_series(cfg: &ExperimentConfig, dir: &Path, jobs: &[Job]) -> Result<Summary> {
    let series = jobs
        .iter()
        .map(|job| {
            let (header, rows) = read_table(&dir.join(series_path(job)))?;
            Ok((job.clone(), Table { header, rows }))
        })
        .collect::<Result<Vec<_>>>()?;
    summarize(cfg, &series)
}

/// Recompute the summary of an experiment directory from `config.json` and
/// the stored series.
pub fn summarize_dir(dir: &Path) -> Result<(ExperimentConfig, Summary)> {
    let cfg = ExperimentConfig::load(&dir.join(CONFIG_FILE))?;
    let summary = summarize_series(&cfg, dir, &jobs(&cfg))?;
    Ok((cfg, summary))
}

pub fn load_report(dir: &Path) -> Result<ExperimentReport> {
    let path = dir.join(REPORT_FILE);
    let text = std::fs::read_to_string(&path).map_err(io_err(&path))?;
    Ok(serde_json::from_str(&text)?)
}

/// Paths of every series file, in job order.
pub fn series_files(cfg: &ExperimentConfig, dir: &Path) -> Vec<PathBuf> {
    jobs(cfg).iter().map(|j| dir.join(series_path(j))).collect()
}

/// Markdown rendering of a summary.
pub fn render_markdown(kind: &str, summary: &Summary) -> String {
    let mut out = format!("# {kind}\n\n");
    out.push_str(if summary.pass { "**PASS**\n\n" } else { "**FAIL**\n\n" });
    out.push_str("| check | value | | threshold | pass |\n|---|---|---|---|---|\n");
    for c in &summary.checks {
        out.push_str(&format!(
            "| {} | {:.6} | {} | {:.6} | {} |\n",
            c.name,
            c.value,
            c.relation.symbol(),
            c.threshold,
            if c.pass { "yes" } else { "no" }
        ));
    }
    for row in &summary.rows {
        out.push_str(&format!("\n## {}\n\n", row.label));
        for (k, v) in &row.stats {
            out.push_str(&format!("- {k}: {v:.6}\n"));
        }
    }
    out
}
