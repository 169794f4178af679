//! Pass/fail summaries, computed from the stored series alone.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::protocols::{Job, Table, Variant};
use crate::config::{ExperimentConfig, ExperimentKind};
use crate::error::{LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = "<")]
    Below,
    #[serde(rename = ">=")]
    AtLeast,
}

impl Relation {
    pub fn holds(self, value: f64, threshold: f64) -> bool {
        match self {
            Relation::AtMost => value <= threshold,
            Relation::Below => value < threshold,
            Relation::AtLeast => value >= threshold,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::AtMost => "<=",
            Relation::Below => "<",
            Relation::AtLeast => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub relation: Relation,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    fn new(name: impl Into<String>, value: f64, relation: Relation, threshold: f64) -> Self {
        Check {
            name: name.into(),
            value,
            relation,
            threshold,
            pass: relation.holds(value, threshold),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub label: String,
    pub stats: BTreeMap<String, f64>,
}

impl Row {
    fn new(label: impl Into<String>, stats: &[(&str, f64)]) -> Self {
        Row {
            label: label.into(),
            stats: stats.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub rows: Vec<Row>,
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl Summary {
    fn from_parts(rows: Vec<Row>, checks: Vec<Check>) -> Self {
        let pass = !checks.is_empty() && checks.iter().all(|c| c.pass);
        Summary { rows, checks, pass }
    }
}

/// Record times are `step · dt`, so window edges are compared with a little slack.
const TIME_SLACK: f64 = 1e-9;

fn column(table: &Table, name: &str) -> Result<usize> {
    table
        .header
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| LabError::Config(format!("series has no column `{name}`")))
}

/// Largest value of `col` over records with `t ≥ from`.
fn sup_after(table: &Table, col: &str, from: f64) -> Result<f64> {
    let (t, c) = (column(table, "t")?, column(table, col)?);
    let sup = table
        .rows
        .iter()
        .filter(|r| r[t] >= from)
        .map(|r| r[c])
        .fold(f64::NEG_INFINITY, f64::max);
    if sup == f64::NEG_INFINITY {
        return Err(LabError::Config(format!("no records after t = {from}")));
    }
    Ok(sup)
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn std_dev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

fn max(xs: &[f64]) -> f64 {
    xs.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

fn min(xs: &[f64]) -> f64 {
    xs.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Least-squares slope of `log y` against `log n`.
fn log_slope(ns: &[usize], ys: &[f64]) -> f64 {
    let xs: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let ls: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let (mx, my) = (mean(&xs), mean(&ls));
    let num: f64 = xs.iter().zip(&ls).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Largest step up between consecutive entries; negative when strictly decreasing.
fn largest_increase(xs: &[f64]) -> f64 {
    xs.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max)
}

fn per_size(series: &[(Job, Table)], n: usize, variant: Variant) -> impl Iterator<Item = &Table> {
    series
        .iter()
        .filter(move |(j, _)| j.n == n && j.variant == variant)
        .map(|(_, t)| t)
}

fn sups_by_size(cfg: &ExperimentConfig, series: &[(Job, Table)], col: &str, from: f64, variant: Variant) -> Result<Vec<Vec<f64>>> {
    cfg.graph
        .sizes
        .iter()
        .map(|&n| per_size(series, n, variant).map(|t| sup_after(t, col, from)).collect())
        .collect()
}

fn finite_time(cfg: &ExperimentConfig, series: &[(Job, Table)]) -> Result<Summary> {
    let sups = sups_by_size(cfg, series, "dist", cfg.transient, Variant::Main)?;
    let sizes = &cfg.graph.sizes;
    let means: Vec<f64> = sups.iter().map(|s| mean(s)).collect();
    let mut rows: Vec<Row> = sizes
        .iter()
        .zip(&sups)
        .map(|(n, s)| {
            Row::new(format!("n={n}"), &[("mean_sup", mean(s)), ("sd_sup", std_dev(s)), ("max_sup", max(s))])
        })
        .collect();
    rows.push(Row::new("trend", &[("log_slope", log_slope(sizes, &means))]));
    let n_max = *sizes.last().expect("validated");
    let mut checks = Vec::new();
    if sizes.len() > 1 {
        checks.push(Check::new("mean sup non-increasing in n", largest_increase(&means), Relation::AtMost, 0.0));
    }
    checks.push(Check::new(
        format!("mean sup at n={n_max}"),
        *means.last().expect("validated"),
        Relation::AtMost,
        cfg.tolerance.epsilon(n_max),
    ));
    Ok(Summary::from_parts(rows, checks))
}

/// Long-time runs: every replica's sup after the transient stays below ε(n).
fn longtime(cfg: &ExperimentConfig, series: &[(Job, Table)]) -> Result<Summary> {
    let sups = sups_by_size(cfg, series, "dist", cfg.transient, Variant::Main)?;
    let sizes = &cfg.graph.sizes;
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    for (&n, s) in sizes.iter().zip(&sups) {
        rows.push(Row::new(format!("n={n}"), &[("mean_sup", mean(s)), ("sd_sup", std_dev(s)), ("max_sup", max(s))]));
        checks.push(Check::new(format!("max sup at n={n}"), max(s), Relation::AtMost, cfg.tolerance.epsilon(n)));
    }
    if sizes.len() > 1 {
        let means: Vec<f64> = sups.iter().map(|s| mean(s)).collect();
        rows.push(Row::new("trend", &[("log_slope", log_slope(sizes, &means))]));
    }
    Ok(Summary::from_parts(rows, checks))
}

fn brownian(cfg: &ExperimentConfig, series: &[(Job, Table)]) -> Result<Summary> {
    let spec = cfg.brownian.as_ref().expect("validated");
    let sizes = &cfg.graph.sizes;
    let mut rows = Vec::new();
    let mut fitted = Vec::new();
    // estimates[horizon][size]
    let mut estimates = vec![Vec::new(); spec.horizons.len()];
    for &n in sizes {
        let tables: Vec<&Table> = per_size(series, n, Variant::Main).collect();
        for (h, &horizon) in spec.horizons.iter().enumerate() {
            let mut sq = Vec::with_capacity(tables.len());
            for t in &tables {
                let (tc, dc) = (column(t, "t")?, column(t, "dist")?);
                let sup = t
                    .rows
                    .iter()
                    .filter(|r| r[tc] >= spec.t0 - TIME_SLACK && r[tc] <= horizon + TIME_SLACK)
                    .map(|r| r[dc] * r[dc])
                    .fold(f64::NEG_INFINITY, f64::max);
                sq.push(sup);
            }
            let est = mean(&sq);
            let window = (1.0 + horizon - spec.t0).ln();
            let mut stats = vec![("estimate", est), ("sd", std_dev(&sq)), ("n_times_estimate", est * n as f64)];
            if window > 0.0 {
                let c = est * n as f64 / window;
                stats.push(("fitted_constant", c));
                fitted.push(c);
            }
            rows.push(Row::new(format!("n={n},T={horizon}"), &stats));
            estimates[h].push(est);
        }
    }
    let mut checks = Vec::new();
    if !fitted.is_empty() {
        checks.push(Check::new("fitted constant spread", max(&fitted) / min(&fitted), Relation::Below, spec.max_spread));
    }
    if sizes.len() > 1 {
        let mut worst: f64 = 0.0;
        for est in &estimates {
            for (w, e) in sizes.windows(2).zip(est.windows(2)) {
                let ratio = (e[0] * w[0] as f64) / (e[1] * w[1] as f64);
                worst = worst.max((ratio - 1.0).abs());
            }
        }
        checks.push(Check::new("deviation from 1/n scaling", worst, Relation::AtMost, spec.scaling_tolerance));
    }
    Ok(Summary::from_parts(rows, checks))
}

fn graph_scaling(cfg: &ExperimentConfig, series: &[(Job, Table)]) -> Result<Summary> {
    let sizes = &cfg.graph.sizes;
    let mut rows = Vec::new();
    let mut means = Vec::new();
    let mut worst_gap = f64::NEG_INFINITY;
    for &n in sizes {
        let mut norms = Vec::new();
        let mut bounds = Vec::new();
        let mut giant = Vec::new();
        let mut bad = Vec::new();
        for (_, t) in series {
            let c = |name| column(t, name);
            let (nc, norm, bound, gc, bc) = (c("n")?, c("norm")?, c("bound")?, c("giant_fraction")?, c("bad_fraction")?);
            for r in t.rows.iter().filter(|r| r[nc] == n as f64) {
                norms.push(r[norm]);
                bounds.push(r[bound]);
                giant.push(r[gc]);
                bad.push(r[bc]);
                worst_gap = worst_gap.max(r[norm] - r[bound]);
            }
        }
        if norms.is_empty() {
            return Err(LabError::Config(format!("no graph_scaling rows for n = {n}")));
        }
        means.push(mean(&norms));
        rows.push(Row::new(
            format!("n={n}"),
            &[
                ("mean_norm", mean(&norms)),
                ("max_norm", max(&norms)),
                ("max_bound", max(&bounds)),
                ("mean_giant_fraction", mean(&giant)),
                ("mean_bad_fraction", mean(&bad)),
            ],
        ));
    }
    rows.push(Row::new("trend", &[("log_slope", log_slope(sizes, &means))]));
    let mut checks = vec![Check::new("max(norm - bound) over instances", worst_gap, Relation::AtMost, 0.0)];
    if sizes.len() > 1 {
        checks.push(Check::new("mean norm strictly decreasing in n", largest_increase(&means), Relation::Below, 0.0));
    }
    Ok(Summary::from_parts(rows, checks))
}

fn adversarial(cfg: &ExperimentConfig, series: &[(Job, Table)]) -> Result<Summary> {
    let adv = cfg.adversarial.as_ref().expect("validated");
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    for &n in &cfg.graph.sizes {
        let connected: Vec<f64> = per_size(series, n, Variant::Connected)
            .map(|t| sup_after(t, "dist", 0.0))
            .collect::<Result<_>>()?;
        let mut split = Vec::new();
        for t in per_size(series, n, Variant::Split) {
            let last = t.rows.last().ok_or_else(|| LabError::Config("empty split series".into()))?;
            let closest = ["dist_mean_field", "dist_manifold", "dist_uniform"]
                .iter()
                .map(|name| column(t, name).map(|c| last[c]))
                .collect::<Result<Vec<f64>>>()?;
            split.push(min(&closest));
        }
        rows.push(Row::new(
            format!("n={n}"),
            &[
                ("connected_max_sup", max(&connected)),
                ("connected_mean_sup", mean(&connected)),
                ("split_min_final_dist", min(&split)),
                ("split_mean_final_dist", mean(&split)),
            ],
        ));
        checks.push(Check::new(
            format!("connected max sup at n={n}"),
            max(&connected),
            Relation::AtMost,
            cfg.tolerance.epsilon(n),
        ));
        checks.push(Check::new(
            format!("split min final distance at n={n}"),
            min(&split),
            Relation::AtLeast,
            adv.floor,
        ));
    }
    Ok(Summary::from_parts(rows, checks))
}

/// Summary of an experiment given its series, in job order.
pub fn summarize(cfg: &ExperimentConfig, series: &[(Job, Table)]) -> Result<Summary> {
    match cfg.kind {
        ExperimentKind::FiniteTime => finite_time(cfg, series),
        ExperimentKind::LongtimeSub | ExperimentKind::LongtimeSuper => longtime(cfg, series),
        ExperimentKind::BrownianMaximal => brownian(cfg, series),
        ExperimentKind::GraphScaling => graph_scaling(cfg, series),
        ExperimentKind::AdversarialInit => adversarial(cfg, series),
    }
}
