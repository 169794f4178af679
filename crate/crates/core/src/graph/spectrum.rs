use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use super::SparseGraph;
use crate::error::{Error, Result};

/// Above this size the second eigenvalue comes from power iteration.
pub const DENSE_EIGEN_CAP: usize = 2000;

const POWER_MAX_ITERS: usize = 20_000;
const POWER_TOL: f64 = 1e-12;

/// Expander-mixing bound `4λ/d` on `(1/n²)‖(n/d)ξ − 1‖∞→1` for a
/// `d`-regular symmetric graph.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixingBound {
    pub degree: usize,
    /// Second largest eigenvalue modulus of the adjacency matrix.
    pub lambda: f64,
    pub bound: f64,
}

fn regular_degree(g: &SparseGraph) -> Result<usize> {
    if !g.is_symmetric() {
        return Err(Error::NotRegular("adjacency is not marked symmetric".into()));
    }
    let d = g.degree(0);
    if let Some(i) = (1..g.n()).find(|&i| g.degree(i) != d) {
        return Err(Error::NotRegular(format!(
            "vertex {i} has degree {} but vertex 0 has degree {d}",
            g.degree(i)
        )));
    }
    if d == 0 {
        return Err(Error::NotRegular("graph has no edges".into()));
    }
    Ok(d as usize)
}

/// Second largest `|eigenvalue|` of a symmetric adjacency matrix.
///
/// Dense symmetric eigensolve up to [`DENSE_EIGEN_CAP`] vertices. Above that,
/// power iteration on `A²` restricted to the complement of the all-ones
/// vector, which is the top eigenvector of a regular graph.
pub fn second_eigenvalue(g: &SparseGraph) -> Result<f64> {
    let n = g.n();
    if n < 2 {
        return Err(Error::InvalidParameter("need at least two vertices".into()));
    }
    if !g.is_symmetric() {
        return Err(Error::InvalidParameter("adjacency must be symmetric".into()));
    }
    if n <= DENSE_EIGEN_CAP {
        let mut a = DMatrix::<f64>::zeros(n, n);
        for (i, j, w) in g.entries() {
            a[(i, j)] = w as f64;
        }
        let mut moduli: Vec<f64> = a.symmetric_eigenvalues().iter().map(|x| x.abs()).collect();
        moduli.sort_by(|x, y| y.total_cmp(x));
        return Ok(moduli[1]);
    }
    Ok(deflated_power_iteration(g))
}

fn apply(g: &SparseGraph, x: &[f64], y: &mut [f64]) {
    let offsets = g.row_offsets();
    let cols = g.col_indices();
    let ws = g.weights();
    for (i, yi) in y.iter_mut().enumerate() {
        let mut acc = 0.0;
        for k in offsets[i]..offsets[i + 1] {
            acc += ws[k] as f64 * x[cols[k] as usize];
        }
        *yi = acc;
    }
}

fn project_out_ones(x: &mut [f64]) {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    x.iter_mut().for_each(|v| *v -= mean);
}

fn normalize(x: &mut [f64]) -> f64 {
    let norm = libm::sqrt(x.iter().map(|v| v * v).sum::<f64>());
    if norm > 0.0 {
        x.iter_mut().for_each(|v| *v /= norm);
    }
    norm
}

fn deflated_power_iteration(g: &SparseGraph) -> f64 {
    let n = g.n();
    // Deterministic, generic start vector.
    let mut x: Vec<f64> = (0..n)
        .map(|i| libm::sin(1.0 + i as f64 * 0.754_877_666) + 0.1 * libm::cos(i as f64 * 2.1))
        .collect();
    project_out_ones(&mut x);
    normalize(&mut x);
    let mut y = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut estimate = 0.0;
    for _ in 0..POWER_MAX_ITERS {
        apply(g, &x, &mut y);
        apply(g, &y, &mut z);
        project_out_ones(&mut z);
        // Rayleigh quotient of A² at unit x.
        let rq: f64 = x.iter().zip(&z).map(|(a, b)| a * b).sum();
        let next = libm::sqrt(rq.max(0.0));
        normalize(&mut z);
        core::mem::swap(&mut x, &mut z);
        if (next - estimate).abs() <= POWER_TOL * next.max(1.0) {
            return next;
        }
        estimate = next;
    }
    estimate
}

/// `4λ/d` after verifying the graph is symmetric and regular.
pub fn mixing_bound(g: &SparseGraph) -> Result<MixingBound> {
    let d = regular_degree(g)?;
    let lambda = second_eigenvalue(g)?;
    Ok(MixingBound {
        degree: d,
        lambda,
        bound: 4.0 * lambda / d as f64,
    })
}
