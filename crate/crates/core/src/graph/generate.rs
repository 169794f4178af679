use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::SparseGraph;
use crate::error::{Error, Result};

/// Attempts allowed before random regular generation gives up.
pub const REGULAR_RETRY_CAP: usize = 10_000;

/// `ξ_ij = 1` for every `i ≠ j`, dilution 1.
pub fn gen_complete(n: usize) -> Result<SparseGraph> {
    if n == 0 {
        return Err(Error::InvalidParameter("complete graph needs n ≥ 1".into()));
    }
    let mut row_offsets = Vec::with_capacity(n + 1);
    let mut cols = Vec::with_capacity(n * (n - 1));
    row_offsets.push(0);
    for i in 0..n {
        cols.extend((0..n).filter(|&j| j != i).map(|j| j as u32));
        row_offsets.push(cols.len());
    }
    let weights = vec![1; cols.len()];
    Ok(SparseGraph::from_sorted_rows(n, row_offsets, cols, weights, 1.0, true))
}

/// Number of failures before the next success of a Bernoulli(p) sequence.
#[inline]
fn geometric_skip(rng: &mut ChaCha8Rng, log_q: f64) -> u64 {
    // u ∈ (0, 1]
    let u = 1.0 - rng.random::<f64>();
    let k = libm::floor(libm::log(u) / log_q);
    if k >= u64::MAX as f64 {
        u64::MAX
    } else {
        k as u64
    }
}

/// Erdős–Rényi graph without loops: every ordered pair (or, if `symmetric`,
/// every unordered pair) is an edge independently with probability `p`.
///
/// Candidates are visited by geometric skipping, so the cost is
/// `O(n + edges)`. The output depends only on `(n, p, seed, symmetric)`.
pub fn gen_erdos_renyi(n: usize, p: f64, seed: u64, symmetric: bool) -> Result<SparseGraph> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("Erdős–Rényi graph needs n ≥ 2, got {n}")));
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidParameter(format!("edge probability {p} outside (0, 1]")));
    }
    if p == 1.0 {
        return gen_complete(n)?.with_dilution(1.0).map(|g| mark_symmetric(g, symmetric));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let log_q = libm::log1p(-p);

    if !symmetric {
        // Ordered pairs i ≠ j enumerated row-major, skipping the diagonal.
        let slots = (n as u64) * (n as u64 - 1);
        let per_row = n as u64 - 1;
        let mut rows: Vec<Vec<u32>> = vec![Vec::new(); n];
        let mut k = geometric_skip(&mut rng, log_q);
        while k < slots {
            let i = (k / per_row) as usize;
            let jj = (k % per_row) as usize;
            let j = if jj >= i { jj + 1 } else { jj };
            rows[i].push(j as u32);
            k = k.saturating_add(1).saturating_add(geometric_skip(&mut rng, log_q));
        }
        return Ok(assemble(n, rows, p, false));
    }

    // Unordered pairs i < j, row-major over the strict upper triangle.
    let mut rows: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut i = 0usize;
    let mut row_start = 0u64;
    let mut row_len = (n - 1) as u64;
    let total = (n as u64) * (n as u64 - 1) / 2;
    let mut k = geometric_skip(&mut rng, log_q);
    while k < total {
        while k >= row_start + row_len {
            row_start += row_len;
            i += 1;
            row_len -= 1;
        }
        let j = i + 1 + (k - row_start) as usize;
        rows[i].push(j as u32);
        rows[j].push(i as u32);
        k = k.saturating_add(1).saturating_add(geometric_skip(&mut rng, log_q));
    }
    for r in rows.iter_mut() {
        r.sort_unstable();
    }
    Ok(assemble(n, rows, p, true))
}

fn mark_symmetric(mut g: SparseGraph, symmetric: bool) -> SparseGraph {
    g.symmetric = symmetric;
    g
}

fn assemble(n: usize, rows: Vec<Vec<u32>>, dilution: f64, symmetric: bool) -> SparseGraph {
    let mut row_offsets = Vec::with_capacity(n + 1);
    let nnz = rows.iter().map(Vec::len).sum();
    let mut cols = Vec::with_capacity(nnz);
    row_offsets.push(0);
    for r in rows {
        cols.extend_from_slice(&r);
        row_offsets.push(cols.len());
    }
    let weights = vec![1; cols.len()];
    SparseGraph::from_sorted_rows(n, row_offsets, cols, weights, dilution, symmetric)
}

/// Simple undirected `d`-regular graph, dilution `d/n`.
///
/// Stub pairing with local rejection: stubs are shuffled and paired, pairs
/// that would form a loop or a repeated edge go back to the pool, and the
/// pool is reshuffled until it empties. An attempt restarts from scratch
/// only when the leftover stubs admit no valid pair.
pub fn gen_random_regular(n: usize, d: usize, seed: u64) -> Result<SparseGraph> {
    if d == 0 || d >= n || (n * d) % 2 == 1 {
        return Err(Error::InvalidParameter(format!(
            "no simple {d}-regular graph on {n} vertices"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..REGULAR_RETRY_CAP {
        if let Some(edges) = try_pairing(n, d, &mut rng) {
            let mut rows: Vec<Vec<u32>> = vec![Vec::with_capacity(d); n];
            for (a, b) in edges {
                rows[a as usize].push(b);
                rows[b as usize].push(a);
            }
            for r in rows.iter_mut() {
                r.sort_unstable();
            }
            return Ok(assemble(n, rows, d as f64 / n as f64, true));
        }
    }
    Err(Error::RetryCapExceeded(REGULAR_RETRY_CAP))
}

fn try_pairing(n: usize, d: usize, rng: &mut ChaCha8Rng) -> Option<BTreeSet<(u32, u32)>> {
    let mut edges = BTreeSet::new();
    let mut stubs: Vec<u32> = (0..n as u32).flat_map(|v| core::iter::repeat_n(v, d)).collect();
    while !stubs.is_empty() {
        stubs.shuffle(rng);
        let mut leftover = Vec::new();
        for pair in stubs.chunks_exact(2) {
            let (a, b) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if a != b && edges.insert((a, b)) {
                continue;
            }
            leftover.push(pair[0]);
            leftover.push(pair[1]);
        }
        if !leftover.is_empty() && !has_valid_pair(&leftover, &edges) {
            return None;
        }
        stubs = leftover;
    }
    Some(edges)
}

fn has_valid_pair(stubs: &[u32], edges: &BTreeSet<(u32, u32)>) -> bool {
    let mut vertices: Vec<u32> = stubs.to_vec();
    vertices.sort_unstable();
    vertices.dedup();
    for (k, &a) in vertices.iter().enumerate() {
        for &b in &vertices[k + 1..] {
            if !edges.contains(&(a, b)) {
                return true;
            }
        }
    }
    false
}
