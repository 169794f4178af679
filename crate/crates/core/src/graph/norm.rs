//! `‖ξ/p − 1‖∞→1 = max_{s,t ∈ {±1}ⁿ} Σ_ij (ξ_ij/p − 1) s_j t_i`.
//!
//! For a fixed `s` the best `t` is `sign(Ms)`, so the norm is
//! `max_s Σ_i |(Ms)_i|` with `(Ms)_i = (ξs)_i / p − Σ_j s_j`. The diagonal
//! `M_ii = ξ_ii/p − 1` is included. `M` is never formed: one sparse product
//! and one global sum per evaluation.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::SparseGraph;
use crate::error::{Error, Result};

/// Largest `n` accepted by the exhaustive search (2ⁿ⁻¹ sign vectors).
pub const EXACT_SEARCH_CAP: usize = 22;

/// How a reported norm value relates to the true norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    Exact,
    LowerBound,
    UpperBound,
}

impl NormKind {
    pub fn label(self) -> &'static str {
        match self {
            NormKind::Exact => "exact",
            NormKind::LowerBound => "lower_bound",
            NormKind::UpperBound => "upper_bound",
        }
    }
}

/// A value of `‖ξ/p − 1‖∞→1` (not normalized by n²) with its status.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormEstimate {
    pub value: f64,
    pub kind: NormKind,
}

impl NormEstimate {
    pub fn normalized(&self, n: usize) -> f64 {
        self.value / (n as f64 * n as f64)
    }
}

/// `Σ_i |u_i/p − S|`: the objective for a sign vector with `u = ξs`, `S = Σ s`.
#[inline]
fn objective(u: &[i64], sum_s: i64, inv_p: f64) -> f64 {
    let s = sum_s as f64;
    u.iter().map(|&ui| (ui as f64 * inv_p - s).abs()).sum()
}

/// Exhaustive maximization over sign vectors, Gray-code ordered so each step
/// flips one coordinate and updates `ξs` through one column of `ξ`.
pub fn deviation_norm_exact(g: &SparseGraph) -> Result<NormEstimate> {
    let n = g.n();
    if n > EXACT_SEARCH_CAP {
        return Err(Error::SearchCapExceeded {
            n,
            cap: EXACT_SEARCH_CAP,
        });
    }
    // Columns of ξ: for each j the rows i with ξ_ij ≠ 0.
    let mut col_start = vec![0usize; n + 1];
    for &j in g.col_indices() {
        col_start[j as usize + 1] += 1;
    }
    for j in 0..n {
        col_start[j + 1] += col_start[j];
    }
    let mut cursor = col_start.clone();
    let mut col_rows = vec![(0u32, 0i64); g.nnz()];
    for (i, j, w) in g.entries() {
        col_rows[cursor[j]] = (i as u32, w as i64);
        cursor[j] += 1;
    }

    let inv_p = 1.0 / g.dilution();
    // s = all ones; s and −s give the same objective, so s_0 stays +1.
    let mut s = vec![1i64; n];
    let mut u: Vec<i64> = (0..n).map(|i| g.degree(i) as i64).collect();
    let mut sum_s = n as i64;
    let mut best = objective(&u, sum_s, inv_p);

    let free = n.saturating_sub(1);
    for step in 1u64..(1u64 << free) {
        // Gray code: flip coordinate 1 + trailing_zeros(step).
        let j = 1 + step.trailing_zeros() as usize;
        let old = s[j];
        s[j] = -old;
        sum_s -= 2 * old;
        for &(i, w) in &col_rows[col_start[j]..col_start[j + 1]] {
            u[i as usize] -= 2 * old * w;
        }
        let v = objective(&u, sum_s, inv_p);
        if v > best {
            best = v;
        }
    }
    Ok(NormEstimate {
        value: best,
        kind: NormKind::Exact,
    })
}

/// `u = ξ s` for a ±1 vector.
fn row_product(g: &SparseGraph, s: &[i64], u: &mut [i64]) {
    let offsets = g.row_offsets();
    let cols = g.col_indices();
    let ws = g.weights();
    for (i, ui) in u.iter_mut().enumerate() {
        let mut acc = 0i64;
        for k in offsets[i]..offsets[i + 1] {
            acc += ws[k] as i64 * s[cols[k] as usize];
        }
        *ui = acc;
    }
}

/// `v = ξᵀ t` for a ±1 vector, by scattering rows.
fn column_product(g: &SparseGraph, t: &[i64], v: &mut [i64]) {
    v.iter_mut().for_each(|x| *x = 0);
    let offsets = g.row_offsets();
    let cols = g.col_indices();
    let ws = g.weights();
    for (i, &ti) in t.iter().enumerate() {
        for k in offsets[i]..offsets[i + 1] {
            v[cols[k] as usize] += ws[k] as i64 * ti;
        }
    }
}

#[inline]
fn sign(x: f64) -> i64 {
    if x >= 0.0 {
        1
    } else {
        -1
    }
}

/// Alternating maximization from `restarts` random sign vectors.
///
/// Restart `k` draws from stream `k` of the seeded generator, so the value
/// for `r` restarts is the maximum over a prefix of the value for `r' > r`.
/// Every returned value is attained by some sign vector, hence a lower bound.
pub fn deviation_norm_heuristic(g: &SparseGraph, restarts: usize, seed: u64) -> Result<NormEstimate> {
    if restarts == 0 {
        return Err(Error::InvalidParameter("restarts must be ≥ 1".into()));
    }
    let n = g.n();
    let inv_p = 1.0 / g.dilution();
    let mut s = vec![0i64; n];
    let mut t = vec![0i64; n];
    let mut u = vec![0i64; n];
    let mut v = vec![0i64; n];
    let mut best = f64::NEG_INFINITY;

    for k in 0..restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k as u64);
        for x in s.iter_mut() {
            *x = if rng.random::<bool>() { 1 } else { -1 };
        }
        row_product(g, &s, &mut u);
        let mut sum_s: i64 = s.iter().sum();
        let mut current = objective(&u, sum_s, inv_p);
        loop {
            // t = sign(Ms), then s' = sign(Mᵀt).
            let sf = sum_s as f64;
            for (ti, &ui) in t.iter_mut().zip(&u) {
                *ti = sign(ui as f64 * inv_p - sf);
            }
            column_product(g, &t, &mut v);
            let sum_t: i64 = t.iter().sum();
            let tf = sum_t as f64;
            let mut s_next = s.clone();
            for (sj, &vj) in s_next.iter_mut().zip(&v) {
                *sj = sign(vj as f64 * inv_p - tf);
            }
            row_product(g, &s_next, &mut u);
            let sum_next: i64 = s_next.iter().sum();
            let next = objective(&u, sum_next, inv_p);
            if next > current {
                current = next;
                s = s_next;
                sum_s = sum_next;
            } else {
                break;
            }
        }
        best = best.max(current);
    }
    Ok(NormEstimate {
        value: best,
        kind: NormKind::LowerBound,
    })
}

/// High-probability bound `2/√(n p)` on `(1/n²)‖ξ/p − 1‖∞→1` for
/// Erdős–Rényi graphs.
pub fn bernstein_bound(n: usize, p: f64) -> Result<f64> {
    let np = n as f64 * p;
    if !(np > 0.0) || !np.is_finite() {
        return Err(Error::InvalidParameter(alloc::format!("n·p must be positive, got {np}")));
    }
    Ok(2.0 / libm::sqrt(np))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{gen_complete, gen_erdos_renyi};

    #[test]
    fn complete_graph_norm_is_n() {
        for n in [1, 2, 5, 9] {
            let g = gen_complete(n).unwrap();
            assert_eq!(deviation_norm_exact(&g).unwrap().value, n as f64);
            assert_eq!(deviation_norm_heuristic(&g, 4, 1).unwrap().value, n as f64);
        }
    }

    #[test]
    fn empty_graph_norm_is_n_squared() {
        let g = SparseGraph::from_entries(6, &[], 1.0, true).unwrap();
        assert_eq!(deviation_norm_exact(&g).unwrap().value, 36.0);
        assert_eq!(deviation_norm_heuristic(&g, 1, 0).unwrap().value, 36.0);
    }

    #[test]
    fn exact_search_is_capped() {
        let g = gen_complete(EXACT_SEARCH_CAP + 1).unwrap();
        assert!(matches!(
            deviation_norm_exact(&g),
            Err(Error::SearchCapExceeded { n: 23, cap: 22 })
        ));
    }

    #[test]
    fn more_restarts_never_hurt() {
        let g = gen_erdos_renyi(40, 0.3, 8, false).unwrap();
        let one = deviation_norm_heuristic(&g, 1, 77).unwrap().value;
        let many = deviation_norm_heuristic(&g, 64, 77).unwrap().value;
        assert!(many >= one);
    }

    #[test]
    fn bernstein_values() {
        assert!((bernstein_bound(100, 1.0).unwrap() - 0.2).abs() < 1e-15);
        assert!((bernstein_bound(10_000, 0.01).unwrap() - 0.2).abs() < 1e-15);
        assert!(bernstein_bound(10_usize.pow(8), 0.5).unwrap() < 1e-3);
        assert!(bernstein_bound(0, 0.5).is_err());
    }
}
