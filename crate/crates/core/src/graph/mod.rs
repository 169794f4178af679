//! Weighted (multi)graphs in compressed sparse row form, their generators,
//! audits, and estimators of the deviation norm `‖ξ/p − 1‖∞→1`.

mod audit;
mod generate;
mod norm;
mod spectrum;

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

pub use audit::{audit, components, GraphAudit};
pub use generate::{gen_complete, gen_erdos_renyi, gen_random_regular, REGULAR_RETRY_CAP};
pub use norm::{
    bernstein_bound, deviation_norm_exact, deviation_norm_heuristic, NormEstimate, NormKind,
    EXACT_SEARCH_CAP,
};
pub use spectrum::{mixing_bound, second_eigenvalue, MixingBound, DENSE_EIGEN_CAP};

/// Adjacency `ξ` of a directed multigraph with dilution `p_n`.
///
/// Row `i` lists the out-neighbours `j` with multiplicity `ξ_ij ≥ 1`, sorted
/// by `j`. Absent entries are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseGraph {
    n: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<u32>,
    weights: Vec<u32>,
    dilution: f64,
    symmetric: bool,
}

impl SparseGraph {
    /// Assemble from directed entries `(i, j, ξ_ij)`. Repeated pairs add up.
    ///
    /// With `symmetric` set every entry must have its mirror of equal weight.
    pub fn from_entries(
        n: usize,
        entries: &[(usize, usize, u32)],
        dilution: f64,
        symmetric: bool,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("graph needs at least one vertex".into()));
        }
        if n > u32::MAX as usize {
            return Err(Error::InvalidParameter(format!("n = {n} does not fit in u32 indices")));
        }
        check_dilution(dilution)?;
        let mut counts = vec![0usize; n + 1];
        for &(i, j, w) in entries {
            if i >= n || j >= n {
                return Err(Error::InvalidParameter(format!(
                    "edge ({i}, {j}) out of range for n = {n}"
                )));
            }
            if w == 0 {
                return Err(Error::InvalidParameter(format!("edge ({i}, {j}) has zero weight")));
            }
            counts[i + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let mut cursor = counts.clone();
        let mut cols = vec![0u32; entries.len()];
        let mut ws = vec![0u32; entries.len()];
        for &(i, j, w) in entries {
            cols[cursor[i]] = j as u32;
            ws[cursor[i]] = w;
            cursor[i] += 1;
        }

        // Sort each row and merge duplicates.
        let mut row_offsets = Vec::with_capacity(n + 1);
        let mut col_indices = Vec::with_capacity(entries.len());
        let mut weights = Vec::with_capacity(entries.len());
        row_offsets.push(0);
        let mut row: Vec<(u32, u32)> = Vec::new();
        for i in 0..n {
            row.clear();
            row.extend(
                cols[counts[i]..counts[i + 1]]
                    .iter()
                    .copied()
                    .zip(ws[counts[i]..counts[i + 1]].iter().copied()),
            );
            row.sort_unstable_by_key(|&(j, _)| j);
            for &(j, w) in &row {
                match col_indices.last() {
                    Some(&last) if col_indices.len() > row_offsets[i] && last == j => {
                        let slot: &mut u32 = weights.last_mut().expect("parallel arrays");
                        *slot = slot.checked_add(w).ok_or_else(|| {
                            Error::InvalidParameter(format!("multiplicity overflow at ({i}, {j})"))
                        })?;
                    }
                    _ => {
                        col_indices.push(j);
                        weights.push(w);
                    }
                }
            }
            row_offsets.push(col_indices.len());
        }

        let g = SparseGraph {
            n,
            row_offsets,
            col_indices,
            weights,
            dilution,
            symmetric,
        };
        if symmetric {
            g.check_symmetric()?;
        }
        Ok(g)
    }

    /// Build directly from sorted, duplicate-free rows. Used by generators.
    pub(crate) fn from_sorted_rows(
        n: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<u32>,
        weights: Vec<u32>,
        dilution: f64,
        symmetric: bool,
    ) -> Self {
        debug_assert_eq!(row_offsets.len(), n + 1);
        debug_assert_eq!(col_indices.len(), weights.len());
        SparseGraph {
            n,
            row_offsets,
            col_indices,
            weights,
            dilution,
            symmetric,
        }
    }

    fn check_symmetric(&self) -> Result<()> {
        for i in 0..self.n {
            for (j, w) in self.neighbors(i) {
                if self.weight(j, i) != w {
                    return Err(Error::InvalidParameter(format!(
                        "symmetric flag set but ξ[{i}][{j}] = {w} ≠ ξ[{j}][{i}] = {}",
                        self.weight(j, i)
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dilution(&self) -> f64 {
        self.dilution
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// Number of stored directed entries (distinct `(i, j)` pairs).
    pub fn nnz(&self) -> usize {
        self.col_indices.len()
    }

    /// `Σ_ij ξ_ij`.
    pub fn total_weight(&self) -> u64 {
        self.weights.iter().map(|&w| w as u64).sum()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[u32] {
        &self.col_indices
    }

    pub fn weights(&self) -> &[u32] {
        &self.weights
    }

    /// `(j, ξ_ij)` for the out-neighbours of `i`.
    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = (usize, u32)> + '_ {
        let range = self.row_offsets[i]..self.row_offsets[i + 1];
        self.col_indices[range.clone()]
            .iter()
            .zip(&self.weights[range])
            .map(|(&j, &w)| (j as usize, w))
    }

    /// `ξ_ij`, zero when absent.
    pub fn weight(&self, i: usize, j: usize) -> u32 {
        let range = self.row_offsets[i]..self.row_offsets[i + 1];
        match self.col_indices[range.clone()].binary_search(&(j as u32)) {
            Ok(k) => self.weights[range.start + k],
            Err(_) => 0,
        }
    }

    /// `Σ_j ξ_ij`.
    pub fn degree(&self, i: usize) -> u64 {
        self.weights[self.row_offsets[i]..self.row_offsets[i + 1]]
            .iter()
            .map(|&w| w as u64)
            .sum()
    }

    /// All directed entries in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, u32)> + '_ {
        (0..self.n).flat_map(move |i| self.neighbors(i).map(move |(j, w)| (i, j, w)))
    }

    pub fn has_self_loops(&self) -> bool {
        (0..self.n).any(|i| self.weight(i, i) != 0)
    }

    /// True when `ξ` is exactly the complete graph without loops.
    pub fn is_complete(&self) -> bool {
        self.nnz() == self.n * (self.n - 1)
            && self.weights.iter().all(|&w| w == 1)
            && !self.has_self_loops()
    }

    /// Same adjacency, different normalization.
    pub fn with_dilution(mut self, dilution: f64) -> Result<Self> {
        check_dilution(dilution)?;
        self.dilution = dilution;
        Ok(self)
    }

    /// Block-diagonal union: vertices of `other` are shifted by `self.n()`.
    pub fn disjoint_union(&self, other: &SparseGraph, dilution: f64) -> Result<Self> {
        check_dilution(dilution)?;
        let shift = self.n;
        let mut row_offsets = self.row_offsets.clone();
        let base = self.nnz();
        row_offsets.extend(other.row_offsets[1..].iter().map(|&o| o + base));
        let mut col_indices = self.col_indices.clone();
        col_indices.extend(other.col_indices.iter().map(|&j| j + shift as u32));
        let mut weights = self.weights.clone();
        weights.extend_from_slice(&other.weights);
        Ok(SparseGraph::from_sorted_rows(
            self.n + other.n,
            row_offsets,
            col_indices,
            weights,
            dilution,
            self.symmetric && other.symmetric,
        ))
    }
}

fn check_dilution(p: f64) -> Result<()> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidParameter(format!("dilution {p} outside (0, 1]")));
    }
    Ok(())
}
