//! Distance from a measure to the circle of stationary profiles `q(· − ψ)`.
//!
//! `D(ψ)² = Σ_{l=1}^{L} |m_l(μ) − e^{ilψ} m_l(q)|² / l²` is minimized by a
//! scan over [`SCAN_POINTS`] phases followed by golden-section refinement in
//! the best bracket. The minimizing phase is a diagnostic stand-in for the
//! spectral projection onto the manifold; the two agree to first order near it.

use alloc::vec::Vec;
use core::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::mean_field::{solve_sync_state, SyncState};
use crate::torus::{EmpiricalSpectrum, TorusAngle};

pub const SCAN_POINTS: usize = 1024;
/// Final bracket width of the phase refinement.
pub const PHASE_TOL: f64 = 1e-12;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldChart {
    pub sync: SyncState,
    /// `m_l(q)` for `l = 1..=L`.
    pub profile_moments: Vec<f64>,
}

impl ManifoldChart {
    pub fn new(sync: SyncState) -> Result<Self> {
        if sync.moments.is_empty() {
            return Err(Error::Empty("profile moments"));
        }
        let profile_moments = sync.moments.clone();
        Ok(ManifoldChart {
            sync,
            profile_moments,
        })
    }

    /// Chart for coupling `k > 1` at truncation `order`.
    pub fn solve(k: f64, order: usize) -> Result<Self> {
        match solve_sync_state(k, order)?.sync() {
            Some(s) => Self::new(s),
            None => Err(Error::InvalidParameter(alloc::format!(
                "no synchronized profile for K = {k}"
            ))),
        }
    }

    pub fn order(&self) -> usize {
        self.profile_moments.len()
    }

    /// Moments of `q(· − ψ)`.
    pub fn spectrum(&self, psi: f64) -> EmpiricalSpectrum {
        self.sync.spectrum(psi)
    }

    fn distance_sq(&self, m: &[Complex64], psi: f64) -> f64 {
        let step = Complex64::from_polar(1.0, psi);
        let mut phase = Complex64::new(1.0, 0.0);
        let mut acc = 0.0;
        for (l, (ml, &ql)) in m.iter().zip(&self.profile_moments).enumerate() {
            phase *= step;
            let l = (l + 1) as f64;
            acc += (ml - phase * ql).norm_sqr() / (l * l);
        }
        acc
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManifoldDistance {
    pub dist: f64,
    pub psi_star: TorusAngle,
}

/// `inf_ψ ‖μ − q_ψ‖₋₁` at the chart's truncation, with its argmin.
pub fn dist_to_manifold(spec: &EmpiricalSpectrum, chart: &ManifoldChart) -> Result<ManifoldDistance> {
    dist_to_manifold_scan(spec, chart, SCAN_POINTS)
}

/// [`dist_to_manifold`] with a custom coarse grid size.
pub fn dist_to_manifold_scan(
    spec: &EmpiricalSpectrum,
    chart: &ManifoldChart,
    scan_points: usize,
) -> Result<ManifoldDistance> {
    if scan_points < 3 {
        return Err(Error::InvalidParameter("scan needs at least 3 phases".into()));
    }
    if spec.order() != chart.order() {
        return Err(Error::OrderMismatch(spec.order(), chart.order()));
    }
    let m = spec.moments();
    let h = TAU / scan_points as f64;
    let (mut best_k, mut best) = (0usize, f64::INFINITY);
    for k in 0..scan_points {
        let v = chart.distance_sq(m, k as f64 * h);
        if v < best {
            best = v;
            best_k = k;
        }
    }
    let centre = best_k as f64 * h;
    let (mut a, mut b) = (centre - h, centre + h);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = chart.distance_sq(m, x1);
    let mut f2 = chart.distance_sq(m, x2);
    while b - a > PHASE_TOL {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = chart.distance_sq(m, x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = chart.distance_sq(m, x2);
        }
    }
    let (mut psi, mut value) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    if best < value {
        psi = centre;
        value = best;
    }
    Ok(ManifoldDistance {
        dist: libm::sqrt(value),
        psi_star: TorusAngle::wrap_finite(psi),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseRecord {
    pub time: f64,
    pub dist: f64,
    /// Continuous lift of the minimizing phase.
    pub psi: f64,
}

/// [`dist_to_manifold`] along a recorded path, with the phase unwrapped by
/// the nearest-lift rule.
pub fn track_phase(records: &[(f64, EmpiricalSpectrum)], chart: &ManifoldChart) -> Result<Vec<PhaseRecord>> {
    let mut out: Vec<PhaseRecord> = Vec::with_capacity(records.len());
    for (t, spec) in records {
        let d = dist_to_manifold(spec, chart)?;
        let raw = d.psi_star.value();
        let psi = match out.last() {
            None => raw,
            Some(prev) => {
                let delta = libm::remainder(raw - prev.psi, TAU);
                prev.psi + delta
            }
        };
        out.push(PhaseRecord {
            time: *t,
            dist: d.dist,
            psi,
        });
    }
    Ok(out)
}
