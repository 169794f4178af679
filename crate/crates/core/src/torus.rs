//! Angles on the circle ℝ/2πℤ, truncated circular moments of probability
//! measures, and the H⁻¹ distance built from them.
//!
//! A probability measure μ on the torus is represented by its moments
//! `m_l = ∫ e^{ilθ} dμ(θ)` for `l = 1..=L`. Negative modes are conjugates and
//! `m_0 = 1`, so neither is stored. The H⁻¹ distance between two measures is
//!
//! ```text
//! ‖μ − ν‖₋₁ = sqrt( Σ_{l ≥ 1} |m_l(μ) − m_l(ν)|² / l² )
//! ```
//!
//! and every distance computed here is the truncation of that series at `L`,
//! reported together with the tail bound `2/√L` (each `|m_l| ≤ 1`).

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Default truncation order for experiments.
pub const DEFAULT_ORDER: usize = 256;

/// A point of 𝕋 = ℝ/2πℤ stored in its canonical representative `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
#[repr(transparent)]
pub struct TorusAngle(f64);

impl TorusAngle {
    pub const ZERO: TorusAngle = TorusAngle(0.0);

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// Wraps a finite real. Non-finite input is the caller's bug; it yields NaN.
    #[inline]
    pub(crate) fn wrap_finite(x: f64) -> TorusAngle {
        let mut r = libm::fmod(x, TAU);
        if r < 0.0 {
            r += TAU;
        }
        // fmod(-tiny) + 2π can round up to exactly 2π.
        if r >= TAU {
            r = 0.0;
        }
        TorusAngle(r)
    }

    /// Shift by `alpha` radians.
    #[inline]
    pub fn rotate(self, alpha: f64) -> TorusAngle {
        TorusAngle::wrap_finite(self.0 + alpha)
    }

    #[inline]
    pub fn unit(self) -> Complex64 {
        let (s, c) = libm::sincos(self.0);
        Complex64::new(c, s)
    }
}

impl From<TorusAngle> for f64 {
    fn from(a: TorusAngle) -> f64 {
        a.0
    }
}

/// Reduce `x` modulo 2π into `[0, 2π)`.
pub fn wrap(x: f64) -> Result<TorusAngle> {
    if !x.is_finite() {
        return Err(Error::NonFinite(x));
    }
    Ok(TorusAngle::wrap_finite(x))
}

/// Wrap a whole list of radians.
pub fn wrap_all(xs: &[f64]) -> Result<Vec<TorusAngle>> {
    xs.iter().map(|&x| wrap(x)).collect()
}

/// Moments `m_1..m_L` of a probability measure on the torus.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalSpectrum {
    moments: Vec<Complex64>,
    source_size: usize,
}

impl EmpiricalSpectrum {
    /// Builds a spectrum from raw moments (`moments[0]` is `m_1`).
    ///
    /// `source_size` is the number of atoms, or 0 for an analytic measure.
    pub fn from_moments(moments: Vec<Complex64>, source_size: usize) -> Result<Self> {
        if moments.is_empty() {
            return Err(Error::Empty("moment list"));
        }
        for m in &moments {
            if !m.re.is_finite() || !m.im.is_finite() {
                return Err(Error::NonFinite(m.norm()));
            }
            // Quadrature and truncation can overshoot by rounding only.
            if m.norm() > 1.0 + 1e-9 {
                return Err(Error::InvalidParameter(alloc::format!(
                    "moment modulus {} exceeds 1",
                    m.norm()
                )));
            }
        }
        Ok(EmpiricalSpectrum {
            moments,
            source_size,
        })
    }

    pub(crate) fn analytic_unchecked(moments: Vec<Complex64>) -> Self {
        debug_assert!(!moments.is_empty());
        EmpiricalSpectrum {
            moments,
            source_size: 0,
        }
    }

    /// The uniform measure 1/2π: every moment vanishes.
    pub fn uniform(order: usize) -> Self {
        EmpiricalSpectrum {
            moments: vec![Complex64::new(0.0, 0.0); order.max(1)],
            source_size: 0,
        }
    }

    /// Dirac mass at `psi`: `m_l = e^{ilψ}`.
    pub fn point_mass(psi: TorusAngle, order: usize) -> Self {
        let mut s = empirical_spectrum(&[psi], order.max(1)).expect("non-empty");
        s.source_size = 0;
        s
    }

    pub fn order(&self) -> usize {
        self.moments.len()
    }

    pub fn source_size(&self) -> usize {
        self.source_size
    }

    pub fn moments(&self) -> &[Complex64] {
        &self.moments
    }

    /// `m_l` for `1 ≤ l ≤ L`.
    pub fn moment(&self, l: usize) -> Complex64 {
        assert!(l >= 1 && l <= self.moments.len(), "mode {l} out of range");
        self.moments[l - 1]
    }

    /// Spectrum of the measure pushed forward by θ ↦ θ + α.
    pub fn rotate(&self, alpha: f64) -> Self {
        let moments = self
            .moments
            .iter()
            .enumerate()
            .map(|(k, m)| m * Complex64::from_polar(1.0, (k + 1) as f64 * alpha))
            .collect();
        EmpiricalSpectrum {
            moments,
            source_size: self.source_size,
        }
    }

    /// Keep the first `order` modes.
    pub fn truncate(&self, order: usize) -> Result<Self> {
        if order == 0 || order > self.order() {
            return Err(Error::OrderMismatch(order, self.order()));
        }
        Ok(EmpiricalSpectrum {
            moments: self.moments[..order].to_vec(),
            source_size: self.source_size,
        })
    }

    /// `|m_1|`, the synchronization order parameter.
    pub fn order_parameter(&self) -> f64 {
        self.moments[0].norm()
    }
}

/// Moments of the empirical measure `(1/n) Σ_j δ_{θ_j}` up to order `order`.
pub fn empirical_spectrum(angles: &[TorusAngle], order: usize) -> Result<EmpiricalSpectrum> {
    if angles.is_empty() {
        return Err(Error::Empty("angle list"));
    }
    if order == 0 {
        return Err(Error::InvalidParameter("truncation order must be ≥ 1".into()));
    }
    let mut acc = vec![Complex64::new(0.0, 0.0); order];
    for a in angles {
        let z = a.unit();
        let mut w = z;
        for slot in acc.iter_mut() {
            *slot += w;
            w *= z;
        }
    }
    let inv = 1.0 / angles.len() as f64;
    for m in acc.iter_mut() {
        *m *= inv;
    }
    Ok(EmpiricalSpectrum {
        moments: acc,
        source_size: angles.len(),
    })
}

/// A truncated H⁻¹ distance together with the bound on what truncation dropped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HMinus1Distance {
    pub value: f64,
    pub tail_bound: f64,
}

impl HMinus1Distance {
    /// Largest value the untruncated distance can take.
    pub fn upper(&self) -> f64 {
        self.value + self.tail_bound
    }
}

/// `2/√L`: bound on `sqrt(Σ_{l>L} |Δm_l|²/l²)` when every `|Δm_l| ≤ 2`.
pub fn tail_bound(order: usize) -> f64 {
    2.0 / libm::sqrt(order as f64)
}

/// Squared truncated H⁻¹ distance; the shared kernel of every distance here.
pub(crate) fn hminus1_sq(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .enumerate()
        .map(|(k, (x, y))| {
            let l = (k + 1) as f64;
            (x - y).norm_sqr() / (l * l)
        })
        .sum()
}

pub fn hminus1_distance(a: &EmpiricalSpectrum, b: &EmpiricalSpectrum) -> Result<HMinus1Distance> {
    if a.order() != b.order() {
        return Err(Error::OrderMismatch(a.order(), b.order()));
    }
    Ok(HMinus1Distance {
        value: libm::sqrt(hminus1_sq(&a.moments, &b.moments)),
        tail_bound: tail_bound(a.order()),
    })
}

/// A measure that can be integrated against a test function.
#[derive(Debug, Clone, Copy)]
pub enum MeasureRef<'a> {
    Atoms(&'a [TorusAngle]),
    Uniform,
}

const PROBE_GRID: usize = 64;

/// Zero-mean periodic piecewise-linear function on a 64-point grid with
/// `∫ (h')² = 1`.
struct Probe {
    values: [f64; PROBE_GRID],
}

impl Probe {
    fn random(rng: &mut ChaCha8Rng) -> Probe {
        let mut values = [0.0; PROBE_GRID];
        for v in values.iter_mut() {
            *v = StandardNormal.sample(rng);
        }
        let mean = values.iter().sum::<f64>() / PROBE_GRID as f64;
        for v in values.iter_mut() {
            *v -= mean;
        }
        let h = TAU / PROBE_GRID as f64;
        let energy: f64 = (0..PROBE_GRID)
            .map(|k| {
                let d = values[(k + 1) % PROBE_GRID] - values[k];
                d * d / h
            })
            .sum();
        let scale = 1.0 / libm::sqrt(energy);
        for v in values.iter_mut() {
            *v *= scale;
        }
        Probe { values }
    }

    fn eval(&self, theta: f64) -> f64 {
        let x = theta / TAU * PROBE_GRID as f64;
        let k = (x as usize).min(PROBE_GRID - 1);
        let frac = x - k as f64;
        let a = self.values[k];
        let b = self.values[(k + 1) % PROBE_GRID];
        a + frac * (b - a)
    }

    fn integrate(&self, mu: MeasureRef<'_>) -> f64 {
        match mu {
            // Zero mean by construction.
            MeasureRef::Uniform => 0.0,
            MeasureRef::Atoms(atoms) => {
                atoms.iter().map(|a| self.eval(a.value())).sum::<f64>() / atoms.len() as f64
            }
        }
    }
}

/// Certified lower bound on the H⁻¹ distance between two measures: the best
/// of `trials` random unit-H¹ test functions.
pub fn bl_lower_bound(a: MeasureRef<'_>, b: MeasureRef<'_>, trials: usize, seed: u64) -> Result<f64> {
    for m in [a, b] {
        if let MeasureRef::Atoms(x) = m {
            if x.is_empty() {
                return Err(Error::Empty("angle list"));
            }
        }
    }
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be ≥ 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = 0.0_f64;
    for _ in 0..trials {
        let h = Probe::random(&mut rng);
        best = best.max((h.integrate(a) - h.integrate(b)).abs());
    }
    Ok(best)
}

/// Circular distance between two angles, in `[0, π]`.
pub fn circular_gap(a: TorusAngle, b: TorusAngle) -> f64 {
    let d = (a.value() - b.value()).abs();
    if d > PI {
        TAU - d
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn wrap_examples() {
        assert_eq!(wrap(0.0).unwrap().value(), 0.0);
        assert_eq!(wrap(TAU).unwrap().value(), 0.0);
        assert_abs_diff_eq!(wrap(-PI / 2.0).unwrap().value(), 3.0 * PI / 2.0, epsilon = 1e-15);
        assert!(wrap(f64::NAN).is_err());
        assert!(wrap(f64::INFINITY).is_err());
        let tiny = wrap(-1e-300).unwrap().value();
        assert!((0.0..TAU).contains(&tiny));
    }

    #[test]
    fn point_mass_moments_are_one() {
        let angles = [TorusAngle::ZERO; 3];
        let s = empirical_spectrum(&angles, 7).unwrap();
        for m in s.moments() {
            assert_abs_diff_eq!(m.re, 1.0, epsilon = 1e-15);
            assert_abs_diff_eq!(m.im, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn antipodal_and_four_fold() {
        let s = empirical_spectrum(&wrap_all(&[0.0, PI]).unwrap(), 2).unwrap();
        assert_abs_diff_eq!(s.moment(1).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.moment(2).re, 1.0, epsilon = 1e-15);

        let s = empirical_spectrum(&wrap_all(&[0.0, PI / 2.0, PI, 1.5 * PI]).unwrap(), 4).unwrap();
        for l in 1..=3 {
            assert_abs_diff_eq!(s.moment(l).norm(), 0.0, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(s.moment(4).re, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn empty_inputs_rejected() {
        assert!(matches!(empirical_spectrum(&[], 4), Err(Error::Empty(_))));
        assert!(bl_lower_bound(MeasureRef::Atoms(&[]), MeasureRef::Uniform, 1, 0).is_err());
    }

    #[test]
    fn distance_simple_cases() {
        let a = EmpiricalSpectrum::from_moments(vec![c(0.3, 0.1), c(0.2, 0.0)], 0).unwrap();
        assert_eq!(hminus1_distance(&a, &a).unwrap().value, 0.0);
        let b = EmpiricalSpectrum::from_moments(vec![c(0.3 + 0.25, 0.1), c(0.2, 0.0)], 0).unwrap();
        assert_abs_diff_eq!(hminus1_distance(&a, &b).unwrap().value, 0.25, epsilon = 1e-15);
        let short = EmpiricalSpectrum::uniform(1);
        assert!(matches!(hminus1_distance(&a, &short), Err(Error::OrderMismatch(2, 1))));
    }

    #[test]
    fn point_mass_to_uniform_matches_zeta_two() {
        let order = 10_000;
        let d = hminus1_distance(
            &EmpiricalSpectrum::point_mass(TorusAngle::ZERO, order),
            &EmpiricalSpectrum::uniform(order),
        )
        .unwrap();
        // Σ 1/l² = π²/6
        assert!((d.value - PI / libm::sqrt(6.0)).abs() < 1e-3);
        assert_abs_diff_eq!(d.tail_bound, 0.02, epsilon = 1e-15);
    }

    #[test]
    fn bl_bound_identity_and_uniform_samples() {
        let angles = wrap_all(&[0.1, 2.0, 4.0]).unwrap();
        let v = bl_lower_bound(MeasureRef::Atoms(&angles), MeasureRef::Atoms(&angles), 10, 3).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn rotate_and_truncate() {
        let s = empirical_spectrum(&wrap_all(&[0.4, 1.1]).unwrap(), 5).unwrap();
        let r = s.rotate(0.7);
        let direct = empirical_spectrum(&wrap_all(&[1.1, 1.8]).unwrap(), 5).unwrap();
        for (x, y) in r.moments().iter().zip(direct.moments()) {
            assert_abs_diff_eq!((x - y).norm(), 0.0, epsilon = 1e-14);
        }
        assert_eq!(s.truncate(3).unwrap().order(), 3);
        assert!(s.truncate(6).is_err());
    }

    #[test]
    fn circular_gap_wraps() {
        let a = wrap(0.1).unwrap();
        let b = wrap(TAU - 0.1).unwrap();
        assert_abs_diff_eq!(circular_gap(a, b), 0.2, epsilon = 1e-12);
    }
}
