//! Fourier–Galerkin solver for the McKean–Vlasov equation
//!
//! ```text
//! ∂_t μ = ½ ∂²_θ μ − ∂_θ [ μ (J * μ) ],   J(θ) = −K sin θ,
//! ```
//!
//! its stationary synchronized profiles `q(θ) = exp(2Kr cos θ)/Z`, and the
//! self-consistency `r = Ψ(2Kr)`.
//!
//! A density is stored by its coefficients `ĉ_l`, `f(θ) = Σ_l ĉ_l e^{ilθ}`,
//! for `l = 0..=L` with `ĉ_{−l} = conj(ĉ_l)` and `ĉ_0 = 1/2π`. Moments and
//! coefficients are related by `m_l = 2π conj(ĉ_l)`. In these variables the
//! equation reads
//!
//! ```text
//! dĉ_l/dt = −(l²/2) ĉ_l + lπK (ĉ_1 ĉ_{l−1} − conj(ĉ_1) ĉ_{l+1}),
//! ```
//!
//! closed by `ĉ_{L+1} = 0`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::torus::{EmpiricalSpectrum, TorusAngle};

/// Quadrature nodes for Ψ, Z and the moments of `q`.
pub const QUADRATURE_NODES: usize = 512;
/// Grid used to monitor positivity and to bound the density for sampling.
pub const POSITIVITY_GRID: usize = 512;
/// Default Galerkin truncation.
pub const DEFAULT_PDE_ORDER: usize = 128;

const MASS: f64 = 1.0 / TAU;
const POSITIVITY_TOL: f64 = 1e-6;
const BLOW_UP: f64 = 1e3;
const SAMPLING_SAFETY: f64 = 1.01;

/// Truncated Fourier representation of a (signed) density on the torus.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierDensity {
    coeffs: Vec<Complex64>,
}

impl FourierDensity {
    /// The incoherent state 1/2π.
    pub fn uniform(order: usize) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); order + 1];
        coeffs[0] = Complex64::new(MASS, 0.0);
        FourierDensity { coeffs }
    }

    /// From `ĉ_0..ĉ_L`; `ĉ_0` must equal 1/2π.
    pub fn from_coeffs(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() < 2 {
            return Err(Error::InvalidParameter("need at least modes 0 and 1".into()));
        }
        if (coeffs[0].re - MASS).abs() > 1e-12 || coeffs[0].im.abs() > 1e-12 {
            return Err(Error::InvalidParameter(alloc::format!(
                "ĉ_0 = {} but mass conservation requires 1/2π",
                coeffs[0]
            )));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidParameter("non-finite coefficient".into()));
        }
        let mut coeffs = coeffs;
        coeffs[0] = Complex64::new(MASS, 0.0);
        Ok(FourierDensity { coeffs })
    }

    /// The measure with the given moments, truncated at their order.
    pub fn from_spectrum(spec: &EmpiricalSpectrum) -> Self {
        let mut coeffs = Vec::with_capacity(spec.order() + 1);
        coeffs.push(Complex64::new(MASS, 0.0));
        coeffs.extend(spec.moments().iter().map(|m| m.conj() * MASS));
        FourierDensity { coeffs }
    }

    /// `(1 + a cos(θ − ψ))/2π`, a probability density for `|a| ≤ 1`.
    pub fn cosine(order: usize, amplitude: f64, psi: f64) -> Result<Self> {
        if order == 0 || !(amplitude.abs() <= 1.0) {
            return Err(Error::InvalidParameter(alloc::format!(
                "cosine density needs order ≥ 1 and |a| ≤ 1, got {order}, {amplitude}"
            )));
        }
        let mut d = FourierDensity::uniform(order);
        d.coeffs[1] = Complex64::from_polar(amplitude * MASS / 2.0, -psi);
        Ok(d)
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// `ĉ_l`, zero beyond the truncation.
    pub fn coeff(&self, l: usize) -> Complex64 {
        self.coeffs.get(l).copied().unwrap_or_default()
    }

    /// Density rotated by ψ: coefficients pick up `e^{−ilψ}`.
    pub fn rotate(&self, psi: f64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(l, c)| c * Complex64::from_polar(1.0, -(l as f64) * psi))
            .collect();
        FourierDensity { coeffs }
    }

    /// Truncate or zero-pad to `order`.
    pub fn with_order(&self, order: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(order + 1, Complex64::new(0.0, 0.0));
        FourierDensity { coeffs }
    }

    /// `f(θ) = ĉ_0 + 2 Re Σ_{l≥1} ĉ_l e^{ilθ}`.
    pub fn eval(&self, theta: f64) -> f64 {
        let z = Complex64::from_polar(1.0, theta);
        let mut w = z;
        let mut acc = 0.0;
        for c in &self.coeffs[1..] {
            acc += (c * w).re;
            w *= z;
        }
        self.coeffs[0].re + 2.0 * acc
    }

    /// Values on `points` equispaced nodes starting at 0.
    pub fn eval_grid(&self, points: usize) -> Vec<f64> {
        (0..points)
            .map(|k| self.eval(TAU * k as f64 / points as f64))
            .collect()
    }

    pub fn grid_min(&self) -> f64 {
        self.eval_grid(POSITIVITY_GRID)
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn grid_max(&self) -> f64 {
        self.eval_grid(POSITIVITY_GRID)
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Rejection sampling against a uniform proposal scaled to the grid
    /// maximum times a 1.01 safety factor.
    pub fn sample<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Vec<TorusAngle> {
        let ceiling = self.grid_max() * SAMPLING_SAFETY;
        let mut out = Vec::with_capacity(count);
        while out.len() < count {
            let theta: f64 = rng.random::<f64>() * TAU;
            let u: f64 = rng.random::<f64>() * ceiling;
            if u <= self.eval(theta) {
                out.push(TorusAngle::wrap_finite(theta));
            }
        }
        out
    }
}

/// Moments `m_l = 2π conj(ĉ_l)` for `l = 1..=order`.
pub fn density_moments(state: &FourierDensity, order: usize) -> Result<EmpiricalSpectrum> {
    if order == 0 || order > state.order() {
        return Err(Error::OrderMismatch(order, state.order()));
    }
    // Unchecked: a truncated solution may exceed |m_l| ≤ 1 by Gibbs overshoot.
    let moments = state.coeffs[1..=order].iter().map(|c| c.conj() * TAU).collect();
    Ok(EmpiricalSpectrum::analytic_unchecked(moments))
}

fn quadrature_nodes(order: usize) -> usize {
    QUADRATURE_NODES.max(4 * order)
}

/// Tilted weights `e^{x(cos θ_k − 1)}` on `nodes` points and their sum.
fn tilted_weights(x: f64, nodes: usize) -> (Vec<f64>, Vec<f64>, f64) {
    let thetas: Vec<f64> = (0..nodes).map(|k| TAU * k as f64 / nodes as f64).collect();
    let weights: Vec<f64> = thetas
        .iter()
        .map(|&t| libm::exp(x * (libm::cos(t) - 1.0)))
        .collect();
    let total = weights.iter().sum();
    (thetas, weights, total)
}

/// First moment of the tilted density `e^{x cos θ}/∫e^{x cos}`:
/// `Ψ(x) = ∫ cos θ e^{x cos θ} dθ / ∫ e^{x cos θ} dθ`.
pub fn psi(x: f64) -> f64 {
    let (thetas, weights, total) = tilted_weights(x, QUADRATURE_NODES);
    thetas
        .iter()
        .zip(&weights)
        .map(|(&t, &w)| libm::cos(t) * w)
        .sum::<f64>()
        / total
}

/// Normalizer and cosine moments of `e^{x cos θ}/Z`.
pub fn tilted_profile(x: f64, order: usize) -> (f64, Vec<f64>) {
    let nodes = quadrature_nodes(order);
    let (thetas, weights, total) = tilted_weights(x, nodes);
    let z = libm::exp(x) * total * TAU / nodes as f64;
    let moments = (1..=order)
        .map(|l| {
            thetas
                .iter()
                .zip(&weights)
                .map(|(&t, &w)| libm::cos(l as f64 * t) * w)
                .sum::<f64>()
                / total
        })
        .collect();
    (z, moments)
}

/// Synchronized stationary profile for `K > 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SyncState {
    pub k: f64,
    /// Degree of synchronization, root of `r = Ψ(2Kr)` in (0, 1).
    pub r: f64,
    /// Normalizer of `q(θ) = exp(2Kr cos θ)/Z`.
    pub z: f64,
    /// `m_l(q)` for `l = 1..=L`; real because `q` is even.
    pub moments: Vec<f64>,
}

impl SyncState {
    pub fn residual(&self) -> f64 {
        (self.r - psi(2.0 * self.k * self.r)).abs()
    }

    /// `q_ψ` as a Fourier density of the same order as the stored moments.
    pub fn density(&self, phase: f64) -> FourierDensity {
        let mut coeffs = Vec::with_capacity(self.moments.len() + 1);
        coeffs.push(Complex64::new(MASS, 0.0));
        coeffs.extend(self.moments.iter().map(|&m| Complex64::new(m * MASS, 0.0)));
        FourierDensity { coeffs }.rotate(phase)
    }

    /// Moments of `q_ψ`: `m_l(q) e^{ilψ}`.
    pub fn spectrum(&self, phase: f64) -> EmpiricalSpectrum {
        let moments = self
            .moments
            .iter()
            .enumerate()
            .map(|(k, &m)| Complex64::from_polar(m, (k + 1) as f64 * phase))
            .collect();
        EmpiricalSpectrum::from_moments(moments, 0).expect("profile moments lie in [0, 1]")
    }
}

/// Outcome of the self-consistency problem.
#[derive(Debug, Clone, PartialEq)]
pub enum FixedPoint {
    /// `K ≤ 1`: the only solution is `r = 0`, the uniform state.
    NoSync,
    Sync(SyncState),
}

impl FixedPoint {
    pub fn sync(self) -> Option<SyncState> {
        match self {
            FixedPoint::Sync(s) => Some(s),
            FixedPoint::NoSync => None,
        }
    }
}

/// Solve `r = Ψ(2Kr)` by bisection on `[10⁻⁶, 1 − 10⁻⁹]` and tabulate
/// `order` moments of the resulting profile.
pub fn solve_sync_state(k: f64, order: usize) -> Result<FixedPoint> {
    if !(k >= 0.0) || !k.is_finite() {
        return Err(Error::InvalidParameter(alloc::format!("coupling K = {k} must be ≥ 0")));
    }
    if order == 0 {
        return Err(Error::InvalidParameter("order must be ≥ 1".into()));
    }
    if k <= 1.0 {
        return Ok(FixedPoint::NoSync);
    }
    let f = |r: f64| psi(2.0 * k * r) - r;
    let (mut lo, mut hi) = (1e-6, 1.0 - 1e-9);
    let (f_lo, f_hi) = (f(lo), f(hi));
    if !(f_lo > 0.0 && f_hi < 0.0) {
        return Err(Error::NoSignChange(k));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let r = if f(lo).abs() <= f(hi).abs() { lo } else { hi };
    let (z, moments) = tilted_profile(2.0 * k * r, order);
    Ok(FixedPoint::Sync(SyncState { k, r, z, moments }))
}

/// Decay rate `(1 − K)/2` of mode 1 around the uniform state.
pub fn incoherent_decay_rate(k: f64) -> f64 {
    (1.0 - k) / 2.0
}

#[inline]
fn rhs_into(c: &[Complex64], k: f64, out: &mut [Complex64]) {
    let order = c.len() - 1;
    let c1 = c[1];
    let c1_conj = c1.conj();
    let zero = Complex64::new(0.0, 0.0);
    out[0] = zero;
    for l in 1..=order {
        let lf = l as f64;
        let next = if l < order { c[l + 1] } else { zero };
        out[l] = c[l] * (-0.5 * lf * lf) + (c1 * c[l - 1] - c1_conj * next) * (lf * PI * k);
    }
}

/// `dĉ_l/dt` for `l = 1..=L`.
pub fn pde_rhs(state: &FourierDensity, k: f64) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); state.coeffs.len()];
    rhs_into(&state.coeffs, k, &mut out);
    out.remove(0);
    out
}

/// Directional derivative of [`pde_rhs`] at `state` along `direction`
/// (`direction[0]`, the mass mode, is ignored).
pub fn pde_rhs_jvp(state: &FourierDensity, direction: &[Complex64], k: f64) -> Result<Vec<Complex64>> {
    let order = state.order();
    if direction.len() != order + 1 {
        return Err(Error::SizeMismatch {
            expected: order + 1,
            got: direction.len(),
        });
    }
    let c = &state.coeffs;
    let h = |l: usize| {
        if l == 0 || l > order {
            Complex64::new(0.0, 0.0)
        } else {
            direction[l]
        }
    };
    let cc = |l: usize| state.coeff(l);
    Ok((1..=order)
        .map(|l| {
            let lf = l as f64;
            h(l) * (-0.5 * lf * lf)
                + (h(1) * cc(l - 1) + c[1] * h(l - 1) - h(1).conj() * cc(l + 1) - c[1].conj() * h(l + 1))
                    * (lf * PI * k)
        })
        .collect())
}

/// Time stepping controls for [`pde_solve`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdeParams {
    pub k: f64,
    pub dt: f64,
    pub t_end: f64,
    pub record_every: usize,
    /// Treat `−l²/2` exactly (default). Off: explicit RK2, needs `dt ≤ 0.5/L²`.
    pub integrating_factor: bool,
}

impl PdeParams {
    pub fn new(k: f64, dt: f64, t_end: f64, record_every: usize) -> Self {
        PdeParams {
            k,
            dt,
            t_end,
            record_every,
            integrating_factor: true,
        }
    }
}

/// Recorded solution of the mean-field equation.
#[derive(Debug, Clone, PartialEq)]
pub struct PdeTrajectory {
    pub records: Vec<(f64, FourierDensity)>,
    /// Recorded states whose grid minimum fell below −10⁻⁶.
    pub positivity_violations: usize,
    pub min_density: f64,
}

impl PdeTrajectory {
    pub fn last(&self) -> &FourierDensity {
        &self.records.last().expect("trajectory has t = 0").1
    }
}

/// Number of steps so that `steps · dt = t_end` up to rounding.
pub(crate) fn step_count(dt: f64, t_end: f64) -> Result<u64> {
    if !(dt > 0.0) || !dt.is_finite() || !(t_end >= 0.0) || !t_end.is_finite() {
        return Err(Error::InvalidParameter(alloc::format!(
            "need dt > 0 and t_end ≥ 0, got dt = {dt}, t_end = {t_end}"
        )));
    }
    let steps = libm::round(t_end / dt);
    if (steps * dt - t_end).abs() > 1e-9 * t_end.max(1.0) {
        return Err(Error::InvalidParameter(alloc::format!(
            "t_end = {t_end} is not a multiple of dt = {dt}"
        )));
    }
    Ok(steps as u64)
}

/// Integrate the mean-field equation from `init`.
///
/// Default scheme: integrating-factor midpoint rule,
/// `ĉ⁺ = E(h) ĉ + h E(h/2) N(E(h/2)(ĉ + (h/2) N(ĉ)))` with `E(h) = e^{−l²h/2}`.
/// States are recorded at step 0, every `record_every` steps, and at the end.
pub fn pde_solve(init: &FourierDensity, params: &PdeParams) -> Result<PdeTrajectory> {
    let order = init.order();
    let PdeParams {
        k,
        dt,
        t_end,
        record_every,
        integrating_factor,
    } = *params;
    if record_every == 0 {
        return Err(Error::InvalidParameter("record_every must be ≥ 1".into()));
    }
    if !(k >= 0.0) {
        return Err(Error::InvalidParameter(alloc::format!("coupling K = {k} must be ≥ 0")));
    }
    let steps = step_count(dt, t_end)?;
    let max_dt = if integrating_factor {
        0.01
    } else {
        0.5 / (order * order) as f64
    };
    if dt > max_dt * (1.0 + 1e-12) {
        return Err(Error::InvalidParameter(alloc::format!(
            "dt = {dt} exceeds the stability limit {max_dt}"
        )));
    }

    let decay = |h: f64| -> Vec<f64> {
        (0..=order)
            .map(|l| libm::exp(-0.5 * (l * l) as f64 * h))
            .collect()
    };
    let (e_full, e_half) = if integrating_factor {
        (decay(dt), decay(0.5 * dt))
    } else {
        (vec![1.0; order + 1], vec![1.0; order + 1])
    };
    // Without the integrating factor the linear part joins the nonlinearity.
    let linear: Vec<f64> = (0..=order).map(|l| -0.5 * (l * l) as f64).collect();
    let eval_n = |c: &[Complex64], out: &mut [Complex64]| {
        rhs_into(c, k, out);
        if integrating_factor {
            for (o, (ci, li)) in out.iter_mut().zip(c.iter().zip(&linear)) {
                *o -= ci * li;
            }
        }
    };

    let mut c = init.coeffs.clone();
    let mut k1 = vec![Complex64::new(0.0, 0.0); order + 1];
    let mut k2 = k1.clone();
    let mut mid = k1.clone();

    let mut traj = PdeTrajectory {
        records: Vec::new(),
        positivity_violations: 0,
        min_density: f64::INFINITY,
    };
    let record = |step: u64, c: &[Complex64], traj: &mut PdeTrajectory| {
        let state = FourierDensity { coeffs: c.to_vec() };
        let m = state.grid_min();
        traj.min_density = traj.min_density.min(m);
        if m < -POSITIVITY_TOL {
            traj.positivity_violations += 1;
        }
        traj.records.push((step as f64 * dt, state));
    };
    record(0, &c, &mut traj);

    for step in 1..=steps {
        eval_n(&c, &mut k1);
        for l in 1..=order {
            mid[l] = (c[l] + k1[l] * (0.5 * dt)) * e_half[l];
        }
        mid[0] = c[0];
        eval_n(&mid, &mut k2);
        for l in 1..=order {
            c[l] = c[l] * e_full[l] + k2[l] * (dt * e_half[l]);
        }
        if let Some((mode, v)) = c
            .iter()
            .enumerate()
            .skip(1)
            .find(|(_, v)| !(v.norm() <= BLOW_UP))
        {
            return Err(Error::BlowUp {
                time: step as f64 * dt,
                mode,
                magnitude: v.norm(),
            });
        }
        if step % record_every as u64 == 0 || step == steps {
            record(step, &c, &mut traj);
        }
    }
    Ok(traj)
}
