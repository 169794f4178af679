//! Euler–Maruyama integration of the oscillator system
//!
//! ```text
//! dθ_i = (1/(n p_n)) Σ_j ξ_ij J(θ_i − θ_j) dt + dB_i,   J = −K sin,
//! ```
//!
//! on an arbitrary [`SparseGraph`]. Using
//! `sin(θ_i − θ_j) = sin θ_i cos θ_j − cos θ_i sin θ_j` the drift needs one
//! pass over the edges accumulating `Σ_j ξ_ij cos θ_j` and `Σ_j ξ_ij sin θ_j`.
//!
//! Gaussian increments are drawn from ChaCha8 keyed by the run seed, with
//! the step index as stream id, so a step's noise never depends on how
//! earlier steps were scheduled.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::graph::SparseGraph;
use crate::mean_field::{step_count, FourierDensity};
use crate::torus::{empirical_spectrum, EmpiricalSpectrum, TorusAngle};

/// Default cap on the number of Euler–Maruyama steps of one run.
pub const DEFAULT_STEP_BUDGET: u64 = 50_000_000;

/// Angles of the n oscillators and the simulation clock.
#[derive(Debug, Clone, PartialEq)]
pub struct OscillatorState {
    pub angles: Vec<TorusAngle>,
    pub time: f64,
}

impl OscillatorState {
    pub fn new(angles: Vec<TorusAngle>) -> Self {
        OscillatorState { angles, time: 0.0 }
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimParams {
    /// Coupling strength K ≥ 0.
    pub k: f64,
    pub dt: f64,
    pub t_end: f64,
    pub record_every: usize,
    pub seed: u64,
    /// Truncation order of the recorded spectra.
    pub order: usize,
    /// Skip the `dt ≤ 0.01/max(1, K)` guard.
    pub allow_large_dt: bool,
    pub step_budget: u64,
}

impl SimParams {
    pub fn new(k: f64, dt: f64, t_end: f64, record_every: usize, seed: u64, order: usize) -> Self {
        SimParams {
            k,
            dt,
            t_end,
            record_every,
            seed,
            order,
            allow_large_dt: false,
            step_budget: DEFAULT_STEP_BUDGET,
        }
    }

    /// Largest `dt` accepted without `allow_large_dt`.
    pub fn max_stable_dt(k: f64) -> f64 {
        0.01 / k.max(1.0)
    }

    fn validate(&self) -> Result<u64> {
        if !(self.k >= 0.0) || !self.k.is_finite() {
            return Err(Error::InvalidParameter(format!("coupling K = {} must be ≥ 0", self.k)));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidParameter("record_every must be ≥ 1".into()));
        }
        if self.order == 0 {
            return Err(Error::InvalidParameter("spectrum order must be ≥ 1".into()));
        }
        let steps = step_count(self.dt, self.t_end)?;
        let limit = Self::max_stable_dt(self.k);
        if !self.allow_large_dt && self.dt > limit * (1.0 + 1e-12) {
            return Err(Error::InvalidParameter(format!(
                "dt = {} exceeds 0.01/max(1, K) = {limit}; set allow_large_dt to override",
                self.dt
            )));
        }
        if steps > self.step_budget {
            return Err(Error::BudgetExceeded {
                steps,
                cap: self.step_budget,
            });
        }
        Ok(steps)
    }
}

/// How the vertices are split between the two phases of a two-block start.
#[derive(Debug, Clone, PartialEq)]
pub enum BlockSplit {
    /// Vertices `i < m` get the first phase.
    IndexBelow(usize),
    /// `mask[i]` true gets the first phase.
    Mask(Vec<bool>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition {
    IidUniform { seed: u64 },
    IidFromDensity { density: FourierDensity, seed: u64 },
    PointMass(TorusAngle),
    TwoBlock {
        first: TorusAngle,
        second: TorusAngle,
        split: BlockSplit,
    },
    ExplicitAngles(Vec<TorusAngle>),
}

impl InitialCondition {
    /// Angles for `n` oscillators.
    pub fn realize(&self, n: usize) -> Result<Vec<TorusAngle>> {
        if n == 0 {
            return Err(Error::Empty("oscillator system"));
        }
        Ok(match self {
            InitialCondition::IidUniform { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                (0..n)
                    .map(|_| TorusAngle::wrap_finite(rng.random::<f64>() * TAU))
                    .collect()
            }
            InitialCondition::IidFromDensity { density, seed } => {
                if !(density.grid_max() > 0.0) {
                    return Err(Error::InvalidParameter("density is nowhere positive".into()));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                density.sample(n, &mut rng)
            }
            InitialCondition::PointMass(psi) => vec![*psi; n],
            InitialCondition::TwoBlock {
                first,
                second,
                split,
            } => match split {
                BlockSplit::IndexBelow(m) => (0..n).map(|i| if i < *m { *first } else { *second }).collect(),
                BlockSplit::Mask(mask) => {
                    if mask.len() != n {
                        return Err(Error::SizeMismatch {
                            expected: n,
                            got: mask.len(),
                        });
                    }
                    mask.iter().map(|&b| if b { *first } else { *second }).collect()
                }
            },
            InitialCondition::ExplicitAngles(angles) => {
                if angles.len() != n {
                    return Err(Error::SizeMismatch {
                        expected: n,
                        got: angles.len(),
                    });
                }
                angles.clone()
            }
        })
    }
}

/// Scratch space for the drift pass.
#[derive(Debug, Default, Clone)]
struct Workspace {
    cos: Vec<f64>,
    sin: Vec<f64>,
    drift: Vec<f64>,
    noise: Vec<f64>,
}

impl Workspace {
    fn new(n: usize) -> Self {
        Workspace {
            cos: vec![0.0; n],
            sin: vec![0.0; n],
            drift: vec![0.0; n],
            noise: vec![0.0; n],
        }
    }

    fn load(&mut self, angles: &[TorusAngle]) {
        for ((a, c), s) in angles.iter().zip(&mut self.cos).zip(&mut self.sin) {
            let (sv, cv) = libm::sincos(a.value());
            *c = cv;
            *s = sv;
        }
    }
}

fn sparse_drift(g: &SparseGraph, k: f64, ws: &mut Workspace) {
    let scale = -k / (g.n() as f64 * g.dilution());
    let offsets = g.row_offsets();
    let cols = g.col_indices();
    let weights = g.weights();
    let unit = weights.iter().all(|&w| w == 1);
    let (cos, sin) = (&ws.cos, &ws.sin);
    for (i, out) in ws.drift.iter_mut().enumerate() {
        let range = offsets[i]..offsets[i + 1];
        let (mut sc, mut ss) = (0.0, 0.0);
        if unit {
            for &j in &cols[range] {
                sc += cos[j as usize];
                ss += sin[j as usize];
            }
        } else {
            for (&j, &w) in cols[range.clone()].iter().zip(&weights[range]) {
                let w = w as f64;
                sc += w * cos[j as usize];
                ss += w * sin[j as usize];
            }
        }
        *out = scale * (sin[i] * sc - cos[i] * ss);
    }
}

/// Complete graph without loops: neighbour sums are global sums minus self.
fn complete_drift(n: usize, dilution: f64, k: f64, ws: &mut Workspace) {
    let scale = -k / (n as f64 * dilution);
    let total_c: f64 = ws.cos.iter().sum();
    let total_s: f64 = ws.sin.iter().sum();
    for ((out, &c), &s) in ws.drift.iter_mut().zip(&ws.cos).zip(&ws.sin) {
        *out = scale * (s * (total_c - c) - c * (total_s - s));
    }
}

fn check_size(state: &OscillatorState, g: &SparseGraph) -> Result<()> {
    if state.len() != g.n() {
        return Err(Error::SizeMismatch {
            expected: g.n(),
            got: state.len(),
        });
    }
    Ok(())
}

/// `drift_i = (1/(n p_n)) Σ_j ξ_ij (−K sin(θ_i − θ_j))` by one sparse pass.
pub fn drift(state: &OscillatorState, g: &SparseGraph, k: f64) -> Result<Vec<f64>> {
    check_size(state, g)?;
    let mut ws = Workspace::new(g.n());
    ws.load(&state.angles);
    sparse_drift(g, k, &mut ws);
    Ok(ws.drift)
}

/// Same as [`drift`] in O(n) for a loop-free complete graph with dilution `p`.
pub fn drift_complete(state: &OscillatorState, dilution: f64, k: f64) -> Vec<f64> {
    let mut ws = Workspace::new(state.len());
    ws.load(&state.angles);
    complete_drift(state.len(), dilution, k, &mut ws);
    ws.drift
}

/// One Euler–Maruyama step with caller-supplied standard normals.
pub fn step(
    state: &OscillatorState,
    g: &SparseGraph,
    params: &SimParams,
    noise: &[f64],
) -> Result<OscillatorState> {
    check_size(state, g)?;
    if noise.len() != state.len() {
        return Err(Error::SizeMismatch {
            expected: state.len(),
            got: noise.len(),
        });
    }
    let d = drift(state, g, params.k)?;
    let sq = libm::sqrt(params.dt);
    let angles = state
        .angles
        .iter()
        .zip(d.iter().zip(noise))
        .map(|(a, (&di, &ni))| TorusAngle::wrap_finite(a.value() + di * params.dt + sq * ni))
        .collect();
    Ok(OscillatorState {
        angles,
        time: state.time + params.dt,
    })
}

/// Standard normals for step `step` of the run keyed by `seed`.
#[derive(Debug, Clone)]
pub struct NoiseSource {
    key: ChaCha8Rng,
}

impl NoiseSource {
    pub fn new(seed: u64) -> Self {
        NoiseSource {
            key: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn fill(&self, step: u64, out: &mut [f64]) {
        let mut rng = self.key.clone();
        rng.set_stream(step);
        rng.set_word_pos(0);
        for x in out.iter_mut() {
            *x = StandardNormal.sample(&mut rng);
        }
    }
}

/// Recorded path `t ↦ μⁿ_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub records: Vec<(f64, EmpiricalSpectrum)>,
    pub final_state: OscillatorState,
}

/// Run the system and hand every recorded state to `observer`.
///
/// Records happen at step 0, every `record_every` steps, and at the final
/// step. Returns the final state.
pub fn simulate_with<F>(
    g: &SparseGraph,
    params: &SimParams,
    init: &InitialCondition,
    mut observer: F,
) -> Result<OscillatorState>
where
    F: FnMut(f64, &[TorusAngle]) -> Result<()>,
{
    let steps = params.validate()?;
    let n = g.n();
    let mut angles = init.realize(n)?;
    let complete = g.is_complete();
    let coupled = params.k != 0.0;
    let noise = NoiseSource::new(params.seed);
    let mut ws = Workspace::new(n);
    let sq = libm::sqrt(params.dt);
    let dt = params.dt;

    observer(0.0, &angles)?;
    for s in 1..=steps {
        if coupled {
            ws.load(&angles);
            if complete {
                complete_drift(n, g.dilution(), params.k, &mut ws);
            } else {
                sparse_drift(g, params.k, &mut ws);
            }
        }
        noise.fill(s, &mut ws.noise);
        if coupled {
            for ((a, &d), &z) in angles.iter_mut().zip(&ws.drift).zip(&ws.noise) {
                *a = TorusAngle::wrap_finite(a.value() + d * dt + sq * z);
            }
        } else {
            for (a, &z) in angles.iter_mut().zip(&ws.noise) {
                *a = TorusAngle::wrap_finite(a.value() + sq * z);
            }
        }
        if s % params.record_every as u64 == 0 || s == steps {
            observer(s as f64 * dt, &angles)?;
        }
    }
    Ok(OscillatorState {
        angles,
        time: steps as f64 * dt,
    })
}

/// Run the system and record the empirical spectrum of order `params.order`.
pub fn simulate(g: &SparseGraph, params: &SimParams, init: &InitialCondition) -> Result<Trajectory> {
    let mut records = Vec::new();
    let final_state = simulate_with(g, params, init, |t, angles| {
        records.push((t, empirical_spectrum(angles, params.order)?));
        Ok(())
    })?;
    Ok(Trajectory {
        records,
        final_state,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{gen_complete, gen_erdos_renyi};
    use crate::torus::wrap_all;
    use core::f64::consts::{FRAC_PI_2, PI};

    fn state(xs: &[f64]) -> OscillatorState {
        OscillatorState::new(wrap_all(xs).unwrap())
    }

    #[test]
    fn zero_coupling_has_zero_drift() {
        let g = gen_erdos_renyi(20, 0.5, 1, false).unwrap();
        let s = OscillatorState::new(InitialCondition::IidUniform { seed: 3 }.realize(20).unwrap());
        assert!(drift(&s, &g, 0.0).unwrap().iter().all(|&d| d == 0.0));
    }

    #[test]
    fn synchronized_state_has_zero_drift() {
        let g = gen_erdos_renyi(30, 0.3, 2, false).unwrap();
        let s = state(&[1.3; 30]);
        for d in drift(&s, &g, 4.0).unwrap() {
            assert!(d.abs() < 1e-15);
        }
    }

    #[test]
    fn two_body_drift() {
        // Independent scalar evaluation of (1/(n p)) Σ_j −K sin(θ_i − θ_j).
        let angles = [0.0, FRAC_PI_2];
        let reference: Vec<f64> = (0..2)
            .map(|i| {
                (0..2)
                    .filter(|&j| j != i)
                    .map(|j| -(angles[i] - angles[j]).sin())
                    .sum::<f64>()
                    / 2.0
            })
            .collect();
        let g = gen_complete(2).unwrap();
        let d = drift(&state(&angles), &g, 1.0).unwrap();
        assert!((d[0] - reference[0]).abs() < 1e-15 && (d[0] - 0.5).abs() < 1e-15);
        assert!((d[1] - reference[1]).abs() < 1e-15 && (d[1] + 0.5).abs() < 1e-15);
    }

    #[test]
    fn size_mismatch_rejected() {
        let g = gen_complete(3).unwrap();
        assert!(drift(&state(&[0.0, 1.0]), &g, 1.0).is_err());
        let p = SimParams::new(1.0, 0.01, 0.01, 1, 0, 4);
        assert!(step(&state(&[0.0, 1.0, 2.0]), &g, &p, &[0.0; 2]).is_err());
    }

    #[test]
    fn zero_noise_zero_coupling_step_is_identity() {
        let g = gen_complete(4).unwrap();
        let s = state(&[0.1, 1.0, 2.0, 3.0]);
        let p = SimParams::new(0.0, 0.01, 0.01, 1, 0, 4);
        let next = step(&s, &g, &p, &[0.0; 4]).unwrap();
        assert_eq!(next.angles, s.angles);
        assert!((next.time - 0.01).abs() < 1e-15);
    }

    #[test]
    fn single_oscillator_is_brownian() {
        let g = gen_complete(1).unwrap();
        let s = state(&[1.0]);
        let p = SimParams::new(5.0, 0.0016, 0.0016, 1, 0, 4);
        let next = step(&s, &g, &p, &[0.5]).unwrap();
        assert!((next.angles[0].value() - 1.02).abs() < 1e-14);
    }

    #[test]
    fn complete_fast_path_matches_sparse() {
        for n in [2, 7, 50] {
            let g = gen_complete(n).unwrap();
            let s = OscillatorState::new(InitialCondition::IidUniform { seed: n as u64 }.realize(n).unwrap());
            let a = drift(&s, &g, 2.5).unwrap();
            let b = drift_complete(&s, 1.0, 2.5);
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn guards_and_budget() {
        let g = gen_complete(3).unwrap();
        let init = InitialCondition::PointMass(TorusAngle::ZERO);
        let too_big = SimParams::new(2.0, 0.01, 1.0, 1, 0, 4);
        assert!(simulate(&g, &too_big, &init).is_err());
        let mut ok = too_big;
        ok.allow_large_dt = true;
        assert!(simulate(&g, &ok, &init).is_ok());
        let mut budget = SimParams::new(1.0, 0.01, 10.0, 1, 0, 4);
        budget.step_budget = 100;
        assert!(matches!(
            simulate(&g, &budget, &init),
            Err(Error::BudgetExceeded { steps: 1000, cap: 100 })
        ));
    }

    #[test]
    fn records_include_both_ends() {
        let g = gen_complete(5).unwrap();
        let p = SimParams::new(1.0, 0.01, 0.25, 10, 1, 3);
        let t = simulate(&g, &p, &InitialCondition::IidUniform { seed: 1 }).unwrap();
        let times: Vec<f64> = t.records.iter().map(|r| r.0).collect();
        assert_eq!(times.len(), 4);
        assert_eq!(times[0], 0.0);
        assert!((times[3] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn initial_conditions() {
        let tb = InitialCondition::TwoBlock {
            first: TorusAngle::ZERO,
            second: crate::torus::wrap(PI).unwrap(),
            split: BlockSplit::IndexBelow(2),
        };
        let a = tb.realize(4).unwrap();
        assert_eq!(a[1].value(), 0.0);
        assert_eq!(a[2].value(), PI);
        let mask = InitialCondition::TwoBlock {
            first: TorusAngle::ZERO,
            second: crate::torus::wrap(1.0).unwrap(),
            split: BlockSplit::Mask(vec![false, true]),
        };
        assert_eq!(mask.realize(2).unwrap()[0].value(), 1.0);
        assert!(mask.realize(3).is_err());
        assert!(InitialCondition::ExplicitAngles(vec![TorusAngle::ZERO]).realize(2).is_err());
        let u = InitialCondition::IidUniform { seed: 9 }.realize(1000).unwrap();
        assert!(u.iter().all(|a| (0.0..TAU).contains(&a.value())));
    }
}
