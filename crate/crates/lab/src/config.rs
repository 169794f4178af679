//! JSON experiment configuration.
//!
//! ```json
//! {
//!   "kind": "finite_time",
//!   "graph": { "family": "erdos_renyi", "p": 0.1, "symmetric": false, "sizes": [250, 500], "seed": 1 },
//!   "model": { "k": 2.0, "dt": 0.005, "t_end": 5.0, "record_every": 10, "order": 64 },
//!   "init": { "kind": "cosine", "amplitude": 0.8, "phase": 0.0 },
//!   "replicas": [1, 2, 3],
//!   "tolerance": { "absolute": 0.15 }
//! }
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{io_err, LabError, Result};

/// Frozen `c` in the default tolerance `c/√n`, from `kuramoto calibrate`
/// on the complete graph (see the README).
pub const DEFAULT_TOLERANCE_SCALE: f64 = 13.75;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    FiniteTime,
    LongtimeSub,
    LongtimeSuper,
    BrownianMaximal,
    GraphScaling,
    AdversarialInit,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::FiniteTime => "finite_time",
            ExperimentKind::LongtimeSub => "longtime_sub",
            ExperimentKind::LongtimeSuper => "longtime_super",
            ExperimentKind::BrownianMaximal => "brownian_maximal",
            ExperimentKind::GraphScaling => "graph_scaling",
            ExperimentKind::AdversarialInit => "adversarial_init",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum GraphFamily {
    Complete,
    ErdosRenyi {
        p: f64,
        #[serde(default)]
        symmetric: bool,
    },
    /// Random regular; `degree` defaults to `⌈√n⌉`.
    Regular {
        #[serde(default)]
        degree: Option<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSpec {
    #[serde(flatten)]
    pub family: GraphFamily,
    pub sizes: Vec<usize>,
    /// Base seed; each (size, replica) graph gets a seed derived from it.
    #[serde(default)]
    pub seed: u64,
}

fn default_order() -> usize {
    64
}

fn default_pde_order() -> usize {
    128
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub k: f64,
    pub dt: f64,
    pub t_end: f64,
    pub record_every: usize,
    /// Truncation of recorded spectra and distances.
    #[serde(default = "default_order")]
    pub order: usize,
    /// Truncation of the mean-field solver.
    #[serde(default = "default_pde_order")]
    pub pde_order: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitSpec {
    Uniform,
    /// Density `(1 + a cos(θ − ψ))/2π`.
    Cosine { amplitude: f64, phase: f64 },
    /// The stationary profile `q_ψ` of the model's coupling.
    SyncProfile { phase: f64 },
    Point { phase: f64 },
    /// First half of the vertices at `first`, the rest at `second`.
    TwoBlock { first: f64, second: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tolerance {
    Absolute(f64),
    /// `c/√n`.
    Scaled(f64),
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance::Scaled(DEFAULT_TOLERANCE_SCALE)
    }
}

impl Tolerance {
    pub fn epsilon(self, n: usize) -> f64 {
        match self {
            Tolerance::Absolute(e) => e,
            Tolerance::Scaled(c) => c / (n as f64).sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrownianSpec {
    pub horizons: Vec<f64>,
    pub t0: f64,
    /// Largest allowed max/min ratio of the fitted constants.
    #[serde(default = "default_spread")]
    pub max_spread: f64,
    /// Allowed relative deviation from exact `1/n` scaling between sizes.
    #[serde(default = "default_scaling_tolerance")]
    pub scaling_tolerance: f64,
}

fn default_spread() -> f64 {
    3.0
}

fn default_scaling_tolerance() -> f64 {
    0.25
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingSpec {
    pub restarts: usize,
    #[serde(default = "default_delta")]
    pub delta: f64,
}

fn default_delta() -> f64 {
    0.2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdversarialSpec {
    /// Horizon of the connected-graph comparison.
    pub converge_horizon: f64,
    /// Lower bound on the split-graph distance at `model.t_end`.
    pub floor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub graph: GraphSpec,
    pub model: ModelSpec,
    #[serde(default = "default_init")]
    pub init: InitSpec,
    pub replicas: Vec<u64>,
    #[serde(default)]
    pub tolerance: Tolerance,
    /// Records before this time are ignored by the long-time checks.
    #[serde(default)]
    pub transient: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub brownian: Option<BrownianSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scaling: Option<ScalingSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adversarial: Option<AdversarialSpec>,
}

fn default_init() -> InitSpec {
    InitSpec::Uniform
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        let cfg: ExperimentConfig = serde_json::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(LabError::Config(m.to_string()));
        if self.graph.sizes.is_empty() {
            return bad("graph.sizes is empty");
        }
        if self.replicas.is_empty() {
            return bad("replicas is empty");
        }
        if self.model.order == 0 || self.model.pde_order < self.model.order {
            return bad("need 1 ≤ model.order ≤ model.pde_order");
        }
        let mut sizes = self.graph.sizes.clone();
        sizes.sort_unstable();
        sizes.dedup();
        if sizes != self.graph.sizes {
            return bad("graph.sizes must be strictly increasing");
        }
        match self.kind {
            ExperimentKind::LongtimeSuper if self.model.k <= 1.0 => {
                bad("longtime_super needs K > 1")
            }
            ExperimentKind::LongtimeSub if self.model.k >= 1.0 => bad("longtime_sub needs K < 1"),
            ExperimentKind::BrownianMaximal => {
                if self.model.k != 0.0 {
                    return bad("brownian_maximal needs K = 0");
                }
                match &self.brownian {
                    None => bad("brownian_maximal needs a `brownian` section"),
                    Some(b) if b.horizons.iter().any(|&t| t < b.t0 || t > self.model.t_end) => {
                        bad("brownian horizons must lie in [t0, model.t_end]")
                    }
                    Some(_) => Ok(()),
                }
            }
            ExperimentKind::GraphScaling if self.scaling.is_none() => {
                bad("graph_scaling needs a `scaling` section")
            }
            ExperimentKind::AdversarialInit => match (&self.adversarial, &self.init) {
                (None, _) => bad("adversarial_init needs an `adversarial` section"),
                (Some(_), InitSpec::TwoBlock { .. }) => Ok(()),
                _ => bad("adversarial_init needs a two_block init"),
            },
            _ => Ok(()),
        }
    }
}
