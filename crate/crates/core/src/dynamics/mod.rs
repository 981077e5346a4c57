//! Continuous-time dynamics of all process variants.

mod config;
mod coupled;
mod engine;
mod occupancy;
mod randomness;
mod trajectory;
mod typetree;

pub use config::{ConfigError, Configuration, TypeId};
pub use coupled::{simulate_coupled, CoupledRun, Violation};
pub use engine::{Engine, Progress};
pub(crate) use randomness::mix;
pub use randomness::{RandomnessSource, StreamKey};
pub use trajectory::{CensorReason, Event, EventKind, Termination, Trajectory};
pub use typetree::{extract_type_tree, TypeNode, TypeTree};

use crate::graph::{level, GraphError, GraphSpec, SiteAddress};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum DynamicsError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProcessKind {
    /// Every type block dies at rate 1.
    Mutation,
    /// Every individual dies at rate 1.
    IndividualDeath,
    /// Mutation rules; no site is ever occupied twice and no birth lands
    /// below level 0 on the homogeneous tree.
    SingleBirthRestricted,
    /// No geometry: births at rate `lambda` per pathogen.
    NonSpatial,
}

impl ProcessKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ProcessKind::Mutation => "mutation",
            ProcessKind::IndividualDeath => "individual-death",
            ProcessKind::SingleBirthRestricted => "single-birth-restricted",
            ProcessKind::NonSpatial => "nonspatial",
        }
    }
}

impl std::fmt::Display for ProcessKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ProcessKind {
    type Err = DynamicsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mutation" => Ok(ProcessKind::Mutation),
            "individual-death" | "primed" => Ok(ProcessKind::IndividualDeath),
            "single-birth-restricted" | "restricted" => Ok(ProcessKind::SingleBirthRestricted),
            "nonspatial" | "non-spatial" => Ok(ProcessKind::NonSpatial),
            _ => Err(DynamicsError::InvalidParameter(format!(
                "unknown process kind {s:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProcessParams {
    pub kind: ProcessKind,
    pub lambda: f64,
    pub r: f64,
}

impl ProcessParams {
    pub fn new(kind: ProcessKind, lambda: f64, r: f64) -> Result<Self, DynamicsError> {
        let p = ProcessParams { kind, lambda, r };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(DynamicsError::InvalidParameter(format!(
                "lambda must be positive and finite, got {}",
                self.lambda
            )));
        }
        if !(0.0..=1.0).contains(&self.r) {
            return Err(DynamicsError::InvalidParameter(format!(
                "r must lie in [0, 1], got {}",
                self.r
            )));
        }
        Ok(())
    }
}

/// When to stop a run. A run that stops for any reason other than
/// extinction counts as censored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopRule {
    pub t_max: f64,
    pub n_max: usize,
    /// Stop once this many type labels have been handed out.
    pub k_max: Option<u64>,
    /// Stop as soon as this type has no living member.
    pub watch_type: Option<TypeId>,
}

impl Default for StopRule {
    fn default() -> Self {
        StopRule {
            t_max: 200.0,
            n_max: 5000,
            k_max: None,
            watch_type: None,
        }
    }
}

impl StopRule {
    pub fn new(t_max: f64, n_max: usize) -> Self {
        StopRule {
            t_max,
            n_max,
            ..Default::default()
        }
    }
}

/// Simulates one run with the aggregate engine and keeps the full event log.
pub fn simulate(
    g: &GraphSpec,
    params: &ProcessParams,
    init: &Configuration,
    stop: &StopRule,
    seed: u64,
) -> Result<Trajectory, DynamicsError> {
    if stop.t_max.is_nan() || stop.t_max < 0.0 || stop.n_max == 0 {
        return Err(DynamicsError::InvalidParameter(
            "stopping rule needs t_max >= 0 and n_max >= 1".into(),
        ));
    }
    params.validate()?;
    Ok(Engine::new(g, params, init, seed)?.recording().run(stop))
}

/// `sum_{x in A} rho^level(x)` on a tree.
pub fn weight<'a>(
    g: &GraphSpec,
    sites: impl IntoIterator<Item = &'a SiteAddress>,
    rho: f64,
) -> Result<f64, DynamicsError> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(DynamicsError::InvalidParameter(format!(
            "rho must lie in (0, 1), got {rho}"
        )));
    }
    let mut w = 0.0;
    for v in sites {
        w += rho.powi(level(g, v)? as i32);
    }
    Ok(w)
}
