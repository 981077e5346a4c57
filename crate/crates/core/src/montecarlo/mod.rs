//! Replication harness and estimators.
//!
//! Trial `i` of a batch runs with seed `mix(master, i)`, so results do not
//! depend on how trials are spread over worker threads.

mod stats;
mod sweep;

pub use stats::{format_sig, mean_se, normal_quantile, wilson_interval};
pub use sweep::{sweep, SweepGrid, SweepResult, SweepRow, CSV_HEADER};

use crate::analysis::{gamma_rate, gw_mean_u, AnalysisError, DriftWitness};
use crate::dynamics::{
    extract_type_tree, mix, CensorReason, Configuration, DynamicsError, Engine, ProcessKind,
    ProcessParams, Progress, StopRule, Termination, TypeId,
};
use crate::graph::{GraphSpec, SiteAddress};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeSet;

pub const DEFAULT_CONFIDENCE: f64 = 0.95;

#[derive(Debug, thiserror::Error)]
pub enum MonteCarloError {
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("invalid parameter: {0}")]
    Parameter(String),
}

type Result<T> = std::result::Result<T, MonteCarloError>;

/// Seed of trial `index` under `master`.
pub fn trial_seed(master: u64, index: u64) -> u64 {
    mix(&[master, index])
}

/// Default initial condition: one type-1 pathogen at the root.
pub fn default_init(g: &GraphSpec) -> Configuration {
    Configuration::singleton(g.root())
}

fn check_trials(trials: u64) -> Result<()> {
    if trials == 0 {
        return Err(MonteCarloError::Parameter(
            "at least one trial is required".into(),
        ));
    }
    Ok(())
}

/// Censored survival proxy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurvivalEstimate {
    pub trials: u64,
    /// Runs censored with a nonempty configuration.
    pub survived: u64,
    pub extinct: u64,
    pub censored_time: u64,
    pub censored_pop: u64,
    pub point: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub confidence: f64,
}

impl SurvivalEstimate {
    fn from_terminations(ts: &[Termination], confidence: f64) -> Result<Self> {
        let trials = ts.len() as u64;
        let mut est = SurvivalEstimate {
            trials,
            survived: 0,
            extinct: 0,
            censored_time: 0,
            censored_pop: 0,
            point: 0.0,
            ci_low: 0.0,
            ci_high: 0.0,
            confidence,
        };
        for t in ts {
            match t {
                Termination::Extinct { .. } => est.extinct += 1,
                Termination::Censored {
                    reason: CensorReason::TimeHorizon,
                    ..
                } => est.censored_time += 1,
                // Every other cap is a size cap.
                Termination::Censored { .. } => est.censored_pop += 1,
            }
        }
        est.survived = est.censored_time + est.censored_pop;
        est.point = est.survived as f64 / trials as f64;
        (est.ci_low, est.ci_high) = wilson_interval(est.survived, trials, confidence)?;
        Ok(est)
    }

    /// Binomial standard error of the point estimate.
    pub fn se(&self) -> f64 {
        (self.point * (1.0 - self.point) / self.trials as f64).sqrt()
    }
}

/// Runs `trials` independent simulations and counts how many are censored
/// before extinction.
#[allow(clippy::too_many_arguments)]
pub fn estimate_survival(
    g: &GraphSpec,
    params: &ProcessParams,
    init: &Configuration,
    trials: u64,
    stop: &StopRule,
    seed: u64,
    confidence: f64,
) -> Result<SurvivalEstimate> {
    check_trials(trials)?;
    params.validate()?;
    normal_quantile(confidence)?;
    let ts = (0..trials)
        .into_par_iter()
        .map(|i| -> Result<Termination> {
            let mut e = Engine::new(g, params, init, trial_seed(seed, i))?;
            match e.advance(f64::INFINITY, stop) {
                Progress::Stopped(t) => Ok(t),
                Progress::Reached => unreachable!("infinite horizon"),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    SurvivalEstimate::from_terminations(&ts, confidence)
}

/// Binomial estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProportionEstimate {
    pub trials: u64,
    pub hits: u64,
    pub point: f64,
    pub se: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl ProportionEstimate {
    pub fn new(hits: u64, trials: u64, confidence: f64) -> Result<Self> {
        let (ci_low, ci_high) = wilson_interval(hits, trials, confidence)?;
        let point = hits as f64 / trials as f64;
        Ok(ProportionEstimate {
            trials,
            hits,
            point,
            se: (point * (1.0 - point) / trials as f64).sqrt(),
            ci_low,
            ci_high,
        })
    }
}

/// Estimates `P(A_t meets C)` from `init`.
#[allow(clippy::too_many_arguments)]
pub fn estimate_hit(
    g: &GraphSpec,
    params: &ProcessParams,
    init: &Configuration,
    target: &BTreeSet<SiteAddress>,
    t: f64,
    trials: u64,
    seed: u64,
    confidence: f64,
) -> Result<ProportionEstimate> {
    check_trials(trials)?;
    if params.kind == ProcessKind::NonSpatial {
        return Err(MonteCarloError::Parameter(
            "hitting sets need a spatial process".into(),
        ));
    }
    let stop = StopRule::new(f64::INFINITY, usize::MAX);
    let hits = (0..trials)
        .into_par_iter()
        .map(|i| -> Result<u64> {
            let mut e = Engine::new(g, params, init, trial_seed(seed, i))?;
            e.advance(t, &stop);
            for c in target {
                if e.occupies(g, c)? {
                    return Ok(1);
                }
            }
            Ok(0)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    ProportionEstimate::new(hits, trials, confidence)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightPoint {
    pub t: f64,
    pub mean: f64,
    pub se: f64,
    /// `exp(gamma t)`
    pub bound: f64,
}

/// Mean level-weighted size `E w_rho(A'_t)` of the individual-death process
/// on `HomTree(d)` started from the root, next to its exponential bound.
/// `lambda = 0` is allowed.
pub fn estimate_weight_bound(
    d: u32,
    lambda: f64,
    rho: f64,
    times: &[f64],
    trials: u64,
    seed: u64,
) -> Result<Vec<WeightPoint>> {
    check_trials(trials)?;
    let gamma = gamma_rate(d, lambda, rho)?;
    let grid = sorted_grid(times)?;
    let g = GraphSpec::hom_tree(d).map_err(DynamicsError::from)?;
    let params = ProcessParams {
        kind: ProcessKind::IndividualDeath,
        lambda,
        r: 1.0,
    };
    let init = default_init(&g);
    let stop = StopRule::new(f64::INFINITY, usize::MAX);
    let samples = (0..trials)
        .into_par_iter()
        .map(|i| -> Result<Vec<f64>> {
            let mut e = Engine::new(&g, &params, &init, trial_seed(seed, i))?;
            Ok(grid
                .iter()
                .map(|&t| {
                    e.advance(t, &stop);
                    e.weight(rho).expect("tree levels")
                })
                .collect())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(grid
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let col: Vec<f64> = samples.iter().map(|s| s[k]).collect();
            let (mean, se) = mean_se(&col);
            WeightPoint {
                t,
                mean,
                se,
                bound: (gamma * t).exp(),
            }
        })
        .collect())
}

fn sorted_grid(times: &[f64]) -> Result<Vec<f64>> {
    if times.is_empty() || times.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
        return Err(MonteCarloError::Parameter(
            "time grid must be nonempty, finite and >= 0".into(),
        ));
    }
    let mut grid = times.to_vec();
    grid.sort_by(f64::total_cmp);
    Ok(grid)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OffspringEstimate {
    pub episodes: u64,
    pub mean: f64,
    pub se: f64,
    /// The closed-form mean is infinite at these parameters.
    pub infinite_mean_region: bool,
    /// Episodes stopped by the safety population cap before type 1 died.
    pub truncated: u64,
}

/// Safety cap on episode size in [`estimate_offspring_mean`].
pub const OFFSPRING_POPULATION_CAP: usize = 2_000_000;

/// Mean number of new types founded directly by type 1 in the single-birth
/// restricted process on `HomTree(d)`. Each episode runs until type 1 has
/// no living member, after which it can found no further types.
pub fn estimate_offspring_mean(
    d: u32,
    lambda: f64,
    r: f64,
    episodes: u64,
    seed: u64,
) -> Result<OffspringEstimate> {
    check_trials(episodes)?;
    let infinite_mean_region = gw_mean_u(d, lambda, r)?.is_infinite();
    let g = GraphSpec::hom_tree(d).map_err(DynamicsError::from)?;
    let params = ProcessParams::new(ProcessKind::SingleBirthRestricted, lambda, r)?;
    let init = default_init(&g);
    let stop = StopRule {
        t_max: f64::INFINITY,
        n_max: OFFSPRING_POPULATION_CAP,
        k_max: None,
        watch_type: Some(TypeId(1)),
    };
    let runs = (0..episodes)
        .into_par_iter()
        .map(|i| -> Result<(f64, bool)> {
            let traj = Engine::new(&g, &params, &init, trial_seed(seed, i))?
                .recording()
                .run(&stop);
            let truncated = matches!(
                traj.termination,
                Termination::Censored {
                    reason: CensorReason::PopulationCap,
                    ..
                }
            );
            Ok((
                extract_type_tree(&traj).out_degree(TypeId(1)) as f64,
                truncated,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let counts: Vec<f64> = runs.iter().map(|r| r.0).collect();
    let (mean, se) = mean_se(&counts);
    Ok(OffspringEstimate {
        episodes,
        mean,
        se,
        infinite_mean_region,
        truncated: runs.iter().filter(|r| r.1).count() as u64,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbePoint {
    pub t: f64,
    /// Mean of `exp(-c f(A_t))`, extinct runs contributing 1.
    pub mean: f64,
    pub se: f64,
    /// Same mean over runs still alive at `t`.
    pub conditioned_mean: f64,
    pub conditioned_se: f64,
    pub alive: u64,
}

/// Tracks `exp(-c (alpha N(A_t) + beta C(A_t)))` for the mutation process on
/// `HomTree(d)` from the root.
#[allow(clippy::too_many_arguments)]
pub fn supermartingale_probe(
    d: u32,
    lambda: f64,
    r: f64,
    witness: DriftWitness,
    c: f64,
    times: &[f64],
    trials: u64,
    seed: u64,
) -> Result<Vec<ProbePoint>> {
    check_trials(trials)?;
    if !(c > 0.0 && c.is_finite()) {
        return Err(MonteCarloError::Parameter(format!(
            "c must be positive, got {c}"
        )));
    }
    if witness
        .slacks(d, lambda, r)
        .iter()
        .any(|&s| s.is_nan() || s <= 0.0)
    {
        return Err(MonteCarloError::Parameter(format!(
            "({}, {}) does not satisfy the drift inequalities at d={d}, lambda={lambda}, r={r}",
            witness.alpha, witness.beta
        )));
    }
    let grid = sorted_grid(times)?;
    let g = GraphSpec::hom_tree(d).map_err(DynamicsError::from)?;
    let params = ProcessParams::new(ProcessKind::Mutation, lambda, r)?;
    let init = default_init(&g);
    let stop = StopRule::default();
    let samples = (0..trials)
        .into_par_iter()
        .map(|i| -> Result<Vec<(f64, bool)>> {
            let mut e = Engine::new(&g, &params, &init, trial_seed(seed, i))?;
            Ok(grid
                .iter()
                .map(|&t| {
                    e.advance(t, &stop);
                    let alive = e.population() > 0;
                    let f = witness.alpha * e.type_count() as f64
                        + witness.beta * e.components().len() as f64;
                    ((-c * f).exp(), alive)
                })
                .collect())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(grid
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let all: Vec<f64> = samples.iter().map(|s| s[k].0).collect();
            let alive: Vec<f64> = samples.iter().filter(|s| s[k].1).map(|s| s[k].0).collect();
            let (mean, se) = mean_se(&all);
            let (conditioned_mean, conditioned_se) = mean_se(&alive);
            ProbePoint {
                t,
                mean,
                se,
                conditioned_mean,
                conditioned_se,
                alive: alive.len() as u64,
            }
        })
        .collect())
}
