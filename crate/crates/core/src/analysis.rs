//! Closed-form thresholds, type-tree offspring means, drift feasibility and
//! the type-quotient identity.

use crate::dynamics::{Configuration, TypeId};
use crate::graph::{neighbors, GraphError, GraphSpec, SiteAddress};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("branching number d must be at least 2, got {0}")]
    Degree(u32),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

type Result<T> = std::result::Result<T, AnalysisError>;

/// A nonnegative value that may be `+inf`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Extended {
    Finite(f64),
    Infinite,
}

pub type ExtendedMean = Extended;

impl Extended {
    pub fn is_infinite(&self) -> bool {
        matches!(self, Extended::Infinite)
    }

    /// Finite value, or `f64::INFINITY`.
    pub fn value(&self) -> f64 {
        match self {
            Extended::Finite(x) => *x,
            Extended::Infinite => f64::INFINITY,
        }
    }

    pub fn finite(&self) -> Option<f64> {
        match self {
            Extended::Finite(x) => Some(*x),
            Extended::Infinite => None,
        }
    }
}

impl fmt::Display for Extended {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extended::Finite(x) => write!(f, "{x}"),
            Extended::Infinite => f.write_str("inf"),
        }
    }
}

fn check_d(d: u32) -> Result<f64> {
    if d < 2 {
        return Err(AnalysisError::Degree(d));
    }
    Ok(f64::from(d))
}

fn check_r(r: f64, lo_open: bool, hi_open: bool) -> Result<()> {
    let ok = r.is_finite()
        && if lo_open { r > 0.0 } else { r >= 0.0 }
        && if hi_open { r < 1.0 } else { r <= 1.0 };
    if ok {
        Ok(())
    } else {
        let (l, h) = (
            if lo_open { "(" } else { "[" },
            if hi_open { ")" } else { "]" },
        );
        Err(AnalysisError::Parameter(format!(
            "r must lie in {l}0, 1{h}, got {r}"
        )))
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(AnalysisError::Parameter(format!(
            "lambda must be positive, got {lambda}"
        )))
    }
}

/// Above `1/(d-1)` the pathogens survive for every `r > 0`.
pub fn threshold_survive(d: u32) -> Result<f64> {
    Ok(1.0 / (check_d(d)? - 1.0))
}

/// At or below `1/(d-1+2r)` the pathogens die out.
pub fn threshold_die(d: u32, r: f64) -> Result<f64> {
    let d = check_d(d)?;
    check_r(r, false, false)?;
    Ok(1.0 / (d - 1.0 + 2.0 * r))
}

/// Range of `lambda` with a phase transition in `r`.
pub fn window_transition(d: u32) -> Result<(f64, f64)> {
    let d = check_d(d)?;
    let left = (1.0 - d + ((d - 1.0) * (7.0 + 9.0 * d)).sqrt()) / (2.0 * (d * d - 1.0));
    Ok((left, 1.0 / (d - 1.0)))
}

/// Range of `lambda` with weak survival for all `r > 0`; empty for `d < 6`.
pub fn window_weak(d: u32) -> Result<Option<(f64, f64)>> {
    let df = check_d(d)?;
    let (lo, hi) = (1.0 / (df - 1.0), 1.0 / (2.0 * df.sqrt()));
    Ok((lo < hi).then_some((lo, hi)))
}

/// Survival bound from the exponential drift criterion; `+inf` at `r = 0`.
pub fn lambdabound(d: u32, r: f64) -> Result<Extended> {
    let d = check_d(d)?;
    check_r(r, false, false)?;
    if r == 0.0 {
        return Ok(Extended::Infinite);
    }
    let disc = (d + 1.0).powi(2) + 4.0 * r * (d + 1.0) * (d - 2.0) + 4.0 * d * d * r * r;
    Ok(Extended::Finite(
        (d + 1.0 - 2.0 * r * d + disc.sqrt()) / (2.0 * r * (d * d - 1.0)),
    ))
}

/// Mean offspring count of the type tree of the single-birth restricted process.
pub fn gw_mean_u(d: u32, lambda: f64, r: f64) -> Result<Extended> {
    let d = check_d(d)?;
    check_lambda(lambda)?;
    check_r(r, true, true)?;
    let ratio = d * lambda * (1.0 - r) / (lambda + 1.0);
    if ratio >= 1.0 {
        return Ok(Extended::Infinite);
    }
    Ok(Extended::Finite(
        d * lambda * r / (1.0 - (d - 1.0) * lambda + d * lambda * r),
    ))
}

/// Mean number of new types produced by one type in the dominating branching
/// comparison.
pub fn gw_mean_z(d: u32, lambda: f64, r: f64) -> Result<Extended> {
    let d = check_d(d)?;
    check_lambda(lambda)?;
    check_r(r, true, true)?;
    let growth = (d - 1.0) * (1.0 - r) * lambda;
    if growth >= 1.0 {
        return Ok(Extended::Infinite);
    }
    Ok(Extended::Finite((d + 1.0) * r * lambda / (1.0 - growth)))
}

/// Exponential rate bounding the expected level-weighted size of the
/// individual-death process.
pub fn gamma_rate(d: u32, lambda: f64, rho: f64) -> Result<f64> {
    let d = check_d(d)?;
    if !(rho > 0.0 && rho < 1.0) {
        return Err(AnalysisError::Parameter(format!(
            "rho must lie in (0, 1), got {rho}"
        )));
    }
    Ok(lambda * d * rho + lambda / rho - 1.0)
}

/// Coefficients of `f(A) = alpha N(A) + beta C(A)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DriftWitness {
    pub alpha: f64,
    pub beta: f64,
}

impl DriftWitness {
    /// Slacks of the three feasibility inequalities; all must be positive.
    pub fn slacks(&self, d: u32, lambda: f64, r: f64) -> [f64; 3] {
        let d = f64::from(d);
        let (a, b) = (self.alpha, self.beta);
        [
            a * lambda * r - b,
            b - a * (1.0 - lambda * r * (d - 1.0)).max(0.0),
            2.0 * lambda * r * a - b * (2.0 + lambda * (d + 1.0)),
        ]
    }
}

/// Open-closed interval of admissible `beta` at `alpha = 1`.
fn beta_interval(d: f64, lambda: f64, r: f64) -> (f64, f64) {
    let lo = (1.0 - lambda * r * (d - 1.0)).max(0.0);
    let hi = 2.0 * lambda * r / (2.0 + lambda * (d + 1.0));
    (lo, hi)
}

/// A witness `(1, beta)` with `beta` at the midpoint of the admissible
/// interval, or `None` when the interval is empty.
pub fn drift_feasible(d: u32, lambda: f64, r: f64) -> Result<Option<DriftWitness>> {
    let df = check_d(d)?;
    check_lambda(lambda)?;
    check_r(r, true, false)?;
    let (lo, hi) = beta_interval(df, lambda, r);
    if lo >= hi {
        return Ok(None);
    }
    let w = DriftWitness {
        alpha: 1.0,
        beta: 0.5 * (lo + hi),
    };
    Ok(w.slacks(d, lambda, r).iter().all(|&s| s > 0.0).then_some(w))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    DiesOut,
    SurvivesAllR,
    WeakSurvival,
    SurvivesByDrift,
    TheoryUnknown,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::DiesOut => "dies_out",
            Verdict::SurvivesAllR => "survives_all_r",
            Verdict::WeakSurvival => "weak_survival",
            Verdict::SurvivesByDrift => "survives_drift",
            Verdict::TheoryUnknown => "theory_unknown",
        }
    }

    pub fn survives(&self) -> bool {
        matches!(
            self,
            Verdict::SurvivesAllR | Verdict::WeakSurvival | Verdict::SurvivesByDrift
        )
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegionVerdict {
    pub verdict: Verdict,
    /// The bound that decided the verdict, if any.
    pub threshold: Option<f64>,
    /// `lambda` lies in the window where the outcome depends on `r`.
    pub in_transition_window: bool,
}

pub fn classify(d: u32, lambda: f64, r: f64) -> Result<RegionVerdict> {
    check_d(d)?;
    check_lambda(lambda)?;
    check_r(r, false, false)?;
    let (left, right) = window_transition(d)?;
    let in_transition_window = lambda > left && lambda < right;
    let v = |verdict, threshold| RegionVerdict {
        verdict,
        threshold,
        in_transition_window,
    };
    if r == 0.0 {
        return Ok(v(Verdict::DiesOut, None));
    }
    let die = threshold_die(d, r)?;
    if lambda <= die {
        return Ok(v(Verdict::DiesOut, Some(die)));
    }
    if let Some((lo, hi)) = window_weak(d)? {
        if lambda > lo && lambda < hi {
            return Ok(v(Verdict::WeakSurvival, Some(hi)));
        }
    }
    if lambda > right {
        return Ok(v(Verdict::SurvivesAllR, Some(right)));
    }
    if drift_feasible(d, lambda, r)?.is_some() {
        return Ok(v(Verdict::SurvivesByDrift, lambdabound(d, r)?.finite()));
    }
    Ok(v(Verdict::TheoryUnknown, None))
}

/// Outcome of [`quotient_identity_check`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum QuotientCheck {
    /// Fewer than two types in the component.
    NotApplicable {
        types: usize,
    },
    Checked(QuotientReport),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuotientReport {
    /// Number of types `k` in the component.
    pub types: usize,
    /// Number of other types adjacent to each type.
    pub adjacency: BTreeMap<TypeId, usize>,
    pub is_tree: bool,
    /// `sum (j_i - 1)`
    pub sum: i64,
    /// `k - 2`
    pub expected: i64,
    /// `j_i <= (d-1)|A^i| + 2` for every type; `None` off trees.
    pub degree_bound_holds: Option<bool>,
}

impl QuotientReport {
    pub fn passed(&self) -> bool {
        self.is_tree && self.sum == self.expected && self.degree_bound_holds != Some(false)
    }
}

impl QuotientCheck {
    pub fn passed(&self) -> bool {
        match self {
            QuotientCheck::NotApplicable { .. } => true,
            QuotientCheck::Checked(r) => r.passed(),
        }
    }
}

/// Builds the graph whose vertices are the types present in `component` and
/// whose edges join types with adjacent members, and checks that it is a
/// tree with `sum (j_i - 1) = k - 2`.
pub fn quotient_identity_check(
    g: &GraphSpec,
    config: &Configuration,
    component: &BTreeSet<SiteAddress>,
) -> Result<QuotientCheck> {
    let mut types: BTreeMap<TypeId, usize> = BTreeMap::new();
    for site in component {
        let ty = config.type_of(site).ok_or_else(|| {
            AnalysisError::Parameter(format!("site {site} of the component is not occupied"))
        })?;
        *types.entry(ty).or_default() += 1;
    }
    let k = types.len();
    if k < 2 {
        return Ok(QuotientCheck::NotApplicable { types: k });
    }
    let mut edges: BTreeSet<(TypeId, TypeId)> = BTreeSet::new();
    for site in component {
        let tx = config.type_of(site).expect("checked above");
        for y in neighbors(g, site)? {
            if !component.contains(&y) {
                continue;
            }
            let ty = config.type_of(&y).expect("component sites are occupied");
            if tx != ty {
                edges.insert((tx.min(ty), tx.max(ty)));
            }
        }
    }
    let mut adjacency: BTreeMap<TypeId, usize> = types.keys().map(|&t| (t, 0)).collect();
    for (a, b) in &edges {
        *adjacency.get_mut(a).expect("known type") += 1;
        *adjacency.get_mut(b).expect("known type") += 1;
    }
    let is_tree = edges.len() + 1 == k && quotient_connected(&types, &edges);
    let sum = adjacency.values().map(|&j| j as i64 - 1).sum();
    let degree_bound_holds = g.branching().filter(|_| g.is_tree()).map(|d| {
        adjacency
            .iter()
            .all(|(t, &j)| j as u64 <= u64::from(d - 1) * types[t] as u64 + 2)
    });
    Ok(QuotientCheck::Checked(QuotientReport {
        types: k,
        adjacency,
        is_tree,
        sum,
        expected: k as i64 - 2,
        degree_bound_holds,
    }))
}

fn quotient_connected(types: &BTreeMap<TypeId, usize>, edges: &BTreeSet<(TypeId, TypeId)>) -> bool {
    let Some(&start) = types.keys().next() else {
        return true;
    };
    let mut seen = BTreeSet::from([start]);
    let mut stack = vec![start];
    while let Some(t) = stack.pop() {
        for &(a, b) in edges {
            let other = if a == t {
                b
            } else if b == t {
                a
            } else {
                continue;
            };
            if seen.insert(other) {
                stack.push(other);
            }
        }
    }
    seen.len() == types.len()
}
