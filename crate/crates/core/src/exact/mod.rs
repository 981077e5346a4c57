//! Exact transient laws on small finite graphs.
//!
//! Rates depend on the block structure only, never on the labels, so the
//! chain on `(occupied set, set partition)` pairs is an exact lumping of the
//! labelled chain.

mod generator;
mod nonmonotone;
mod states;

pub use generator::{build_generator, GeneratorMatrix, LumpedGenerator, TAIL_BOUND};
pub use nonmonotone::{refill_limit, two_site_values, TwoSiteValues};
pub use states::{enumerate_states, LumpedState, StateSpace, MAX_VERTICES};

use crate::dynamics::ProcessKind;
use crate::graph::GraphSpec;
use serde::Serialize;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum ExactError {
    #[error("graph {0} is not finite")]
    NotFinite(String),
    #[error("graph has {vertices} vertices; the exact solver accepts at most {cap}")]
    TooLarge { vertices: usize, cap: usize },
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
}

/// Distribution over the enumerated states at time `t`.
pub fn transient(
    gen: &LumpedGenerator,
    init: &LumpedState,
    t: f64,
) -> Result<Vec<f64>, ExactError> {
    gen.matrix.transient(gen.space.index_of(init)?, t)
}

/// `P(A_t != empty)`
pub fn prob_nonempty(gen: &LumpedGenerator, init: &LumpedState, t: f64) -> Result<f64, ExactError> {
    let p = transient(gen, init, t)?;
    let empty = gen.space.index_of(&LumpedState::empty())?;
    Ok((1.0 - p[empty]).clamp(0.0, 1.0))
}

/// `P(A_t meets C)` with `C` given as a vertex mask.
pub fn prob_intersect(
    gen: &LumpedGenerator,
    init: &LumpedState,
    target: u32,
    t: f64,
) -> Result<f64, ExactError> {
    check_mask(&gen.space, target)?;
    let p = transient(gen, init, t)?;
    Ok(hit_mass(&gen.space, &p, target))
}

fn check_mask(space: &StateSpace, mask: u32) -> Result<(), ExactError> {
    if mask & !space.full_mask() != 0 {
        return Err(ExactError::InvalidState(format!(
            "{mask:#b} is not a vertex subset"
        )));
    }
    Ok(())
}

fn hit_mass(space: &StateSpace, p: &[f64], target: u32) -> f64 {
    space
        .states()
        .iter()
        .zip(p)
        .filter(|(s, _)| s.occupied() & target != 0)
        .map(|(_, &x)| x)
        .sum()
}

/// Largest vertex count accepted by the exhaustive comparison checks.
pub const VERIFY_MAX_VERTICES: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub checks: usize,
    /// Smallest `right - left` over all checks.
    pub worst_slack: f64,
    pub worst_case: String,
    pub passed: bool,
}

impl ComparisonReport {
    fn new() -> Self {
        ComparisonReport {
            checks: 0,
            worst_slack: f64::INFINITY,
            worst_case: String::new(),
            passed: true,
        }
    }

    fn record(&mut self, slack: f64, case: impl FnOnce() -> String) {
        self.checks += 1;
        if slack < self.worst_slack {
            self.worst_slack = slack;
            self.worst_case = case();
        }
        if slack < -COMPARISON_TOLERANCE {
            self.passed = false;
        }
    }
}

/// Allowed violation in exact comparisons.
pub const COMPARISON_TOLERANCE: f64 = 1e-9;

fn small_space(g: &GraphSpec) -> Result<StateSpace, ExactError> {
    let space = enumerate_states(g)?;
    if space.vertex_count() > VERIFY_MAX_VERTICES {
        return Err(ExactError::TooLarge {
            vertices: space.vertex_count(),
            cap: VERIFY_MAX_VERTICES,
        });
    }
    Ok(space)
}

/// Checks `P^A(A_t meets C) <= P^A(A'_t meets C)` (mutation against
/// individual death) for every lumped initial state, every `C` and every `t`.
pub fn verify_domination(
    g: &GraphSpec,
    lambda: f64,
    r: f64,
    times: &[f64],
) -> Result<ComparisonReport, ExactError> {
    let space = small_space(g)?;
    let mutation = build_generator(&space, ProcessKind::Mutation, lambda, r)?;
    let primed = build_generator(&space, ProcessKind::IndividualDeath, lambda, r)?;
    let mut report = ComparisonReport::new();
    for (i, init) in space.states().iter().enumerate() {
        for &t in times {
            let pm = mutation.matrix.transient(i, t)?;
            let pp = primed.matrix.transient(i, t)?;
            for c in 0..=space.full_mask() {
                let slack = hit_mass(&space, &pp, c) - hit_mass(&space, &pm, c);
                report.record(slack, || format!("A={init} C={c:#b} t={t}"));
            }
        }
    }
    Ok(report)
}

/// Checks `P^{A n B} + P^{A u B} <= P^A + P^B` for the event `A'_t meets C`
/// of the individual-death process, over all `A, B, C` and every `t`.
pub fn verify_submodularity(
    g: &GraphSpec,
    lambda: f64,
    times: &[f64],
) -> Result<ComparisonReport, ExactError> {
    let space = small_space(g)?;
    // The occupied-set law of the individual-death process ignores r.
    let primed = build_generator(&space, ProcessKind::IndividualDeath, lambda, 1.0)?;
    let full = space.full_mask();
    let mut report = ComparisonReport::new();
    for &t in times {
        // hit[a][c] = P^a(A'_t meets c)
        let mut hit = vec![vec![0.0; full as usize + 1]; full as usize + 1];
        for a in 0..=full {
            let p = primed
                .matrix
                .transient(space.index_of(&LumpedState::singletons(a))?, t)?;
            for (c, slot) in hit[a as usize].iter_mut().enumerate() {
                *slot = hit_mass(&space, &p, c as u32);
            }
        }
        for a in 0..=full as usize {
            for b in 0..=full as usize {
                #[allow(clippy::needless_range_loop)]
                for c in 0..=full as usize {
                    let lhs = hit[a & b][c] + hit[a | b][c];
                    let rhs = hit[a][c] + hit[b][c];
                    report.record(rhs - lhs, || format!("A={a:#b} B={b:#b} C={c:#b} t={t}"));
                }
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn state_counts() {
        assert_eq!(enumerate_states(&GraphSpec::TwoSite).unwrap().len(), 5);
        assert_eq!(
            enumerate_states(&GraphSpec::path(3).unwrap())
                .unwrap()
                .len(),
            15
        );
        let single = GraphSpec::explicit(vec![vec![]]).unwrap();
        assert_eq!(enumerate_states(&single).unwrap().len(), 2);
        assert!(enumerate_states(&GraphSpec::hom_tree(2).unwrap()).is_err());
        assert!(matches!(
            enumerate_states(&GraphSpec::path(13).unwrap()),
            Err(ExactError::TooLarge { .. })
        ));
    }

    #[test]
    fn two_site_birth_row() {
        let space = enumerate_states(&GraphSpec::TwoSite).unwrap();
        let (lambda, r) = (2.0, 0.25);
        let gen = build_generator(&space, ProcessKind::Mutation, lambda, r).unwrap();
        let x = space.index_of(&LumpedState::singletons(0b01)).unwrap();
        let same = space.index_of(&LumpedState::single_block(0b11)).unwrap();
        let split = space.index_of(&LumpedState::singletons(0b11)).unwrap();
        let empty = space.index_of(&LumpedState::empty()).unwrap();
        let row: std::collections::HashMap<usize, f64> =
            gen.matrix.row(x).iter().copied().collect();
        assert_eq!(row.len(), 3);
        assert!((row[&same] - lambda * (1.0 - r)).abs() < 1e-15);
        assert!((row[&split] - lambda * r).abs() < 1e-15);
        assert_eq!(row[&empty], 1.0);
        assert!(gen.matrix.row_sum_error() < 1e-12);
        assert!(gen.matrix.row(empty).is_empty());
    }

    #[test]
    fn single_vertex_decays_at_rate_one() {
        let g = GraphSpec::explicit(vec![vec![]]).unwrap();
        let space = enumerate_states(&g).unwrap();
        let gen = build_generator(&space, ProcessKind::Mutation, 7.0, 0.5).unwrap();
        let p = prob_nonempty(&gen, &LumpedState::single_block(1), 1.3).unwrap();
        assert!((p - (-1.3f64).exp()).abs() < 1e-12);
        assert_eq!(
            prob_intersect(&gen, &LumpedState::single_block(1), 0, 1.0).unwrap(),
            0.0
        );
        assert!(prob_intersect(&gen, &LumpedState::single_block(1), 0b10, 1.0).is_err());
    }

    #[test]
    fn triplet_dump_lists_diagonal() {
        let space = enumerate_states(&GraphSpec::TwoSite).unwrap();
        let gen = build_generator(&space, ProcessKind::IndividualDeath, 1.0, 0.5).unwrap();
        let mut buf = Vec::new();
        gen.matrix.write_triplets(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# row col rate\n"));
        assert!(text.lines().any(|l| l.starts_with("1 1 -")));
    }
}
