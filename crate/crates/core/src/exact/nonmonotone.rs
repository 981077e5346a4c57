//! Survival probabilities on two adjacent sites, where the mutation process
//! fails to be monotone in its initial state.

use super::{
    build_generator, enumerate_states, prob_nonempty, ExactError, GeneratorMatrix, LumpedState,
};
use crate::dynamics::ProcessKind;
use crate::graph::GraphSpec;
use serde::Serialize;

/// `P(A_t != empty)` from the three initial conditions on two sites.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoSiteValues {
    /// Both sites, one type.
    pub same_pair: f64,
    /// Both sites, two types.
    pub split_pair: f64,
    /// One site.
    pub single: f64,
}

/// Exact values of the mutation process at finite `lambda`.
pub fn two_site_values(lambda: f64, r: f64, t: f64) -> Result<TwoSiteValues, ExactError> {
    let space = enumerate_states(&GraphSpec::TwoSite)?;
    let gen = build_generator(&space, ProcessKind::Mutation, lambda, r)?;
    Ok(TwoSiteValues {
        same_pair: prob_nonempty(&gen, &LumpedState::single_block(0b11), t)?,
        split_pair: prob_nonempty(&gen, &LumpedState::singletons(0b11), t)?,
        single: prob_nonempty(&gen, &LumpedState::single_block(0b01), t)?,
    })
}

/// The `lambda -> inf` limit. A lone pathogen refills the other site
/// instantly, so the chain reduces to: empty, a one-type pair dying at rate
/// one, and a two-type pair. In the two-type pair one type dies at rate 2 and
/// the refill is a new type with probability `r`.
pub fn refill_limit(r: f64, t: f64) -> Result<TwoSiteValues, ExactError> {
    if !(0.0..=1.0).contains(&r) {
        return Err(ExactError::Parameter(format!(
            "r must lie in [0, 1], got {r}"
        )));
    }
    const EMPTY: usize = 0;
    const SAME: usize = 1;
    const SPLIT: usize = 2;
    let chain =
        GeneratorMatrix::from_rates(3, &[(SAME, EMPTY, 1.0), (SPLIT, SAME, 2.0 * (1.0 - r))])?;
    let alive =
        |from: usize| -> Result<f64, ExactError> { Ok(1.0 - chain.transient(from, t)?[EMPTY]) };
    let same_pair = alive(SAME)?;
    let split_pair = alive(SPLIT)?;
    Ok(TwoSiteValues {
        same_pair,
        split_pair,
        single: r * split_pair + (1.0 - r) * same_pair,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn refill_chain_matches_closed_forms() {
        for t in [0.25, 1.0, 3.0] {
            let v = refill_limit(0.5, t).unwrap();
            let e = (-t).exp();
            assert!((v.same_pair - e).abs() < 1e-10);
            assert!((v.split_pair - (1.0 + t) * e).abs() < 1e-10);
            assert!((v.single - (1.0 + t / 2.0) * e).abs() < 1e-10);
        }
    }

    #[test]
    fn large_lambda_approaches_the_limit() {
        let v = two_site_values(1e3, 0.5, 1.0).unwrap();
        let e = (-1.0f64).exp();
        assert!((v.same_pair - e).abs() < 0.01);
        assert!((v.split_pair - 2.0 * e).abs() < 0.01);
        assert!((v.single - 1.5 * e).abs() < 0.01);
        assert!(v.same_pair < v.single && v.single < v.split_pair);
    }
}
