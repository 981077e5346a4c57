//! Invariant and oracle suites with pinned seeds.

use crate::config::{Format, RunConfig, SeedSource};
use crate::output::emit;
use crate::CliError;
use clap::ValueEnum;
use mutacp::analysis::{quotient_identity_check, QuotientCheck};
use mutacp::dynamics::{simulate, simulate_coupled, ProcessKind, ProcessParams, StopRule};
use mutacp::exact::{
    two_site_values, verify_domination, verify_submodularity, COMPARISON_TOLERANCE,
};
use mutacp::graph::{boundary_pairs, components, GraphSpec, SiteAddress};
use mutacp::montecarlo::{default_init, trial_seed};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeSet;

const CHECK_SEED: u64 = 99;
const REFILL_TOL: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    #[value(alias = "remark10")]
    TwoSite,
    #[value(alias = "theorem4")]
    Domination,
    #[value(alias = "lemma3")]
    Submodularity,
    Coupling,
    Identities,
    All,
}

#[derive(Debug, Serialize)]
struct CheckResult {
    name: &'static str,
    passed: bool,
    detail: String,
}

fn two_site() -> Result<CheckResult, CliError> {
    let e = (-1.0f64).exp();
    let v = two_site_values(1e3, 0.5, 1.0)?;
    let dev = (v.same_pair - e)
        .abs()
        .max((v.split_pair - 2.0 * e).abs())
        .max((v.single - 1.5 * e).abs());
    let ordered = v.same_pair < v.single && v.single < v.split_pair;
    Ok(CheckResult {
        name: "two-site",
        passed: dev < REFILL_TOL && ordered,
        detail: format!(
            "f(xy)={:.6} f(x)={:.6} f(x|y)={:.6} max deviation {dev:.2e} ordered={ordered}",
            v.same_pair, v.single, v.split_pair
        ),
    })
}

const TIMES: [f64; 3] = [0.5, 1.0, 2.0];
const LAMBDAS: [f64; 3] = [0.5, 1.0, 2.0];

fn domination() -> Result<CheckResult, CliError> {
    let g = GraphSpec::path(3)?;
    let (mut worst, mut checks) = (f64::INFINITY, 0);
    for lambda in LAMBDAS {
        for r in [0.25, 0.5, 0.75] {
            let rep = verify_domination(&g, lambda, r, &TIMES)?;
            worst = worst.min(rep.worst_slack);
            checks += rep.checks;
        }
    }
    Ok(CheckResult {
        name: "domination",
        passed: worst >= -COMPARISON_TOLERANCE,
        detail: format!("{checks} comparisons, worst slack {worst:.3e}"),
    })
}

fn submodularity() -> Result<CheckResult, CliError> {
    let g = GraphSpec::path(3)?;
    let (mut worst, mut checks) = (f64::INFINITY, 0);
    for lambda in LAMBDAS {
        let rep = verify_submodularity(&g, lambda, &TIMES)?;
        worst = worst.min(rep.worst_slack);
        checks += rep.checks;
    }
    Ok(CheckResult {
        name: "submodularity",
        passed: worst >= -COMPARISON_TOLERANCE,
        detail: format!("{checks} comparisons, worst slack {worst:.3e}"),
    })
}

fn coupling(trials: u64, seed: u64) -> Result<CheckResult, CliError> {
    let stop = StopRule::new(20.0, 5000);
    let runs = (0..trials)
        .into_par_iter()
        .map(|i| simulate_coupled(2, 1.0, 0.3, &stop, trial_seed(seed, i)))
        .collect::<Result<Vec<_>, _>>()?;
    let violations: usize = runs.iter().map(|c| c.violations.len()).sum();
    let negative = runs
        .iter()
        .map(|c| c.max_negative_in_restricted)
        .max()
        .unwrap_or(0);
    Ok(CheckResult {
        name: "coupling",
        passed: violations == 0 && negative == 0,
        detail: format!("{trials} runs at d=2 lambda=1 r=0.3, {violations} violations, max negative-label sites {negative}"),
    })
}

/// Boundary identity on snapshots of simulated runs, quotient identity on
/// the multi-type components of mutation snapshots.
fn identities(trials: u64, seed: u64) -> Result<CheckResult, CliError> {
    let (mut sets, mut components_checked) = (0, 0);
    let mut failures = Vec::new();
    for i in 0..trials {
        let d = 2 + (i % 2) as u32;
        let kind = if i % 3 == 0 {
            ProcessKind::IndividualDeath
        } else {
            ProcessKind::Mutation
        };
        let g = GraphSpec::hom_tree(d)?;
        let params = ProcessParams::new(kind, 1.0, 0.3)?;
        let t_max = 0.5 + (i % 10) as f64 * 0.5;
        let traj = simulate(
            &g,
            &params,
            &default_init(&g),
            &StopRule::new(t_max, 400),
            trial_seed(seed, i),
        )?;
        let Some(config) = traj.final_config else {
            continue;
        };
        let a: BTreeSet<SiteAddress> = config.sites().cloned().collect();
        let (count, label) = components(&g, &a)?;
        sets += 1;
        if boundary_pairs(&g, &a)? != u64::from(d - 1) * a.len() as u64 + 2 * count as u64 {
            failures.push(format!("boundary identity, run {i}"));
        }
        if kind != ProcessKind::Mutation {
            continue;
        }
        for k in 0..count {
            let comp: BTreeSet<SiteAddress> = label
                .iter()
                .filter(|(_, &c)| c == k)
                .map(|(s, _)| s.clone())
                .collect();
            if let QuotientCheck::Checked(rep) = quotient_identity_check(&g, &config, &comp)? {
                components_checked += 1;
                if !rep.passed() {
                    failures.push(format!("quotient identity, run {i}, component {k}"));
                }
            }
        }
    }
    Ok(CheckResult {
        name: "identities",
        passed: failures.is_empty(),
        detail: match failures.first() {
            None => format!("{sets} snapshots, {components_checked} multi-type components"),
            Some(f) => format!("{} failures, first: {f}", failures.len()),
        },
    })
}

pub fn run(cfg: &RunConfig, suite: Suite) -> Result<bool, CliError> {
    let seed = if cfg.seed_source == SeedSource::Default {
        CHECK_SEED
    } else {
        cfg.seed
    };
    let all = suite == Suite::All;
    let mut results = Vec::new();
    if all || suite == Suite::TwoSite {
        results.push(two_site()?);
    }
    if all || suite == Suite::Domination {
        results.push(domination()?);
    }
    if all || suite == Suite::Submodularity {
        results.push(submodularity()?);
    }
    if all || suite == Suite::Coupling {
        results.push(coupling(cfg.trials.unwrap_or(500), seed)?);
    }
    if all || suite == Suite::Identities {
        results.push(identities(cfg.trials.unwrap_or(1000), seed)?);
    }
    let text = match cfg.format {
        Format::Csv => results
            .iter()
            .map(|r| {
                format!(
                    "{} {} {}\n",
                    if r.passed { "PASS" } else { "FAIL" },
                    r.name,
                    r.detail
                )
            })
            .collect(),
        Format::Json => format!("{}\n", serde_json::to_string(&results).expect("plain data")),
    };
    emit(cfg, &text)?;
    Ok(results.iter().all(|r| r.passed))
}
