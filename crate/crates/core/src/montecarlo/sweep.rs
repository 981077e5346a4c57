use super::{default_init, estimate_survival, format_sig, trial_seed, MonteCarloError};
use crate::analysis::classify;
use crate::dynamics::{DynamicsError, ProcessKind, ProcessParams, StopRule};
use crate::graph::GraphSpec;
use serde::Serialize;
use std::io::Write;

pub const CSV_HEADER: [&str; 12] = [
    "d",
    "lambda",
    "r",
    "trials",
    "survived",
    "extinct",
    "censored_time",
    "censored_pop",
    "point",
    "ci_low",
    "ci_high",
    "verdict",
];

/// Significant digits of floating-point CSV fields.
const SIG_DIGITS: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub d: u32,
    pub lambdas: Vec<f64>,
    pub rs: Vec<f64>,
    pub kind: ProcessKind,
    pub trials: u64,
    pub stop: StopRule,
    pub seed: u64,
    pub confidence: f64,
}

/// One grid point; field names match the CSV header.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub d: u32,
    pub lambda: f64,
    pub r: f64,
    pub trials: u64,
    pub survived: u64,
    pub extinct: u64,
    pub censored_time: u64,
    pub censored_pop: u64,
    pub point: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub verdict: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), csv::Error> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(CSV_HEADER)?;
        for row in &self.rows {
            out.write_record([
                row.d.to_string(),
                format_sig(row.lambda, SIG_DIGITS),
                format_sig(row.r, SIG_DIGITS),
                row.trials.to_string(),
                row.survived.to_string(),
                row.extinct.to_string(),
                row.censored_time.to_string(),
                row.censored_pop.to_string(),
                format_sig(row.point, SIG_DIGITS),
                format_sig(row.ci_low, SIG_DIGITS),
                format_sig(row.ci_high, SIG_DIGITS),
                row.verdict.clone(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii csv")
    }
}

/// Survival proxy over `lambdas x rs` (lambda-major), each point with its
/// theoretical verdict. Point `k` uses master seed `mix(seed, k)`.
pub fn sweep(grid: &SweepGrid) -> Result<SweepResult, MonteCarloError> {
    if grid.lambdas.is_empty() || grid.rs.is_empty() {
        return Err(MonteCarloError::Parameter("sweep grid is empty".into()));
    }
    let g = GraphSpec::hom_tree(grid.d).map_err(DynamicsError::from)?;
    let init = default_init(&g);
    let mut rows = Vec::with_capacity(grid.lambdas.len() * grid.rs.len());
    for (k, (&lambda, &r)) in grid
        .lambdas
        .iter()
        .flat_map(|l| grid.rs.iter().map(move |r| (l, r)))
        .enumerate()
    {
        let params = ProcessParams::new(grid.kind, lambda, r)?;
        let est = estimate_survival(
            &g,
            &params,
            &init,
            grid.trials,
            &grid.stop,
            trial_seed(grid.seed, k as u64),
            grid.confidence,
        )?;
        rows.push(SweepRow {
            d: grid.d,
            lambda,
            r,
            trials: est.trials,
            survived: est.survived,
            extinct: est.extinct,
            censored_time: est.censored_time,
            censored_pop: est.censored_pop,
            point: est.point,
            ci_low: est.ci_low,
            ci_high: est.ci_high,
            verdict: classify(grid.d, lambda, r)?.verdict.to_string(),
        });
    }
    Ok(SweepResult { rows })
}
