use crate::config::{parse_init, parse_sites, ConfigError, Format, RunConfig};
use crate::output::{emit, Table};
use crate::CliError;
use mutacp::analysis::{
    classify, gw_mean_u, gw_mean_z, lambdabound, threshold_die, threshold_survive,
    window_transition, window_weak,
};
use mutacp::dynamics::{simulate, simulate_coupled, Configuration, ProcessKind, ProcessParams};
use mutacp::exact::{build_generator, enumerate_states, prob_intersect, LumpedState};
use mutacp::graph::{GraphSpec, SiteAddress};
use mutacp::montecarlo::{default_init, sweep, trial_seed, SweepGrid};
use rayon::prelude::*;
use serde_json::json;
use std::io::Write;
use std::path::Path;

pub fn thresholds(cfg: &RunConfig) -> Result<bool, CliError> {
    let d = cfg.d;
    let mut t = Table::default();
    t.push("d", d).push("survive_all_r", threshold_survive(d)?);
    if let Some(r) = cfg.r {
        t.push("r", r).push("die_out", threshold_die(d, r)?);
    }
    let (left, right) = window_transition(d)?;
    t.push("window_transition", json!([left, right]));
    t.push(
        "window_weak",
        window_weak(d)?
            .map(|(lo, hi)| json!([lo, hi]))
            .unwrap_or(json!(null)),
    );
    if let Some(r) = cfg.r {
        t.extended("lambdabound", lambdabound(d, r)?);
        if let Some(lambda) = cfg.lambda {
            t.push("lambda", lambda);
            if r > 0.0 && r < 1.0 {
                t.extended("gw_mean_u", gw_mean_u(d, lambda, r)?);
                t.extended("gw_mean_z", gw_mean_z(d, lambda, r)?);
            }
            let v = classify(d, lambda, r)?;
            t.push("verdict", v.verdict.as_str())
                .push("in_transition_window", v.in_transition_window);
        }
    }
    emit(cfg, &t.render(cfg.format))?;
    Ok(true)
}

fn initial(cfg: &RunConfig, g: &GraphSpec) -> Result<Configuration, CliError> {
    Ok(match &cfg.init {
        Some(s) => parse_init(g, s)?,
        None => default_init(g),
    })
}

pub fn simulate_cmd(cfg: &RunConfig) -> Result<bool, CliError> {
    let g = cfg.graph_spec()?;
    let params =
        ProcessParams::new(cfg.kind, cfg.lambda()?, cfg.r()?).map_err(ConfigError::from)?;
    let traj = simulate(&g, &params, &initial(cfg, &g)?, &cfg.stop(), cfg.seed)?;
    let mut t = Table::default();
    t.push("termination", traj.termination.code())
        .push("time", traj.termination.time())
        .push("population", traj.final_population)
        .push("types", traj.final_types)
        .push("events", traj.event_count)
        .push("seed", cfg.seed);
    let summary = t.render(cfg.format);
    match (&cfg.out, cfg.format) {
        (Some(path), _) => {
            std::fs::write(path, traj.log_string())?;
            print!("{summary}");
        }
        (None, Format::Csv) => {
            print!("{}", traj.log_string());
            eprint!("{summary}");
        }
        (None, Format::Json) => print!("{summary}"),
    }
    Ok(true)
}

pub fn sweep_cmd(cfg: &RunConfig) -> Result<bool, CliError> {
    if !matches!(cfg.graph_spec()?, GraphSpec::HomTree { .. }) {
        return Err(CliError::Usage(
            "sweep runs on the homogeneous tree only".into(),
        ));
    }
    let lambdas = match (&cfg.lambdas, cfg.lambda) {
        (Some(l), _) => l.clone(),
        (None, Some(l)) => vec![l],
        (None, None) => return Err(ConfigError::Missing("lambdas").into()),
    };
    let rs = match (&cfg.rs, cfg.r) {
        (Some(r), _) => r.clone(),
        (None, Some(r)) => vec![r],
        (None, None) => return Err(ConfigError::Missing("rs").into()),
    };
    let grid = SweepGrid {
        d: cfg.d,
        lambdas,
        rs,
        kind: cfg.kind,
        trials: cfg.trials.unwrap_or(1000),
        stop: cfg.stop(),
        seed: cfg.seed,
        confidence: cfg.confidence,
    };
    let result = sweep(&grid)?;
    let text = match cfg.format {
        Format::Csv => {
            let mut s = String::new();
            for (k, v) in cfg.echo() {
                s.push_str(&format!("# {k}={v}\n"));
            }
            s + &result.to_csv_string()
        }
        Format::Json => {
            let config: serde_json::Map<String, serde_json::Value> =
                cfg.echo().into_iter().map(|(k, v)| (k, json!(v))).collect();
            format!("{}\n", json!({ "config": config, "rows": result.rows }))
        }
    };
    emit(cfg, &text)?;
    Ok(true)
}

pub fn couple_cmd(cfg: &RunConfig) -> Result<bool, CliError> {
    let (lambda, r) = (cfg.lambda()?, cfg.r()?);
    let trials = cfg.trials.unwrap_or(1);
    let stop = cfg.stop();
    let runs = (0..trials)
        .into_par_iter()
        .map(|i| simulate_coupled(cfg.d, lambda, r, &stop, trial_seed(cfg.seed, i)))
        .collect::<Result<Vec<_>, _>>()?;
    let violations: usize = runs.iter().map(|c| c.violations.len()).sum();
    let negative = runs
        .iter()
        .map(|c| c.max_negative_in_restricted)
        .max()
        .unwrap_or(0);
    let alive = |f: fn(&mutacp::dynamics::CoupledRun) -> bool| runs.iter().filter(|c| f(c)).count();
    let mut t = Table::default();
    t.push("runs", trials)
        .push("violations", violations)
        .push("max_negative_in_restricted", negative)
        .push(
            "mutation_alive",
            alive(|c| !c.mutation.termination.is_extinct()),
        )
        .push(
            "restricted_alive",
            alive(|c| !c.restricted.termination.is_extinct()),
        );
    if let Some(v) = runs.iter().flat_map(|c| &c.violations).next() {
        t.push("first_violation", v.to_string());
    }
    emit(cfg, &t.render(cfg.format))?;
    Ok(violations == 0 && negative == 0)
}

fn vertex(site: &SiteAddress) -> Result<usize, CliError> {
    match site {
        SiteAddress::Index(i) => Ok(*i),
        other => Err(CliError::Usage(format!(
            "{other} is not a vertex of a finite graph"
        ))),
    }
}

pub fn exact_cmd(cfg: &RunConfig, generator_out: Option<&Path>) -> Result<bool, CliError> {
    let g = cfg.graph_spec()?;
    let space = enumerate_states(&g)?;
    let r = match cfg.kind {
        ProcessKind::IndividualDeath => cfg.r.unwrap_or(1.0),
        _ => cfg.r()?,
    };
    let gen = build_generator(&space, cfg.kind, cfg.lambda()?, r)?;
    let blocks = match &cfg.init {
        Some(s) => s
            .split(';')
            .map(|b| {
                parse_sites(&g, b)?
                    .iter()
                    .map(vertex)
                    .collect::<Result<Vec<_>, _>>()
            })
            .filter(|b| !matches!(b, Ok(v) if v.is_empty()))
            .collect::<Result<Vec<_>, _>>()?,
        None => vec![vec![0]],
    };
    let init = LumpedState::new(&blocks)?;
    let target = match &cfg.target {
        Some(s) => Some(
            parse_sites(&g, s)?
                .iter()
                .map(vertex)
                .try_fold(0u32, |m, v| v.map(|v| m | 1 << v))?,
        ),
        None => None,
    };
    if let Some(path) = generator_out {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        gen.matrix.write_triplets(&mut f)?;
        f.flush()?;
    }
    let times = cfg.times.clone().unwrap_or_else(|| vec![1.0]);
    let mut rows = Vec::new();
    for &t in &times {
        let nonempty = prob_intersect(&gen, &init, space.full_mask(), t)?;
        let hit = target
            .map(|c| prob_intersect(&gen, &init, c, t))
            .transpose()?;
        rows.push((t, nonempty, hit));
    }
    let text = match cfg.format {
        Format::Csv => {
            let mut s = format!("# states={} init={init}\nt,nonempty,hit\n", space.len());
            for (t, p, h) in &rows {
                let h = h.map_or(String::new(), |h| mutacp::montecarlo::format_sig(h, 12));
                s.push_str(&format!(
                    "{t},{},{h}\n",
                    mutacp::montecarlo::format_sig(*p, 12)
                ));
            }
            s
        }
        Format::Json => {
            let rows: Vec<_> = rows
                .iter()
                .map(|(t, p, h)| json!({ "t": t, "nonempty": p, "hit": h }))
                .collect();
            format!(
                "{}\n",
                json!({ "states": space.len(), "init": init.to_string(), "rows": rows })
            )
        }
    };
    emit(cfg, &text)?;
    Ok(true)
}
