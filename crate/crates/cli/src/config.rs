//! Effective run configuration: command-line flags over a `key=value` file
//! over `MUTACP_SEED` over defaults.

use clap::{Args, ValueEnum};
use mutacp::dynamics::{Configuration, ProcessKind, StopRule};
use mutacp::graph::{parse_edge_list, GraphSpec, SiteAddress};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

pub const SEED_ENV: &str = "MUTACP_SEED";

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("config file {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("config file line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("unknown config key {0:?}")]
    UnknownKey(String),
    #[error("bad value {value:?} for {key}: {msg}")]
    Value {
        key: String,
        value: String,
        msg: String,
    },
    #[error("missing required setting `{0}`")]
    Missing(&'static str),
    #[error(transparent)]
    Graph(#[from] mutacp::graph::GraphError),
    #[error(transparent)]
    Dynamics(#[from] mutacp::dynamics::DynamicsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(format!("expected csv or json, got {s:?}")),
        }
    }
}

/// Flags shared by every subcommand. Every value may also come from the
/// config file under the same name.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Branching number of the tree.
    #[arg(long)]
    pub d: Option<u32>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Mutation probability.
    #[arg(long)]
    pub r: Option<f64>,
    /// homtree, rooted, twosite, path:N, lattice:DIM[:W] or file:PATH
    #[arg(long)]
    pub graph: Option<String>,
    /// mutation, individual-death, restricted or nonspatial
    #[arg(long)]
    pub kind: Option<String>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub tmax: Option<f64>,
    #[arg(long)]
    pub nmax: Option<usize>,
    /// Comma list or start:stop:step.
    #[arg(long)]
    pub lambdas: Option<String>,
    /// Comma list or start:stop:step.
    #[arg(long)]
    pub rs: Option<String>,
    /// Comma list or start:stop:step.
    #[arg(long)]
    pub times: Option<String>,
    /// Initial blocks separated by `;`, sites within a block by spaces.
    #[arg(long)]
    pub init: Option<String>,
    /// Target sites separated by spaces.
    #[arg(long)]
    pub target: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub confidence: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Worker threads; defaults to the machine's parallelism.
    #[arg(long)]
    pub workers: Option<usize>,
    /// key=value file with defaults for any of these flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

const KEYS: [&str; 18] = [
    "d",
    "lambda",
    "r",
    "graph",
    "kind",
    "trials",
    "tmax",
    "nmax",
    "lambdas",
    "rs",
    "times",
    "init",
    "target",
    "seed",
    "confidence",
    "out",
    "format",
    "workers",
];

pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line: i + 1,
            msg: format!("expected key=value, got {line:?}"),
        })?;
        let k = k.trim();
        if !KEYS.contains(&k) {
            return Err(ConfigError::UnknownKey(k.to_string()));
        }
        map.insert(k.to_string(), v.trim().to_string());
    }
    Ok(map)
}

fn read_config(path: &Path) -> Result<BTreeMap<String, String>, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config_text(&text)
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e: T::Err| ConfigError::Value {
        key: key.into(),
        value: value.into(),
        msg: e.to_string(),
    })
}

/// Parses `a,b,c` or `start:stop:step` (inclusive).
pub fn parse_list(key: &str, s: &str) -> Result<Vec<f64>, ConfigError> {
    let bad = |msg: &str| ConfigError::Value {
        key: key.into(),
        value: s.into(),
        msg: msg.into(),
    };
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    if parts.len() == 3 {
        let [start, stop, step] = [0, 1, 2].map(|i| parse_value::<f64>(key, parts[i]));
        let (start, stop, step) = (start?, stop?, step?);
        if step.is_nan() || step <= 0.0 || stop < start {
            return Err(bad("range needs step > 0 and stop >= start"));
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        return Ok((0..=n).map(|i| start + i as f64 * step).collect());
    }
    if parts.len() != 1 {
        return Err(bad("expected a comma list or start:stop:step"));
    }
    let values = s
        .split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| parse_value::<f64>(key, p))
        .collect::<Result<Vec<_>, _>>()?;
    if values.is_empty() {
        return Err(bad("empty list"));
    }
    Ok(values)
}

pub fn parse_graph(s: &str, d: u32) -> Result<GraphSpec, ConfigError> {
    let bad = |msg: &str| ConfigError::Value {
        key: "graph".into(),
        value: s.into(),
        msg: msg.into(),
    };
    let (name, arg) = s.split_once(':').map_or((s, None), |(n, a)| (n, Some(a)));
    let g = match (name, arg) {
        ("homtree", None) => GraphSpec::hom_tree(d)?,
        ("rooted", None) => GraphSpec::rooted_tree(d)?,
        ("twosite", None) => GraphSpec::TwoSite,
        ("path", Some(n)) => GraphSpec::path(parse_value("graph", n)?)?,
        ("lattice", Some(rest)) => {
            let (dim, w) = rest
                .split_once(':')
                .map_or((rest, None), |(a, b)| (a, Some(b)));
            let w = w.map(|w| parse_value("graph", w)).transpose()?;
            GraphSpec::lattice(parse_value("graph", dim)?, w)?
        }
        ("file", Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
                path: path.into(),
                source,
            })?;
            parse_edge_list(&text)?
        }
        _ => return Err(bad("unknown graph family")),
    };
    Ok(g)
}

/// Parses blocks like `/ /1;/2` into a configuration, one type per block.
pub fn parse_init(g: &GraphSpec, s: &str) -> Result<Configuration, ConfigError> {
    let blocks = s
        .split(';')
        .map(|b| {
            b.split_whitespace()
                .map(|site| SiteAddress::parse(g, site))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    let config = Configuration::from_blocks(blocks.into_iter().filter(|b| !b.is_empty()))
        .map_err(mutacp::dynamics::DynamicsError::from)?;
    Ok(config)
}

pub fn parse_sites(g: &GraphSpec, s: &str) -> Result<Vec<SiteAddress>, ConfigError> {
    Ok(s.split_whitespace()
        .map(|site| SiteAddress::parse(g, site))
        .collect::<Result<_, _>>()?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedSource {
    Flag,
    File,
    Env,
    Default,
}

/// Fully resolved settings of one invocation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub d: u32,
    pub lambda: Option<f64>,
    pub r: Option<f64>,
    pub graph: String,
    pub kind: ProcessKind,
    pub trials: Option<u64>,
    pub t_max: f64,
    pub n_max: usize,
    pub lambdas: Option<Vec<f64>>,
    pub rs: Option<Vec<f64>>,
    pub times: Option<Vec<f64>>,
    pub init: Option<String>,
    pub target: Option<String>,
    pub seed: u64,
    pub seed_source: SeedSource,
    pub confidence: f64,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub workers: Option<usize>,
}

pub const DEFAULT_SEED: u64 = 0;

impl RunConfig {
    pub fn resolve(args: &CommonArgs) -> Result<Self, ConfigError> {
        let file = match &args.config {
            Some(p) => read_config(p)?,
            None => BTreeMap::new(),
        };
        let env_seed = std::env::var(SEED_ENV).ok();
        Self::resolve_with(args, &file, env_seed.as_deref())
    }

    pub fn resolve_with(
        args: &CommonArgs,
        file: &BTreeMap<String, String>,
        env_seed: Option<&str>,
    ) -> Result<Self, ConfigError> {
        fn pick<T>(
            flag: &Option<T>,
            key: &str,
            file: &BTreeMap<String, String>,
        ) -> Result<Option<T>, ConfigError>
        where
            T: FromStr + Clone,
            T::Err: std::fmt::Display,
        {
            match (flag, file.get(key)) {
                (Some(v), _) => Ok(Some(v.clone())),
                (None, Some(s)) => parse_value(key, s).map(Some),
                (None, None) => Ok(None),
            }
        }
        let list = |flag: &Option<String>, key: &str| -> Result<Option<Vec<f64>>, ConfigError> {
            pick(flag, key, file)?
                .map(|s: String| parse_list(key, &s))
                .transpose()
        };
        let (seed, seed_source) = match (args.seed, file.get("seed"), env_seed) {
            (Some(s), _, _) => (s, SeedSource::Flag),
            (None, Some(s), _) => (parse_value("seed", s)?, SeedSource::File),
            (None, None, Some(s)) => (parse_value(SEED_ENV, s)?, SeedSource::Env),
            (None, None, None) => (DEFAULT_SEED, SeedSource::Default),
        };
        let kind = pick(&args.kind, "kind", file)?
            .map(|s: String| parse_value::<ProcessKind>("kind", &s))
            .transpose()?
            .unwrap_or(ProcessKind::Mutation);
        let defaults = StopRule::default();
        Ok(RunConfig {
            d: pick(&args.d, "d", file)?.unwrap_or(2),
            lambda: pick(&args.lambda, "lambda", file)?,
            r: pick(&args.r, "r", file)?,
            graph: pick(&args.graph, "graph", file)?.unwrap_or_else(|| "homtree".into()),
            kind,
            trials: pick(&args.trials, "trials", file)?,
            t_max: pick(&args.tmax, "tmax", file)?.unwrap_or(defaults.t_max),
            n_max: pick(&args.nmax, "nmax", file)?.unwrap_or(defaults.n_max),
            lambdas: list(&args.lambdas, "lambdas")?,
            rs: list(&args.rs, "rs")?,
            times: list(&args.times, "times")?,
            init: pick(&args.init, "init", file)?,
            target: pick(&args.target, "target", file)?,
            seed,
            seed_source,
            confidence: pick(&args.confidence, "confidence", file)?.unwrap_or(0.95),
            out: pick(&args.out, "out", file)?,
            format: pick(&args.format, "format", file)?.unwrap_or(Format::Csv),
            workers: pick(&args.workers, "workers", file)?,
        })
    }

    pub fn lambda(&self) -> Result<f64, ConfigError> {
        self.lambda.ok_or(ConfigError::Missing("lambda"))
    }

    pub fn r(&self) -> Result<f64, ConfigError> {
        self.r.ok_or(ConfigError::Missing("r"))
    }

    pub fn graph_spec(&self) -> Result<GraphSpec, ConfigError> {
        parse_graph(&self.graph, self.d)
    }

    pub fn stop(&self) -> StopRule {
        StopRule::new(self.t_max, self.n_max)
    }

    /// `key=value` pairs echoed into output headers.
    pub fn echo(&self) -> Vec<(String, String)> {
        let fmt_list = |v: &Option<Vec<f64>>| {
            v.as_ref()
                .map(|l| l.iter().map(f64::to_string).collect::<Vec<_>>().join(","))
        };
        let mut out = vec![
            ("d".to_string(), self.d.to_string()),
            ("graph".into(), self.graph.clone()),
            ("kind".into(), self.kind.to_string()),
            ("tmax".into(), self.t_max.to_string()),
            ("nmax".into(), self.n_max.to_string()),
            ("seed".into(), self.seed.to_string()),
            ("confidence".into(), self.confidence.to_string()),
        ];
        let optional = [
            ("lambda", self.lambda.map(|x| x.to_string())),
            ("r", self.r.map(|x| x.to_string())),
            ("trials", self.trials.map(|x| x.to_string())),
            ("lambdas", fmt_list(&self.lambdas)),
            ("rs", fmt_list(&self.rs)),
            ("times", fmt_list(&self.times)),
        ];
        out.extend(
            optional
                .into_iter()
                .filter_map(|(k, v)| v.map(|v| (k.to_string(), v))),
        );
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_beat_file_beats_env() {
        let file =
            parse_config_text("# sweep\nd = 3\nlambda=0.5\nseed=4\ntmax=50 # short\n").unwrap();
        let args = CommonArgs {
            lambda: Some(0.9),
            ..Default::default()
        };
        let c = RunConfig::resolve_with(&args, &file, Some("11")).unwrap();
        assert_eq!((c.d, c.lambda, c.seed, c.t_max), (3, Some(0.9), 4, 50.0));
        assert_eq!(c.seed_source, SeedSource::File);
        let c =
            RunConfig::resolve_with(&CommonArgs::default(), &BTreeMap::new(), Some("11")).unwrap();
        assert_eq!((c.seed, c.seed_source), (11, SeedSource::Env));
        let args = CommonArgs {
            seed: Some(2),
            ..Default::default()
        };
        assert_eq!(
            RunConfig::resolve_with(&args, &file, Some("11"))
                .unwrap()
                .seed,
            2
        );
    }

    #[test]
    fn config_errors() {
        assert!(matches!(
            parse_config_text("colour=red"),
            Err(ConfigError::UnknownKey(_))
        ));
        assert!(matches!(
            parse_config_text("lambda"),
            Err(ConfigError::Syntax { line: 1, .. })
        ));
        let file = parse_config_text("d=two").unwrap();
        assert!(RunConfig::resolve_with(&CommonArgs::default(), &file, None).is_err());
    }

    #[test]
    fn lists_and_ranges() {
        assert_eq!(
            parse_list("rs", "0.1, 0.5,0.9").unwrap(),
            vec![0.1, 0.5, 0.9]
        );
        let range = parse_list("lambdas", "0.5:1.0:0.25").unwrap();
        assert_eq!(range, vec![0.5, 0.75, 1.0]);
        assert!(parse_list("rs", "").is_err());
        assert!(parse_list("rs", "1:0:0.1").is_err());
    }

    #[test]
    fn graphs_and_init() {
        assert_eq!(
            parse_graph("homtree", 3).unwrap(),
            GraphSpec::HomTree { d: 3 }
        );
        assert_eq!(parse_graph("path:4", 2).unwrap(), GraphSpec::Path { n: 4 });
        assert!(parse_graph("cube", 2).is_err());
        let g = GraphSpec::hom_tree(2).unwrap();
        let c = parse_init(&g, "/ /1; /2").unwrap();
        assert_eq!((c.population(), c.type_count()), (3, 2));
        assert!(parse_init(&g, "/9").is_err());
    }
}
