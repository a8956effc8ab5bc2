//! Command-line flags, the flat `key = value` config file, and the merged
//! configuration every run records.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Parser;
use serde::Serialize;
use zetalab::constants::DEFAULT_P_MAX;
use zetalab::zeta_eval::{TGrid, DEFAULT_CHUNK};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Moments,
    Fourier,
    Besicovitch,
    Phase,
    ZeroOne,
    Constants,
    Mass,
    Identity,
}

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Experiment::Moments,
        Experiment::Fourier,
        Experiment::Besicovitch,
        Experiment::Phase,
        Experiment::ZeroOne,
        Experiment::Constants,
        Experiment::Mass,
        Experiment::Identity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Moments => "moments",
            Experiment::Fourier => "fourier",
            Experiment::Besicovitch => "besicovitch",
            Experiment::Phase => "phase",
            Experiment::ZeroOne => "zero-one",
            Experiment::Constants => "constants",
            Experiment::Mass => "mass",
            Experiment::Identity => "identity",
        }
    }

    /// Largest Dirichlet index the experiment resolves; sets the default step.
    fn n_max(self, cfg: &Partial) -> f64 {
        let max_of = |v: &[u64]| v.iter().copied().max().unwrap_or(1) as f64;
        match self {
            Experiment::Fourier => max_of(&cfg.n),
            Experiment::Besicovitch => max_of(&cfg.big_n),
            Experiment::Phase | Experiment::ZeroOne | Experiment::Identity => max_of(&cfg.big_n).powi(2),
            Experiment::Moments | Experiment::Mass | Experiment::Constants => 3.0,
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Experiment::ALL.into_iter().find(|e| e.name() == s).ok_or_else(|| {
            let names: Vec<_> = Experiment::ALL.iter().map(|e| e.name()).collect();
            CliError::UnknownExperiment(format!("{s:?}; expected one of {}", names.join(", ")))
        })
    }
}

/// Runs one experiment and writes `summary.json` plus CSV files into `--out`.
#[derive(Debug, Default, Parser)]
#[command(name = "zetalab", version)]
pub struct Args {
    /// moments, fourier, besicovitch, phase, zero-one, constants, mass or identity
    pub experiment: Option<String>,
    /// Flat `key = value` file; command-line flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Moment order.
    #[arg(long)]
    pub k: Option<String>,
    #[arg(long)]
    pub sigma: Option<String>,
    /// Upper end of the range.
    #[arg(long = "T")]
    pub big_t: Option<String>,
    /// Lower end of the range (default 1).
    #[arg(long)]
    pub t0: Option<String>,
    /// Grid step (default 0.05 / log of the largest Dirichlet index in use).
    #[arg(long)]
    pub h: Option<String>,
    /// Comma-separated truncation parameters N.
    #[arg(long = "N")]
    pub big_n: Option<String>,
    /// Comma-separated Dirichlet indices for `fourier`.
    #[arg(long)]
    pub n: Option<String>,
    #[arg(long)]
    pub eps: Option<String>,
    /// Comma-separated half-widths of the zero neighbourhoods.
    #[arg(long)]
    pub delta: Option<String>,
    /// Zero-ordinate table, one ordinate per line.
    #[arg(long)]
    pub zeros: Option<String>,
    #[arg(long)]
    pub out: Option<String>,
    #[arg(long)]
    pub threads: Option<String>,
    /// Grid points per parallel work unit.
    #[arg(long)]
    pub chunk: Option<String>,
    /// Histogram bins for `moments` and `mass`.
    #[arg(long)]
    pub bins: Option<String>,
    /// Absolute tolerance for values of zeta.
    #[arg(long)]
    pub tol: Option<String>,
    /// Largest prime multiplied exactly in `constants`.
    #[arg(long = "p-max")]
    pub p_max: Option<String>,
    /// Largest accepted tail estimate for a_k in `constants`.
    #[arg(long = "a-tol")]
    pub a_tol: Option<String>,
    /// Also write the sampled series as CSV.
    #[arg(long = "write-series")]
    pub write_series: Option<Option<String>>,
}

const KEYS: [&str; 18] = [
    "experiment",
    "k",
    "sigma",
    "T",
    "t0",
    "h",
    "N",
    "n",
    "eps",
    "delta",
    "zeros",
    "out",
    "threads",
    "chunk",
    "bins",
    "tol",
    "p_max",
    "a_tol",
];

const WRITE_SERIES: &str = "write_series";

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("line {}: expected key = value, got {raw:?}", i + 1)))?;
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) && key != WRITE_SERIES {
            return Err(CliError::Config(format!("line {}: unknown key {key:?}", i + 1)));
        }
        if out.insert(key.to_string(), value.to_string()).is_some() {
            return Err(CliError::Config(format!("line {}: duplicate key {key:?}", i + 1)));
        }
    }
    Ok(out)
}

/// Fully resolved settings of a run.
#[derive(Clone, Debug, Serialize)]
pub struct Config {
    pub experiment: Experiment,
    pub k: u32,
    pub sigma: f64,
    #[serde(rename = "T")]
    pub big_t: f64,
    pub t0: f64,
    pub h: f64,
    #[serde(rename = "N")]
    pub big_n: Vec<u64>,
    pub n: Vec<u64>,
    pub eps: f64,
    pub delta: Vec<f64>,
    pub zeros: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub chunk: usize,
    pub bins: usize,
    pub tol: f64,
    pub p_max: u64,
    pub a_tol: f64,
    pub write_series: bool,
}

/// Settings before the step is chosen.
struct Partial {
    n: Vec<u64>,
    big_n: Vec<u64>,
}

struct Source<'a> {
    args: &'a Args,
    file: BTreeMap<String, String>,
}

impl Source<'_> {
    fn raw(&self, key: &str) -> Option<String> {
        let a = self.args;
        let flag = match key {
            "experiment" => &a.experiment,
            "k" => &a.k,
            "sigma" => &a.sigma,
            "T" => &a.big_t,
            "t0" => &a.t0,
            "h" => &a.h,
            "N" => &a.big_n,
            "n" => &a.n,
            "eps" => &a.eps,
            "delta" => &a.delta,
            "zeros" => &a.zeros,
            "out" => &a.out,
            "threads" => &a.threads,
            "chunk" => &a.chunk,
            "bins" => &a.bins,
            "tol" => &a.tol,
            "p_max" => &a.p_max,
            "a_tol" => &a.a_tol,
            _ => unreachable!("unknown key {key}"),
        };
        flag.clone().or_else(|| self.file.get(key).cloned())
    }

    fn get<T: Value>(&self, key: &str, default: T) -> Result<T, CliError> {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => parse_value(key, &v),
        }
    }

    fn list<T: Value>(&self, key: &str, default: &[T]) -> Result<Vec<T>, CliError> {
        match self.raw(key) {
            None => Ok(default.to_vec()),
            Some(v) => {
                let items = v.split(',').map(|s| parse_value(key, s.trim())).collect::<Result<Vec<T>, _>>()?;
                if items.is_empty() {
                    return Err(CliError::Config(format!("{key}: empty list")));
                }
                Ok(items)
            }
        }
    }

    fn write_series(&self) -> Result<bool, CliError> {
        match (&self.args.write_series, self.file.get(WRITE_SERIES)) {
            (Some(None), _) => Ok(true),
            (Some(Some(v)), _) | (None, Some(v)) => parse_value(WRITE_SERIES, v),
            (None, None) => Ok(false),
        }
    }
}

/// A scalar accepted in a flag or config value.
trait Value: Sized + Clone {
    fn parse(s: &str) -> Option<Self>;
}

impl Value for f64 {
    fn parse(s: &str) -> Option<Self> {
        s.parse().ok()
    }
}

impl Value for bool {
    fn parse(s: &str) -> Option<Self> {
        s.parse().ok()
    }
}

/// Integers may also be written in exponent form such as `1e6`.
fn parse_count(s: &str) -> Option<u64> {
    s.parse().ok().or_else(|| {
        let x: f64 = s.parse().ok()?;
        (x >= 0.0 && x.fract() == 0.0 && x < u64::MAX as f64).then_some(x as u64)
    })
}

macro_rules! count_value {
    ($($t:ty),*) => {$(
        impl Value for $t {
            fn parse(s: &str) -> Option<Self> {
                parse_count(s).and_then(|v| v.try_into().ok())
            }
        }
    )*};
}

count_value!(u32, u64, usize);

fn parse_value<T: Value>(key: &str, v: &str) -> Result<T, CliError> {
    T::parse(v).ok_or_else(|| CliError::Config(format!("{key}: cannot parse {v:?}")))
}

fn check(ok: bool, what: impl FnOnce() -> String) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Config(what()))
    }
}

impl Config {
    pub fn resolve(args: &Args) -> Result<Self, CliError> {
        let file = match &args.config {
            Some(path) => parse_config_file(&read_text(path)?)?,
            None => BTreeMap::new(),
        };
        let src = Source { args, file };
        let experiment: Experiment = src
            .raw("experiment")
            .ok_or_else(|| CliError::Config("no experiment given".into()))?
            .parse()?;
        let partial = Partial { n: src.list("n", &[1, 2, 3])?, big_n: src.list("N", &[10, 100, 1000])? };
        let h = match src.raw("h") {
            Some(v) => parse_value::<f64>("h", &v)?,
            None => TGrid::default_step(experiment.n_max(&partial)),
        };
        let cfg = Config {
            experiment,
            k: src.get("k", 1)?,
            sigma: src.get("sigma", 0.75)?,
            big_t: src.get("T", 1e4)?,
            t0: src.get("t0", 1.0)?,
            h,
            big_n: partial.big_n,
            n: partial.n,
            eps: src.get("eps", 0.5)?,
            delta: src.list("delta", &[0.05])?,
            zeros: src.raw("zeros").map(PathBuf::from),
            out: src.raw("out").map(PathBuf::from),
            threads: src.raw("threads").map(|v| parse_value("threads", &v)).transpose()?,
            chunk: src.get("chunk", DEFAULT_CHUNK)?,
            bins: src.get("bins", 100)?,
            tol: src.get("tol", 1e-10)?,
            p_max: src.get("p_max", DEFAULT_P_MAX)?,
            a_tol: src.get("a_tol", 1e-6)?,
            write_series: src.write_series()?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        check(self.k >= 1, || format!("k must be >= 1, got {}", self.k))?;
        check(self.sigma > 0.0 && self.sigma <= 1.0, || format!("sigma must lie in (0, 1], got {}", self.sigma))?;
        check(self.t0 >= 1.0, || format!("t0 must be >= 1, got {}", self.t0))?;
        check(self.big_t > self.t0 && self.big_t.is_finite(), || format!("T must exceed t0, got {}", self.big_t))?;
        check(self.h > 0.0 && self.h.is_finite(), || format!("h must be positive, got {}", self.h))?;
        check(self.big_n.iter().all(|&n| n >= 1), || "N values must be >= 1".into())?;
        check(self.n.iter().all(|&n| n >= 1), || "n values must be >= 1".into())?;
        check(self.eps > 0.0, || format!("eps must be positive, got {}", self.eps))?;
        check(self.delta.iter().all(|&d| d > 0.0 && d.is_finite()), || "delta values must be positive".into())?;
        check(self.threads != Some(0), || "threads must be >= 1".into())?;
        check(self.chunk >= 1, || "chunk must be >= 1".into())?;
        check(self.bins >= 1, || "bins must be >= 1".into())?;
        check(self.tol > 0.0, || format!("tol must be positive, got {}", self.tol))?;
        check(self.a_tol > 0.0, || format!("a_tol must be positive, got {}", self.a_tol))?;
        Ok(())
    }

    /// Settings that determine the results; the output path and thread
    /// count are left out.
    pub fn fingerprint(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("config serialises");
        if let Some(map) = v.as_object_mut() {
            map.remove("out");
            map.remove("threads");
        }
        v
    }
}

pub fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}
