use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::acquisition::Expert;
use crate::error::{Error, Result};
use crate::portfolio::EspConfig;
use crate::testbed::{self, Objective, PointCloud};

/// Noise level for the synthetic benchmarks.
pub const SYNTHETIC_NOISE_SD: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub enum ObjectiveSpec {
    Branin,
    Hartmann3,
    Csv(PathBuf),
}

impl ObjectiveSpec {
    pub fn build(&self) -> Result<Objective> {
        Ok(match self {
            ObjectiveSpec::Branin => Objective::branin(),
            ObjectiveSpec::Hartmann3 => Objective::hartmann3(),
            ObjectiveSpec::Csv(path) => {
                let stem = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "csv".into());
                testbed::nearest_neighbor_objective(PointCloud::from_path(path)?, stem)
            }
        })
    }

    pub fn default_noise_sd(&self) -> f64 {
        match self {
            ObjectiveSpec::Csv(_) => 0.0,
            _ => SYNTHETIC_NOISE_SD,
        }
    }
}

impl FromStr for ObjectiveSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "branin" => Ok(Self::Branin),
            "hartmann3" => Ok(Self::Hartmann3),
            _ => match s.strip_prefix("csv:") {
                Some(p) if !p.is_empty() => Ok(Self::Csv(PathBuf::from(p))),
                _ => Err(Error::Config(format!(
                    "unknown objective '{s}' (expected branin, hartmann3 or csv:<path>)"
                ))),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Esp,
    Hedge,
    RandomPortfolio,
    Ei,
    Pi,
    Thompson,
}

impl Method {
    pub fn is_portfolio(self) -> bool {
        matches!(self, Method::Esp | Method::Hedge | Method::RandomPortfolio)
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "esp" => Ok(Self::Esp),
            "hedge" => Ok(Self::Hedge),
            "random-portfolio" | "rp" => Ok(Self::RandomPortfolio),
            "ei" => Ok(Self::Ei),
            "pi" => Ok(Self::Pi),
            "thompson" => Ok(Self::Thompson),
            _ => Err(Error::Config(format!("unknown method '{s}'"))),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Esp => "esp",
            Method::Hedge => "hedge",
            Method::RandomPortfolio => "random-portfolio",
            Method::Ei => "ei",
            Method::Pi => "pi",
            Method::Thompson => "thompson",
        })
    }
}

/// Which per-iteration quantity a summary aggregates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    /// Absolute error when the optimum is known, else best true value.
    Auto,
    AbsError,
    BestTrue,
    /// Best noisy observation.
    BestObserved,
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Self::Auto),
            "abs-error" => Ok(Self::AbsError),
            "best-true" => Ok(Self::BestTrue),
            "best-observed" => Ok(Self::BestObserved),
            _ => Err(Error::Config(format!("unknown metric '{s}'"))),
        }
    }
}

/// Parses `a..b` (inclusive), `a,b,c`, or a single integer.
pub fn parse_seeds(s: &str) -> Result<Vec<u64>> {
    let bad = || Error::Config(format!("bad seed list '{s}'"));
    let seeds: Vec<u64> = if let Some((a, b)) = s.split_once("..") {
        let b = b.strip_prefix('=').unwrap_or(b);
        let (a, b): (u64, u64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
        if b < a {
            return Err(bad());
        }
        (a..=b).collect()
    } else {
        s.split(',')
            .map(|p| p.trim().parse().map_err(|_| bad()))
            .collect::<Result<_>>()?
    };
    if seeds.is_empty() {
        return Err(bad());
    }
    Ok(seeds)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub objective: ObjectiveSpec,
    pub method: Method,
    /// Uniform random experts appended to the EI/PI/Thompson portfolio.
    pub n_random_experts: usize,
    pub horizon: usize,
    pub n_init: usize,
    pub seeds: Vec<u64>,
    pub noise_sd: f64,
    /// Hyperparameter samples per iteration.
    pub mcmc_samples: usize,
    /// Features for the Thompson strategy's sample path.
    pub thompson_features: usize,
    pub esp: EspConfig,
    pub eta: f64,
    /// Adds a wall-clock column to traces (breaks byte-identical reruns).
    pub record_time: bool,
}

impl ExperimentConfig {
    pub fn new(objective: ObjectiveSpec, method: Method) -> Self {
        let noise_sd = objective.default_noise_sd();
        Self {
            objective,
            method,
            n_random_experts: 0,
            horizon: 100,
            n_init: 2,
            seeds: (0..25).collect(),
            noise_sd,
            mcmc_samples: 10,
            thompson_features: crate::spectral::DEFAULT_FEATURES,
            esp: EspConfig::default(),
            eta: 1.0,
            record_time: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Config(m.into()));
        if self.horizon < 1 {
            return fail("horizon must be >= 1");
        }
        if self.n_init < 1 {
            return fail("n_init must be >= 1");
        }
        if self.seeds.is_empty() {
            return fail("no seeds");
        }
        if !(self.noise_sd >= 0.0 && self.noise_sd.is_finite()) {
            return fail("noise sd must be >= 0");
        }
        if self.mcmc_samples < 1 {
            return fail("need at least one MCMC sample");
        }
        if self.thompson_features < 1 || self.esp.features < 1 {
            return fail("feature counts must be >= 1");
        }
        if self.esp.representers < 1 || self.esp.hallucinations < 1 || self.esp.samples < 1 {
            return fail("ESP needs G, N, S >= 1");
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return fail("eta must be positive");
        }
        Ok(())
    }

    /// The experts consulted each iteration, in selection-index order.
    pub fn experts(&self) -> Vec<Expert> {
        match self.method {
            Method::Ei => vec![Expert::Ei],
            Method::Pi => vec![Expert::Pi],
            Method::Thompson => vec![Expert::Thompson],
            _ => {
                let mut v = vec![Expert::Ei, Expert::Pi, Expert::Thompson];
                v.extend((0..self.n_random_experts).map(Expert::Random));
                v
            }
        }
    }

    /// Method label used in file names, e.g. `esp` or `esp+9r`.
    pub fn label(&self) -> String {
        if self.method.is_portfolio() && self.n_random_experts > 0 {
            format!("{}+{}r", self.method, self.n_random_experts)
        } else {
            self.method.to_string()
        }
    }

    /// Applies one `key=value` override (keys are the CLI long-flag names).
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(k: &str, v: &str) -> Result<T> {
            v.parse().map_err(|_| Error::Config(format!("bad value '{v}' for {k}")))
        }
        match key {
            "objective" => {
                self.objective = value.parse()?;
            }
            "method" => self.method = value.parse()?,
            "horizon" => self.horizon = num(key, value)?,
            "n-init" => self.n_init = num(key, value)?,
            "seeds" => self.seeds = parse_seeds(value)?,
            "n-random-experts" => self.n_random_experts = num(key, value)?,
            "noise-sd" => self.noise_sd = num(key, value)?,
            "mcmc-samples" => self.mcmc_samples = num(key, value)?,
            "features" => {
                self.thompson_features = num(key, value)?;
                self.esp.features = self.thompson_features;
            }
            "representers" => self.esp.representers = num(key, value)?,
            "hallucinations" => self.esp.hallucinations = num(key, value)?,
            "samples" => self.esp.samples = num(key, value)?,
            "plain-mc" => self.esp.stratified = !num::<bool>(key, value)?,
            "eta" => self.eta = num(key, value)?,
            "record-time" => self.record_time = num(key, value)?,
            "sweep-per-dim" => self.esp.inner.sweep_per_dim = num(key, value)?,
            _ => return Err(Error::Config(format!("unknown config key '{key}'"))),
        }
        Ok(())
    }
}

/// Parses `key=value` lines; blank lines and `#` comments are skipped.
pub fn parse_overrides(text: &str) -> Result<Vec<(String, String)>> {
    text.lines()
        .enumerate()
        .filter_map(|(i, raw)| {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                return None;
            }
            Some(match line.split_once('=') {
                Some((k, v)) => Ok((k.trim().trim_start_matches("--").to_string(), v.trim().to_string())),
                None => Err(Error::Config(format!("line {}: expected key=value", i + 1))),
            })
        })
        .collect()
}
