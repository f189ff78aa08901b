//! Command-line front end: `run`, `summarize` and `bench-oracle`.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 runtime failure.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::Error;
use crate::harness::summary::{self, SUMMARY_HEADER};
use crate::harness::{config, run_experiment, ExperimentConfig, Method, Metric, ObjectiveSpec};
use crate::testbed;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "esp", about = "Bayesian optimization with acquisition portfolios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run seeded optimizations and write one trace per seed.
    Run(RunArgs),
    /// Aggregate the traces in a directory across seeds.
    Summarize(SummarizeArgs),
    /// Recompute the benchmark minima by grid search.
    BenchOracle(BenchArgs),
}

#[derive(Args, Debug)]
struct RunArgs {
    /// branin, hartmann3 or csv:<path>
    #[arg(long)]
    objective: Option<String>,
    #[arg(long, default_value = "esp")]
    method: String,
    #[arg(long, default_value_t = 100)]
    horizon: usize,
    /// Inclusive range `a..b`, or a comma list.
    #[arg(long, default_value = "0..24")]
    seeds: String,
    #[arg(long, default_value_t = 0)]
    n_random_experts: usize,
    /// Observation noise sd (default 1e-3 for synthetic objectives, 0 for csv).
    #[arg(long)]
    noise_sd: Option<f64>,
    #[arg(long, default_value_t = 2)]
    n_init: usize,
    #[arg(long)]
    mcmc_samples: Option<usize>,
    #[arg(long)]
    representers: Option<usize>,
    #[arg(long)]
    hallucinations: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    features: Option<usize>,
    #[arg(long)]
    sweep_per_dim: Option<usize>,
    #[arg(long)]
    eta: Option<f64>,
    /// Draw hallucinated outcomes i.i.d. instead of at stratified quantiles.
    #[arg(long)]
    plain_mc: bool,
    /// Add a wall-clock column to each trace.
    #[arg(long)]
    record_time: bool,
    #[arg(long, default_value = "traces")]
    out: PathBuf,
    /// File of `key=value` lines; its values override the flags.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SummarizeArgs {
    dir: PathBuf,
    /// auto, abs-error, best-true or best-observed
    #[arg(long, default_value = "auto")]
    metric: String,
    /// Write the summary here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[arg(long, default_value_t = 201)]
    per_dim: usize,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::InvalidArgument(_) | Error::Parse { .. } => Failure::Usage(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

fn init_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("ESP_OPT_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Failure::Usage(format!("ESP_OPT_THREADS must be a positive integer, got '{v}'")))?;
    // a second call in the same process fails harmlessly
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn build_config(a: &RunArgs) -> Result<ExperimentConfig, Failure> {
    let mut kv: Vec<(String, String)> = Vec::new();
    let mut push = |k: &str, v: Option<String>| {
        if let Some(v) = v {
            kv.push((k.to_string(), v));
        }
    };
    push("method", Some(a.method.clone()));
    push("horizon", Some(a.horizon.to_string()));
    push("seeds", Some(a.seeds.clone()));
    push("n-random-experts", Some(a.n_random_experts.to_string()));
    push("n-init", Some(a.n_init.to_string()));
    push("noise-sd", a.noise_sd.map(|v| v.to_string()));
    push("mcmc-samples", a.mcmc_samples.map(|v| v.to_string()));
    push("representers", a.representers.map(|v| v.to_string()));
    push("hallucinations", a.hallucinations.map(|v| v.to_string()));
    push("samples", a.samples.map(|v| v.to_string()));
    push("features", a.features.map(|v| v.to_string()));
    push("sweep-per-dim", a.sweep_per_dim.map(|v| v.to_string()));
    push("eta", a.eta.map(|v| v.to_string()));
    push("plain-mc", a.plain_mc.then(|| "true".into()));
    push("record-time", a.record_time.then(|| "true".into()));
    let mut objective = a.objective.clone();
    if let Some(path) = &a.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?;
        for (k, v) in config::parse_overrides(&text)? {
            if k == "objective" {
                objective = Some(v);
            } else {
                kv.push((k, v));
            }
        }
    }
    let objective: ObjectiveSpec = objective
        .ok_or_else(|| Failure::Usage("missing --objective (branin, hartmann3 or csv:<path>)".into()))?
        .parse()?;
    // the noise default depends on the objective, so it is applied before overrides
    let mut cfg = ExperimentConfig::new(objective, Method::Esp);
    for (k, v) in &kv {
        cfg.set(k, v)?;
    }
    cfg.validate()?;
    // an unreadable or malformed dataset is a configuration problem
    cfg.objective.build().map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(cfg)
}

fn cmd_run(a: &RunArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let cfg = build_config(a)?;
    let traces = run_experiment(&cfg)?;
    let mut failed = Vec::new();
    for tr in &traces {
        let path = tr.write_to(&a.out).map_err(|e| Failure::Runtime(e.to_string()))?;
        let _ = writeln!(out, "{}", path.display());
        if let Some(msg) = &tr.failure {
            failed.push(format!("seed {}: {msg}", tr.seed));
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Runtime(format!("incomplete runs: {}", failed.join("; "))))
    }
}

/// Groups trace files by everything before `_seed<k>.csv`.
fn cmd_summarize(a: &SummarizeArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let metric: Metric = a.metric.parse()?;
    let entries = std::fs::read_dir(&a.dir)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", a.dir.display())))?;
    let mut groups: BTreeMap<String, Vec<(u64, Vec<f64>)>> = BTreeMap::new();
    for entry in entries {
        let path = entry.map_err(|e| Failure::Runtime(e.to_string()))?.path();
        let Some(name) = path.file_name().and_then(|n| n.to_str()) else {
            continue;
        };
        let Some((group, seed)) = name
            .strip_suffix(".csv")
            .and_then(|s| s.rsplit_once("_seed"))
            .and_then(|(g, s)| s.parse::<u64>().ok().map(|s| (g.to_string(), s)))
        else {
            continue;
        };
        let text = std::fs::read_to_string(&path).map_err(|e| Failure::Runtime(e.to_string()))?;
        let cols = crate::harness::trace::read_columns(&text)
            .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        groups.entry(group).or_default().push((seed, summary::metric_series(&cols, metric)?));
    }
    if groups.is_empty() {
        return Err(Failure::Usage(format!("no trace files in {}", a.dir.display())));
    }
    let mut text = format!("{SUMMARY_HEADER}\n");
    for (group, mut runs) in groups {
        runs.sort_by_key(|(s, _)| *s);
        let series: Vec<Vec<f64>> = runs.into_iter().map(|(_, s)| s).collect();
        let rows = summary::summarize(&series).map_err(|e| Failure::Usage(format!("{group}: {e}")))?;
        text.push_str(&summary::summary_csv(&group, &rows));
    }
    match &a.out {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Runtime(e.to_string()))?,
        None => {
            let _ = out.write_all(text.as_bytes());
        }
    }
    Ok(())
}

fn cmd_bench(a: &BenchArgs, out: &mut dyn Write) -> Result<(), Failure> {
    if a.per_dim < 2 {
        return Err(Failure::Usage("--per-dim must be >= 2".into()));
    }
    let _ = writeln!(out, "objective,x,min,tabulated,abs_diff");
    let cases: [(&str, fn(&[f64]) -> crate::error::Result<f64>, _, f64, usize); 2] = [
        ("branin", testbed::branin, testbed::branin_bounds(), testbed::BRANIN_MIN, a.per_dim),
        ("hartmann3", testbed::hartmann3, crate::space::Bounds::unit(3), testbed::HARTMANN3_MIN, a.per_dim.min(101)),
    ];
    for (name, f, bounds, tab, per_dim) in cases {
        let (x, v) = testbed::grid_minimum(|x| f(x).unwrap_or(f64::INFINITY), &bounds, per_dim, 10);
        let xs: Vec<String> = x.iter().map(|v| format!("{v:.6}")).collect();
        let _ = writeln!(out, "{name},{},{v:.12},{tab:.12},{:.3e}", xs.join(" "), (v - tab).abs());
    }
    Ok(())
}

/// Entry point shared by the binary and the tests.
pub fn cli_main<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    let result = init_threads().and_then(|_| match &cli.command {
        Command::Run(a) => cmd_run(a, out),
        Command::Summarize(a) => cmd_summarize(a, out),
        Command::BenchOracle(a) => cmd_bench(a, out),
    });
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}\n\nUsage: esp <run|summarize|bench-oracle> [OPTIONS]");
            EXIT_USAGE
        }
        Err(Failure::Runtime(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_RUNTIME
        }
    }
}
