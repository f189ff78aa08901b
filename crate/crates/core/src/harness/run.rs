use std::time::Instant;

use rayon::prelude::*;

use super::config::{ExperimentConfig, Method};
use super::trace::{Trace, TraceRow};
use crate::acquisition::{self, Candidate, Expert, Improvement};
use crate::error::Result;
use crate::gp::{self, History, Hyperparams, PosteriorState};
use crate::hyper::{self, HyperPrior, SliceConfig};
use crate::optimize::{self, InnerOptConfig};
use crate::portfolio::{self, HedgeState};
use crate::rng::{self, Rng};
use crate::space::Bounds;
use crate::testbed::{NoisyObjective, Objective};

// Stream tags; each consumer of randomness owns one.
const INIT: u64 = 1;
const MCMC: u64 = 2;
const EI: u64 = 3;
const PI: u64 = 4;
const THOMPSON: u64 = 5;
const ESP: u64 = 6;
const SELECT: u64 = 7;
const NOISE: u64 = 8;
const RECOMMEND: u64 = 9;
const RANDOM_BASE: u64 = 100;

fn expert_tag(e: Expert) -> u64 {
    match e {
        Expert::Ei => EI,
        Expert::Pi => PI,
        Expert::Thompson => THOMPSON,
        Expert::Random(j) => RANDOM_BASE + j as u64,
    }
}

/// Hyperparameter samples carried across iterations so each chain is warm.
struct Model {
    prev: Option<Hyperparams>,
    rng: Rng,
    samples: usize,
}

impl Model {
    fn refresh(&mut self, history: &History, bounds: &Bounds) -> Result<Vec<PosteriorState>> {
        let prior = HyperPrior::default_for(bounds, history);
        let warm = self.prev.is_some();
        let init = self.prev.clone().unwrap_or_else(|| prior.center());
        let chain = hyper::sample_chain(history, &init, &prior, self.samples, &SliceConfig::for_start(warm), &mut self.rng)?;
        self.prev = Some(chain.last().clone());
        chain.samples.iter().map(|hp| gp::fit_posterior(history, hp)).collect()
    }
}

/// Minimizer of the posterior mean averaged over hyperparameter samples.
pub fn recommend<R: rand::Rng + ?Sized>(
    posteriors: &[PosteriorState],
    bounds: &Bounds,
    cfg: &InnerOptConfig,
    rng: &mut R,
) -> Vec<f64> {
    let avg = |x: &[f64]| -portfolio::hedge_rewards(posteriors, &[x.to_vec()])[0];
    optimize::minimize(&avg, bounds, cfg, rng).0
}

fn propose(
    expert: Expert,
    posteriors: &[PosteriorState],
    history: &History,
    bounds: &Bounds,
    cfg: &ExperimentConfig,
    rng: &mut Rng,
) -> Result<Candidate> {
    let inner = &cfg.esp.inner;
    Ok(match expert {
        Expert::Ei => acquisition::propose_integrated(Improvement::Ei, posteriors, bounds, inner, rng),
        Expert::Pi => acquisition::propose_integrated(Improvement::Pi, posteriors, bounds, inner, rng),
        Expert::Thompson => {
            let hp = posteriors.last().expect("at least one sample").hyperparams();
            acquisition::propose_thompson(history, hp, bounds, cfg.thompson_features, inner, rng)?
        }
        Expert::Random(j) => acquisition::propose_random(bounds, j, rng),
    })
}

/// Runs one seeded optimization of `objective` for `cfg.horizon` queries.
///
/// Any failure stops the run; the rows gathered so far are kept and the
/// trace is flagged incomplete.
pub fn run_bo(cfg: &ExperimentConfig, objective: &Objective, seed: u64) -> Trace {
    let mut trace = Trace {
        objective: objective.name().to_string(),
        method: cfg.label(),
        seed,
        dim: objective.dim(),
        rows: Vec::new(),
        recommendation: None,
        failure: None,
    };
    if let Err(e) = drive(cfg, objective, seed, &mut trace) {
        trace.failure = Some(e.to_string());
    }
    trace
}

fn drive(cfg: &ExperimentConfig, objective: &Objective, seed: u64, trace: &mut Trace) -> Result<()> {
    cfg.validate()?;
    let start = Instant::now();
    let bounds = objective.bounds().clone();
    let experts = cfg.experts();
    let mut black_box = NoisyObjective::new(objective, cfg.noise_sd, rng::stream(seed, NOISE))?;
    let mut init_rng = rng::stream(seed, INIT);
    let mut expert_rngs: Vec<Rng> = experts.iter().map(|e| rng::stream(seed, expert_tag(*e))).collect();
    let mut esp_rng = rng::stream(seed, ESP);
    let mut select_rng = rng::stream(seed, SELECT);
    let mut model = Model {
        prev: None,
        rng: rng::stream(seed, MCMC),
        samples: cfg.mcmc_samples,
    };
    let mut hedge = HedgeState::new(experts.len(), cfg.eta)?;
    let mut pending: Option<Vec<Vec<f64>>> = None;
    let mut history = History::new();
    let (mut best_true, mut best_obs) = (f64::INFINITY, f64::INFINITY);

    for t in 1..=cfg.horizon {
        let (x, expert) = if t <= cfg.n_init {
            (bounds.sample_uniform(&mut init_rng), None)
        } else {
            let posteriors = model.refresh(&history, &bounds)?;
            if let Some(nominees) = pending.take() {
                hedge.update(&portfolio::hedge_rewards(&posteriors, &nominees))?;
            }
            let candidates: Vec<Candidate> = experts
                .iter()
                .zip(expert_rngs.iter_mut())
                .map(|(e, r)| propose(*e, &posteriors, &history, &bounds, cfg, r))
                .collect::<Result<_>>()?;
            let k = match cfg.method {
                Method::Esp => portfolio::esp_select(&candidates, &posteriors, &bounds, &cfg.esp, &mut esp_rng)?,
                Method::Hedge => {
                    let k = portfolio::hedge_select(&hedge, &mut select_rng);
                    pending = Some(candidates.iter().map(|c| c.point.clone()).collect());
                    k
                }
                Method::RandomPortfolio => portfolio::random_portfolio_select(candidates.len(), &mut select_rng)?,
                Method::Ei | Method::Pi | Method::Thompson => 0,
            };
            (candidates[k].point.clone(), Some(k))
        };
        let (y, f) = black_box.query(&x)?;
        best_true = best_true.min(f);
        best_obs = best_obs.min(y);
        history.push(x.clone(), y);
        trace.rows.push(TraceRow {
            t,
            x,
            y,
            f,
            expert,
            best_true,
            best_observed: best_obs,
            abs_error: objective.true_min().map(|m| (best_true - m).abs()),
            wall_secs: cfg.record_time.then(|| start.elapsed().as_secs_f64()),
        });
    }

    let posteriors = model.refresh(&history, &bounds)?;
    trace.recommendation = Some(recommend(&posteriors, &bounds, &cfg.esp.inner, &mut rng::stream(seed, RECOMMEND)));
    Ok(())
}

/// Runs every configured seed (in parallel) and returns traces in seed order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<Trace>> {
    cfg.validate()?;
    let objective = cfg.objective.build()?;
    Ok(cfg.seeds.par_iter().map(|s| run_bo(cfg, &objective, *s)).collect())
}
