//! Meta-policies that pick one candidate per iteration: the entropy search
//! portfolio (ESP), GP-Hedge, and a uniform random portfolio.
//!
//! ESP scores each candidate by the expected entropy of the minimizer
//! location after a hallucinated observation there. The minimizer
//! distribution is discretized on representer points drawn by Thompson
//! sampling (an equal block per hyperparameter sample) and estimated from
//! relative argmin counts of joint posterior draws at those points.
//!
//! Conditioning on one hallucinated observation `(x, y)` changes the joint
//! posterior at the representers by a rank-one covariance downdate that does
//! not depend on `y`, plus a mean shift proportional to `y − μ(x)`; each
//! (candidate, hyperparameter) pair therefore needs one factorization shared
//! by all its hallucinations.

use std::ops::Range;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::acquisition::Candidate;
use crate::error::{Error, Result};
use crate::gp::{cholesky_jittered, draw_gaussian_rows, History, Hyperparams, PosteriorState};
use crate::optimize::InnerOptConfig;
use crate::rng::{child_seed, mix, point_key, Rng as StreamRng};
use crate::space::Bounds;
use crate::spectral::{self, DEFAULT_FEATURES};

#[derive(Debug, Clone, PartialEq)]
pub struct EspConfig {
    /// Total representer points `G`, split across hyperparameter samples.
    pub representers: usize,
    /// Hallucinated observations `N` per candidate and hyperparameter sample.
    pub hallucinations: usize,
    /// Joint posterior draws `S` per hallucination.
    pub samples: usize,
    /// Random features per representer feature map.
    pub features: usize,
    /// Use midpoint normal quantiles instead of i.i.d. hallucinations.
    pub stratified: bool,
    pub inner: InnerOptConfig,
}

impl Default for EspConfig {
    fn default() -> Self {
        Self {
            representers: 500,
            hallucinations: 5,
            samples: 1000,
            features: DEFAULT_FEATURES,
            stratified: true,
            inner: InnerOptConfig::default(),
        }
    }
}

/// Representer points with the block of rows owned by each hyperparameter sample.
#[derive(Debug, Clone, PartialEq)]
pub struct RepresenterSet {
    pub points: Vec<Vec<f64>>,
    pub blocks: Vec<Range<usize>>,
}

impl RepresenterSet {
    /// A single block holding `points`, shared by one hyperparameter sample.
    pub fn single(points: Vec<Vec<f64>>) -> Self {
        let n = points.len();
        Self {
            points,
            blocks: vec![0..n],
        }
    }

    pub fn block(&self, i: usize) -> &[Vec<f64>] {
        &self.points[self.blocks[i].clone()]
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Block sizes for `g` points over `m` samples: `g / m` each, remainder to the first.
pub fn block_sizes(g: usize, m: usize) -> Vec<usize> {
    let base = g / m;
    let mut sizes = vec![base; m];
    sizes[0] += g - base * m;
    sizes
}

/// Draws `g` approximate minimizer samples, `g / M` per hyperparameter sample.
///
/// Each block uses one feature map and independent weight draws from the
/// corresponding linear-model posterior.
pub fn sample_representers<R: Rng + ?Sized>(
    history: &History,
    hps: &[Hyperparams],
    g: usize,
    m_features: usize,
    bounds: &Bounds,
    inner: &InnerOptConfig,
    rng: &mut R,
) -> Result<RepresenterSet> {
    if hps.is_empty() || g == 0 {
        return Err(Error::InvalidArgument(
            "representers need at least one hyperparameter sample and one point".into(),
        ));
    }
    let sizes = block_sizes(g, hps.len());
    let seeds: Vec<u64> = hps.iter().map(|_| child_seed(rng)).collect();
    let blocks: Vec<Vec<Vec<f64>>> = hps
        .par_iter()
        .zip(sizes.par_iter())
        .zip(seeds.par_iter())
        .map(|((hp, &size), &seed)| -> Result<Vec<Vec<f64>>> {
            if size == 0 {
                return Ok(Vec::new());
            }
            let mut r = StreamRng::seed_from_u64(seed);
            let fm = spectral::sample_spectral(hp, m_features, &mut r)?;
            let lp = spectral::fit_linear_posterior(&fm, history, hp)?;
            Ok(spectral::thompson_minimizers(&lp, size, bounds, inner, &mut r))
        })
        .collect::<Result<_>>()?;
    let mut points = Vec::with_capacity(g);
    let mut ranges = Vec::with_capacity(hps.len());
    for b in blocks {
        let start = points.len();
        points.extend(b);
        ranges.push(start..points.len());
    }
    Ok(RepresenterSet {
        points,
        blocks: ranges,
    })
}

/// Relative argmin counts over the rows of a sample matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalPmin {
    pub probs: Vec<f64>,
}

fn row_argmin(row: impl Iterator<Item = f64>) -> usize {
    let mut best = 0;
    let mut best_v = f64::INFINITY;
    for (j, v) in row.enumerate() {
        let v = if v.is_nan() { f64::INFINITY } else { v };
        if v < best_v {
            best = j;
            best_v = v;
        }
    }
    best
}

/// `p̂_i` = fraction of rows (samples) whose minimum sits in column `i`;
/// ties go to the lowest column.
pub fn empirical_pmin(f_samples: &DMatrix<f64>) -> Result<EmpiricalPmin> {
    let (s, g) = f_samples.shape();
    if s == 0 || g == 0 {
        return Err(Error::InvalidArgument("empty sample matrix".into()));
    }
    let mut counts = vec![0usize; g];
    for row in f_samples.row_iter() {
        counts[row_argmin(row.iter().copied())] += 1;
    }
    Ok(EmpiricalPmin {
        probs: counts.iter().map(|c| *c as f64 / s as f64).collect(),
    })
}

/// Shannon entropy in nats, with `0 ln 0 = 0`.
pub fn entropy(p: &EmpiricalPmin) -> f64 {
    -p.probs
        .iter()
        .filter(|v| **v > 0.0)
        .map(|v| v * v.ln())
        .sum::<f64>()
}

/// Standard-normal offsets for the hallucinated observations.
fn hallucination_quantiles<R: Rng + ?Sized>(n: usize, stratified: bool, rng: &mut R) -> Vec<f64> {
    if stratified {
        let std = Normal::standard();
        (0..n)
            .map(|i| std.inverse_cdf((i as f64 + 0.5) / n as f64))
            .collect()
    } else {
        (0..n).map(|_| rng.sample(StandardNormal)).collect()
    }
}

/// Average entropy of `p̂` over hallucinated observations at `x`, for one
/// posterior and its representer block.
pub fn expected_entropy<R: Rng + ?Sized>(
    post: &PosteriorState,
    x: &[f64],
    z: &[Vec<f64>],
    cfg: &EspConfig,
    rng: &mut R,
) -> Result<f64> {
    if z.is_empty() {
        return Err(Error::InvalidArgument("no representer points".into()));
    }
    if cfg.hallucinations == 0 || cfg.samples == 0 {
        return Err(Error::InvalidArgument("need N >= 1 and S >= 1".into()));
    }
    let g = z.len();
    let mut pts = z.to_vec();
    pts.push(x.to_vec());
    let (mean, cov) = post.joint_moments(&pts)?;
    let hp = post.hyperparams();
    let y_var = cov[(g, g)] + hp.noise;
    let c: DVector<f64> = cov.view((0, g), (g, 1)).column(0).into_owned();
    let mut cond = cov.view((0, 0), (g, g)).into_owned();
    cond.ger(-1.0 / y_var, &c, &c, 1.0);
    for i in 0..g {
        cond[(i, i)] = cond[(i, i)].max(0.0);
    }
    let (l, _) = cholesky_jittered(&cond, hp.amplitude)?;
    let base_mean = mean.rows(0, g).into_owned();
    let shift = &c / y_var.sqrt();
    let qs = hallucination_quantiles(cfg.hallucinations, cfg.stratified, rng);
    let mut total = 0.0;
    for q in qs {
        let m = &base_mean + &shift * q;
        let draws = draw_gaussian_rows(&m, &l, cfg.samples, rng);
        total += entropy(&empirical_pmin(&draws)?);
    }
    Ok(total / cfg.hallucinations as f64)
}

/// ESP utilities `u_k` (negated expected posterior entropy, averaged over
/// hyperparameter samples). Larger is better.
///
/// Randomness for each (candidate, sample) pair is derived from `seed`, the
/// candidate's coordinates and the sample index, so equal candidates receive
/// equal utilities wherever they appear in the list.
pub fn esp_utilities(
    candidates: &[Vec<f64>],
    posteriors: &[PosteriorState],
    reps: &RepresenterSet,
    cfg: &EspConfig,
    seed: u64,
) -> Result<Vec<f64>> {
    if posteriors.len() != reps.blocks.len() {
        return Err(Error::InvalidArgument(format!(
            "{} posteriors but {} representer blocks",
            posteriors.len(),
            reps.blocks.len()
        )));
    }
    let active: Vec<usize> = (0..posteriors.len())
        .filter(|i| !reps.blocks[*i].is_empty())
        .collect();
    if active.is_empty() {
        return Err(Error::InvalidArgument("all representer blocks are empty".into()));
    }
    let jobs: Vec<(usize, usize)> = (0..candidates.len())
        .flat_map(|k| active.iter().map(move |&i| (k, i)))
        .collect();
    let entropies: Vec<f64> = jobs
        .par_iter()
        .map(|&(k, i)| {
            let x = &candidates[k];
            let mut r = StreamRng::seed_from_u64(mix(&[seed, point_key(x), i as u64]));
            expected_entropy(&posteriors[i], x, reps.block(i), cfg, &mut r)
        })
        .collect::<Result<_>>()?;
    let per = active.len();
    Ok(entropies
        .chunks(per)
        .map(|h| -h.iter().sum::<f64>() / per as f64)
        .collect())
}

/// Index of the largest value, ties to the lowest index.
pub fn argmax_first(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Picks the candidate whose observation is expected to leave the least
/// entropy in the minimizer distribution.
///
/// `posteriors` holds one fitted posterior per hyperparameter sample, all on
/// the same history.
pub fn esp_select<R: Rng + ?Sized>(
    candidates: &[Candidate],
    posteriors: &[PosteriorState],
    bounds: &Bounds,
    cfg: &EspConfig,
    rng: &mut R,
) -> Result<usize> {
    match candidates.len() {
        0 => return Err(Error::InvalidArgument("no candidates".into())),
        1 => return Ok(0),
        _ => {}
    }
    let history = posteriors
        .first()
        .ok_or_else(|| Error::InvalidArgument("no hyperparameter samples".into()))?
        .history();
    let hps: Vec<Hyperparams> = posteriors.iter().map(|p| p.hyperparams().clone()).collect();
    let reps = sample_representers(history, &hps, cfg.representers, cfg.features, bounds, &cfg.inner, rng)?;
    let points: Vec<Vec<f64>> = candidates.iter().map(|c| c.point.clone()).collect();
    let u = esp_utilities(&points, posteriors, &reps, cfg, child_seed(rng))?;
    Ok(argmax_first(&u))
}

/// Exponential-weights selection over cumulative gains.
#[derive(Debug, Clone, PartialEq)]
pub struct HedgeState {
    pub gains: Vec<f64>,
    pub eta: f64,
}

impl HedgeState {
    pub fn new(k: usize, eta: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("hedge needs at least one expert".into()));
        }
        if !(eta.is_finite() && eta > 0.0) {
            return Err(Error::InvalidArgument(format!("bad learning rate {eta}")));
        }
        Ok(Self {
            gains: vec![0.0; k],
            eta,
        })
    }

    pub fn probabilities(&self) -> Vec<f64> {
        let top = self.gains.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = self.gains.iter().map(|g| (self.eta * (g - top)).exp()).collect();
        let total: f64 = w.iter().sum();
        w.iter().map(|v| v / total).collect()
    }

    /// Adds `rewards` to the gains.
    pub fn update(&mut self, rewards: &[f64]) -> Result<()> {
        if rewards.len() != self.gains.len() {
            return Err(Error::DimensionMismatch {
                expected: self.gains.len(),
                got: rewards.len(),
            });
        }
        if !rewards.iter().all(|r| r.is_finite()) {
            return Err(Error::InvalidArgument("rewards must be finite".into()));
        }
        for (g, r) in self.gains.iter_mut().zip(rewards) {
            *g += r;
        }
        Ok(())
    }
}

pub fn hedge_select<R: Rng + ?Sized>(state: &HedgeState, rng: &mut R) -> usize {
    let probs = state.probabilities();
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // round-off: fall back to the last expert with positive mass
    probs.iter().rposition(|p| *p > 0.0).unwrap_or(0)
}

/// GP-Hedge reward for each nominee: the negated posterior mean there,
/// averaged over hyperparameter samples.
pub fn hedge_rewards(posteriors: &[PosteriorState], nominees: &[Vec<f64>]) -> Vec<f64> {
    nominees
        .iter()
        .map(|x| {
            -posteriors.iter().map(|p| p.mean_unchecked(x)).sum::<f64>() / posteriors.len() as f64
        })
        .collect()
}

pub fn random_portfolio_select<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Result<usize> {
    if k == 0 {
        return Err(Error::InvalidArgument("no experts".into()));
    }
    Ok(rng.random_range(0..k))
}
