//! Base acquisition strategies: integrated EI, integrated PI, Thompson
//! sampling, and uniform random proposals.

use std::fmt;

use rand::Rng;


use crate::error::Result;
use crate::gp::{History, Hyperparams, PosteriorState};
use crate::optimize::{self, InnerOptConfig};
use crate::space::Bounds;
use crate::spectral;

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

pub fn norm_pdf(z: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * z * z).exp()
}

pub fn norm_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

/// Expected improvement below `incumbent` under `N(mean, sd²)`.
pub fn ei_value(mean: f64, sd: f64, incumbent: f64) -> f64 {
    let gap = incumbent - mean;
    if sd <= 0.0 {
        return gap.max(0.0);
    }
    let z = gap / sd;
    (gap * norm_cdf(z) + sd * norm_pdf(z)).max(0.0)
}

/// Probability of improving on `incumbent` (zero margin).
pub fn pi_value(mean: f64, sd: f64, incumbent: f64) -> f64 {
    if sd <= 0.0 {
        return if mean < incumbent { 1.0 } else { 0.0 };
    }
    norm_cdf((incumbent - mean) / sd)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Expert {
    Ei,
    Pi,
    Thompson,
    /// The `i`-th uniform random expert.
    Random(usize),
}

impl fmt::Display for Expert {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expert::Ei => write!(f, "ei"),
            Expert::Pi => write!(f, "pi"),
            Expert::Thompson => write!(f, "thompson"),
            Expert::Random(i) => write!(f, "random{i}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Improvement {
    Ei,
    Pi,
}

impl Improvement {
    pub fn value(self, mean: f64, sd: f64, incumbent: f64) -> f64 {
        match self {
            Improvement::Ei => ei_value(mean, sd, incumbent),
            Improvement::Pi => pi_value(mean, sd, incumbent),
        }
    }
}

/// A point nominated by one strategy.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub point: Vec<f64>,
    pub source: Expert,
}

/// Improvement criterion averaged over the posterior of each hyperparameter sample.
pub fn integrated_value(kind: Improvement, posteriors: &[PosteriorState], incumbent: f64, x: &[f64]) -> f64 {
    let total: f64 = posteriors
        .iter()
        .map(|p| {
            let (m, v) = p.predict_unchecked(x);
            kind.value(m, v.sqrt(), incumbent)
        })
        .sum();
    total / posteriors.len() as f64
}

/// Maximizes the hyperparameter-averaged EI or PI over the box.
///
/// All posteriors must share the same history. With no observations there is
/// no incumbent and a uniform point is returned instead.
pub fn propose_integrated<R: Rng + ?Sized>(
    kind: Improvement,
    posteriors: &[PosteriorState],
    bounds: &Bounds,
    cfg: &InnerOptConfig,
    rng: &mut R,
) -> Candidate {
    let source = match kind {
        Improvement::Ei => Expert::Ei,
        Improvement::Pi => Expert::Pi,
    };
    let incumbent = posteriors.first().and_then(|p| p.history().best_value());
    let Some(incumbent) = incumbent else {
        return Candidate {
            point: bounds.sample_uniform(rng),
            source,
        };
    };
    let neg = |x: &[f64]| -integrated_value(kind, posteriors, incumbent, x);
    let (point, _) = optimize::minimize(&neg, bounds, cfg, rng);
    Candidate { point, source }
}

/// Thompson strategy: minimizer of one approximate posterior sample path.
pub fn propose_thompson<R: Rng + ?Sized>(
    history: &History,
    hp_last: &Hyperparams,
    bounds: &Bounds,
    m_features: usize,
    cfg: &InnerOptConfig,
    rng: &mut R,
) -> Result<Candidate> {
    let fm = spectral::sample_spectral(hp_last, m_features, rng)?;
    let lp = spectral::fit_linear_posterior(&fm, history, hp_last)?;
    Ok(Candidate {
        point: spectral::thompson_minimizer(&lp, bounds, cfg, rng),
        source: Expert::Thompson,
    })
}

pub fn propose_random<R: Rng + ?Sized>(bounds: &Bounds, index: usize, rng: &mut R) -> Candidate {
    Candidate {
        point: bounds.sample_uniform(rng),
        source: Expert::Random(index),
    }
}
