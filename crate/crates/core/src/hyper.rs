//! Hyperpriors and slice-sampled hyperparameter posteriors.
//!
//! Positive parameters (lengthscales, amplitude, noise) are sampled as their
//! logarithms; the constant mean is sampled on its prior interval rescaled
//! to `[0, 1]`. Each sweep updates every coordinate once with a univariate
//! stepping-out/shrinkage slice sampler.

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::error::{Error, Result};
use crate::gp::{log_marginal, History, Hyperparams};
use crate::space::Bounds;

const LN_2PI: f64 = 1.837_877_066_409_345_3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogNormal {
    pub location: f64,
    pub scale: f64,
}

impl LogNormal {
    pub fn new(location: f64, scale: f64) -> Result<Self> {
        if !(location.is_finite() && scale.is_finite() && scale > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "log-normal({location}, {scale}) is not a valid prior"
            )));
        }
        Ok(Self { location, scale })
    }

    /// Density of `log v`; this is the target in sampling coordinates.
    fn ln_pdf_log(&self, log_v: f64) -> f64 {
        let z = (log_v - self.location) / self.scale;
        -0.5 * z * z - self.scale.ln() - 0.5 * LN_2PI
    }

    pub fn ln_pdf(&self, v: f64) -> f64 {
        if !(v > 0.0) || !v.is_finite() {
            return f64::NEG_INFINITY;
        }
        let lv = v.ln();
        self.ln_pdf_log(lv) - lv
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformPrior {
    pub lo: f64,
    pub hi: f64,
}

impl UniformPrior {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidArgument(format!("uniform({lo}, {hi}) is empty")));
        }
        Ok(Self { lo, hi })
    }

    pub fn ln_pdf(&self, v: f64) -> f64 {
        if v >= self.lo && v <= self.hi {
            -(self.hi - self.lo).ln()
        } else {
            f64::NEG_INFINITY
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HyperPrior {
    pub lengthscales: Vec<LogNormal>,
    pub amplitude: LogNormal,
    pub noise: LogNormal,
    pub mean: UniformPrior,
}

impl HyperPrior {
    /// Weakly informative priors scaled to the box and the observed values.
    pub fn default_for(bounds: &Bounds, history: &History) -> Self {
        let lengthscales = (0..bounds.dim())
            .map(|j| LogNormal {
                location: (0.25 * bounds.width(j).max(f64::MIN_POSITIVE)).ln(),
                scale: 1.0,
            })
            .collect();
        let ys = &history.values;
        let (amp_loc, mean) = if ys.len() < 2 {
            (0.0, UniformPrior { lo: -1.0, hi: 1.0 })
        } else {
            let n = ys.len() as f64;
            let avg = ys.iter().sum::<f64>() / n;
            let var = ys.iter().map(|y| (y - avg).powi(2)).sum::<f64>() / n;
            let lo = ys.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let range = hi - lo;
            let mean = if range > 0.0 {
                UniformPrior {
                    lo: lo - range,
                    hi: hi + range,
                }
            } else {
                UniformPrior { lo: lo - 1.0, hi: hi + 1.0 }
            };
            (if var > 0.0 { var.ln() } else { 0.0 }, mean)
        };
        Self {
            lengthscales,
            amplitude: LogNormal {
                location: amp_loc,
                scale: 1.0,
            },
            noise: LogNormal {
                location: 1e-2f64.ln(),
                scale: 2.0,
            },
            mean,
        }
    }

    pub fn dim(&self) -> usize {
        self.lengthscales.len()
    }

    pub fn ln_density(&self, hp: &Hyperparams) -> f64 {
        if hp.lengthscales.len() != self.dim() {
            return f64::NEG_INFINITY;
        }
        let ls: f64 = self
            .lengthscales
            .iter()
            .zip(&hp.lengthscales)
            .map(|(p, l)| p.ln_pdf(*l))
            .sum();
        ls + self.amplitude.ln_pdf(hp.amplitude) + self.noise.ln_pdf(hp.noise) + self.mean.ln_pdf(hp.mean)
    }

    /// Prior medians; a reasonable chain start.
    pub fn center(&self) -> Hyperparams {
        Hyperparams {
            lengthscales: self.lengthscales.iter().map(|p| p.location.exp()).collect(),
            amplitude: self.amplitude.location.exp(),
            noise: self.noise.location.exp(),
            mean: 0.5 * (self.mean.lo + self.mean.hi),
        }
    }

    fn to_coords(&self, hp: &Hyperparams) -> Vec<f64> {
        let mut u: Vec<f64> = hp.lengthscales.iter().map(|l| l.ln()).collect();
        u.push(hp.amplitude.ln());
        u.push(hp.noise.ln());
        u.push((hp.mean - self.mean.lo) / (self.mean.hi - self.mean.lo));
        u
    }

    fn params_at(&self, u: &[f64]) -> Hyperparams {
        let d = self.dim();
        Hyperparams {
            lengthscales: u[..d].iter().map(|v| v.exp()).collect(),
            amplitude: u[d].exp(),
            noise: u[d + 1].exp(),
            mean: self.mean.lo + u[d + 2] * (self.mean.hi - self.mean.lo),
        }
    }

    /// Log target in sampling coordinates (prior density of the coordinates
    /// plus log marginal likelihood).
    fn ln_target(&self, u: &[f64], history: &History) -> f64 {
        let d = self.dim();
        if !u.iter().all(|v| v.is_finite()) || !(0.0..=1.0).contains(&u[d + 2]) {
            return f64::NEG_INFINITY;
        }
        let hp = self.params_at(u);
        if hp.validate().is_err() {
            return f64::NEG_INFINITY;
        }
        let prior: f64 = self
            .lengthscales
            .iter()
            .zip(&u[..d])
            .map(|(p, v)| p.ln_pdf_log(*v))
            .sum::<f64>()
            + self.amplitude.ln_pdf_log(u[d])
            + self.noise.ln_pdf_log(u[d + 1]);
        match log_marginal(history, &hp) {
            Ok(lm) if lm.is_finite() => prior + lm,
            _ => f64::NEG_INFINITY,
        }
    }
}

/// `log p(ψ) + log p(D | ψ)`; `−∞` off the prior support or if the GP
/// cannot be factorized.
pub fn log_posterior(hp: &Hyperparams, history: &History, prior: &HyperPrior) -> f64 {
    let lp = prior.ln_density(hp);
    if !lp.is_finite() || hp.validate().is_err() {
        return f64::NEG_INFINITY;
    }
    match log_marginal(history, hp) {
        Ok(lm) => lp + lm,
        Err(_) => f64::NEG_INFINITY,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SliceConfig {
    /// Initial bracket width in sampling coordinates.
    pub width: f64,
    pub burn_in: usize,
    pub thin: usize,
    /// Step-out budget per side of the bracket.
    pub max_steps_out: usize,
}

impl SliceConfig {
    /// Burn-in 20 for a cold chain, 5 when warm-started.
    pub fn for_start(warm: bool) -> Self {
        Self {
            width: 1.0,
            burn_in: if warm { 5 } else { 20 },
            thin: 2,
            max_steps_out: 32,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ChainDiagnostics {
    pub evaluations: usize,
    pub expansions: usize,
    pub shrinks: usize,
    /// Brackets whose step-out budget ran out before leaving the slice.
    pub cap_hits: usize,
}

#[derive(Debug, Clone)]
pub struct HyperChain {
    pub init: Hyperparams,
    pub samples: Vec<Hyperparams>,
    pub diagnostics: ChainDiagnostics,
}

impl HyperChain {
    /// The chain's final state.
    pub fn last(&self) -> &Hyperparams {
        self.samples.last().expect("chains hold at least one sample")
    }
}

fn slice_update<R: Rng + ?Sized, F: FnMut(f64) -> f64>(
    x0: f64,
    f0: f64,
    mut logf: F,
    cfg: &SliceConfig,
    diag: &mut ChainDiagnostics,
    rng: &mut R,
) -> (f64, f64) {
    let e: f64 = Exp1.sample(rng);
    let level = f0 - e;
    let w = cfg.width;
    let mut left = x0 - w * rng.random::<f64>();
    let mut right = left + w;
    let budget = cfg.max_steps_out;
    let mut j = (budget as f64 * rng.random::<f64>()).floor() as usize;
    let mut k = budget.saturating_sub(1).saturating_sub(j);
    while j > 0 && {
        diag.evaluations += 1;
        logf(left) > level
    } {
        left -= w;
        j -= 1;
        diag.expansions += 1;
    }
    if j == 0 {
        diag.cap_hits += 1;
    }
    while k > 0 && {
        diag.evaluations += 1;
        logf(right) > level
    } {
        right += w;
        k -= 1;
        diag.expansions += 1;
    }
    loop {
        let x1 = left + (right - left) * rng.random::<f64>();
        diag.evaluations += 1;
        let f1 = logf(x1);
        if f1 > level {
            return (x1, f1);
        }
        diag.shrinks += 1;
        if x1 < x0 {
            left = x1;
        } else {
            right = x1;
        }
        if right - left < 1e-12 {
            return (x0, f0);
        }
    }
}

/// Draws `m` hyperparameter samples from `p(ψ | D)` by slice sampling.
///
/// An `init` that falls outside the mean prior interval is pulled onto it.
pub fn sample_chain<R: Rng + ?Sized>(
    history: &History,
    init: &Hyperparams,
    prior: &HyperPrior,
    m: usize,
    cfg: &SliceConfig,
    rng: &mut R,
) -> Result<HyperChain> {
    if m == 0 {
        return Err(Error::InvalidArgument("chain length must be >= 1".into()));
    }
    init.validate()?;
    if init.dim() != prior.dim() {
        return Err(Error::DimensionMismatch {
            expected: prior.dim(),
            got: init.dim(),
        });
    }
    let mut start = init.clone();
    start.mean = start.mean.clamp(prior.mean.lo, prior.mean.hi);
    let mut u = prior.to_coords(&start);
    let mut fu = prior.ln_target(&u, history);
    if !fu.is_finite() {
        u = prior.to_coords(&prior.center());
        fu = prior.ln_target(&u, history);
    }
    let mut diag = ChainDiagnostics::default();
    let mut samples = Vec::with_capacity(m);
    let thin = cfg.thin.max(1);
    let sweeps = cfg.burn_in + m * thin;
    for sweep in 1..=sweeps {
        for c in 0..u.len() {
            let mut trial = u.clone();
            let (x, f) = slice_update(
                u[c],
                fu,
                |v| {
                    trial[c] = v;
                    prior.ln_target(&trial, history)
                },
                cfg,
                &mut diag,
                rng,
            );
            u[c] = x;
            fu = f;
        }
        if sweep > cfg.burn_in && (sweep - cfg.burn_in).is_multiple_of(thin) {
            samples.push(prior.params_at(&u));
        }
    }
    Ok(HyperChain {
        init: start,
        samples,
        diagnostics: diag,
    })
}
