//! Gradient-free box-constrained minimizer shared by every strategy.
//!
//! A randomly shifted Halton sweep locates promising basins; the best few
//! sweep points are then polished by a compass (coordinate) search whose step
//! halves whenever a full pass over the coordinates fails to improve.

use rand::Rng;

use crate::space::Bounds;

const PRIMES: [u32; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

#[derive(Debug, Clone, PartialEq)]
pub struct InnerOptConfig {
    /// Sweep size is `sweep_per_dim * d`.
    pub sweep_per_dim: usize,
    pub n_starts: usize,
    pub max_iters: usize,
    /// Refinement stops once every coordinate step is below this.
    pub x_tol: f64,
}

impl Default for InnerOptConfig {
    fn default() -> Self {
        Self {
            sweep_per_dim: 1000,
            n_starts: 5,
            max_iters: 50,
            x_tol: 1e-6,
        }
    }
}

/// A function to be minimized over a box.
pub trait Surface {
    fn value(&self, x: &[f64]) -> f64;

    fn values(&self, xs: &[Vec<f64>]) -> Vec<f64> {
        xs.iter().map(|x| self.value(x)).collect()
    }
}

impl<F: Fn(&[f64]) -> f64> Surface for F {
    fn value(&self, x: &[f64]) -> f64 {
        self(x)
    }
}

fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = base as u64;
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % b) as f64;
        i /= b;
        f *= inv;
    }
    r
}

/// `n` Halton points with a uniform random shift modulo 1, mapped into the box.
pub fn sweep_points<R: Rng + ?Sized>(bounds: &Bounds, n: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let d = bounds.dim();
    assert!(d <= PRIMES.len(), "sweep supports at most {} dimensions", PRIMES.len());
    let shift: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
    (0..n)
        .map(|i| {
            let u: Vec<f64> = (0..d)
                .map(|j| (radical_inverse(i as u64 + 1, PRIMES[j]) + shift[j]).fract())
                .collect();
            bounds.from_unit(&u)
        })
        .collect()
}

/// Indices of the `k` smallest values, ties to the lower index.
pub fn best_indices(values: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| {
        let (va, vb) = (nan_high(values[a]), nan_high(values[b]));
        va.total_cmp(&vb).then(a.cmp(&b))
    });
    idx.truncate(k);
    idx
}

fn nan_high(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

/// Evaluation of single-coordinate moves, for surfaces that can update a
/// cached state more cheaply than evaluating from scratch.
pub trait Probe {
    /// Called once with the starting point of a refinement.
    fn start(&mut self, x: &[f64]);
    /// Value at `x` with coordinate `j` replaced by `to`.
    fn probe(&mut self, x: &[f64], j: usize, to: f64) -> f64;
    /// The move last probed is taken.
    fn accept(&mut self, x: &[f64], j: usize, to: f64);
}

struct Direct<'a, S: ?Sized> {
    f: &'a S,
    trial: Vec<f64>,
}

impl<S: Surface + ?Sized> Probe for Direct<'_, S> {
    fn start(&mut self, _x: &[f64]) {}

    fn probe(&mut self, x: &[f64], j: usize, to: f64) -> f64 {
        self.trial.clear();
        self.trial.extend_from_slice(x);
        self.trial[j] = to;
        self.f.value(&self.trial)
    }

    fn accept(&mut self, _x: &[f64], _j: usize, _to: f64) {}
}

/// Compass search from `x0` (with known value `f0`); returns the polished point and value.
pub fn refine<S: Surface + ?Sized>(
    f: &S,
    x0: Vec<f64>,
    f0: f64,
    bounds: &Bounds,
    initial_step: &[f64],
    cfg: &InnerOptConfig,
) -> (Vec<f64>, f64) {
    let mut p = Direct { f, trial: Vec::new() };
    refine_probe(&mut p, x0, f0, bounds, initial_step, cfg)
}

/// [`refine`] driven through a [`Probe`].
pub fn refine_probe<P: Probe + ?Sized>(
    p: &mut P,
    x0: Vec<f64>,
    f0: f64,
    bounds: &Bounds,
    initial_step: &[f64],
    cfg: &InnerOptConfig,
) -> (Vec<f64>, f64) {
    let mut x = x0;
    let mut fx = nan_high(f0);
    let mut step = initial_step.to_vec();
    p.start(&x);
    for _ in 0..cfg.max_iters {
        if step.iter().all(|s| *s < cfg.x_tol) {
            break;
        }
        let mut improved = false;
        for j in 0..x.len() {
            if step[j] < cfg.x_tol {
                continue;
            }
            for dir in [-1.0, 1.0] {
                let to = (x[j] + dir * step[j]).clamp(bounds.lower()[j], bounds.upper()[j]);
                if to == x[j] {
                    continue;
                }
                let ft = nan_high(p.probe(&x, j, to));
                if ft < fx {
                    p.accept(&x, j, to);
                    x[j] = to;
                    fx = ft;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            for s in step.iter_mut() {
                *s *= 0.5;
            }
        }
    }
    (x, fx)
}

/// Starting compass step per coordinate: the typical sweep spacing.
pub fn initial_step(bounds: &Bounds, n_sweep: usize) -> Vec<f64> {
    let d = bounds.dim() as f64;
    let spacing = (n_sweep.max(1) as f64).powf(-1.0 / d);
    (0..bounds.dim()).map(|j| bounds.width(j) * spacing).collect()
}

/// Polishes the best sweep points and returns the overall minimizer.
pub fn refine_from_sweep<S: Surface + ?Sized>(
    f: &S,
    sweep: &[Vec<f64>],
    sweep_values: &[f64],
    bounds: &Bounds,
    cfg: &InnerOptConfig,
) -> (Vec<f64>, f64) {
    let mut p = Direct { f, trial: Vec::new() };
    refine_from_sweep_probe(&mut p, sweep, sweep_values, bounds, cfg)
}

pub fn refine_from_sweep_probe<P: Probe + ?Sized>(
    p: &mut P,
    sweep: &[Vec<f64>],
    sweep_values: &[f64],
    bounds: &Bounds,
    cfg: &InnerOptConfig,
) -> (Vec<f64>, f64) {
    let step = initial_step(bounds, sweep.len());
    let mut best: Option<(Vec<f64>, f64)> = None;
    for i in best_indices(sweep_values, cfg.n_starts) {
        let (x, fx) = refine_probe(p, sweep[i].clone(), sweep_values[i], bounds, &step, cfg);
        if best.as_ref().is_none_or(|(_, fb)| fx < *fb) {
            best = Some((x, fx));
        }
    }
    best.expect("sweep must be nonempty")
}

/// Minimizes `f` over `bounds`; the result always lies inside the box.
pub fn minimize<S: Surface + ?Sized, R: Rng + ?Sized>(
    f: &S,
    bounds: &Bounds,
    cfg: &InnerOptConfig,
    rng: &mut R,
) -> (Vec<f64>, f64) {
    let n = (cfg.sweep_per_dim * bounds.dim()).max(1);
    let sweep = sweep_points(bounds, n, rng);
    let values = f.values(&sweep);
    refine_from_sweep(f, &sweep, &values, bounds, cfg)
}
