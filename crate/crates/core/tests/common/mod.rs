//! Independent oracles shared by the integration suites.
//!
//! Nothing here calls the library's Cholesky path: the GP oracles invert
//! matrices with LU, and the kernel is re-derived from its closed form.

#![allow(dead_code)]

use esp_core::gp::{History, Hyperparams};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

pub fn matern_oracle(a: &[f64], b: &[f64], hp: &Hyperparams) -> f64 {
    let sq: f64 = a
        .iter()
        .zip(b)
        .zip(&hp.lengthscales)
        .map(|((x, y), l)| ((x - y) / l).powi(2))
        .sum();
    let r = (5.0 * sq).sqrt();
    hp.amplitude * (1.0 + r + r * r / 3.0) * (-r).exp()
}

fn noisy_gram(h: &History, hp: &Hyperparams) -> DMatrix<f64> {
    let t = h.len();
    DMatrix::from_fn(t, t, |i, j| {
        matern_oracle(&h.points[i], &h.points[j], hp) + if i == j { hp.noise } else { 0.0 }
    })
}

fn inverse(m: DMatrix<f64>) -> DMatrix<f64> {
    m.lu().try_inverse().expect("invertible")
}

/// Posterior mean and variance by explicit matrix inversion.
pub fn dense_predict(h: &History, hp: &Hyperparams, x: &[f64]) -> (f64, f64) {
    let (m, c) = dense_joint(h, hp, &[x.to_vec()]);
    (m[0], c[(0, 0)])
}

/// Joint posterior moments at `z` by explicit matrix inversion.
pub fn dense_joint(h: &History, hp: &Hyperparams, z: &[Vec<f64>]) -> (DVector<f64>, DMatrix<f64>) {
    let g = z.len();
    let prior = DMatrix::from_fn(g, g, |i, j| matern_oracle(&z[i], &z[j], hp));
    if h.is_empty() {
        return (DVector::from_element(g, hp.mean), prior);
    }
    let kinv = inverse(noisy_gram(h, hp));
    let cross = DMatrix::from_fn(g, h.len(), |i, j| matern_oracle(&z[i], &h.points[j], hp));
    let r = DVector::from_iterator(h.len(), h.values.iter().map(|y| y - hp.mean));
    let mean = DVector::from_element(g, hp.mean) + &cross * &kinv * r;
    let cov = prior - &cross * kinv * cross.transpose();
    (mean, cov)
}

/// `log N(y; μ0, K + σ²I)` from an LU determinant and explicit inverse.
pub fn dense_log_marginal(h: &History, hp: &Hyperparams) -> f64 {
    let t = h.len();
    if t == 0 {
        return 0.0;
    }
    let k = noisy_gram(h, hp);
    let det = k.clone().lu().determinant();
    let kinv = inverse(k);
    let r = DVector::from_iterator(t, h.values.iter().map(|y| y - hp.mean));
    let quad = (r.transpose() * kinv * &r)[(0, 0)];
    -0.5 * (quad + det.ln() + t as f64 * (2.0 * std::f64::consts::PI).ln())
}

/// Expected entropy of the argmin distribution at `z` after observing `x`,
/// by refitting on each hallucinated history and sampling `s` joint draws.
/// Hallucinations use the midpoint quantiles of `n` equal-probability bins.
pub fn brute_force_expected_entropy<R: Rng>(
    h: &History,
    hp: &Hyperparams,
    x: &[f64],
    z: &[Vec<f64>],
    n: usize,
    s: usize,
    rng: &mut R,
) -> f64 {
    use statrs::distribution::{ContinuousCDF, Normal};
    let std = Normal::standard();
    let (mx, vx) = dense_predict(h, hp, x);
    let sd_y = (vx + hp.noise).sqrt();
    let g = z.len();
    let mut total = 0.0;
    for i in 0..n {
        let y = mx + sd_y * std.inverse_cdf((i as f64 + 0.5) / n as f64);
        let (m, c) = dense_joint(&h.with(x.to_vec(), y), hp, z);
        let mut c = c;
        for d in 0..g {
            c[(d, d)] += 1e-12;
        }
        let l = c.cholesky().expect("psd").unpack();
        let mut counts = vec![0usize; g];
        let mut eps = DVector::zeros(g);
        for _ in 0..s {
            for e in eps.iter_mut() {
                *e = rng.sample(StandardNormal);
            }
            let f = &m + &l * &eps;
            let mut best = 0;
            for j in 1..g {
                if f[j] < f[best] {
                    best = j;
                }
            }
            counts[best] += 1;
        }
        total -= counts
            .iter()
            .filter(|c| **c > 0)
            .map(|c| {
                let p = *c as f64 / s as f64;
                p * p.ln()
            })
            .sum::<f64>();
    }
    total / n as f64
}

/// Composite Simpson rule on `[a, b]` with `n` (even) panels.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// The five-point discrete ESP problem used by the oracle-equivalence check.
pub struct EspToy {
    pub history: History,
    pub hp: Hyperparams,
    pub grid: Vec<Vec<f64>>,
}

pub fn esp_toy() -> EspToy {
    EspToy {
        history: History::from_parts(vec![vec![0.1], vec![0.55], vec![0.95]], vec![0.3, -0.2, 0.1]).unwrap(),
        hp: Hyperparams::new(vec![0.3], 1.0, 0.01, 0.0).unwrap(),
        grid: (0..5).map(|i| vec![i as f64 * 0.25]).collect(),
    }
}
