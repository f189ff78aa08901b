//! Random Fourier features for the Matérn 5/2 kernel and Thompson sampling
//! of approximate posterior minimizers.
//!
//! The kernel is approximated by `φ(x)ᵀφ(x')` with
//! `φ(x) = √(2α/m) cos(Wx + b)`, rows of `W` drawn from the kernel's spectral
//! density (a Student-t with 5 degrees of freedom and scale `1/ℓ_j`) and `b`
//! uniform on `[0, 2π)`. A GP draw then becomes the finite linear model
//! `μ0 + φ(x)ᵀθ` with a Gaussian weight posterior.

use std::collections::HashMap;
use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::gp::{backward_solve_transposed, cholesky_jittered, forward_solve, History, Hyperparams};
use crate::optimize::{self, InnerOptConfig, Probe, Surface};
use crate::space::Bounds;

pub const DEFAULT_FEATURES: usize = 1000;

/// Degrees of freedom of the Matérn 5/2 spectral density.
const SPECTRAL_DOF: f64 = 5.0;

/// Sampled frequencies and phases defining `φ`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    /// `m × d`, row-major.
    w: Vec<f64>,
    phases: Vec<f64>,
    scale: f64,
    dim: usize,
}

impl FeatureMap {
    pub fn from_parts(w: DMatrix<f64>, phases: Vec<f64>, scale: f64) -> Result<Self> {
        if w.nrows() != phases.len() || w.nrows() == 0 {
            return Err(Error::InvalidArgument(format!(
                "{} frequency rows but {} phases",
                w.nrows(),
                phases.len()
            )));
        }
        if !(scale > 0.0) {
            return Err(Error::InvalidArgument("feature scale must be positive".into()));
        }
        let dim = w.ncols();
        let flat = (0..w.nrows())
            .flat_map(|i| (0..dim).map(move |j| (i, j)))
            .map(|(i, j)| w[(i, j)])
            .collect();
        Ok(Self {
            w: flat,
            phases,
            scale,
            dim,
        })
    }

    pub fn m(&self) -> usize {
        self.phases.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn frequency(&self, i: usize) -> &[f64] {
        &self.w[i * self.dim..(i + 1) * self.dim]
    }

    /// Per-feature amplitude `√(2α/m)`.
    pub fn amplitude(&self) -> f64 {
        (2.0 * self.scale / self.m() as f64).sqrt()
    }

    #[inline]
    fn angle(&self, i: usize, x: &[f64]) -> f64 {
        self.frequency(i)
            .iter()
            .zip(x)
            .map(|(w, v)| w * v)
            .sum::<f64>()
            + self.phases[i]
    }

    pub fn features(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        let a = self.amplitude();
        Ok((0..self.m()).map(|i| a * self.angle(i, x).cos()).collect())
    }

    /// `n × m` matrix whose rows are `φ(x_i)ᵀ`.
    pub fn feature_matrix(&self, xs: &[Vec<f64>]) -> DMatrix<f64> {
        let a = self.amplitude();
        DMatrix::from_fn(xs.len(), self.m(), |r, i| a * self.angle(i, &xs[r]).cos())
    }
}

/// Draws `m` features for the Matérn 5/2 kernel with hyperparameters `hp`.
pub fn sample_spectral<R: Rng + ?Sized>(hp: &Hyperparams, m: usize, rng: &mut R) -> Result<FeatureMap> {
    hp.validate()?;
    if m == 0 {
        return Err(Error::InvalidArgument("feature count must be >= 1".into()));
    }
    let d = hp.dim();
    let chi2 = ChiSquared::new(SPECTRAL_DOF).expect("valid dof");
    let mut w = Vec::with_capacity(m * d);
    let mut phases = Vec::with_capacity(m);
    for _ in 0..m {
        let u: f64 = chi2.sample(rng);
        let mix = (u / SPECTRAL_DOF).sqrt();
        for l in &hp.lengthscales {
            let z: f64 = rng.sample(StandardNormal);
            w.push(z / (l * mix));
        }
        phases.push(rng.random::<f64>() * TAU);
    }
    Ok(FeatureMap {
        w,
        phases,
        scale: hp.amplitude,
        dim: d,
    })
}

/// Gaussian posterior over the weights of `f(x) = μ0 + φ(x)ᵀθ`, `θ ~ N(0, I)`.
///
/// Held in the `t × t` dual form: with `B = ΦΦᵀ + σ²I`, the posterior mean is
/// `ΦᵀB⁻¹(y − μ0)` and the covariance `I − ΦᵀB⁻¹Φ`, which equal
/// `A⁻¹Φᵀ(y − μ0)` and `σ²A⁻¹` for `A = ΦᵀΦ + σ²I`.
#[derive(Debug, Clone)]
pub struct LinearPosterior {
    feature_map: FeatureMap,
    mean_offset: f64,
    noise: f64,
    phi: DMatrix<f64>,
    /// Lower factor of `ΦΦᵀ + σ²I`.
    chol: DMatrix<f64>,
    residual: Vec<f64>,
    weight_mean: DVector<f64>,
}

impl LinearPosterior {
    pub fn feature_map(&self) -> &FeatureMap {
        &self.feature_map
    }

    pub fn weight_mean(&self) -> &DVector<f64> {
        &self.weight_mean
    }

    pub fn mean_offset(&self) -> f64 {
        self.mean_offset
    }

    fn solve_dual(&self, b: &mut [f64]) {
        forward_solve(&self.chol, b);
        backward_solve_transposed(&self.chol, b);
    }

    /// Dense `m × m` weight covariance.
    pub fn weight_covariance(&self) -> DMatrix<f64> {
        let m = self.feature_map.m();
        let t = self.phi.nrows();
        let mut cov = DMatrix::identity(m, m);
        if t == 0 {
            return cov;
        }
        let mut solved = self.phi.clone();
        for mut col in solved.column_iter_mut() {
            let mut v: Vec<f64> = col.iter().copied().collect();
            self.solve_dual(&mut v);
            col.copy_from_slice(&v);
        }
        cov -= self.phi.transpose() * solved;
        cov
    }

    /// One exact draw of `θ` from the weight posterior.
    pub fn sample_weights<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        let m = self.feature_map.m();
        let prior = DVector::<f64>::from_fn(m, |_, _| rng.sample(StandardNormal));
        let t = self.phi.nrows();
        if t == 0 {
            return prior;
        }
        let sd = self.noise.sqrt();
        let fitted = &self.phi * &prior;
        let mut gap: Vec<f64> = (0..t)
            .map(|i| {
                let e: f64 = rng.sample(StandardNormal);
                self.residual[i] - fitted[i] - sd * e
            })
            .collect();
        self.solve_dual(&mut gap);
        prior + self.phi.tr_mul(&DVector::from_vec(gap))
    }

    /// `μ0 + φ(x)ᵀ E[θ]`.
    pub fn predict_mean(&self, x: &[f64]) -> Result<f64> {
        let phi = self.feature_map.features(x)?;
        Ok(self.mean_offset + phi.iter().zip(self.weight_mean.iter()).map(|(a, b)| a * b).sum::<f64>())
    }
}

/// Conditions the random-feature linear model on `history`.
pub fn fit_linear_posterior(fm: &FeatureMap, history: &History, hp: &Hyperparams) -> Result<LinearPosterior> {
    hp.validate()?;
    if hp.dim() != fm.dim() {
        return Err(Error::DimensionMismatch {
            expected: fm.dim(),
            got: hp.dim(),
        });
    }
    for x in &history.points {
        if x.len() != fm.dim() {
            return Err(Error::DimensionMismatch {
                expected: fm.dim(),
                got: x.len(),
            });
        }
    }
    let t = history.len();
    let phi = fm.feature_matrix(&history.points);
    let mut gram = &phi * phi.transpose();
    for i in 0..t {
        gram[(i, i)] += hp.noise;
    }
    let (chol, _) = cholesky_jittered(&gram, fm.scale())?;
    let residual: Vec<f64> = history.values.iter().map(|y| y - hp.mean).collect();
    let mut lp = LinearPosterior {
        feature_map: fm.clone(),
        mean_offset: hp.mean,
        noise: hp.noise,
        phi,
        chol,
        residual,
        weight_mean: DVector::zeros(fm.m()),
    };
    if t > 0 {
        let mut v = lp.residual.clone();
        lp.solve_dual(&mut v);
        lp.weight_mean = lp.phi.tr_mul(&DVector::from_vec(v));
    }
    Ok(lp)
}

/// A single finite-parameter sample path `x ↦ Σ_j c_j cos(w_j·x + b_j)`.
///
/// The constant offset `μ0` is dropped; it does not move the minimizer.
pub struct SamplePath<'a> {
    fm: &'a FeatureMap,
    coef: Vec<f64>,
}

impl<'a> SamplePath<'a> {
    pub fn new(fm: &'a FeatureMap, theta: &DVector<f64>) -> Self {
        let a = fm.amplitude();
        Self {
            fm,
            coef: theta.iter().map(|t| a * t).collect(),
        }
    }
}

impl Surface for SamplePath<'_> {
    fn value(&self, x: &[f64]) -> f64 {
        self.coef
            .iter()
            .enumerate()
            .map(|(i, c)| c * self.fm.angle(i, x).cos())
            .sum()
    }
}

/// `cos`/`sin` of `w_ij·δ` over all features, keyed by coordinate and `|δ|`.
///
/// Compass steps repeat (they only halve), so one cache serves every start
/// and every path built on the same feature map.
#[derive(Default)]
struct ShiftCache {
    table: HashMap<(usize, u64), (Vec<f64>, Vec<f64>)>,
}

impl ShiftCache {
    fn get(&mut self, fm: &FeatureMap, j: usize, delta: f64) -> &(Vec<f64>, Vec<f64>) {
        self.table.entry((j, delta.to_bits())).or_insert_with(|| {
            (0..fm.m())
                .map(|i| (fm.w[i * fm.dim + j] * delta).sin_cos())
                .map(|(s, c)| (c, s))
                .unzip()
        })
    }
}

/// Incremental path evaluation: a coordinate move rotates every feature's
/// phase by `w_ij·δ`, so the new value follows from the cached `cos`/`sin`
/// of the current phases by the angle-addition identity.
struct PathProbe<'a> {
    path: &'a SamplePath<'a>,
    cache: &'a mut ShiftCache,
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl Probe for PathProbe<'_> {
    fn start(&mut self, x: &[f64]) {
        let fm = self.path.fm;
        self.cos.clear();
        self.sin.clear();
        for i in 0..fm.m() {
            let (s, c) = fm.angle(i, x).sin_cos();
            self.cos.push(c);
            self.sin.push(s);
        }
    }

    fn probe(&mut self, x: &[f64], j: usize, to: f64) -> f64 {
        let delta = to - x[j];
        let sign = delta.signum();
        let (cd, sd) = self.cache.get(self.path.fm, j, delta.abs());
        let mut a = 0.0;
        let mut b = 0.0;
        for i in 0..self.cos.len() {
            let k = self.path.coef[i];
            a += k * self.cos[i] * cd[i];
            b += k * self.sin[i] * sd[i];
        }
        a - sign * b
    }

    fn accept(&mut self, x: &[f64], j: usize, to: f64) {
        let delta = to - x[j];
        let sign = delta.signum();
        let (cd, sd) = self.cache.get(self.path.fm, j, delta.abs());
        for i in 0..self.cos.len() {
            let (c, s) = (self.cos[i], self.sin[i]);
            self.cos[i] = c * cd[i] - sign * s * sd[i];
            self.sin[i] = s * cd[i] + sign * c * sd[i];
        }
    }
}

fn refine_path(
    path: &SamplePath<'_>,
    cache: &mut ShiftCache,
    sweep: &[Vec<f64>],
    values: &[f64],
    bounds: &Bounds,
    cfg: &InnerOptConfig,
) -> Vec<f64> {
    let mut probe = PathProbe {
        path,
        cache,
        cos: Vec::new(),
        sin: Vec::new(),
    };
    optimize::refine_from_sweep_probe(&mut probe, sweep, values, bounds, cfg).0
}

/// Minimizes the sample path defined by `theta` over `bounds`.
pub fn minimize_path<R: Rng + ?Sized>(
    fm: &FeatureMap,
    theta: &DVector<f64>,
    bounds: &Bounds,
    cfg: &InnerOptConfig,
    rng: &mut R,
) -> Vec<f64> {
    let path = SamplePath::new(fm, theta);
    let n = (cfg.sweep_per_dim * bounds.dim()).max(1);
    let sweep = optimize::sweep_points(bounds, n, rng);
    let values = path.values(&sweep);
    refine_path(&path, &mut ShiftCache::default(), &sweep, &values, bounds, cfg)
}

/// Draws one weight vector and returns the minimizer of the resulting path.
pub fn thompson_minimizer<R: Rng + ?Sized>(
    lp: &LinearPosterior,
    bounds: &Bounds,
    cfg: &InnerOptConfig,
    rng: &mut R,
) -> Vec<f64> {
    let theta = lp.sample_weights(rng);
    minimize_path(&lp.feature_map, &theta, bounds, cfg, rng)
}

/// `count` independent weight draws from `lp`, each minimized.
///
/// Equivalent to `count` calls of [`thompson_minimizer`] except that the
/// draws share one sweep, which is evaluated for all of them as a single
/// matrix product.
pub fn thompson_minimizers<R: Rng + ?Sized>(
    lp: &LinearPosterior,
    count: usize,
    bounds: &Bounds,
    cfg: &InnerOptConfig,
    rng: &mut R,
) -> Vec<Vec<f64>> {
    if count == 0 {
        return Vec::new();
    }
    let fm = &lp.feature_map;
    let thetas: Vec<DVector<f64>> = (0..count).map(|_| lp.sample_weights(rng)).collect();
    let n = (cfg.sweep_per_dim * bounds.dim()).max(1);
    let sweep = optimize::sweep_points(bounds, n, rng);
    let phi = fm.feature_matrix(&sweep);
    let theta_mat = DMatrix::from_columns(&thetas);
    let values = phi * theta_mat;
    let mut cache = ShiftCache::default();
    thetas
        .iter()
        .enumerate()
        .map(|(k, theta)| {
            let path = SamplePath::new(fm, theta);
            let col: Vec<f64> = values.column(k).iter().copied().collect();
            refine_path(&path, &mut cache, &sweep, &col, bounds, cfg)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gp::{fit_posterior, kernel_matern52};
    use crate::rng::stream;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn hp1(l: f64) -> Hyperparams {
        Hyperparams::new(vec![l], 1.0, 0.01, 0.0).unwrap()
    }

    fn quantile(v: &mut [f64], q: f64) -> f64 {
        v.sort_by(f64::total_cmp);
        v[((v.len() - 1) as f64 * q).round() as usize]
    }

    #[test]
    fn incremental_probe_tracks_direct_evaluation() {
        let hp = Hyperparams::new(vec![0.3, 0.7], 1.3, 0.01, 0.0).unwrap();
        let mut r = stream(9, 0);
        let fm = sample_spectral(&hp, 400, &mut r).unwrap();
        let theta = DVector::from_fn(400, |_, _| r.sample::<f64, _>(StandardNormal));
        let path = SamplePath::new(&fm, &theta);
        let mut cache = ShiftCache::default();
        let mut p = PathProbe {
            path: &path,
            cache: &mut cache,
            cos: Vec::new(),
            sin: Vec::new(),
        };
        let mut x = vec![0.2, 0.9];
        p.start(&x);
        for step in 0..60 {
            let j = step % 2;
            let to = x[j] + if step % 3 == 0 { -0.05 } else { 0.0371 };
            let mut direct = x.clone();
            direct[j] = to;
            assert!((p.probe(&x, j, to) - path.value(&direct)).abs() < 1e-11);
            p.accept(&x, j, to);
            x[j] = to;
        }
        assert!((p.probe(&x, 0, x[0]) - path.value(&x)).abs() < 1e-11);
    }

    #[test]
    fn phases_in_range_and_zero_features_rejected() {
        let fm = sample_spectral(&hp1(1.0), 500, &mut stream(0, 0)).unwrap();
        assert!(fm.phases().iter().all(|b| (0.0..TAU).contains(b)));
        assert!(sample_spectral(&hp1(1.0), 0, &mut stream(0, 0)).is_err());
    }

    #[test]
    fn frequency_median_matches_student_t() {
        // Oracle: median of |T| for T ~ t_5 is the 0.75 quantile of t_5.
        use statrs::distribution::{ContinuousCDF, StudentsT};
        let t5 = StudentsT::new(0.0, 1.0, 5.0).unwrap();
        let oracle = t5.inverse_cdf(0.75);
        assert!((oracle - 0.7267).abs() < 1e-4);
        let fm = sample_spectral(&hp1(1.0), 1000, &mut stream(1, 0)).unwrap();
        let mut absw: Vec<f64> = (0..1000).map(|i| fm.frequency(i)[0].abs()).collect();
        let med = quantile(&mut absw, 0.5);
        assert!((med / oracle - 1.0).abs() < 0.2, "median {med}");
    }

    #[test]
    fn doubling_lengthscale_halves_spread() {
        let iqr = |l: f64| {
            let fm = sample_spectral(&hp1(l), 20_000, &mut stream(2, 0)).unwrap();
            let mut w: Vec<f64> = (0..fm.m()).map(|i| fm.frequency(i)[0]).collect();
            quantile(&mut w, 0.75) - quantile(&mut w, 0.25)
        };
        let ratio = iqr(1.0) / iqr(2.0);
        assert!((ratio - 2.0).abs() < 1e-9, "ratio {ratio}");
    }

    #[test]
    fn zero_frequencies_give_constant_features() {
        let fm = FeatureMap::from_parts(DMatrix::zeros(2, 1), vec![0.0, 0.0], 1.0).unwrap();
        assert_eq!(fm.features(&[3.7]).unwrap(), vec![1.0, 1.0]);
    }

    #[test]
    fn feature_norm_is_bounded() {
        let hp = Hyperparams::new(vec![0.4, 0.9], 2.5, 0.01, 0.0).unwrap();
        let fm = sample_spectral(&hp, 300, &mut stream(3, 0)).unwrap();
        let bound = fm.amplitude();
        for x in [[0.1, 0.2], [5.0, -3.0], [0.0, 0.0]] {
            let phi = fm.features(&x).unwrap();
            assert!(phi.iter().all(|v| v.abs() <= bound + 1e-15));
            assert!(phi.iter().map(|v| v * v).sum::<f64>() <= 2.0 * 2.5 + 1e-12);
        }
    }

    #[test]
    fn feature_inner_products_approximate_kernel() {
        let hp = hp1(1.0);
        let grid: Vec<f64> = (0..10).map(|i| i as f64 * 0.3).collect();
        let mut total = 0.0;
        for rep in 0..20 {
            let fm = sample_spectral(&hp, 10_000, &mut stream(4, rep)).unwrap();
            let x0 = fm.features(&[0.0]).unwrap();
            let mut err = 0.0;
            for g in &grid {
                let phi = fm.features(&[*g]).unwrap();
                let approx: f64 = x0.iter().zip(&phi).map(|(a, b)| a * b).sum();
                err += (approx - kernel_matern52(&[0.0], &[*g], &hp).unwrap()).abs();
            }
            total += err / grid.len() as f64;
        }
        assert!(total / 20.0 <= 0.05, "mean error {}", total / 20.0);
    }

    #[test]
    fn empty_history_gives_standard_normal_weights() {
        let hp = hp1(1.0);
        let fm = sample_spectral(&hp, 4, &mut stream(5, 0)).unwrap();
        let lp = fit_linear_posterior(&fm, &History::new(), &hp).unwrap();
        assert_eq!(lp.weight_mean(), &DVector::zeros(4));
        assert_eq!(lp.weight_covariance(), DMatrix::identity(4, 4));
    }

    #[test]
    fn single_observation_matches_primal_solve() {
        let hp = Hyperparams::new(vec![0.7], 1.3, 0.2, 0.3).unwrap();
        let fm = sample_spectral(&hp, 2, &mut stream(6, 0)).unwrap();
        let h = History::from_parts(vec![vec![0.4]], vec![1.5]).unwrap();
        let lp = fit_linear_posterior(&fm, &h, &hp).unwrap();
        // Primal oracle: A = ΦᵀΦ + σ²I (2x2), inverted by Cramer's rule.
        let phi = fm.features(&[0.4]).unwrap();
        let a = [
            [phi[0] * phi[0] + hp.noise, phi[0] * phi[1]],
            [phi[1] * phi[0], phi[1] * phi[1] + hp.noise],
        ];
        let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        let inv = [[a[1][1] / det, -a[0][1] / det], [-a[1][0] / det, a[0][0] / det]];
        let r = 1.5 - hp.mean;
        let rhs = [phi[0] * r, phi[1] * r];
        let mean = [
            inv[0][0] * rhs[0] + inv[0][1] * rhs[1],
            inv[1][0] * rhs[0] + inv[1][1] * rhs[1],
        ];
        let cov = lp.weight_covariance();
        for i in 0..2 {
            assert!((lp.weight_mean()[i] - mean[i]).abs() < 1e-10);
            for j in 0..2 {
                assert!((cov[(i, j)] - hp.noise * inv[i][j]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn weight_samples_match_posterior_moments() {
        let hp = Hyperparams::new(vec![0.5], 1.0, 0.1, 0.0).unwrap();
        let fm = sample_spectral(&hp, 3, &mut stream(7, 0)).unwrap();
        let h = History::from_parts(vec![vec![0.1], vec![0.6]], vec![0.5, -0.2]).unwrap();
        let lp = fit_linear_posterior(&fm, &h, &hp).unwrap();
        let mut rng = stream(7, 1);
        let n = 40_000;
        let draws: Vec<DVector<f64>> = (0..n).map(|_| lp.sample_weights(&mut rng)).collect();
        let cov = lp.weight_covariance();
        for i in 0..3 {
            let m = draws.iter().map(|d| d[i]).sum::<f64>() / n as f64;
            let se = (cov[(i, i)] / n as f64).sqrt();
            assert!((m - lp.weight_mean()[i]).abs() < 5.0 * se);
            let v = draws.iter().map(|d| (d[i] - m).powi(2)).sum::<f64>() / (n - 1) as f64;
            assert!((v / cov[(i, i)] - 1.0).abs() < 0.05);
        }
    }

    #[test]
    fn linear_mean_tracks_gp_mean() {
        let hp = Hyperparams::new(vec![0.3], 1.0, 1e-4, 0.0).unwrap();
        let xs = [0.05, 0.3, 0.5, 0.72, 0.95];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| (6.0 * x).sin()).collect();
        let h = History::from_parts(xs.iter().map(|x| vec![*x]).collect(), ys).unwrap();
        let gp = fit_posterior(&h, &hp).unwrap();
        let fm = sample_spectral(&hp, 2000, &mut stream(8, 0)).unwrap();
        let lp = fit_linear_posterior(&fm, &h, &hp).unwrap();
        for x in xs {
            let a = lp.predict_mean(&[x]).unwrap();
            let b = gp.predict(&[x]).unwrap().0;
            assert!((a - b).abs() < 0.05, "x={x}: {a} vs {b}");
        }
    }

    #[test]
    fn single_cosine_minimizer() {
        let fm = FeatureMap::from_parts(DMatrix::from_element(1, 1, 1.0), vec![FRAC_PI_2], 0.5).unwrap();
        let b = Bounds::new(vec![0.0], vec![PI]).unwrap();
        let x = minimize_path(&fm, &DVector::from_element(1, 1.0), &b, &InnerOptConfig::default(), &mut stream(9, 0));
        assert!((x[0] - FRAC_PI_2).abs() < 1e-3, "{x:?}");
    }

    #[test]
    fn zero_weights_stay_in_bounds() {
        let hp = hp1(1.0);
        let fm = sample_spectral(&hp, 50, &mut stream(10, 0)).unwrap();
        let b = Bounds::new(vec![-1.0], vec![2.0]).unwrap();
        let x = minimize_path(&fm, &DVector::zeros(50), &b, &InnerOptConfig::default(), &mut stream(10, 1));
        assert!(b.contains(&x));
    }

    #[test]
    fn thompson_is_deterministic_and_contained() {
        let hp = Hyperparams::new(vec![0.3, 0.3], 1.0, 0.01, 0.0).unwrap();
        let h = History::from_parts(vec![vec![0.2, 0.2], vec![0.8, 0.5]], vec![1.0, -1.0]).unwrap();
        let fm = sample_spectral(&hp, 200, &mut stream(11, 0)).unwrap();
        let lp = fit_linear_posterior(&fm, &h, &hp).unwrap();
        let b = Bounds::unit(2);
        let cfg = InnerOptConfig::default();
        let a = thompson_minimizer(&lp, &b, &cfg, &mut stream(11, 1));
        let c = thompson_minimizer(&lp, &b, &cfg, &mut stream(11, 1));
        assert_eq!(a, c);
        assert!(b.contains(&a));
        let many = thompson_minimizers(&lp, 20, &b, &cfg, &mut stream(11, 2));
        assert_eq!(many.len(), 20);
        assert!(many.iter().all(|x| b.contains(x)));
    }
}
