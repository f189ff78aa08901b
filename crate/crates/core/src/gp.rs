//! Matérn 5/2 Gaussian-process regression.
//!
//! The posterior is kept as the lower Cholesky factor `L` of `K + σ²I` and
//! the solved residual vector `α = (K + σ²I)⁻¹ (y − μ0)`, from which
//! predictive moments, joint moments at arbitrary point sets and the log
//! marginal likelihood all follow.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

const SQRT5: f64 = 2.236_067_977_499_79;
const LN_2PI: f64 = 1.837_877_066_409_345_3;

/// Jitter ladder relative to the amplitude: 1e-10, 1e-9, ..., 1e-4.
const JITTER_START: f64 = 1e-10;
const JITTER_STOP: f64 = 1e-4;

/// Kernel and likelihood hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperparams {
    pub lengthscales: Vec<f64>,
    /// Signal variance ν².
    pub amplitude: f64,
    /// Observation noise variance σ².
    pub noise: f64,
    /// Constant prior mean μ0.
    pub mean: f64,
}

impl Hyperparams {
    pub fn new(lengthscales: Vec<f64>, amplitude: f64, noise: f64, mean: f64) -> Result<Self> {
        let hp = Self {
            lengthscales,
            amplitude,
            noise,
            mean,
        };
        hp.validate()?;
        Ok(hp)
    }

    pub fn dim(&self) -> usize {
        self.lengthscales.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.lengthscales.is_empty() {
            return Err(Error::InvalidArgument("no lengthscales".into()));
        }
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !self.lengthscales.iter().all(|l| positive(*l)) {
            return Err(Error::InvalidArgument(format!(
                "lengthscales must be positive: {:?}",
                self.lengthscales
            )));
        }
        if !positive(self.amplitude) || !positive(self.noise) {
            return Err(Error::InvalidArgument(format!(
                "amplitude {} and noise {} must be positive",
                self.amplitude, self.noise
            )));
        }
        if !self.mean.is_finite() {
            return Err(Error::InvalidArgument("mean must be finite".into()));
        }
        Ok(())
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(())
    }
}

/// Observed inputs and outputs, in query order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct History {
    pub points: Vec<Vec<f64>>,
    pub values: Vec<f64>,
}

impl History {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_parts(points: Vec<Vec<f64>>, values: Vec<f64>) -> Result<Self> {
        if points.len() != values.len() {
            return Err(Error::InvalidArgument(format!(
                "{} points but {} values",
                points.len(),
                values.len()
            )));
        }
        Ok(Self { points, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn push(&mut self, x: Vec<f64>, y: f64) {
        self.points.push(x);
        self.values.push(y);
    }

    pub fn with(&self, x: Vec<f64>, y: f64) -> Self {
        let mut h = self.clone();
        h.push(x, y);
        h
    }

    /// Lowest observed value (the incumbent), if any.
    pub fn best_value(&self) -> Option<f64> {
        self.values.iter().copied().reduce(f64::min)
    }
}

/// `k(x, x2)` without dimension checks.
#[inline]
pub(crate) fn matern52(x: &[f64], x2: &[f64], hp: &Hyperparams) -> f64 {
    let mut sq = 0.0;
    for ((a, b), l) in x.iter().zip(x2).zip(&hp.lengthscales) {
        let u = (a - b) / l;
        sq += u * u;
    }
    let r = SQRT5 * sq.sqrt();
    hp.amplitude * (-r).exp() * (1.0 + r + r * r / 3.0)
}

/// Matérn 5/2 covariance between two inputs.
pub fn kernel_matern52(x: &[f64], x2: &[f64], hp: &Hyperparams) -> Result<f64> {
    hp.check_dim(x)?;
    hp.check_dim(x2)?;
    Ok(matern52(x, x2, hp))
}

pub fn gram(points: &[Vec<f64>], hp: &Hyperparams) -> DMatrix<f64> {
    let n = points.len();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        k[(i, i)] = hp.amplitude;
        for j in 0..i {
            let v = matern52(&points[i], &points[j], hp);
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    k
}

/// Lower Cholesky factor of `m`, retrying with `scale·{1e-10, …, 1e-4}` on the
/// diagonal. Returns the factor and the jitter that was added (0 if none).
pub fn cholesky_jittered(m: &DMatrix<f64>, scale: f64) -> Result<(DMatrix<f64>, f64)> {
    let n = m.nrows();
    if n == 0 {
        return Ok((DMatrix::zeros(0, 0), 0.0));
    }
    if let Some(c) = m.clone().cholesky() {
        return Ok((c.unpack(), 0.0));
    }
    let mut rel = JITTER_START;
    while rel <= JITTER_STOP * (1.0 + 1e-9) {
        let jitter = rel * scale;
        let mut mj = m.clone();
        for i in 0..n {
            mj[(i, i)] += jitter;
        }
        if let Some(c) = mj.cholesky() {
            return Ok((c.unpack(), jitter));
        }
        rel *= 10.0;
    }
    let diag = m.diagonal();
    Err(Error::Numerical {
        size: n,
        min_diag: diag.min(),
        max_diag: diag.max(),
        jitter: JITTER_STOP * scale,
    })
}

/// Solves `L v = b` in place for lower-triangular `L`.
pub(crate) fn forward_solve(l: &DMatrix<f64>, b: &mut [f64]) {
    let n = b.len();
    for i in 0..n {
        let mut s = b[i];
        for j in 0..i {
            s -= l[(i, j)] * b[j];
        }
        b[i] = s / l[(i, i)];
    }
}

/// Conditioned GP at fixed hyperparameters.
#[derive(Debug, Clone)]
pub struct PosteriorState {
    hp: Hyperparams,
    history: History,
    chol: DMatrix<f64>,
    alpha: DVector<f64>,
    jitter: f64,
}

impl PosteriorState {
    pub fn hyperparams(&self) -> &Hyperparams {
        &self.hp
    }

    pub fn history(&self) -> &History {
        &self.history
    }

    /// Lower factor of `K_t + σ²I` (plus any jitter).
    pub fn chol(&self) -> &DMatrix<f64> {
        &self.chol
    }

    pub fn alpha(&self) -> &DVector<f64> {
        &self.alpha
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    fn cross(&self, x: &[f64]) -> Vec<f64> {
        self.history
            .points
            .iter()
            .map(|xi| matern52(x, xi, &self.hp))
            .collect()
    }

    /// Predictive mean and latent variance at `x`.
    pub fn predict(&self, x: &[f64]) -> Result<(f64, f64)> {
        self.hp.check_dim(x)?;
        Ok(self.predict_unchecked(x))
    }

    pub(crate) fn predict_unchecked(&self, x: &[f64]) -> (f64, f64) {
        let mut k = self.cross(x);
        let mean = self.hp.mean + k.iter().zip(self.alpha.iter()).map(|(a, b)| a * b).sum::<f64>();
        forward_solve(&self.chol, &mut k);
        let var = self.hp.amplitude - k.iter().map(|v| v * v).sum::<f64>();
        (mean, var.max(0.0))
    }

    pub(crate) fn mean_unchecked(&self, x: &[f64]) -> f64 {
        self.hp.mean
            + self
                .history
                .points
                .iter()
                .zip(self.alpha.iter())
                .map(|(xi, a)| matern52(x, xi, &self.hp) * a)
                .sum::<f64>()
    }

    /// Posterior mean vector and covariance matrix of `f` at `z`.
    pub fn joint_moments(&self, z: &[Vec<f64>]) -> Result<(DVector<f64>, DMatrix<f64>)> {
        for x in z {
            self.hp.check_dim(x)?;
        }
        let g = z.len();
        let t = self.history.len();
        let mut mean = DVector::from_element(g, self.hp.mean);
        // columns of v are L⁻¹ k_t(z_i)
        let mut v = DMatrix::zeros(t, g);
        for (i, x) in z.iter().enumerate() {
            let mut k = self.cross(x);
            mean[i] += k.iter().zip(self.alpha.iter()).map(|(a, b)| a * b).sum::<f64>();
            forward_solve(&self.chol, &mut k);
            v.column_mut(i).copy_from_slice(&k);
        }
        let mut cov = gram(z, &self.hp);
        if t > 0 {
            cov -= v.transpose() * &v;
        }
        for i in 0..g {
            cov[(i, i)] = cov[(i, i)].max(0.0);
        }
        // re-symmetrize round-off
        for i in 0..g {
            for j in 0..i {
                let s = 0.5 * (cov[(i, j)] + cov[(j, i)]);
                cov[(i, j)] = s;
                cov[(j, i)] = s;
            }
        }
        Ok((mean, cov))
    }

    /// `s` i.i.d. draws of `f(z)` from the joint posterior, one per row.
    pub fn sample_joint<R: Rng + ?Sized>(
        &self,
        z: &[Vec<f64>],
        s: usize,
        rng: &mut R,
    ) -> Result<DMatrix<f64>> {
        if z.is_empty() || s == 0 {
            return Err(Error::InvalidArgument(
                "sample_joint needs at least one point and one sample".into(),
            ));
        }
        let (mean, cov) = self.joint_moments(z)?;
        let (l, _) = cholesky_jittered(&cov, self.hp.amplitude)?;
        Ok(draw_gaussian_rows(&mean, &l, s, rng))
    }
}

/// Rows of `mean + L ε`, ε standard normal, drawn row by row.
pub fn draw_gaussian_rows<R: Rng + ?Sized>(
    mean: &DVector<f64>,
    l: &DMatrix<f64>,
    s: usize,
    rng: &mut R,
) -> DMatrix<f64> {
    let g = mean.len();
    let eps = DMatrix::<f64>::from_fn(g, s, |_, _| rng.sample(StandardNormal));
    let mut f = l * eps;
    for mut col in f.column_iter_mut() {
        col += mean;
    }
    f.transpose()
}

/// Conditions a Matérn 5/2 GP on `history`.
pub fn fit_posterior(history: &History, hp: &Hyperparams) -> Result<PosteriorState> {
    hp.validate()?;
    for x in &history.points {
        hp.check_dim(x)?;
    }
    let t = history.len();
    let mut k = gram(&history.points, hp);
    for i in 0..t {
        k[(i, i)] += hp.noise;
    }
    let (chol, jitter) = cholesky_jittered(&k, hp.amplitude)?;
    let mut alpha: Vec<f64> = history.values.iter().map(|y| y - hp.mean).collect();
    forward_solve(&chol, &mut alpha);
    backward_solve_transposed(&chol, &mut alpha);
    Ok(PosteriorState {
        hp: hp.clone(),
        history: history.clone(),
        chol,
        alpha: DVector::from_vec(alpha),
        jitter,
    })
}

/// Solves `Lᵀ v = b` in place.
pub(crate) fn backward_solve_transposed(l: &DMatrix<f64>, b: &mut [f64]) {
    let n = b.len();
    for i in (0..n).rev() {
        let mut s = b[i];
        for j in i + 1..n {
            s -= l[(j, i)] * b[j];
        }
        b[i] = s / l[(i, i)];
    }
}

impl PosteriorState {
    /// `log N(y; μ0·1, K_t + σ²I)` using the stored factorization.
    pub fn log_marginal(&self) -> f64 {
        let t = self.history.len();
        if t == 0 {
            return 0.0;
        }
        let quad: f64 = self
            .history
            .values
            .iter()
            .zip(self.alpha.iter())
            .map(|(y, a)| (y - self.hp.mean) * a)
            .sum();
        let logdet: f64 = (0..t).map(|i| self.chol[(i, i)].ln()).sum::<f64>() * 2.0;
        -0.5 * (quad + logdet + t as f64 * LN_2PI)
    }
}

/// GP log marginal likelihood of `history` under `hp`.
pub fn log_marginal(history: &History, hp: &Hyperparams) -> Result<f64> {
    Ok(fit_posterior(history, hp)?.log_marginal())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use proptest::prelude::*;

    fn hp1(l: f64, amp: f64, noise: f64, mean: f64) -> Hyperparams {
        Hyperparams::new(vec![l], amp, noise, mean).unwrap()
    }

    #[test]
    fn kernel_at_zero_distance_is_amplitude() {
        let hp = Hyperparams::new(vec![0.3, 2.0], 1.7, 0.1, 0.0).unwrap();
        assert_eq!(kernel_matern52(&[0.2, 0.4], &[0.2, 0.4], &hp).unwrap(), 1.7);
    }

    #[test]
    fn kernel_unit_distance_value() {
        let hp = hp1(1.0, 1.0, 0.1, 0.0);
        let s5 = 5f64.sqrt();
        let expected = (-s5).exp() * (1.0 + s5 + 5.0 / 3.0);
        let v = kernel_matern52(&[0.0], &[1.0], &hp).unwrap();
        assert!((v - expected).abs() < 1e-15);
        assert!((v - 0.52399).abs() < 1e-5);
    }

    #[test]
    fn kernel_decays_at_distance() {
        let hp = hp1(1.0, 1.0, 0.1, 0.0);
        assert!(kernel_matern52(&[0.0], &[1e3], &hp).unwrap() < 1e-300);
    }

    #[test]
    fn kernel_dimension_mismatch() {
        let hp = hp1(1.0, 1.0, 0.1, 0.0);
        assert!(matches!(
            kernel_matern52(&[0.0, 1.0], &[1.0], &hp),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn empty_history_recovers_prior() {
        let hp = hp1(0.5, 2.5, 0.01, -1.25);
        let post = fit_posterior(&History::new(), &hp).unwrap();
        assert_eq!(post.predict(&[0.7]).unwrap(), (-1.25, 2.5));
        assert_eq!(post.log_marginal(), 0.0);
    }

    #[test]
    fn near_noiseless_interpolation() {
        let hp = hp1(0.5, 1.0, 1e-12, 0.0);
        let h = History::from_parts(vec![vec![0.3]], vec![1.7]).unwrap();
        let post = fit_posterior(&h, &hp).unwrap();
        let (m, v) = post.predict(&[0.3]).unwrap();
        assert!((m - 1.7).abs() < 1e-4);
        assert!(v < 1e-6);
    }

    #[test]
    fn two_point_matches_direct_solve() {
        // Eqs. for a 2x2 system solved by Cramer's rule.
        let hp = hp1(0.7, 1.3, 0.05, 0.4);
        let (x1, x2, y1, y2) = (0.1, 0.6, 1.0, -0.5);
        let h = History::from_parts(vec![vec![x1], vec![x2]], vec![y1, y2]).unwrap();
        let post = fit_posterior(&h, &hp).unwrap();
        let k = |a: f64, b: f64| matern52(&[a], &[b], &hp);
        let (a, b, d) = (k(x1, x1) + hp.noise, k(x1, x2), k(x2, x2) + hp.noise);
        let det = a * d - b * b;
        let inv = [[d / det, -b / det], [-b / det, a / det]];
        let x = 0.35;
        let kx = [k(x, x1), k(x, x2)];
        let r = [y1 - hp.mean, y2 - hp.mean];
        let w = [
            inv[0][0] * r[0] + inv[0][1] * r[1],
            inv[1][0] * r[0] + inv[1][1] * r[1],
        ];
        let mean = hp.mean + kx[0] * w[0] + kx[1] * w[1];
        let q = kx[0] * (inv[0][0] * kx[0] + inv[0][1] * kx[1])
            + kx[1] * (inv[1][0] * kx[0] + inv[1][1] * kx[1]);
        let var = hp.amplitude - q;
        let (m, v) = post.predict(&[x]).unwrap();
        assert!((m - mean).abs() < 1e-12);
        assert!((v - var).abs() < 1e-12);
    }

    #[test]
    fn single_observation_marginal_is_scalar_gaussian() {
        let hp = hp1(0.7, 1.3, 0.05, 0.4);
        let h = History::from_parts(vec![vec![0.2]], vec![1.1]).unwrap();
        let var = hp.amplitude + hp.noise;
        let expected = -0.5 * ((1.1f64 - 0.4).powi(2) / var + var.ln() + LN_2PI);
        assert!((log_marginal(&h, &hp).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn duplicated_noiseless_points_use_jitter() {
        let hp = hp1(0.5, 1.0, 1e-300, 0.0);
        let h = History::from_parts(vec![vec![0.5]; 3], vec![1.0; 3]).unwrap();
        let post = fit_posterior(&h, &hp).unwrap();
        assert!(post.jitter() > 0.0);
        assert!(post.jitter() <= 1e-4);
    }

    #[test]
    fn cholesky_gives_up_on_indefinite_matrix() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(cholesky_jittered(&m, 1.0), Err(Error::Numerical { .. })));
    }

    #[test]
    fn collapsed_posterior_samples_have_tiny_spread() {
        let hp = hp1(0.5, 1.0, 1e-12, 0.0);
        let h = History::from_parts(vec![vec![0.3]], vec![0.8]).unwrap();
        let post = fit_posterior(&h, &hp).unwrap();
        let s = post.sample_joint(&[vec![0.3]], 10_000, &mut stream(0, 0)).unwrap();
        let col = s.column(0);
        let m = col.mean();
        let sd = (col.iter().map(|v| (v - m).powi(2)).sum::<f64>() / 9999.0).sqrt();
        assert!(sd <= 1e-3, "sd = {sd}");
    }

    #[test]
    fn prior_samples_center_on_mean() {
        let hp = hp1(0.5, 2.0, 0.1, 0.7);
        let post = fit_posterior(&History::new(), &hp).unwrap();
        let z = vec![vec![0.0], vec![0.4], vec![1.0]];
        let n = 10_000;
        let s = post.sample_joint(&z, n, &mut stream(1, 0)).unwrap();
        let se = (hp.amplitude / n as f64).sqrt();
        for j in 0..3 {
            assert!((s.column(j).mean() - 0.7).abs() < 4.0 * se);
        }
    }

    #[test]
    fn sample_joint_is_deterministic() {
        let hp = hp1(0.5, 2.0, 0.1, 0.7);
        let h = History::from_parts(vec![vec![0.1], vec![0.9]], vec![0.0, 1.0]).unwrap();
        let post = fit_posterior(&h, &hp).unwrap();
        let z = vec![vec![0.2], vec![0.5]];
        let a = post.sample_joint(&z, 7, &mut stream(9, 1)).unwrap();
        let b = post.sample_joint(&z, 7, &mut stream(9, 1)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sample_joint_rejects_empty() {
        let hp = hp1(0.5, 2.0, 0.1, 0.7);
        let post = fit_posterior(&History::new(), &hp).unwrap();
        assert!(post.sample_joint(&[], 3, &mut stream(0, 0)).is_err());
        assert!(post.sample_joint(&[vec![0.1]], 0, &mut stream(0, 0)).is_err());
    }

    #[test]
    fn invalid_hyperparams_rejected() {
        assert!(Hyperparams::new(vec![0.0], 1.0, 0.1, 0.0).is_err());
        assert!(Hyperparams::new(vec![1.0], -1.0, 0.1, 0.0).is_err());
        assert!(Hyperparams::new(vec![1.0], 1.0, 0.0, 0.0).is_err());
        assert!(Hyperparams::new(vec![], 1.0, 0.1, 0.0).is_err());
    }

    fn small_instance() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<f64>, Hyperparams, Vec<f64>)> {
        (1usize..=3, 0usize..=10).prop_flat_map(|(d, t)| {
            (
                prop::collection::vec(prop::collection::vec(0.0f64..1.0, d), t),
                prop::collection::vec(-2.0f64..2.0, t),
                prop::collection::vec(0.1f64..2.0, d),
                0.2f64..3.0,
                1e-3f64..0.5,
                -1.0f64..1.0,
                prop::collection::vec(0.0f64..1.0, d),
            )
                .prop_map(|(x, y, ls, amp, noise, mean, q)| {
                    (x, y, Hyperparams::new(ls, amp, noise, mean).unwrap(), q)
                })
        })
    }

    proptest! {
        #[test]
        fn kernel_is_symmetric(
            a in prop::collection::vec(-3.0f64..3.0, 3),
            b in prop::collection::vec(-3.0f64..3.0, 3),
            ls in prop::collection::vec(0.05f64..3.0, 3),
        ) {
            let hp = Hyperparams::new(ls, 1.3, 0.1, 0.0).unwrap();
            prop_assert_eq!(matern52(&a, &b, &hp), matern52(&b, &a, &hp));
        }

        #[test]
        fn gram_plus_noise_is_positive_definite(
            pts in prop::collection::vec(prop::collection::vec(0.0f64..1.0, 2), 1..=20),
        ) {
            let hp = Hyperparams::new(vec![0.3, 0.6], 1.0, 1e-6, 0.0).unwrap();
            let mut k = gram(&pts, &hp);
            for i in 0..pts.len() { k[(i, i)] += hp.noise; }
            let eig = k.symmetric_eigenvalues();
            prop_assert!(eig.min() > 0.0);
        }

        #[test]
        fn observing_reduces_variance((x, y, hp, q) in small_instance(), yq in -2.0f64..2.0) {
            let h = History::from_parts(x, y).unwrap();
            let before = fit_posterior(&h, &hp).unwrap().predict(&q).unwrap().1;
            let after = fit_posterior(&h.with(q.clone(), yq), &hp).unwrap().predict(&q).unwrap().1;
            prop_assert!(after <= before + 1e-12);
        }

        #[test]
        fn predictive_variance_nonnegative((x, y, hp, q) in small_instance()) {
            let post = fit_posterior(&History::from_parts(x, y).unwrap(), &hp).unwrap();
            let (m, v) = post.predict(&q).unwrap();
            prop_assert!(v >= 0.0 && m.is_finite());
        }
    }
}
