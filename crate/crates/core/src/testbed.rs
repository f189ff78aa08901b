//! Benchmark objectives: Branin, Hartmann 3, nearest-neighbour interpolants
//! of point clouds, and an additive-Gaussian-noise wrapper.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::optimize::{self, InnerOptConfig};
use crate::space::Bounds;

pub const BRANIN_MIN: f64 = 0.397_887_357_729_738_2;
pub const HARTMANN3_MIN: f64 = -3.862_782_147_820_756;

pub fn branin_bounds() -> Bounds {
    Bounds::new(vec![-5.0, 0.0], vec![10.0, 15.0]).expect("static bounds")
}

pub fn branin(x: &[f64]) -> Result<f64> {
    branin_bounds().check_point(x)?;
    Ok(branin_raw(x))
}

fn branin_raw(x: &[f64]) -> f64 {
    let b = 5.1 / (4.0 * PI * PI);
    let c = 5.0 / PI;
    let t = 1.0 / (8.0 * PI);
    let (x1, x2) = (x[0], x[1]);
    (x2 - b * x1 * x1 + c * x1 - 6.0).powi(2) + 10.0 * (1.0 - t) * x1.cos() + 10.0
}

const H3_ALPHA: [f64; 4] = [1.0, 1.2, 3.0, 3.2];
const H3_A: [[f64; 3]; 4] = [
    [3.0, 10.0, 30.0],
    [0.1, 10.0, 35.0],
    [3.0, 10.0, 30.0],
    [0.1, 10.0, 35.0],
];
const H3_P: [[f64; 3]; 4] = [
    [0.3689, 0.1170, 0.2673],
    [0.4699, 0.4387, 0.7470],
    [0.1091, 0.8732, 0.5547],
    [0.0381, 0.5743, 0.8828],
];

pub fn hartmann3(x: &[f64]) -> Result<f64> {
    Bounds::unit(3).check_point(x)?;
    Ok(hartmann3_raw(x))
}

fn hartmann3_raw(x: &[f64]) -> f64 {
    -(0..4)
        .map(|i| {
            let e: f64 = (0..3).map(|j| H3_A[i][j] * (x[j] - H3_P[i][j]).powi(2)).sum();
            H3_ALPHA[i] * (-e).exp()
        })
        .sum::<f64>()
}

/// Scattered observations `(coords_i, values_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    pub coords: Vec<Vec<f64>>,
    pub values: Vec<f64>,
}

impl PointCloud {
    pub fn new(coords: Vec<Vec<f64>>, values: Vec<f64>) -> Result<Self> {
        if coords.is_empty() || coords.len() != values.len() {
            return Err(Error::InvalidArgument(format!(
                "point cloud needs matching nonempty coords ({}) and values ({})",
                coords.len(),
                values.len()
            )));
        }
        let d = coords[0].len();
        if d == 0 || coords.iter().any(|c| c.len() != d) {
            return Err(Error::InvalidArgument("ragged or empty coordinates".into()));
        }
        if !coords.iter().flatten().chain(&values).all(|v| v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite entries in point cloud".into()));
        }
        Ok(Self { coords, values })
    }

    pub fn dim(&self) -> usize {
        self.coords[0].len()
    }

    /// Comma-separated rows of `d` coordinates and one value; an optional
    /// header is recognised by a non-numeric first token.
    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut coords = Vec::new();
        let mut values = Vec::new();
        let mut width = None;
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if idx == 0 && fields[0].trim_start_matches('\u{feff}').parse::<f64>().is_err() {
                continue;
            }
            let parsed: std::result::Result<Vec<f64>, _> = fields.iter().map(|f| f.parse::<f64>()).collect();
            let row = parsed.map_err(|e| Error::Parse {
                line: idx + 1,
                msg: e.to_string(),
            })?;
            if row.len() < 2 {
                return Err(Error::Parse {
                    line: idx + 1,
                    msg: "need at least one coordinate and a value".into(),
                });
            }
            if *width.get_or_insert(row.len()) != row.len() {
                return Err(Error::Parse {
                    line: idx + 1,
                    msg: format!("expected {} columns, found {}", width.unwrap(), row.len()),
                });
            }
            let (x, y) = row.split_at(row.len() - 1);
            coords.push(x.to_vec());
            values.push(y[0]);
        }
        Self::new(coords, values)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::parse_csv(&std::fs::read_to_string(path)?)
    }

    pub fn bounding_box(&self) -> Bounds {
        let d = self.dim();
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for c in &self.coords {
            for j in 0..d {
                lo[j] = lo[j].min(c[j]);
                hi[j] = hi[j].max(c[j]);
            }
        }
        Bounds::new(lo, hi).expect("finite coordinates")
    }

    /// Row index of the Euclidean-nearest point; ties to the lowest index.
    pub fn nearest(&self, x: &[f64]) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, c) in self.coords.iter().enumerate() {
            let d: f64 = c.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
            if d < best_d {
                best = i;
                best_d = d;
            }
        }
        best
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Branin,
    Hartmann3,
    NearestNeighbor(PointCloud),
}

/// A deterministic objective over a box.
#[derive(Debug, Clone, PartialEq)]
pub struct Objective {
    name: String,
    kind: Kind,
    bounds: Bounds,
    true_min: Option<f64>,
}

impl Objective {
    pub fn branin() -> Self {
        Self {
            name: "branin".into(),
            kind: Kind::Branin,
            bounds: branin_bounds(),
            true_min: Some(BRANIN_MIN),
        }
    }

    pub fn hartmann3() -> Self {
        Self {
            name: "hartmann3".into(),
            kind: Kind::Hartmann3,
            bounds: Bounds::unit(3),
            true_min: Some(HARTMANN3_MIN),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    pub fn true_min(&self) -> Option<f64> {
        self.true_min
    }

    pub fn dim(&self) -> usize {
        self.bounds.dim()
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        self.bounds.check_point(x)?;
        Ok(match &self.kind {
            Kind::Branin => branin_raw(x),
            Kind::Hartmann3 => hartmann3_raw(x),
            Kind::NearestNeighbor(pc) => pc.values[pc.nearest(x)],
        })
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// Piecewise-constant interpolant returning the value of the nearest point.
///
/// The dataset's minimum is not reported as a known optimum, so runs on it
/// track the best observed value rather than an absolute error.
pub fn nearest_neighbor_objective(pc: PointCloud, name: impl Into<String>) -> Objective {
    Objective {
        name: name.into(),
        bounds: pc.bounding_box(),
        kind: Kind::NearestNeighbor(pc),
        true_min: None,
    }
}

/// Black box returning `f(x) + sd·ε` from a sequential seeded stream.
pub struct NoisyObjective<'a, R> {
    objective: &'a Objective,
    noise_sd: f64,
    rng: R,
}

impl<'a, R: Rng> NoisyObjective<'a, R> {
    pub fn new(objective: &'a Objective, noise_sd: f64, rng: R) -> Result<Self> {
        if !(noise_sd >= 0.0 && noise_sd.is_finite()) {
            return Err(Error::InvalidArgument(format!("noise sd {noise_sd} must be >= 0")));
        }
        Ok(Self {
            objective,
            noise_sd,
            rng,
        })
    }

    pub fn objective(&self) -> &Objective {
        self.objective
    }

    /// Returns `(noisy observation, noiseless value)`.
    pub fn query(&mut self, x: &[f64]) -> Result<(f64, f64)> {
        let f = self.objective.eval(x)?;
        let e: f64 = self.rng.sample(StandardNormal);
        Ok((f + self.noise_sd * e, f))
    }
}

/// Dense grid followed by compass refinement of the best grid cells.
///
/// Returns `(argmin, min)`; used to regenerate the tabulated benchmark minima.
pub fn grid_minimum<F: Fn(&[f64]) -> f64>(f: F, bounds: &Bounds, per_dim: usize, starts: usize) -> (Vec<f64>, f64) {
    let d = bounds.dim();
    let total = per_dim.pow(d as u32);
    let mut pts = Vec::with_capacity(total);
    for idx in 0..total {
        let mut rem = idx;
        let u: Vec<f64> = (0..d)
            .map(|_| {
                let k = rem % per_dim;
                rem /= per_dim;
                k as f64 / (per_dim - 1) as f64
            })
            .collect();
        pts.push(bounds.from_unit(&u));
    }
    let vals: Vec<f64> = pts.iter().map(|p| f(p)).collect();
    let cfg = InnerOptConfig {
        sweep_per_dim: 0,
        n_starts: starts,
        max_iters: 10_000,
        x_tol: 1e-12,
    };
    let step: Vec<f64> = (0..d).map(|j| bounds.width(j) / (per_dim - 1) as f64).collect();
    let mut best: Option<(Vec<f64>, f64)> = None;
    for i in optimize::best_indices(&vals, starts) {
        let (x, fx) = optimize::refine(&f, pts[i].clone(), vals[i], bounds, &step, &cfg);
        if best.as_ref().is_none_or(|(_, b)| fx < *b) {
            best = Some((x, fx));
        }
    }
    best.expect("grid is nonempty")
}
