//! Lasso feature selection over Dirichlet-series coefficients.
//!
//! Features are the columns `n^{-s}` (real and imaginary parts stacked), the
//! response is `L(s, χ)` on the same samples. Along a descending λ path,
//! unimportant coefficients are the first to disappear when read in
//! increasing λ, so each feature is summarised by its *vanish-λ*: the
//! smallest grid λ from which it is zero at every larger λ.
//!
//! The sampling, scaling and λ schedule are a reconstruction with
//! conventional defaults; [`ExperimentSetup`] records them.

use num_traits::Float;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::characters::{gcd, RealPrimitiveCharacter};
use crate::gramzero::gram_table;
use crate::lref::l_value;
use crate::mpnum::{pow_int_neg_s, BigComplex, PrecisionContext, MIN_DIGITS};
use crate::solve::DenseMatrix;
use crate::{Error, F64Matrix, Result, Scalar};

pub const GRID_POINTS: usize = 100;
pub const GRID_SPAN: f64 = 1e-6;
pub const CONVERGENCE: f64 = 1e-12;
pub const MAX_SWEEPS: usize = 100_000;

/// Design matrix `X` (rows `Re`, `Im` per sample) and response `y`.
pub fn build_design(
    chi: &RealPrimitiveCharacter,
    samples: &[(f64, f64)],
    indices: &[u64],
) -> Result<(F64Matrix, Vec<f64>)> {
    if samples.is_empty() || indices.is_empty() {
        return Err(Error::InvalidArgument("need samples and features".into()));
    }
    let ctx = PrecisionContext::new(MIN_DIGITS)?;
    let rows: Vec<(Vec<f64>, Vec<f64>, f64, f64)> = samples
        .par_iter()
        .map(|&(re, im)| {
            let s = ctx.complex(re, im);
            let l = l_value(chi, &s, &ctx)?.value;
            let (mut xr, mut xi) = (Vec::new(), Vec::new());
            for &n in indices {
                let p: BigComplex = pow_int_neg_s(n, &s, &ctx);
                xr.push(p.re.to_f64());
                xi.push(p.im.to_f64());
            }
            Ok((xr, xi, l.re.to_f64(), l.im.to_f64()))
        })
        .collect::<Result<_>>()?;
    let mut x_rows = Vec::with_capacity(2 * rows.len());
    let mut y = Vec::with_capacity(2 * rows.len());
    for (xr, xi, yr, yi) in rows {
        x_rows.push(xr);
        y.push(yr);
        x_rows.push(xi);
        y.push(yi);
    }
    Ok((DenseMatrix::from_rows(x_rows)?, y))
}

/// `λ_max = ‖Xᵀy‖_∞ / rows` for unit-norm columns; above it every
/// coefficient is zero.
pub fn lambda_max<T: Float>(columns: &[Vec<T>], y: &[T]) -> T {
    let rows = T::from(y.len()).expect("row count fits");
    columns
        .iter()
        .map(|c| dot(c, y).abs())
        .fold(T::zero(), T::max)
        / rows
}

/// `points` log-spaced values from `λ_max` down to `λ_max · span`.
pub fn log_grid<T: Float>(lambda_max: T, points: usize, span: T) -> Vec<T> {
    if points == 1 {
        return vec![lambda_max];
    }
    let ratio = span.powf(T::one() / T::from(points - 1).expect("fits"));
    let mut out = Vec::with_capacity(points);
    let mut l = lambda_max;
    for _ in 0..points {
        out.push(l);
        l = l * ratio;
    }
    out
}

fn dot<T: Float>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (x, y)| acc + *x * *y)
}

fn soft_threshold<T: Float>(z: T, g: T) -> T {
    if z > g {
        z - g
    } else if z < -g {
        z + g
    } else {
        T::zero()
    }
}

/// Coefficients along the path, on unit-norm columns.
#[derive(Clone, Debug)]
pub struct LassoPath<T> {
    pub lambdas: Vec<T>,
    /// `coefficients[i][j]`: feature `j` at `lambdas[i]`.
    pub coefficients: Vec<Vec<T>>,
    pub sweeps: Vec<usize>,
}

/// Scales each column to unit Euclidean norm; fails on a zero column.
pub fn standardize<T: Float + Scalar>(x: &DenseMatrix<T>) -> Result<Vec<Vec<T>>> {
    (0..x.cols())
        .map(|j| {
            let c = x.column(j);
            let norm = dot(&c, &c).sqrt();
            if norm <= T::zero() {
                return Err(Error::InvalidArgument(format!("column {j} has zero norm")));
            }
            Ok(c.into_iter().map(|v| v / norm).collect())
        })
        .collect()
}

/// Coordinate-descent lasso on `(1/2n)‖y − Xβ‖² + λ‖β‖₁` with unit-norm
/// columns, warm-started down `lambdas` (which must be descending).
pub fn lasso_path<T: Float>(columns: &[Vec<T>], y: &[T], lambdas: &[T], tol: T) -> Result<LassoPath<T>> {
    let rows = y.len();
    if columns.iter().any(|c| c.len() != rows) {
        return Err(Error::DimensionMismatch("column length differs from y".into()));
    }
    if lambdas.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::InvalidArgument("λ grid must be descending".into()));
    }
    let n = T::from(rows).expect("fits");
    let norms: Vec<T> = columns.iter().map(|c| dot(c, c)).collect();
    let mut beta = vec![T::zero(); columns.len()];
    let mut residual = y.to_vec();
    let mut path = LassoPath {
        lambdas: lambdas.to_vec(),
        coefficients: Vec::with_capacity(lambdas.len()),
        sweeps: Vec::with_capacity(lambdas.len()),
    };
    for &lambda in lambdas {
        let threshold = lambda * n;
        let mut sweeps = 0;
        loop {
            sweeps += 1;
            let mut max_change = T::zero();
            for (j, col) in columns.iter().enumerate() {
                let old = beta[j];
                let rho = dot(col, &residual) + norms[j] * old;
                let new = soft_threshold(rho, threshold) / norms[j];
                let delta = new - old;
                if delta != T::zero() {
                    for (r, c) in residual.iter_mut().zip(col) {
                        *r = *r - delta * *c;
                    }
                    beta[j] = new;
                    max_change = max_change.max(delta.abs());
                }
            }
            if max_change < tol {
                break;
            }
            if sweeps >= MAX_SWEEPS {
                return Err(Error::LassoNonConvergence {
                    lambda: lambda.to_f64().unwrap_or(f64::NAN),
                    sweeps,
                });
            }
        }
        path.coefficients.push(beta.clone());
        path.sweeps.push(sweeps);
    }
    Ok(path)
}

impl<T: Float> LassoPath<T> {
    /// Smallest grid λ from which feature `j` stays zero for every larger λ.
    /// Zero when the feature is still zero at the smallest λ (it never
    /// entered); the largest λ when it is nonzero there already.
    pub fn vanish_lambda(&self, j: usize) -> T {
        // walk from the largest λ down while the coefficient stays zero
        let mut last_zero = None;
        for (i, coeffs) in self.coefficients.iter().enumerate() {
            if coeffs[j] != T::zero() {
                break;
            }
            last_zero = Some(i);
        }
        match last_zero {
            None => self.lambdas[0],
            Some(i) if i + 1 == self.lambdas.len() => T::zero(),
            Some(i) => self.lambdas[i],
        }
    }

    /// Grid steps whose largest coefficient jump exceeds ten times the
    /// relative λ step times the coefficient scale.
    pub fn discontinuities(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for i in 1..self.coefficients.len() {
            let prev = &self.coefficients[i - 1];
            let cur = &self.coefficients[i];
            let jump = prev
                .iter()
                .zip(cur)
                .map(|(a, b)| (*a - *b).abs())
                .fold(T::zero(), T::max);
            let scale = cur.iter().map(|v| v.abs()).fold(T::zero(), T::max);
            let ratio = self.lambdas[i - 1] / self.lambdas[i] - T::one();
            let ten = T::from(10.0).expect("fits");
            if jump > ten * ratio * scale.max(self.lambdas[i]) {
                out.push(i);
            }
        }
        out
    }
}

/// How the experiment was set up; stored with every report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSetup {
    pub d: i64,
    /// Samples are `1/2 + it` evenly spaced on `[g_0, g_gram_upto]`.
    pub gram_upto: usize,
    pub samples: usize,
    pub features: usize,
    pub grid_points: usize,
    pub grid_span: f64,
    pub convergence: f64,
    /// Seed of the response permutation in a shuffled-label control run.
    pub shuffled_seed: Option<u64>,
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureEntry {
    pub index: u64,
    pub vanish_lambda: f64,
    /// 1 = vanishes last (most important).
    pub rank: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureReport {
    pub setup: ExperimentSetup,
    /// Descending.
    pub lambdas: Vec<f64>,
    pub features: Vec<FeatureEntry>,
    pub discontinuities: Vec<usize>,
}

impl FeatureReport {
    pub fn from_path(setup: ExperimentSetup, indices: &[u64], path: &LassoPath<f64>) -> Self {
        let vanish: Vec<f64> = (0..indices.len()).map(|j| path.vanish_lambda(j)).collect();
        let mut order: Vec<usize> = (0..indices.len()).collect();
        order.sort_by(|&a, &b| vanish[b].total_cmp(&vanish[a]).then(indices[a].cmp(&indices[b])));
        let mut rank = vec![0; indices.len()];
        for (r, &j) in order.iter().enumerate() {
            rank[j] = r + 1;
        }
        let features = indices
            .iter()
            .enumerate()
            .map(|(j, &index)| FeatureEntry {
                index,
                vanish_lambda: vanish[j],
                rank: rank[j],
            })
            .collect();
        Self {
            setup,
            lambdas: path.lambdas.clone(),
            features,
            discontinuities: path.discontinuities(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,vanish_lambda,rank\n");
        for f in &self.features {
            out.push_str(&format!("{},{:e},{}\n", f.index, f.vanish_lambda, f.rank));
        }
        out
    }
}

/// Outcome of testing the `a_n = 0 for gcd(n, q) > 1` constraint.
#[derive(Clone, Debug, PartialEq)]
pub enum ConstraintVerdict {
    /// Every non-coprime feature vanishes before every coprime one, so
    /// `gcd(n, q) > 1 ⇒ a_n = 0` is recommended.
    Confirmed { q: u64 },
    /// The partition fails: the latest-vanishing non-coprime feature is not
    /// below the earliest-vanishing coprime feature.
    Violated {
        noncoprime: (u64, f64),
        coprime: (u64, f64),
    },
}

impl ConstraintVerdict {
    pub fn is_confirmed(&self) -> bool {
        matches!(self, ConstraintVerdict::Confirmed { .. })
    }

    /// The recommended predicate for dropping an index, when confirmed.
    pub fn predicate(&self) -> Option<impl Fn(u64) -> bool> {
        match *self {
            ConstraintVerdict::Confirmed { q } => Some(move |n: u64| gcd(n, q) > 1),
            ConstraintVerdict::Violated { .. } => None,
        }
    }
}

pub fn constraint_recommendation(report: &FeatureReport, q: u64) -> ConstraintVerdict {
    let (nc, c): (Vec<&FeatureEntry>, Vec<&FeatureEntry>) =
        report.features.iter().partition(|f| gcd(f.index, q) > 1);
    let latest_nc = nc.iter().max_by(|a, b| a.vanish_lambda.total_cmp(&b.vanish_lambda));
    let earliest_c = c.iter().min_by(|a, b| a.vanish_lambda.total_cmp(&b.vanish_lambda));
    match (latest_nc, earliest_c) {
        (Some(a), Some(b)) if a.vanish_lambda >= b.vanish_lambda => ConstraintVerdict::Violated {
            noncoprime: (a.index, a.vanish_lambda),
            coprime: (b.index, b.vanish_lambda),
        },
        _ => ConstraintVerdict::Confirmed { q },
    }
}

/// Runs the experiment: features `n = 1..=features`, `4 × features` samples
/// on `[g_0, g_{gram_upto}]`, optional response shuffle as a negative control.
pub fn run_experiment(
    chi: &RealPrimitiveCharacter,
    gram_upto: usize,
    features: usize,
    shuffle_seed: Option<u64>,
) -> Result<FeatureReport> {
    let ctx = PrecisionContext::new(MIN_DIGITS)?;
    let gram = gram_table(chi, gram_upto + 1, &ctx)?;
    let lo = gram.entries[0].value.to_f64();
    let hi = gram.entries[gram_upto].value.to_f64();
    let count = 4 * features;
    let samples: Vec<(f64, f64)> = (0..count)
        .map(|i| (0.5, lo + (hi - lo) * i as f64 / (count - 1).max(1) as f64))
        .collect();
    let indices: Vec<u64> = (1..=features as u64).collect();
    let (x, mut y) = build_design(chi, &samples, &indices)?;
    if let Some(seed) = shuffle_seed {
        let mut pairs: Vec<(f64, f64)> = y.chunks(2).map(|p| (p[0], p[1])).collect();
        pairs.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        y = pairs.into_iter().flat_map(|(a, b)| [a, b]).collect();
    }
    let columns = standardize(&x)?;
    let grid = log_grid(lambda_max(&columns, &y), GRID_POINTS, GRID_SPAN);
    let path = lasso_path(&columns, &y, &grid, CONVERGENCE)?;
    let setup = ExperimentSetup {
        d: chi.discriminant(),
        gram_upto,
        samples: count,
        features,
        grid_points: GRID_POINTS,
        grid_span: GRID_SPAN,
        convergence: CONVERGENCE,
        shuffled_seed: shuffle_seed,
        note: "reconstructed setup: critical-line samples, unit-norm columns, log-spaced λ grid".into(),
    };
    Ok(FeatureReport::from_path(setup, &indices, &path))
}
