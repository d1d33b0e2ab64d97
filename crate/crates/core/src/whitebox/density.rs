//! Gaussian density over training embeddings: Mahalanobis distance (MD) and
//! its PCA-reduced variant (RDE).

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigen, Cholesky, Matrix};
use crate::scalar::Scalar;

/// Fraction of variance the RDE projection keeps by default.
pub const DEFAULT_VARIANCE_KEPT: f64 = 0.95;
/// Training embeddings drawn for the density fit.
pub const MAX_TRAINING_SAMPLES: usize = 1000;

const RIDGE_SCALE: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct DensityModel<T> {
    pub mean: Vec<T>,
    /// Ridged covariance (in projected space when a PCA basis is present).
    pub covariance: Matrix<T>,
    /// `d × D`, rows are principal directions.
    pub pca_basis: Option<Matrix<T>>,
    pub pca_mean: Option<Vec<T>>,
    pub ridge: T,
    cholesky: Cholesky<T>,
}

impl<T: Scalar> DensityModel<T> {
    /// Dimension of the raw embeddings the model accepts.
    pub fn input_dim(&self) -> usize {
        match &self.pca_basis {
            Some(basis) => basis.cols(),
            None => self.mean.len(),
        }
    }

    pub fn model_dim(&self) -> usize {
        self.mean.len()
    }

    /// Model from a known mean and covariance, used as given (no ridge, no
    /// projection).
    pub fn from_gaussian(mean: Vec<T>, covariance: Matrix<T>) -> Result<Self> {
        if covariance.rows() != mean.len() || !covariance.is_square() {
            return Err(Error::LengthMismatch {
                expected: mean.len(),
                actual: covariance.rows(),
            });
        }
        let cholesky = Cholesky::factor(&covariance)?;
        Ok(Self {
            mean,
            covariance,
            pca_basis: None,
            pca_mean: None,
            ridge: T::zero(),
            cholesky,
        })
    }
}

fn mean_vector<T: Scalar>(xs: &[Vec<T>]) -> Vec<T> {
    let d = xs[0].len();
    let n = T::from_count(xs.len());
    (0..d).map(|j| xs.iter().map(|x| x[j]).sum::<T>() / n).collect()
}

/// Maximum-likelihood covariance (divides by N).
fn covariance<T: Scalar>(xs: &[Vec<T>], mean: &[T]) -> Matrix<T> {
    let d = mean.len();
    let n = T::from_count(xs.len());
    let mut cov = Matrix::zeros(d, d);
    for x in xs {
        for i in 0..d {
            let di = x[i] - mean[i];
            for j in i..d {
                cov[(i, j)] = cov[(i, j)] + di * (x[j] - mean[j]);
            }
        }
    }
    for i in 0..d {
        for j in i..d {
            let v = cov[(i, j)] / n;
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    cov
}

/// Draws at most `max` embeddings with a seeded ChaCha8 shuffle; returns the
/// input unchanged when it is already small enough.
pub fn subsample_training<T: Clone>(embeddings: &[T], max: usize, seed: u64) -> Vec<T> {
    if embeddings.len() <= max {
        return embeddings.to_vec();
    }
    let mut idx: Vec<usize> = (0..embeddings.len()).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    idx.truncate(max);
    idx.sort_unstable();
    idx.into_iter().map(|i| embeddings[i].clone()).collect()
}

/// Fits a Gaussian to `training`. With `use_pca`, the embeddings are first
/// projected onto the leading principal components covering at least
/// `variance_kept` of the total variance.
///
/// The covariance is ridged by `ε·I` with `ε = 1e-6 · trace(Σ) / D`
/// (`1e-6` when the trace is zero).
pub fn fit_density<T: Scalar>(training: &[Vec<T>], use_pca: bool, variance_kept: T) -> Result<DensityModel<T>> {
    if training.len() < 2 {
        return Err(Error::OutOfRange(format!(
            "density fit needs at least 2 embeddings, got {}",
            training.len()
        )));
    }
    let dim = training[0].len();
    if dim == 0 {
        return Err(Error::Empty("embedding"));
    }
    if let Some(bad) = training.iter().find(|x| x.len() != dim) {
        return Err(Error::LengthMismatch {
            expected: dim,
            actual: bad.len(),
        });
    }

    let (points, pca_basis, pca_mean) = if use_pca {
        if !(variance_kept > T::zero() && variance_kept <= T::one()) {
            return Err(Error::OutOfRange(format!("variance_kept must lie in (0, 1], got {variance_kept}")));
        }
        let centre = mean_vector(training);
        let eig = symmetric_eigen(&covariance(training, &centre))?;
        // descending by explained variance
        let order: Vec<usize> = (0..dim).rev().collect();
        let total: T = eig.values.iter().map(|&v| v.max(T::zero())).sum();
        let keep = if total > T::zero() {
            let target = variance_kept * total - T::lit(1e-12) * total;
            let mut acc = T::zero();
            let mut keep = dim;
            for (count, &k) in order.iter().enumerate() {
                acc = acc + eig.values[k].max(T::zero());
                if acc >= target {
                    keep = count + 1;
                    break;
                }
            }
            keep
        } else {
            dim
        };
        let basis = Matrix::from_fn(keep, dim, |r, c| eig.vectors[(c, order[r])]);
        let projected: Vec<Vec<T>> = training
            .iter()
            .map(|x| project(&basis, &centre, x))
            .collect();
        (projected, Some(basis), Some(centre))
    } else {
        (training.to_vec(), None, None)
    };

    let mean = mean_vector(&points);
    let mut cov = covariance(&points, &mean);
    let d = mean.len();
    let trace = cov.trace();
    let ridge = if trace > T::zero() {
        T::lit(RIDGE_SCALE) * trace / T::from_count(d)
    } else {
        T::lit(RIDGE_SCALE)
    };
    for i in 0..d {
        cov[(i, i)] = cov[(i, i)] + ridge;
    }
    let cholesky = Cholesky::factor(&cov)?;
    Ok(DensityModel {
        mean,
        covariance: cov,
        pca_basis,
        pca_mean,
        ridge,
        cholesky,
    })
}

fn project<T: Scalar>(basis: &Matrix<T>, centre: &[T], x: &[T]) -> Vec<T> {
    let centred: Vec<T> = x.iter().zip(centre).map(|(&a, &b)| a - b).collect();
    basis.mul_vec(&centred)
}

/// `sqrt((x-μ)ᵀ Σ⁻¹ (x-μ))` via a triangular solve against the Cholesky factor.
pub fn mahalanobis<T: Scalar>(embedding: &[T], model: &DensityModel<T>) -> Result<T> {
    if embedding.len() != model.input_dim() {
        return Err(Error::LengthMismatch {
            expected: model.input_dim(),
            actual: embedding.len(),
        });
    }
    let x = match (&model.pca_basis, &model.pca_mean) {
        (Some(basis), Some(centre)) => project(basis, centre, embedding),
        _ => embedding.to_vec(),
    };
    let diff: Vec<T> = x.iter().zip(&model.mean).map(|(&a, &b)| a - b).collect();
    let y = model.cholesky.solve_lower(&diff);
    Ok(y.iter().map(|&v| v * v).sum::<T>().sqrt())
}
