//! Shrinkage-regularised linear discriminant analysis.
//!
//! The pooled class-centred covariance (normalised by n - 2) is shrunk
//! toward `nu * I`, with `nu` the mean of its diagonal:
//!
//! ```text
//! sigma_shrunk = (1 - lambda) * sigma_pooled + lambda * nu * I
//! w            = sigma_shrunk^-1 (mu_target - mu_nontarget)
//! b            = -w . (mu_target + mu_nontarget) / 2
//! ```
//!
//! When no intensity is given it is estimated analytically with the
//! Ledoit-Wolf formula on the class-centred data.

use nalgebra::{DMatrix, DVector};
use ndarray::{Array2, ArrayView1, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Trained binary discriminant; higher scores are more target-like.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RldaModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    /// Shrinkage intensity in [0, 1].
    pub lambda: f64,
    /// Scale of the identity target, trace(sigma_pooled) / d.
    pub nu: f64,
    /// Class means, target first.
    pub class_means: [Vec<f64>; 2],
}

fn class_mean(x: &Array2<f64>) -> Vec<f64> {
    x.mean_axis(Axis(0)).expect("non-empty class").to_vec()
}

/// Class-centred rows of both classes stacked into one matrix.
fn centred(target: &Array2<f64>, nontarget: &Array2<f64>, means: &[Vec<f64>; 2]) -> DMatrix<f64> {
    let d = target.ncols();
    let n = target.nrows() + nontarget.nrows();
    let mut x = DMatrix::zeros(n, d);
    let rows = target
        .rows()
        .into_iter()
        .map(|r| (r, &means[0]))
        .chain(nontarget.rows().into_iter().map(|r| (r, &means[1])));
    for (i, (row, mean)) in rows.enumerate() {
        for j in 0..d {
            x[(i, j)] = row[j] - mean[j];
        }
    }
    x
}

/// Ledoit-Wolf intensity for shrinking toward a scaled identity.
///
/// `x` holds centred observations as rows.
pub fn ledoit_wolf_lambda(x: &DMatrix<f64>) -> f64 {
    let (n, d) = x.shape();
    let nf = n as f64;
    let s = x.tr_mul(x) / nf;
    let mu = s.trace() / d as f64;
    let s_norm2 = s.norm_squared();
    let mut dist2 = s_norm2;
    for i in 0..d {
        dist2 += mu * mu - 2.0 * mu * s[(i, i)];
    }
    if dist2 <= 0.0 {
        return 0.0;
    }
    let fourth: f64 = x.row_iter().map(|r| r.norm_squared().powi(2)).sum();
    let beta = (fourth - nf * s_norm2) / (nf * nf);
    (beta / dist2).clamp(0.0, 1.0)
}

/// Fits the discriminant from (samples x features) matrices of each class.
pub fn train(target: &Array2<f64>, nontarget: &Array2<f64>, lambda: Option<f64>) -> Result<RldaModel> {
    let min = target.nrows().min(nontarget.nrows());
    if min < 2 {
        return Err(Error::InsufficientData {
            required: 2,
            actual: min,
        });
    }
    let d = target.ncols();
    if nontarget.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: nontarget.ncols(),
        });
    }
    if let Some(l) = lambda {
        if !(0.0..=1.0).contains(&l) {
            return Err(Error::InvalidShrinkage(l));
        }
    }
    let means = [class_mean(target), class_mean(nontarget)];
    let x = centred(target, nontarget, &means);
    let n = x.nrows();
    let pooled = x.tr_mul(&x) / (n as f64 - 2.0);
    let nu = pooled.trace() / d as f64;
    let lambda = lambda.unwrap_or_else(|| ledoit_wolf_lambda(&x));

    let mut shrunk = pooled * (1.0 - lambda);
    for i in 0..d {
        shrunk[(i, i)] += lambda * nu;
    }
    let max_diag = (0..d).map(|i| shrunk[(i, i)]).fold(0.0f64, f64::max);
    let chol = shrunk
        .cholesky()
        .ok_or(Error::SingularCovariance { lambda })?;
    let min_pivot = chol.l_dirty().diagonal().iter().fold(f64::MAX, |m, v| m.min(v * v));
    if !(max_diag > 0.0) || min_pivot < 1e-12 * max_diag {
        return Err(Error::SingularCovariance { lambda });
    }
    let diff = DVector::from_iterator(d, means[0].iter().zip(&means[1]).map(|(a, b)| a - b));
    let w = chol.solve(&diff);
    if !w.iter().all(|v| v.is_finite()) {
        return Err(Error::SingularCovariance { lambda });
    }
    let weights = w.as_slice().to_vec();
    let bias = -0.5
        * weights
            .iter()
            .zip(means[0].iter().zip(&means[1]))
            .map(|(w, (a, b))| w * (a + b))
            .sum::<f64>();
    Ok(RldaModel {
        weights,
        bias,
        lambda,
        nu,
        class_means: means,
    })
}

impl RldaModel {
    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    /// `w . f + b`.
    pub fn score(&self, features: &[f64]) -> Result<f64> {
        if features.len() != self.weights.len() {
            return Err(Error::DimensionMismatch {
                expected: self.weights.len(),
                actual: features.len(),
            });
        }
        Ok(ArrayView1::from(&self.weights[..]).dot(&ArrayView1::from(features)) + self.bias)
    }
}
