//! Universal singular value thresholding for symmetric matrices.
//!
//! `usvt(A, tau2, tau3)` keeps the eigenpairs with `|kappa_i| >= tau2`,
//! rebuilds `A' = sum kappa_i v_i v_i^T` and clips every entry to
//! `[-tau3, tau3]`.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::SymMatrix;

/// Tolerance for the symmetry check on dense input.
pub const SYMMETRY_TOL: f64 = 1e-8;

/// Slack parameter fixed in [`usvt_error_bound`].
pub const BOUND_DELTA: f64 = 1.0 / 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UsvtParams {
    pub tau2: f64,
    /// May be `f64::INFINITY` for no clipping.
    pub tau3: f64,
}

impl UsvtParams {
    pub fn new(tau2: f64, tau3: f64) -> Result<Self> {
        if !(tau2 >= 0.0) || tau2.is_infinite() {
            return Err(Error::ParameterOutOfRange(format!(
                "spectral threshold tau2 must be finite and >= 0, got {tau2}"
            )));
        }
        if !(tau3 > 0.0) {
            return Err(Error::ParameterOutOfRange(format!(
                "clip level tau3 must be > 0, got {tau3}"
            )));
        }
        Ok(Self { tau2, tau3 })
    }
}

/// Symmetric eigendecomposition; eigenvalues and eigenvectors as columns.
pub fn symmetric_eigen(a: &SymMatrix) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = a.n();
    if n == 0 {
        return Ok((Vec::new(), DMatrix::zeros(0, 0)));
    }
    let max_iter = 1000 * n.max(10);
    let eig = SymmetricEigen::try_new(a.to_dense(), f64::EPSILON, max_iter)
        .ok_or(Error::EigenFailure(n))?;
    Ok((eig.eigenvalues.iter().copied().collect(), eig.eigenvectors))
}

pub fn usvt(a: &SymMatrix, params: UsvtParams) -> Result<SymMatrix> {
    let params = UsvtParams::new(params.tau2, params.tau3)?;
    let n = a.n();
    let (values, vectors) = symmetric_eigen(a)?;
    let kept: Vec<usize> = (0..n).filter(|&i| values[i].abs() >= params.tau2).collect();
    if kept.is_empty() {
        return Ok(SymMatrix::zeros(n));
    }
    let basis = DMatrix::from_fn(n, kept.len(), |r, c| vectors[(r, kept[c])]);
    let scaled = DMatrix::from_fn(n, kept.len(), |r, c| {
        vectors[(r, kept[c])] * values[kept[c]]
    });
    let rebuilt = &scaled * basis.transpose();
    let clip = params.tau3;
    Ok(SymMatrix::from_fn(n, |i, j| {
        let v = 0.5 * (rebuilt[(i, j)] + rebuilt[(j, i)]);
        v.clamp(-clip, clip)
    }))
}

/// Dense entry point; rejects input that is not symmetric within [`SYMMETRY_TOL`].
pub fn usvt_dense(a: &DMatrix<f64>, params: UsvtParams) -> Result<DMatrix<f64>> {
    let sym = SymMatrix::from_dense(a, SYMMETRY_TOL)?;
    Ok(usvt(&sym, params)?.to_dense())
}

/// `16 (r tau^2 + (1 + d)^2 d^-2 sum_{i>r} lambda_i^2)` with `d = 1/3`.
///
/// `tail_eigs` are the eigenvalues beyond the first `r` in decreasing
/// absolute value.
pub fn usvt_error_bound(tau2: f64, r: usize, tail_eigs: &[f64]) -> f64 {
    let d = BOUND_DELTA;
    let factor = (1.0 + d).powi(2) / (d * d);
    let tail: f64 = tail_eigs.iter().map(|l| l * l).sum();
    16.0 * (r as f64 * tau2 * tau2 + factor * tail)
}

/// Minimum of [`usvt_error_bound`] over `0 <= r <= n` for the full spectrum.
pub fn usvt_error_bound_min(tau2: f64, eigs: &[f64]) -> f64 {
    let mut sorted: Vec<f64> = eigs.to_vec();
    sorted.sort_by(|a, b| b.abs().total_cmp(&a.abs()));
    (0..=sorted.len())
        .map(|r| usvt_error_bound(tau2, r, &sorted[r..]))
        .fold(f64::INFINITY, f64::min)
}

/// Largest absolute eigenvalue.
pub fn operator_norm(a: &SymMatrix) -> Result<f64> {
    let (values, _) = symmetric_eigen(a)?;
    Ok(values.iter().fold(0.0f64, |m, v| m.max(v.abs())))
}
