//! Moore-Penrose pseudo-inverse and affine-subspace projection.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Holds a matrix `A` together with its pseudo-inverse, and projects points
/// onto the affine solution set `{ s : A s = b }`.
pub struct PseudoInverseProjector {
    a: DMatrix<f64>,
    pinv: DMatrix<f64>,
}

impl PseudoInverseProjector {
    /// Builds the projector from an SVD of `A`. Singular values below
    /// `machine epsilon * max(m, n) * sigma_max` are treated as zero.
    pub fn new(a: DMatrix<f64>) -> Result<Self> {
        let svd = a.clone().svd(true, true);
        let sigma_max = svd.singular_values.amax();
        let tol = f64::EPSILON * a.nrows().max(a.ncols()) as f64 * sigma_max;
        let pinv = svd
            .pseudo_inverse(tol)
            .map_err(|e| Error::Numerical(format!("pseudo-inverse: {e}")))?;
        Ok(PseudoInverseProjector { a, pinv })
    }

    /// Shortcut for matrices with orthonormal rows (`A Aᵀ = I`), where the
    /// pseudo-inverse is simply `Aᵀ`. The property is spot-checked on one
    /// probe vector; matrices that fail the probe are rejected.
    pub fn from_orthonormal_rows(a: DMatrix<f64>) -> Result<Self> {
        let m = a.nrows();
        let probe = DVector::from_fn(m, |i, _| 1.0 + (i as f64 % 7.0) * 0.25);
        let image = &a * (a.transpose() * &probe);
        let err = (&image - &probe).norm();
        if err > 1e-8 * probe.norm() {
            return Err(Error::invalid(
                "a",
                format!("rows are not orthonormal (probe residual {err:.3e})"),
            ));
        }
        let pinv = a.transpose();
        Ok(PseudoInverseProjector { a, pinv })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn pinv(&self) -> &DMatrix<f64> {
        &self.pinv
    }

    /// Minimum-norm least-squares solution `A⁺ b`.
    pub fn min_norm_solution(&self, b: &DVector<f64>) -> Result<DVector<f64>> {
        if b.len() != self.a.nrows() {
            return Err(Error::invalid(
                "b",
                format!("length {} does not match {} rows", b.len(), self.a.nrows()),
            ));
        }
        Ok(&self.pinv * b)
    }

    /// Projects `s` onto `{ x : A x = b }` via `s - A⁺ (A s - b)`.
    pub fn project(&self, s: &DVector<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
        if s.len() != self.a.ncols() {
            return Err(Error::invalid(
                "s",
                format!("length {} does not match {} cols", s.len(), self.a.ncols()),
            ));
        }
        if b.len() != self.a.nrows() {
            return Err(Error::invalid(
                "b",
                format!("length {} does not match {} rows", b.len(), self.a.nrows()),
            ));
        }
        let residual = &self.a * s - b;
        Ok(s - &self.pinv * residual)
    }
}
