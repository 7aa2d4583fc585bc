//! Small dense linear-algebra helpers shared by the solvers.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

/// Soft-thresholding, the proximal map of `threshold * |.|`.
#[inline]
pub fn soft_threshold(v: f64, threshold: f64) -> f64 {
    if v > threshold {
        v - threshold
    } else if v < -threshold {
        v + threshold
    } else {
        0.0
    }
}

pub fn soft_threshold_vec(v: &Vector, threshold: f64) -> Vector {
    v.map(|x| soft_threshold(x, threshold))
}

pub fn l1_norm(v: &Vector) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

/// Largest eigenvalue of `AᵀA`, computed on whichever Gram matrix is smaller.
pub fn gram_lambda_max(a: &Matrix) -> f64 {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0.0;
    }
    let gram = if a.nrows() <= a.ncols() {
        a * a.transpose()
    } else {
        a.transpose() * a
    };
    SymmetricEigen::new(gram)
        .eigenvalues
        .iter()
        .cloned()
        .fold(0.0_f64, f64::max)
}

/// Largest eigenvalue of a symmetric positive semidefinite matrix.
pub fn sym_lambda_max(m: &Matrix) -> f64 {
    SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .cloned()
        .fold(0.0_f64, f64::max)
}

/// Solves `(shift·I + scale·AᵀA) x = rhs` for `shift > 0`, `scale ≥ 0`.
///
/// Uses the Woodbury identity when `A` has fewer rows than columns so the
/// factorization is `m×m` instead of `p×p`.
pub fn solve_shifted_gram(a: &Matrix, shift: f64, scale: f64, rhs: &Vector) -> Result<Vector> {
    if shift.is_nan() || shift <= 0.0 || scale < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "shifted Gram solve needs shift > 0 and scale >= 0 (got {shift}, {scale})"
        )));
    }
    let (m, p) = a.shape();
    if m < p {
        // (sI + c AᵀA)⁻¹ = (1/s)[I − Aᵀ (s/c I + AAᵀ)⁻¹ A]
        if scale == 0.0 {
            return Ok(rhs / shift);
        }
        let mut small = a * a.transpose();
        for k in 0..m {
            small[(k, k)] += shift / scale;
        }
        let chol = Cholesky::new(small).ok_or(Error::NotPositiveDefinite)?;
        let ar = a * rhs;
        let inner = chol.solve(&ar);
        Ok((rhs - a.transpose() * inner) / shift)
    } else {
        let mut big = a.transpose() * a * scale;
        for k in 0..p {
            big[(k, k)] += shift;
        }
        let chol = Cholesky::new(big).ok_or(Error::NotPositiveDefinite)?;
        Ok(chol.solve(rhs))
    }
}
