use crate::error::{check_dim, Error, Result};
use crate::linalg::Vector;
use crate::reference::Reference;

/// `‖x − x*‖ / ‖x*‖`.
pub fn relative_error(x: &Vector, reference: &Reference) -> Result<f64> {
    check_dim(reference.x_star.len(), x.len())?;
    let norm = reference.x_star.norm();
    if norm == 0.0 {
        return Err(Error::ZeroReference);
    }
    Ok((x - &reference.x_star).norm() / norm)
}

/// Mean relative error over the nodes' local iterates.
pub fn mean_local_error(locals: &[Vector], reference: &Reference) -> Result<f64> {
    if locals.is_empty() {
        return Err(Error::InvalidParameter("no local iterates".into()));
    }
    let mut total = 0.0;
    for x in locals {
        total += relative_error(x, reference)?;
    }
    Ok(total / locals.len() as f64)
}
