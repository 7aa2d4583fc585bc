//! Accelerated proximal gradient for `smooth(x) + w‖x‖₁` with a
//! `μ`-strongly convex, `L`-smooth part.

use crate::linalg::{soft_threshold, Vector};

pub(crate) struct ApgOutcome {
    pub x: Vector,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Distance from 0 to `∇smooth(x) + w·∂‖x‖₁`, given `grad = ∇smooth(x)`.
pub(crate) fn l1_stationarity(x: &Vector, grad: &Vector, l1: f64) -> f64 {
    x.iter()
        .zip(grad.iter())
        .map(|(&xk, &gk)| {
            let r = if xk != 0.0 {
                gk + l1 * xk.signum()
            } else {
                (gk.abs() - l1).max(0.0)
            };
            r * r
        })
        .sum::<f64>()
        .sqrt()
}

/// Constant-momentum FISTA with gradient-based adaptive restart. Stops when
/// the stationarity residual at the latest prox point drops to `tol`.
pub(crate) fn minimize<G>(
    grad: G,
    l1: f64,
    lipschitz: f64,
    mu: f64,
    start: &Vector,
    tol: f64,
    max_iters: usize,
) -> ApgOutcome
where
    G: Fn(&Vector) -> Vector,
{
    let step = 1.0 / lipschitz;
    let kappa = (lipschitz / mu).max(1.0);
    let beta = (kappa.sqrt() - 1.0) / (kappa.sqrt() + 1.0);

    let mut x = start.clone();
    let g0 = grad(&x);
    let mut residual = l1_stationarity(&x, &g0, l1);
    let mut best = (x.clone(), residual);
    if residual <= tol {
        return ApgOutcome {
            x,
            residual,
            iterations: 0,
            converged: true,
        };
    }
    let mut prev = x.clone();
    // Gradient at the extrapolated point; at k = 0 the point is `x` itself.
    let mut gy = g0;
    let mut y = x.clone();

    for k in 1..=max_iters {
        let mut next = &y - &gy * step;
        next.apply(|v| *v = soft_threshold(*v, l1 * step));

        let gx = grad(&next);
        residual = l1_stationarity(&next, &gx, l1);
        if residual < best.1 {
            best = (next.clone(), residual);
        }
        if residual <= tol {
            return ApgOutcome {
                x: next,
                residual,
                iterations: k,
                converged: true,
            };
        }

        // restart when the momentum direction opposes the gradient mapping
        let restart = (&y - &next).dot(&(&next - &x)) > 0.0;
        prev.copy_from(&x);
        x = next;
        if restart {
            y.copy_from(&x);
            gy = gx;
        } else {
            y = &x + (&x - &prev) * beta;
            gy = grad(&y);
        }
    }
    ApgOutcome {
        x: best.0,
        residual: best.1,
        iterations: max_iters,
        converged: false,
    }
}
