//! Per-round subproblem `min_x f0(x) + f_j(x) + ⟨s, x⟩`.
//!
//! Ridge regularizer with a quadratic loss is solved directly; every other
//! pairing goes through an accelerated proximal-gradient loop on the smooth
//! part with soft-thresholding for the `ℓ1` term.

use crate::apg;
use crate::error::{check_dim, Error, Result};
use crate::linalg::{solve_shifted_gram, Vector};
use crate::problem::{LossComponent, LossKind, Regularizer};

pub const DEFAULT_TOLERANCE: f64 = 1e-10;
pub const DEFAULT_MAX_INNER_ITERS: usize = 100_000;

/// Accuracy controls for the inner solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnerOptions {
    /// Absolute optimality residual to reach.
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for InnerOptions {
    fn default() -> Self {
        InnerOptions {
            tol: DEFAULT_TOLERANCE,
            max_iters: DEFAULT_MAX_INNER_ITERS,
        }
    }
}

impl InnerOptions {
    pub fn with_tol(tol: f64) -> Self {
        InnerOptions {
            tol,
            ..Default::default()
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "solver tolerance must be positive, got {}",
                self.tol
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubproblemSolution {
    /// Minimizer of the subproblem, the new anchor of component `j`.
    pub x_new: Vector,
    /// `∇f_j(x_new)`, the stored subgradient for component `j`.
    pub g_new: Vector,
    /// Distance of 0 from `∂f0(x_new) + g_new + s`.
    pub residual: f64,
    pub inner_iters: usize,
}

/// Distance from 0 to `∂f0(x) + g_sum`, where `g_sum` is the total of the
/// loss subgradients (including any linear term).
pub fn optimality_residual(f0: &Regularizer, x: &Vector, g_sum: &Vector) -> Result<f64> {
    check_dim(x.len(), g_sum.len())?;
    let smooth = g_sum + x * f0.l2_weight();
    Ok(apg::l1_stationarity(x, &smooth, f0.l1_weight()))
}

/// Solves `min_x f0(x) + f_j(x) + ⟨s, x⟩`.
pub fn solve_subproblem(
    f0: &Regularizer,
    fj: &LossComponent,
    s: &Vector,
    opts: &InnerOptions,
    warm_start: &Vector,
) -> Result<SubproblemSolution> {
    check_inputs(fj, s, opts, warm_start)?;
    match (f0, fj.kind()) {
        (Regularizer::Ridge { lambda }, LossKind::Quadratic) => solve_direct(*lambda, f0, fj, s),
        _ => solve_iterative(f0, fj, s, opts, warm_start),
    }
}

/// Always uses the accelerated proximal-gradient loop, whatever the pairing.
pub fn solve_subproblem_iterative(
    f0: &Regularizer,
    fj: &LossComponent,
    s: &Vector,
    opts: &InnerOptions,
    warm_start: &Vector,
) -> Result<SubproblemSolution> {
    check_inputs(fj, s, opts, warm_start)?;
    solve_iterative(f0, fj, s, opts, warm_start)
}

fn check_inputs(fj: &LossComponent, s: &Vector, opts: &InnerOptions, warm: &Vector) -> Result<()> {
    check_dim(fj.dim(), s.len())?;
    check_dim(fj.dim(), warm.len())?;
    opts.validate()
}

fn solve_direct(
    lambda: f64,
    f0: &Regularizer,
    fj: &LossComponent,
    s: &Vector,
) -> Result<SubproblemSolution> {
    // (λI + AᵀA/n) x = Aᵀy/n − s
    let n = fj.scale() as f64;
    let rhs = fj.features().tr_mul(fj.targets()) / n - s;
    let x_new = solve_shifted_gram(fj.features(), lambda, 1.0 / n, &rhs)?;
    let g_new = fj.gradient(&x_new)?;
    let residual = optimality_residual(f0, &x_new, &(&g_new + s))?;
    Ok(SubproblemSolution {
        x_new,
        g_new,
        residual,
        inner_iters: 0,
    })
}

fn solve_iterative(
    f0: &Regularizer,
    fj: &LossComponent,
    s: &Vector,
    opts: &InnerOptions,
    warm_start: &Vector,
) -> Result<SubproblemSolution> {
    let l2 = f0.l2_weight();
    let grad = |x: &Vector| {
        let mut g = fj.gradient(x).expect("dimensions checked");
        g += s;
        g.axpy(l2, x, 1.0);
        g
    };
    let outcome = apg::minimize(
        grad,
        f0.l1_weight(),
        fj.lipschitz() + l2,
        l2,
        warm_start,
        opts.tol,
        opts.max_iters,
    );
    if !outcome.converged {
        return Err(Error::NotConverged {
            residual: outcome.residual,
            iterations: outcome.iterations,
            best: Box::new(outcome.x),
        });
    }
    let g_new = fj.gradient(&outcome.x)?;
    let residual = optimality_residual(f0, &outcome.x, &(&g_new + s))?;
    Ok(SubproblemSolution {
        x_new: outcome.x,
        g_new,
        residual,
        inner_iters: outcome.iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use approx::assert_abs_diff_eq;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_row_slice(xs)
    }

    fn q(a: f64, y: f64, n: usize) -> LossComponent {
        LossComponent::quadratic(Matrix::from_element(1, 1, a), v(&[y]), n).unwrap()
    }

    /// Brute-force scalar minimization over [-3, 3] on a 1e-4 grid.
    fn grid_argmin(obj: impl Fn(f64) -> f64) -> f64 {
        let mut best = (f64::INFINITY, 0.0);
        for k in 0..=60_000 {
            let x = -3.0 + k as f64 * 1e-4;
            let val = obj(x);
            if val < best.0 {
                best = (val, x);
            }
        }
        best.1
    }

    #[test]
    fn grid_oracle_agrees_with_closed_forms() {
        // ridge λ=1, (1/2)(x-2)^2
        let x = grid_argmin(|x| 0.5 * x * x + 0.5 * (x - 2.0).powi(2));
        assert_abs_diff_eq!(x, 1.0, epsilon = 1e-4);
        // elastic net 1,1 → 0.5
        let x = grid_argmin(|x| x.abs() + 0.5 * x * x + 0.5 * (x - 2.0).powi(2));
        assert_abs_diff_eq!(x, 0.5, epsilon = 1e-4);
        // ridge with s = 1 → 0.5
        let x = grid_argmin(|x| 0.5 * x * x + 0.5 * (x - 2.0).powi(2) + x);
        assert_abs_diff_eq!(x, 0.5, epsilon = 1e-4);
    }

    #[test]
    fn subproblem_examples() {
        let opts = InnerOptions::default();
        let zero = v(&[0.0]);
        let ridge = Regularizer::ridge(1.0).unwrap();
        let sol = solve_subproblem(&ridge, &q(1.0, 2.0, 1), &zero, &opts, &zero).unwrap();
        assert_abs_diff_eq!(sol.x_new[0], 1.0, epsilon = 1e-12);
        assert_eq!(sol.inner_iters, 0);

        let en = Regularizer::elastic_net(1.0, 1.0).unwrap();
        let sol = solve_subproblem(&en, &q(1.0, 2.0, 1), &zero, &opts, &zero).unwrap();
        assert_abs_diff_eq!(sol.x_new[0], 0.5, epsilon = 1e-10);
        assert!(sol.residual <= opts.tol);

        let sol = solve_subproblem(&ridge, &q(1.0, 2.0, 1), &v(&[1.0]), &opts, &zero).unwrap();
        assert_abs_diff_eq!(sol.x_new[0], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn gradient_is_stored_exactly() {
        let opts = InnerOptions::default();
        let en = Regularizer::elastic_net(0.3, 0.5).unwrap();
        let h = LossComponent::huber(
            Matrix::from_row_slice(2, 2, &[1.0, 0.5, -0.3, 2.0]),
            v(&[4.0, -1.0]),
            3,
            0.5,
        )
        .unwrap();
        let sol = solve_subproblem(&en, &h, &v(&[0.1, -0.2]), &opts, &v(&[0.0, 0.0])).unwrap();
        assert_eq!(sol.g_new, h.gradient(&sol.x_new).unwrap());
        assert!(sol.residual <= opts.tol);
    }

    #[test]
    fn residual_examples() {
        let ridge = Regularizer::ridge(1.0).unwrap();
        assert_eq!(optimality_residual(&ridge, &v(&[1.0]), &v(&[-1.0])).unwrap(), 0.0);
        let en = Regularizer::elastic_net(1.0, 0.5).unwrap();
        assert_eq!(optimality_residual(&en, &v(&[0.0]), &v(&[0.7])).unwrap(), 0.0);
        assert_abs_diff_eq!(
            optimality_residual(&en, &v(&[0.0]), &v(&[1.5])).unwrap(),
            0.5,
            epsilon = 1e-15
        );
        assert!(optimality_residual(&en, &v(&[0.0]), &v(&[1.5, 0.0])).is_err());
    }

    #[test]
    fn exhausted_budget_reports_best_iterate() {
        let en = Regularizer::elastic_net(0.1, 0.01).unwrap();
        let fj = LossComponent::quadratic(
            Matrix::from_row_slice(2, 2, &[10.0, 9.9, 9.9, 10.0]),
            v(&[1.0, -1.0]),
            1,
        )
        .unwrap();
        let opts = InnerOptions {
            tol: 1e-14,
            max_iters: 3,
        };
        let err = solve_subproblem(&en, &fj, &v(&[0.0, 0.0]), &opts, &v(&[5.0, -5.0])).unwrap_err();
        match err {
            Error::NotConverged { iterations, best, .. } => {
                assert_eq!(iterations, 3);
                assert_eq!(best.len(), 2);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_tolerance() {
        let ridge = Regularizer::ridge(1.0).unwrap();
        let zero = v(&[0.0]);
        let opts = InnerOptions::with_tol(0.0);
        assert!(solve_subproblem(&ridge, &q(1.0, 2.0, 1), &zero, &opts, &zero).is_err());
    }
}
