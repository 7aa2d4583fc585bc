//! High-accuracy ground truth `x*` and `F_*`.
//!
//! Ridge problems with quadratic losses are solved with one Cholesky
//! factorization of the full normal equations; everything else uses an
//! accelerated proximal-gradient method on the whole objective. Neither path
//! goes through the StochaLM iteration.

use nalgebra::Cholesky;
use serde::{Deserialize, Serialize};

use crate::apg;
use crate::error::{Error, Result};
use crate::linalg::{sym_lambda_max, Matrix, Vector};
use crate::problem::{CompositeProblem, Regularizer};
use crate::subproblem::optimality_residual;

pub const REFERENCE_TOLERANCE: f64 = 1e-10;
pub const REFERENCE_MAX_ITERS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceMethod {
    DirectSolve,
    ProxGradHighAcc,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reference {
    pub x_star: Vector,
    pub f_star: f64,
    /// Optimality residual of `x_star`.
    pub residual: f64,
    pub method: ReferenceMethod,
}

/// Picks the direct solve when it applies, otherwise proximal gradient.
pub fn solve_reference(problem: &CompositeProblem) -> Result<Reference> {
    let method = match problem.regularizer() {
        Regularizer::Ridge { .. } if problem.all_quadratic() => ReferenceMethod::DirectSolve,
        _ => ReferenceMethod::ProxGradHighAcc,
    };
    solve_reference_with(problem, method)
}

pub fn solve_reference_with(problem: &CompositeProblem, method: ReferenceMethod) -> Result<Reference> {
    let x_star = match method {
        ReferenceMethod::DirectSolve => direct(problem)?,
        ReferenceMethod::ProxGradHighAcc => prox_grad(problem)?,
    };
    let residual = optimality_residual(problem.regularizer(), &x_star, &problem.loss_gradient(&x_star)?)?;
    let f_star = problem.eval(&x_star)?;
    Ok(Reference {
        x_star,
        f_star,
        residual,
        method,
    })
}

fn summed_gram(problem: &CompositeProblem) -> (Matrix, Vector) {
    let p = problem.dim();
    let mut h = Matrix::zeros(p, p);
    let mut rhs = Vector::zeros(p);
    for c in problem.components() {
        let n = c.scale() as f64;
        h += c.features().tr_mul(c.features()) / n;
        rhs += c.features().tr_mul(c.targets()) / n;
    }
    (h, rhs)
}

fn direct(problem: &CompositeProblem) -> Result<Vector> {
    let lambda = match problem.regularizer() {
        Regularizer::Ridge { lambda } if problem.all_quadratic() => *lambda,
        _ => {
            return Err(Error::InvalidParameter(
                "direct reference solve needs a ridge regularizer and quadratic losses".into(),
            ))
        }
    };
    // (λI + Σ AᵀA/n) x = Σ Aᵀy/n
    let (mut h, rhs) = summed_gram(problem);
    for k in 0..problem.dim() {
        h[(k, k)] += lambda;
    }
    let chol = Cholesky::new(h).ok_or(Error::NotPositiveDefinite)?;
    Ok(chol.solve(&rhs))
}

fn prox_grad(problem: &CompositeProblem) -> Result<Vector> {
    let f0 = problem.regularizer();
    let l2 = f0.l2_weight();
    let (gram, _) = summed_gram(problem);
    let lipschitz = sym_lambda_max(&gram) + l2;
    let grad = |x: &Vector| {
        let mut g = problem.loss_gradient(x).expect("dimensions fixed");
        g.axpy(l2, x, 1.0);
        g
    };
    let outcome = apg::minimize(
        grad,
        f0.l1_weight(),
        lipschitz,
        l2,
        &problem.zeros(),
        REFERENCE_TOLERANCE,
        REFERENCE_MAX_ITERS,
    );
    if !outcome.converged {
        return Err(Error::NotConverged {
            residual: outcome.residual,
            iterations: outcome.iterations,
            best: Box::new(outcome.x),
        });
    }
    Ok(outcome.x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::LossComponent;
    use approx::assert_abs_diff_eq;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_row_slice(xs)
    }

    fn scalar_q(y: f64, n: usize) -> LossComponent {
        LossComponent::quadratic(Matrix::from_element(1, 1, 1.0), v(&[y]), n).unwrap()
    }

    #[test]
    fn single_component_reference() {
        let p = CompositeProblem::new(Regularizer::ridge(1.0).unwrap(), vec![scalar_q(2.0, 1)]).unwrap();
        let r = solve_reference(&p).unwrap();
        assert_eq!(r.method, ReferenceMethod::DirectSolve);
        assert_abs_diff_eq!(r.x_star[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(r.f_star, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn two_component_reference_matches_grid_search() {
        let p = CompositeProblem::new(
            Regularizer::ridge(1.0).unwrap(),
            vec![scalar_q(2.0, 2), scalar_q(2.0, 2)],
        )
        .unwrap();
        let r = solve_reference(&p).unwrap();
        let mut best = (f64::INFINITY, 0.0);
        for k in 0..=60_000 {
            let x = -3.0 + k as f64 * 1e-4;
            let f = p.eval(&v(&[x])).unwrap();
            if f < best.0 {
                best = (f, x);
            }
        }
        assert_abs_diff_eq!(r.x_star[0], best.1, epsilon = 1e-4);
        assert_abs_diff_eq!(r.x_star[0], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn large_l1_weight_gives_zero() {
        let a = Matrix::from_row_slice(2, 3, &[1.0, -0.5, 0.2, 0.3, 0.8, -1.0]);
        let y = v(&[1.0, -2.0]);
        let c = LossComponent::quadratic(a.clone(), y.clone(), 1).unwrap();
        let threshold = a.tr_mul(&y).amax();
        let p = CompositeProblem::new(Regularizer::elastic_net(threshold, 0.5).unwrap(), vec![c]).unwrap();
        let r = solve_reference(&p).unwrap();
        assert_eq!(r.method, ReferenceMethod::ProxGradHighAcc);
        assert!(r.x_star.iter().all(|&x| x == 0.0));
        let res = optimality_residual(p.regularizer(), &p.zeros(), &p.loss_gradient(&p.zeros()).unwrap()).unwrap();
        assert_eq!(res, 0.0);
    }

    #[test]
    fn direct_rejects_elastic_net() {
        let p = CompositeProblem::new(Regularizer::elastic_net(0.1, 1.0).unwrap(), vec![scalar_q(1.0, 1)]).unwrap();
        assert!(solve_reference_with(&p, ReferenceMethod::DirectSolve).is_err());
    }
}
