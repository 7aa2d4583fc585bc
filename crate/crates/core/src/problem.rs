//! Composite objectives `F(x) = f0(x) + Σ f_i(x)`.
//!
//! `f0` is a strongly convex regularizer and each `f_i` is a convex,
//! differentiable loss on a private data block `(A_i, y_i)`. Every supported
//! component is real-valued on all of `R^p`, so closedness, continuity and
//! the Slater condition hold by construction; the constructors only check
//! the remaining parameter constraints.

use crate::error::{check_dim, Error, Result};
use crate::linalg::{gram_lambda_max, l1_norm, Matrix, Vector};

/// Strongly convex regularizer `f0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regularizer {
    /// `(λ/2)‖x‖²`
    Ridge { lambda: f64 },
    /// `λ1‖x‖₁ + (λ2/2)‖x‖²`
    ElasticNet { l1: f64, l2: f64 },
}

impl Regularizer {
    pub fn ridge(lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "ridge weight must be positive and finite, got {lambda}"
            )));
        }
        Ok(Regularizer::Ridge { lambda })
    }

    pub fn elastic_net(l1: f64, l2: f64) -> Result<Self> {
        if !(l1.is_finite() && l1 >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "l1 weight must be non-negative and finite, got {l1}"
            )));
        }
        if !(l2.is_finite() && l2 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "l2 weight must be positive (strong convexity), got {l2}"
            )));
        }
        Ok(Regularizer::ElasticNet { l1, l2 })
    }

    /// Strong-convexity constant μ.
    pub fn mu(&self) -> f64 {
        self.l2_weight()
    }

    pub fn l1_weight(&self) -> f64 {
        match *self {
            Regularizer::Ridge { .. } => 0.0,
            Regularizer::ElasticNet { l1, .. } => l1,
        }
    }

    pub fn l2_weight(&self) -> f64 {
        match *self {
            Regularizer::Ridge { lambda } => lambda,
            Regularizer::ElasticNet { l2, .. } => l2,
        }
    }

    pub fn eval(&self, x: &Vector) -> f64 {
        0.5 * self.l2_weight() * x.norm_squared() + self.l1_weight() * l1_norm(x)
    }
}

/// Shape of a loss component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LossKind {
    /// `(1/2n)‖Ax − y‖²`
    Quadratic,
    /// `(1/n) Σ_k φ_M(A_k x − y_k)` with half-width `M`.
    Huber { half_width: f64 },
}

/// Huber function φ_M.
#[inline]
pub fn huber(r: f64, half_width: f64) -> f64 {
    let a = r.abs();
    if a <= half_width {
        0.5 * r * r
    } else {
        half_width * a - 0.5 * half_width * half_width
    }
}

/// One loss term `f_i` with its data block.
#[derive(Debug, Clone, PartialEq)]
pub struct LossComponent {
    kind: LossKind,
    a: Matrix,
    y: Vector,
    scale: usize,
    lipschitz: f64,
}

impl LossComponent {
    /// `scale` is the component count `n` appearing in the `1/n` weights.
    pub fn new(kind: LossKind, a: Matrix, y: Vector, scale: usize) -> Result<Self> {
        check_dim(a.nrows(), y.len())?;
        if scale == 0 {
            return Err(Error::InvalidParameter("component scale n must be >= 1".into()));
        }
        if a.ncols() == 0 {
            return Err(Error::InvalidParameter("feature matrix has no columns".into()));
        }
        if !a.iter().chain(y.iter()).all(|v| v.is_finite()) {
            return Err(Error::InvalidParameter("data block contains non-finite entries".into()));
        }
        if let LossKind::Huber { half_width } = kind {
            if !(half_width.is_finite() && half_width > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "Huber half-width must be positive, got {half_width}"
                )));
            }
        }
        let lipschitz = gram_lambda_max(&a) / scale as f64;
        Ok(LossComponent {
            kind,
            a,
            y,
            scale,
            lipschitz,
        })
    }

    pub fn quadratic(a: Matrix, y: Vector, scale: usize) -> Result<Self> {
        Self::new(LossKind::Quadratic, a, y, scale)
    }

    pub fn huber(a: Matrix, y: Vector, scale: usize, half_width: f64) -> Result<Self> {
        Self::new(LossKind::Huber { half_width }, a, y, scale)
    }

    pub fn kind(&self) -> LossKind {
        self.kind
    }

    pub fn features(&self) -> &Matrix {
        &self.a
    }

    pub fn targets(&self) -> &Vector {
        &self.y
    }

    pub fn scale(&self) -> usize {
        self.scale
    }

    pub fn dim(&self) -> usize {
        self.a.ncols()
    }

    fn residual(&self, x: &Vector) -> Result<Vector> {
        check_dim(self.dim(), x.len())?;
        Ok(&self.a * x - &self.y)
    }

    pub fn eval(&self, x: &Vector) -> Result<f64> {
        let r = self.residual(x)?;
        let n = self.scale as f64;
        Ok(match self.kind {
            LossKind::Quadratic => r.norm_squared() / (2.0 * n),
            LossKind::Huber { half_width } => {
                r.iter().map(|&rk| huber(rk, half_width)).sum::<f64>() / n
            }
        })
    }

    /// Gradient of `f_i`; both kinds are differentiable so this is the unique subgradient.
    pub fn gradient(&self, x: &Vector) -> Result<Vector> {
        let mut r = self.residual(x)?;
        if let LossKind::Huber { half_width } = self.kind {
            r.apply(|v| *v = v.clamp(-half_width, half_width));
        }
        Ok(self.a.tr_mul(&r) / self.scale as f64)
    }

    /// Lipschitz constant of the gradient, `λ_max(AᵀA)/n`.
    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }
}

/// `F = f0 + Σ f_i` over `R^p`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeProblem {
    regularizer: Regularizer,
    components: Vec<LossComponent>,
    dim: usize,
}

impl CompositeProblem {
    pub fn new(regularizer: Regularizer, components: Vec<LossComponent>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::InvalidParameter("problem needs at least one component".into()))?;
        let dim = first.dim();
        for c in &components {
            check_dim(dim, c.dim())?;
        }
        // Constructors already enforce μ > 0; re-check in case of a literal enum value.
        if !(regularizer.mu() > 0.0 && regularizer.mu().is_finite())
            || !(regularizer.l1_weight() >= 0.0 && regularizer.l1_weight().is_finite())
        {
            return Err(Error::InvalidParameter(format!(
                "regularizer is not strongly convex: {regularizer:?}"
            )));
        }
        Ok(CompositeProblem {
            regularizer,
            components,
            dim,
        })
    }

    pub fn regularizer(&self) -> &Regularizer {
        &self.regularizer
    }

    pub fn components(&self) -> &[LossComponent] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &LossComponent {
        &self.components[i]
    }

    pub fn n_components(&self) -> usize {
        self.components.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval_regularizer(&self, x: &Vector) -> Result<f64> {
        check_dim(self.dim, x.len())?;
        Ok(self.regularizer.eval(x))
    }

    /// `F(x)`.
    pub fn eval(&self, x: &Vector) -> Result<f64> {
        let mut total = self.eval_regularizer(x)?;
        for c in &self.components {
            total += c.eval(x)?;
        }
        Ok(total)
    }

    /// `Σ ∇f_i(x)`.
    pub fn loss_gradient(&self, x: &Vector) -> Result<Vector> {
        let mut g = Vector::zeros(self.dim);
        for c in &self.components {
            g += c.gradient(x)?;
        }
        Ok(g)
    }

    pub fn zeros(&self) -> Vector {
        Vector::zeros(self.dim)
    }

    pub fn all_quadratic(&self) -> bool {
        self.components.iter().all(|c| c.kind() == LossKind::Quadratic)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn scalar(kind: LossKind, a: f64, y: f64, n: usize) -> LossComponent {
        LossComponent::new(
            kind,
            Matrix::from_element(1, 1, a),
            Vector::from_element(1, y),
            n,
        )
        .unwrap()
    }

    fn v(xs: &[f64]) -> Vector {
        Vector::from_row_slice(xs)
    }

    #[test]
    fn component_values() {
        let q0 = scalar(LossKind::Quadratic, 1.0, 0.0, 1);
        assert_eq!(q0.eval(&v(&[0.0])).unwrap(), 0.0);
        let q2 = scalar(LossKind::Quadratic, 1.0, 2.0, 1);
        assert_eq!(q2.eval(&v(&[0.0])).unwrap(), 2.0);
        let h = scalar(LossKind::Huber { half_width: 1.0 }, 1.0, 3.0, 1);
        assert_eq!(h.eval(&v(&[0.0])).unwrap(), 2.5);
    }

    #[test]
    fn component_gradients() {
        let q0 = scalar(LossKind::Quadratic, 1.0, 0.0, 1);
        assert_eq!(q0.gradient(&v(&[0.0])).unwrap(), v(&[0.0]));
        let q2 = scalar(LossKind::Quadratic, 1.0, 2.0, 1);
        assert_eq!(q2.gradient(&v(&[0.0])).unwrap(), v(&[-2.0]));
        let h = scalar(LossKind::Huber { half_width: 1.0 }, 1.0, 3.0, 1);
        assert_eq!(h.gradient(&v(&[0.0])).unwrap(), v(&[-1.0]));
    }

    #[test]
    fn regularizer_values() {
        assert_eq!(Regularizer::ridge(1.0).unwrap().eval(&v(&[0.0, 0.0])), 0.0);
        assert_relative_eq!(
            Regularizer::elastic_net(0.1, 0.1).unwrap().eval(&v(&[1.0])),
            0.15,
            epsilon = 1e-15
        );
        assert_eq!(Regularizer::ridge(2.0).unwrap().eval(&v(&[3.0])), 9.0);
    }

    #[test]
    fn full_objective() {
        let ridge = Regularizer::ridge(1.0).unwrap();
        let p = CompositeProblem::new(ridge, vec![scalar(LossKind::Quadratic, 1.0, 0.0, 1)]).unwrap();
        assert_eq!(p.eval(&v(&[0.0])).unwrap(), 0.0);
        let p = CompositeProblem::new(ridge, vec![scalar(LossKind::Quadratic, 1.0, 2.0, 1)]).unwrap();
        assert_eq!(p.eval(&v(&[1.0])).unwrap(), 1.0);
        let c = scalar(LossKind::Quadratic, 1.0, 2.0, 2);
        let p = CompositeProblem::new(ridge, vec![c.clone(), c]).unwrap();
        assert_eq!(p.eval(&v(&[1.0])).unwrap(), 1.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Regularizer::ridge(0.0).is_err());
        assert!(Regularizer::elastic_net(-0.1, 1.0).is_err());
        assert!(Regularizer::elastic_net(0.1, 0.0).is_err());
        assert!(LossComponent::quadratic(Matrix::zeros(2, 3), Vector::zeros(3), 1).is_err());
        assert!(LossComponent::huber(Matrix::zeros(1, 1), Vector::zeros(1), 1, 0.0).is_err());
        let q = scalar(LossKind::Quadratic, 1.0, 2.0, 1);
        assert!(matches!(
            q.eval(&v(&[1.0, 2.0])),
            Err(Error::DimensionMismatch { expected: 1, found: 2 })
        ));
        assert!(CompositeProblem::new(Regularizer::ridge(1.0).unwrap(), vec![]).is_err());
        let wide = LossComponent::quadratic(Matrix::zeros(1, 2), Vector::zeros(1), 2).unwrap();
        assert!(CompositeProblem::new(Regularizer::ridge(1.0).unwrap(), vec![q, wide]).is_err());
    }
}
