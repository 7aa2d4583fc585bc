use crate::error::{check_dim, Error, Result};
use crate::linalg::{soft_threshold_vec, Vector};
use crate::problem::CompositeProblem;
use crate::schedule::IndexSchedule;
use crate::trace::{Observation, RunTrace};

/// SAGA works on `h0(x) + (1/n) Σ h_i(x)`. The problem is split as
/// `h0 = λ1‖x‖₁` and `h_i = n·f_i + (λ2/2)‖x‖²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SagaStep {
    /// `γ = 1/(2(μn + L))`, the strongly convex recommendation.
    Optimal,
    /// `γ = 1/(3L)`, for unknown strong convexity.
    Conservative,
    Fixed(f64),
}

impl SagaStep {
    pub fn gamma(&self, problem: &CompositeProblem) -> f64 {
        let l = saga_lipschitz(problem);
        let n = problem.n_components() as f64;
        match *self {
            SagaStep::Optimal => 1.0 / (2.0 * (problem.regularizer().mu() * n + l)),
            SagaStep::Conservative => 1.0 / (3.0 * l),
            SagaStep::Fixed(g) => g,
        }
    }
}

/// `L = max_i λ_max(∇²(n·f_i)) + λ2`.
pub fn saga_lipschitz(problem: &CompositeProblem) -> f64 {
    let n = problem.n_components() as f64;
    problem
        .components()
        .iter()
        .map(|c| n * c.lipschitz())
        .fold(0.0, f64::max)
        + problem.regularizer().l2_weight()
}

fn smooth_grad(problem: &CompositeProblem, j: usize, x: &Vector) -> Vector {
    let n = problem.n_components() as f64;
    let mut g = problem.component(j).gradient(x).expect("dimension checked") * n;
    g.axpy(problem.regularizer().l2_weight(), x, 1.0);
    g
}

#[derive(Debug, Clone, PartialEq)]
pub struct SagaState {
    x: Vector,
    grad_table: Vec<Vector>,
    table_mean: Vector,
    gamma: f64,
}

impl SagaState {
    /// Table filled with `∇h_i(x0)`.
    pub fn init(problem: &CompositeProblem, x0: &Vector, gamma: f64) -> Result<Self> {
        check_dim(problem.dim(), x0.len())?;
        let table = (0..problem.n_components())
            .map(|i| smooth_grad(problem, i, x0))
            .collect();
        Self::from_parts(x0.clone(), table, gamma)
    }

    pub fn from_parts(x: Vector, grad_table: Vec<Vector>, gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!("SAGA step must be positive, got {gamma}")));
        }
        if grad_table.is_empty() {
            return Err(Error::InvalidParameter("SAGA needs at least one component".into()));
        }
        for g in &grad_table {
            check_dim(x.len(), g.len())?;
        }
        let mut table_mean = Vector::zeros(x.len());
        for g in &grad_table {
            table_mean += g;
        }
        table_mean /= grad_table.len() as f64;
        Ok(SagaState {
            x,
            grad_table,
            table_mean,
            gamma,
        })
    }

    /// One SAGA update with component `j`, given `∇h_j` and the `ℓ1` weight of `h0`.
    pub fn step_with<G>(&mut self, j: usize, grad_j: G, l1: f64)
    where
        G: Fn(&Vector) -> Vector,
    {
        let fresh = grad_j(&self.x);
        let delta = &fresh - &self.grad_table[j];
        let w = &self.x - (&delta + &self.table_mean) * self.gamma;
        self.x = if l1 > 0.0 {
            soft_threshold_vec(&w, self.gamma * l1)
        } else {
            w
        };
        self.table_mean.axpy(1.0 / self.grad_table.len() as f64, &delta, 1.0);
        self.grad_table[j] = fresh;
    }

    pub fn step(&mut self, problem: &CompositeProblem, j: usize) {
        let l1 = problem.regularizer().l1_weight();
        self.step_with(j, |x| smooth_grad(problem, j, x), l1);
    }

    pub fn x(&self) -> &Vector {
        &self.x
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn grad_table(&self) -> &[Vector] {
        &self.grad_table
    }

    pub fn table_mean(&self) -> &Vector {
        &self.table_mean
    }

    /// `‖mean − (1/n)Σ α_i‖∞`.
    pub fn table_mean_drift(&self) -> f64 {
        let mut mean = Vector::zeros(self.x.len());
        for g in &self.grad_table {
            mean += g;
        }
        mean /= self.grad_table.len() as f64;
        (&self.table_mean - mean).amax()
    }
}

pub fn run_saga(
    problem: &CompositeProblem,
    step: SagaStep,
    schedule: &IndexSchedule,
    iterations: usize,
    x0: &Vector,
) -> Result<RunTrace> {
    let mut trace = RunTrace::new("saga");
    run_saga_observed(problem, step, schedule, iterations, x0, |o| trace.push(&o))?;
    Ok(trace)
}

/// SAGA driven by `schedule`, which should be uniform i.i.d. for the method's guarantees.
pub fn run_saga_observed<F>(
    problem: &CompositeProblem,
    step: SagaStep,
    schedule: &IndexSchedule,
    iterations: usize,
    x0: &Vector,
    mut observe: F,
) -> Result<SagaState>
where
    F: FnMut(Observation<'_>),
{
    crate::engine::check_schedule(problem, schedule)?;
    let mut state = SagaState::init(problem, x0, step.gamma(problem))?;
    observe(Observation {
        t: 0,
        index: None,
        iterate: &state.x,
        locals: &[],
        f_star: None,
        messages: 0,
    });
    for (t, j) in (1..=iterations).zip(schedule.stream()) {
        state.step(problem, j);
        observe(Observation {
            t,
            index: Some(j),
            iterate: &state.x,
            locals: &[],
            f_star: None,
            messages: 0,
        });
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::problem::{LossComponent, Regularizer};
    use crate::reference::solve_reference;

    #[test]
    fn scalar_step() {
        // h_1 = (1/2)(x − 2)², γ = 0.5, empty table
        let mut s = SagaState::from_parts(Vector::zeros(1), vec![Vector::zeros(1)], 0.5).unwrap();
        s.step_with(0, |x| x.map(|v| v - 2.0), 0.0);
        assert_eq!(s.x()[0], 1.0);
        assert_eq!(s.table_mean()[0], -2.0);
    }

    #[test]
    fn exact_table_at_optimum_is_fixed() {
        let a = Matrix::from_row_slice(2, 3, &[1.0, 0.5, -0.2, 0.3, -1.0, 0.7]);
        let b = Matrix::from_row_slice(2, 3, &[-0.4, 0.9, 0.1, 1.2, 0.2, -0.6]);
        let comps = vec![
            LossComponent::quadratic(a, Vector::from_row_slice(&[1.0, 2.0]), 2).unwrap(),
            LossComponent::quadratic(b, Vector::from_row_slice(&[-1.0, 0.5]), 2).unwrap(),
        ];
        let p = CompositeProblem::new(Regularizer::ridge(0.3).unwrap(), comps).unwrap();
        let r = solve_reference(&p).unwrap();
        let table = (0..2).map(|i| smooth_grad(&p, i, &r.x_star)).collect();
        let mut s = SagaState::from_parts(r.x_star.clone(), table, 0.1).unwrap();
        s.step(&p, 1);
        assert!((s.x() - &r.x_star).amax() < 1e-13);
    }

    #[test]
    fn step_sizes() {
        let c = LossComponent::quadratic(Matrix::from_element(1, 1, 2.0), Vector::from_element(1, 1.0), 2).unwrap();
        let p = CompositeProblem::new(Regularizer::elastic_net(0.1, 0.5).unwrap(), vec![c; 2]).unwrap();
        // h_i Hessian = n·AᵀA/n = 4, plus λ2
        let l = saga_lipschitz(&p);
        assert!((l - 4.5).abs() < 1e-12);
        assert!((SagaStep::Optimal.gamma(&p) - 1.0 / (2.0 * (0.5 * 2.0 + 4.5))).abs() < 1e-15);
        assert!((SagaStep::Conservative.gamma(&p) - 1.0 / 13.5).abs() < 1e-15);
    }
}
