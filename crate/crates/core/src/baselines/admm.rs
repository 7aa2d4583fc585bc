use crate::error::{check_dim, Error, Result};
use crate::linalg::{soft_threshold, Vector};
use crate::problem::{CompositeProblem, Regularizer};
use crate::subproblem::{solve_subproblem, InnerOptions};
use crate::trace::{Observation, RunTrace};

/// Penalty values swept by the federated benchmark.
pub const RHO_GRID: [f64; 5] = [0.01, 0.1, 1.0, 10.0, 100.0];

/// Consensus ADMM on the star network: workers own `x_i`, `u_i`; the center owns `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmmState {
    locals: Vec<Vector>,
    duals: Vec<Vector>,
    consensus: Vector,
    rho: f64,
}

impl AdmmState {
    pub fn init(problem: &CompositeProblem, x0: &Vector, rho: f64) -> Result<Self> {
        check_dim(problem.dim(), x0.len())?;
        Self::from_parts(
            vec![x0.clone(); problem.n_components()],
            vec![Vector::zeros(problem.dim()); problem.n_components()],
            x0.clone(),
            rho,
        )
    }

    pub fn from_parts(locals: Vec<Vector>, duals: Vec<Vector>, consensus: Vector, rho: f64) -> Result<Self> {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::InvalidParameter(format!("ADMM penalty must be positive, got {rho}")));
        }
        check_dim(locals.len(), duals.len())?;
        for v in locals.iter().chain(&duals) {
            check_dim(consensus.len(), v.len())?;
        }
        Ok(AdmmState {
            locals,
            duals,
            consensus,
            rho,
        })
    }

    /// One synchronous round:
    /// `x_i ← argmin f_i(x) + (ρ/2)‖x − z + u_i‖²`,
    /// `z ← argmin f0(z) + (nρ/2)‖z − mean(x_i + u_i)‖²`,
    /// `u_i ← u_i + x_i − z`.
    pub fn round(&mut self, problem: &CompositeProblem, opts: &InnerOptions) -> Result<()> {
        check_dim(self.locals.len(), problem.n_components())?;
        let n = self.locals.len() as f64;
        // the local problem is the ridge subproblem with λ = ρ and linear term −ρ(z − u_i)
        let prox = Regularizer::ridge(self.rho)?;
        for i in 0..self.locals.len() {
            let s = (&self.consensus - &self.duals[i]) * (-self.rho);
            let sol = solve_subproblem(&prox, problem.component(i), &s, opts, &self.locals[i])?;
            self.locals[i] = sol.x_new;
        }
        let mut avg = Vector::zeros(self.consensus.len());
        for (x, u) in self.locals.iter().zip(&self.duals) {
            avg += x;
            avg += u;
        }
        avg /= n;
        let weight = n * self.rho;
        self.consensus = match *problem.regularizer() {
            Regularizer::Ridge { lambda } => avg * (weight / (lambda + weight)),
            Regularizer::ElasticNet { l1, l2 } => avg.map(|v| soft_threshold(weight * v, l1) / (l2 + weight)),
        };
        for (x, u) in self.locals.iter().zip(self.duals.iter_mut()) {
            *u += x - &self.consensus;
        }
        Ok(())
    }

    pub fn locals(&self) -> &[Vector] {
        &self.locals
    }

    pub fn duals(&self) -> &[Vector] {
        &self.duals
    }

    pub fn consensus(&self) -> &Vector {
        &self.consensus
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// `max_i ‖x_i − z‖`.
    pub fn primal_residual(&self) -> f64 {
        self.locals
            .iter()
            .map(|x| (x - &self.consensus).norm())
            .fold(0.0, f64::max)
    }
}

pub fn run_admm(
    problem: &CompositeProblem,
    rho: f64,
    rounds: usize,
    x0: &Vector,
    opts: &InnerOptions,
) -> Result<RunTrace> {
    let mut trace = RunTrace::new(format!("admm-{rho}"));
    run_admm_observed(problem, rho, rounds, x0, opts, |o| trace.push(&o))?;
    Ok(trace)
}

/// Each round costs `2n` messages: `z` down to every worker and `x_i` back up.
pub fn run_admm_observed<F>(
    problem: &CompositeProblem,
    rho: f64,
    rounds: usize,
    x0: &Vector,
    opts: &InnerOptions,
    mut observe: F,
) -> Result<AdmmState>
where
    F: FnMut(Observation<'_>),
{
    let mut state = AdmmState::init(problem, x0, rho)?;
    let per_round = 2 * problem.n_components() as u64;
    observe(Observation {
        t: 0,
        index: None,
        iterate: &state.consensus,
        locals: &state.locals,
        f_star: None,
        messages: 0,
    });
    for t in 1..=rounds {
        state.round(problem, opts)?;
        observe(Observation {
            t,
            index: None,
            iterate: &state.consensus,
            locals: &state.locals,
            f_star: None,
            messages: per_round * t as u64,
        });
    }
    Ok(state)
}
