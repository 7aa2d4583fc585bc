use crate::distributed::{token_schedule, CommLedger, DecentralizedConfig, Graph};
use crate::error::{check_dim, Error, Result};
use crate::linalg::Vector;
use crate::problem::CompositeProblem;
use crate::trace::{Observation, RunTrace};

/// Step-size sequence `α^(t)`, with `t` counted from zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepRule {
    Constant(f64),
    /// `α0 / (t + 1)`
    OneOverT(f64),
}

impl StepRule {
    pub fn at(&self, t: usize) -> f64 {
        match *self {
            StepRule::Constant(a) => a,
            StepRule::OneOverT(a) => a / (t as f64 + 1.0),
        }
    }

    fn base(&self) -> f64 {
        match *self {
            StepRule::Constant(a) | StepRule::OneOverT(a) => a,
        }
    }
}

/// Largest smoothness constant among `h_i = f_i + f0/n` (ignoring the `ℓ1` kink).
pub fn token_sgd_lipschitz(problem: &CompositeProblem) -> f64 {
    let n = problem.n_components() as f64;
    problem
        .components()
        .iter()
        .map(|c| c.lipschitz())
        .fold(0.0, f64::max)
        + problem.regularizer().l2_weight() / n
}

/// Token-walk subgradient method on `Σ h_i` with `h_i = f_i + f0/n`, unconstrained.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenSgdState {
    x: Vector,
    rule: StepRule,
    t: usize,
}

impl TokenSgdState {
    pub fn new(x0: Vector, rule: StepRule) -> Result<Self> {
        let a = rule.base();
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidParameter(format!("initial step must be positive, got {a}")));
        }
        Ok(TokenSgdState { x: x0, rule, t: 0 })
    }

    /// `x ← x − α^(t) g` for a given subgradient `g`.
    pub fn step_with(&mut self, g: &Vector) {
        let alpha = self.rule.at(self.t);
        self.x.axpy(-alpha, g, 1.0);
        self.t += 1;
    }

    pub fn step(&mut self, problem: &CompositeProblem, j: usize) -> Result<()> {
        let g = self.subgradient(problem, j)?;
        self.step_with(&g);
        Ok(())
    }

    /// `∇f_j(x) + (λ1/n) sign(x) + (λ2/n) x`, taking `sign(0) = 0`.
    pub fn subgradient(&self, problem: &CompositeProblem, j: usize) -> Result<Vector> {
        let n = problem.n_components() as f64;
        let f0 = problem.regularizer();
        let mut g = problem.component(j).gradient(&self.x)?;
        let (l1, l2) = (f0.l1_weight() / n, f0.l2_weight() / n);
        for k in 0..g.len() {
            let xk = self.x[k];
            let sign = if xk > 0.0 {
                1.0
            } else if xk < 0.0 {
                -1.0
            } else {
                0.0
            };
            g[k] += l1 * sign + l2 * xk;
        }
        Ok(g)
    }

    pub fn x(&self) -> &Vector {
        &self.x
    }

    pub fn t(&self) -> usize {
        self.t
    }
}

pub fn run_token_sgd(
    problem: &CompositeProblem,
    graph: &Graph,
    cfg: &DecentralizedConfig,
    rule: StepRule,
    iterations: usize,
    x0: &Vector,
) -> Result<(RunTrace, CommLedger)> {
    let name = match rule {
        StepRule::Constant(_) => "sgd-constant",
        StepRule::OneOverT(_) => "sgd-1/t",
    };
    let mut trace = RunTrace::new(name);
    let ledger = run_token_sgd_observed(problem, graph, cfg, rule, iterations, x0, |o| trace.push(&o))?;
    Ok((trace, ledger))
}

/// The token carries `x` along the same Metropolis walk as the decentralized StochaLM.
pub fn run_token_sgd_observed<F>(
    problem: &CompositeProblem,
    graph: &Graph,
    cfg: &DecentralizedConfig,
    rule: StepRule,
    iterations: usize,
    x0: &Vector,
    mut observe: F,
) -> Result<CommLedger>
where
    F: FnMut(Observation<'_>),
{
    check_dim(problem.dim(), x0.len())?;
    if graph.n_nodes() != problem.n_components() {
        return Err(Error::InvalidGraph(format!(
            "graph has {} nodes but the problem has {} components",
            graph.n_nodes(),
            problem.n_components()
        )));
    }
    let mut walk = token_schedule(graph, cfg)?.stream();
    let mut state = TokenSgdState::new(x0.clone(), rule)?;
    let mut ledger = CommLedger::new();
    let mut location = cfg.start;
    observe(Observation {
        t: 0,
        index: None,
        iterate: &state.x,
        locals: &[],
        f_star: None,
        messages: 0,
    });
    for t in 1..=iterations {
        let j = walk.next_index();
        ledger.hop(t, location, j, problem.dim());
        location = j;
        state.step(problem, j)?;
        observe(Observation {
            t,
            index: Some(j),
            iterate: &state.x,
            locals: &[],
            f_star: None,
            messages: ledger.total_messages(),
        });
    }
    Ok(ledger)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_keeps_x() {
        let mut s = TokenSgdState::new(Vector::from_element(2, 0.7), StepRule::Constant(0.3)).unwrap();
        s.step_with(&Vector::zeros(2));
        assert_eq!(s.x(), &Vector::from_element(2, 0.7));
    }

    #[test]
    fn scalar_quadratic_step() {
        // h = (1/2)(x − 2)², gradient −2 at 0
        let mut s = TokenSgdState::new(Vector::zeros(1), StepRule::Constant(0.1)).unwrap();
        s.step_with(&Vector::from_element(1, -2.0));
        assert!((s.x()[0] - 0.2).abs() < 1e-15);
    }

    #[test]
    fn harmonic_steps() {
        let r = StepRule::OneOverT(1.0);
        let got: Vec<f64> = (0..4).map(|t| r.at(t)).collect();
        assert_eq!(got, vec![1.0, 0.5, 1.0 / 3.0, 0.25]);
        assert!(TokenSgdState::new(Vector::zeros(1), StepRule::Constant(0.0)).is_err());
    }
}
