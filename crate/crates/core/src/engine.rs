//! The StochaLM iteration.
//!
//! Each round picks a component `j`, keeps `f0` and `f_j` exact, replaces
//! every other `f_i` by its stored linearization at anchor `x_i`, and solves
//! the resulting subproblem. The minimizer becomes the new anchor of `j` and
//! the new iterate.

use crate::error::{check_dim, Result};
use crate::linalg::Vector;
use crate::problem::CompositeProblem;
use crate::schedule::IndexSchedule;
use crate::subproblem::{solve_subproblem, InnerOptions, SubproblemSolution};
use crate::trace::{Observation, RunTrace};

/// Anchors, stored gradients and their running sum.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    anchors: Vec<Vector>,
    stored_grads: Vec<Vector>,
    /// `f_i(x_i)` at each anchor, cached for the certificate.
    anchor_values: Vec<f64>,
    grad_sum: Vector,
    current: Vector,
    t: usize,
    f_star: Option<f64>,
}

/// What happened in one round.
#[derive(Debug, Clone, PartialEq)]
pub struct StepInfo {
    pub index: usize,
    pub residual: f64,
    pub inner_iters: usize,
    pub f_star: f64,
}

impl SolverState {
    /// All anchors at `x0` with `g_i = ∇f_i(x0)`.
    pub fn init(problem: &CompositeProblem, x0: &Vector) -> Result<Self> {
        check_dim(problem.dim(), x0.len())?;
        let mut stored_grads = Vec::with_capacity(problem.n_components());
        let mut anchor_values = Vec::with_capacity(problem.n_components());
        let mut grad_sum = problem.zeros();
        for c in problem.components() {
            let g = c.gradient(x0)?;
            grad_sum += &g;
            stored_grads.push(g);
            anchor_values.push(c.eval(x0)?);
        }
        Ok(SolverState {
            anchors: vec![x0.clone(); problem.n_components()],
            stored_grads,
            anchor_values,
            grad_sum,
            current: x0.clone(),
            t: 0,
            f_star: None,
        })
    }

    /// One round with component `j` (zero-based).
    pub fn step(
        &mut self,
        problem: &CompositeProblem,
        j: usize,
        opts: &InnerOptions,
    ) -> Result<StepInfo> {
        if j >= self.anchors.len() {
            return Err(crate::Error::InvalidParameter(format!(
                "component index {j} out of range for n = {}",
                self.anchors.len()
            )));
        }
        let s = &self.grad_sum - &self.stored_grads[j];
        let sol = solve_subproblem(
            problem.regularizer(),
            problem.component(j),
            &s,
            opts,
            &self.anchors[j],
        )?;
        let value = problem.component(j).eval(&sol.x_new)?;
        Ok(self.absorb(problem, j, s, sol, value))
    }

    /// Installs a solved subproblem for component `j`; `s` is `Σ_{i≠j} g_i`.
    pub(crate) fn absorb(
        &mut self,
        problem: &CompositeProblem,
        j: usize,
        s: Vector,
        sol: SubproblemSolution,
        value: f64,
    ) -> StepInfo {
        self.grad_sum = s + &sol.g_new;
        self.stored_grads[j] = sol.g_new;
        self.anchor_values[j] = value;
        self.anchors[j].copy_from(&sol.x_new);
        self.current = sol.x_new;
        self.t += 1;
        let f_star = certificate(
            problem,
            &self.anchors,
            &self.stored_grads,
            &self.anchor_values,
            &self.current,
        );
        self.f_star = Some(f_star);
        StepInfo {
            index: j,
            residual: sol.residual,
            inner_iters: sol.inner_iters,
            f_star,
        }
    }

    pub fn anchors(&self) -> &[Vector] {
        &self.anchors
    }

    pub fn stored_grads(&self) -> &[Vector] {
        &self.stored_grads
    }

    pub fn grad_sum(&self) -> &Vector {
        &self.grad_sum
    }

    pub fn current(&self) -> &Vector {
        &self.current
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn f_star(&self) -> Option<f64> {
        self.f_star
    }

    /// `Σ g_i` recomputed from scratch.
    pub fn recomputed_grad_sum(&self) -> Vector {
        let mut sum = Vector::zeros(self.grad_sum.len());
        for g in &self.stored_grads {
            sum += g;
        }
        sum
    }

    /// `‖ḡ − Σ g_i‖∞` between the running and recomputed sums.
    pub fn grad_sum_drift(&self) -> f64 {
        (&self.grad_sum - self.recomputed_grad_sum()).amax()
    }

    /// Replaces the running sum with the recomputed one.
    pub fn refresh_grad_sum(&mut self) {
        self.grad_sum = self.recomputed_grad_sum();
    }

    /// `f0(z) + Σ_i [f_i(x_i) + ⟨g_i, z − x_i⟩]`, a global minorant of `F`.
    pub fn lower_model(&self, problem: &CompositeProblem, z: &Vector) -> Result<f64> {
        check_dim(problem.dim(), z.len())?;
        Ok(certificate(
            problem,
            &self.anchors,
            &self.stored_grads,
            &self.anchor_values,
            z,
        ))
    }

    pub(crate) fn observation(&self, index: Option<usize>, messages: u64) -> Observation<'_> {
        Observation {
            t: self.t,
            index,
            iterate: &self.current,
            locals: &self.anchors,
            f_star: self.f_star,
            messages,
        }
    }
}

/// The surrogate `f0(z) + Σ_i [f_i(x_i) + ⟨g_i, z − x_i⟩]`. Evaluated at the
/// latest iterate it is the certificate `f_*^(t)`; the term of the component
/// just solved reduces to `f_j(z)` since its anchor is `z`.
pub(crate) fn certificate(
    problem: &CompositeProblem,
    anchors: &[Vector],
    grads: &[Vector],
    values: &[f64],
    z: &Vector,
) -> f64 {
    let mut total = problem.regularizer().eval(z);
    for ((a, g), v) in anchors.iter().zip(grads).zip(values) {
        let mut dot = 0.0;
        for k in 0..z.len() {
            dot += g[k] * (z[k] - a[k]);
        }
        total += v + dot;
    }
    total
}

/// Runs `iterations` rounds with indices from `schedule`.
pub fn run(
    problem: &CompositeProblem,
    schedule: &IndexSchedule,
    iterations: usize,
    x0: &Vector,
    opts: &InnerOptions,
) -> Result<RunTrace> {
    check_schedule(problem, schedule)?;
    let mut trace = RunTrace::new("stochalm");
    run_observed(problem, schedule.stream(), iterations, x0, opts, |o| trace.push(&o))?;
    Ok(trace)
}

pub(crate) fn check_schedule(problem: &CompositeProblem, schedule: &IndexSchedule) -> Result<()> {
    if schedule.n_indices() != problem.n_components() {
        return Err(crate::Error::InvalidSchedule(format!(
            "schedule ranges over {} indices but the problem has {} components",
            schedule.n_indices(),
            problem.n_components()
        )));
    }
    Ok(())
}

/// Runs `iterations` rounds over an arbitrary index stream, reporting each
/// round (and the initial state) to `observe`. Returns the final state.
pub fn run_observed<I, F>(
    problem: &CompositeProblem,
    indices: I,
    iterations: usize,
    x0: &Vector,
    opts: &InnerOptions,
    mut observe: F,
) -> Result<SolverState>
where
    I: IntoIterator<Item = usize>,
    F: FnMut(Observation<'_>),
{
    if iterations == 0 {
        return Err(crate::Error::InvalidParameter("iteration count must be >= 1".into()));
    }
    opts.validate()?;
    let mut state = SolverState::init(problem, x0)?;
    observe(state.observation(None, 0));
    for j in indices.into_iter().take(iterations) {
        state.step(problem, j, opts)?;
        observe(state.observation(Some(j), 0));
    }
    Ok(state)
}
