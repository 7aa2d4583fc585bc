use super::{CommLedger, LocalState, Party};
use crate::engine::{certificate, check_schedule};
use crate::error::{check_dim, Error, Result};
use crate::linalg::Vector;
use crate::problem::CompositeProblem;
use crate::schedule::IndexSchedule;
use crate::subproblem::{solve_subproblem, InnerOptions};
use crate::trace::{Observation, RunTrace};

/// Central node: stores every node's latest gradient and the last iterate.
struct Central {
    grads: Vec<Vector>,
    grad_sum: Vector,
    x0: Vector,
}

/// Simulates the star-network variant. The ledger counts `n` initialization
/// uploads and two messages per round.
pub fn run_federated(
    problem: &CompositeProblem,
    schedule: &IndexSchedule,
    iterations: usize,
    x0: &Vector,
    opts: &InnerOptions,
) -> Result<(RunTrace, CommLedger)> {
    check_schedule(problem, schedule)?;
    let mut trace = RunTrace::new("fed-stochalm");
    let ledger = run_federated_observed(problem, schedule.stream(), iterations, x0, opts, |o| {
        trace.push(&o)
    })?;
    Ok((trace, ledger))
}

pub fn run_federated_observed<I, F>(
    problem: &CompositeProblem,
    indices: I,
    iterations: usize,
    x0: &Vector,
    opts: &InnerOptions,
    mut observe: F,
) -> Result<CommLedger>
where
    I: IntoIterator<Item = usize>,
    F: FnMut(Observation<'_>),
{
    check_dim(problem.dim(), x0.len())?;
    if iterations == 0 {
        return Err(Error::InvalidParameter("iteration count must be >= 1".into()));
    }
    opts.validate()?;
    let n = problem.n_components();
    let p = problem.dim();
    let mut ledger = CommLedger::new();

    // each node linearizes at x0 and uploads its gradient
    let mut nodes = Vec::with_capacity(n);
    for (i, c) in problem.components().iter().enumerate() {
        nodes.push(LocalState {
            anchor: x0.clone(),
            grad: c.gradient(x0)?,
            value: c.eval(x0)?,
        });
        ledger.send(0, Party::Node(i), Party::Central, p);
    }
    let mut central = Central {
        grads: nodes.iter().map(|s| s.grad.clone()).collect(),
        grad_sum: Vector::zeros(p),
        x0: x0.clone(),
    };
    for g in &central.grads {
        central.grad_sum += g;
    }

    let mut anchors: Vec<Vector> = nodes.iter().map(|s| s.anchor.clone()).collect();
    let mut values: Vec<f64> = nodes.iter().map(|s| s.value).collect();
    observe(Observation {
        t: 0,
        index: None,
        iterate: &central.x0,
        locals: &anchors,
        f_star: None,
        messages: ledger.total_messages(),
    });

    for (round, j) in (1..=iterations).zip(indices) {
        if j >= n {
            return Err(Error::InvalidParameter(format!("node index {j} out of range")));
        }
        // central → j: Σ_{i≠j} g_i
        let s = &central.grad_sum - &central.grads[j];
        ledger.send(round, Party::Central, Party::Node(j), p);

        let node = &mut nodes[j];
        let sol = solve_subproblem(
            problem.regularizer(),
            problem.component(j),
            &s,
            opts,
            &node.anchor,
        )?;
        node.anchor.copy_from(&sol.x_new);
        node.grad.copy_from(&sol.g_new);
        node.value = problem.component(j).eval(&sol.x_new)?;
        // j → central: (x_j, g_j)
        ledger.send(round, Party::Node(j), Party::Central, 2 * p);

        central.grad_sum = s + &sol.g_new;
        central.grads[j] = sol.g_new;
        central.x0 = sol.x_new;

        // global probe, outside the protocol
        anchors[j].copy_from(&nodes[j].anchor);
        values[j] = nodes[j].value;
        let f_star = certificate(problem, &anchors, &central.grads, &values, &central.x0);
        observe(Observation {
            t: round,
            index: Some(j),
            iterate: &central.x0,
            locals: &anchors,
            f_star: Some(f_star),
            messages: ledger.total_messages(),
        });
    }
    Ok(ledger)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::problem::{LossComponent, Regularizer};

    #[test]
    fn single_node_returns_minimizer() {
        let c = LossComponent::quadratic(Matrix::from_element(1, 1, 1.0), Vector::from_element(1, 2.0), 1)
            .unwrap();
        let p = CompositeProblem::new(Regularizer::ridge(1.0).unwrap(), vec![c]).unwrap();
        let sched = IndexSchedule::uniform(1, 0).unwrap();
        let (trace, ledger) = run_federated(&p, &sched, 1, &Vector::zeros(1), &InnerOptions::default()).unwrap();
        assert!((trace.final_iterate().unwrap()[0] - 1.0).abs() < 1e-14);
        assert_eq!(ledger.total_messages(), 2 + 1);
        assert_eq!(ledger.round(1).unwrap().messages, 2);
    }
}
