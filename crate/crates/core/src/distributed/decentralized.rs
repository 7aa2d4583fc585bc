use super::{build_metropolis_transitions, CommLedger, Graph, LocalState, Party};
use crate::engine::certificate;
use crate::error::{check_dim, Error, Result};
use crate::linalg::Vector;
use crate::problem::CompositeProblem;
use crate::schedule::IndexSchedule;
use crate::subproblem::{solve_subproblem, InnerOptions};
use crate::trace::{Observation, RunTrace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DecentralizedConfig {
    /// Node holding the token before the first hop.
    pub start: usize,
    /// Seed of the token's random walk.
    pub seed: u64,
    /// Check every round that the token sum matches the nodes' gradients and
    /// that no node other than the token's recipient changed.
    pub audit: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecentralizedRun {
    pub trace: RunTrace,
    pub ledger: CommLedger,
    /// Largest `‖ḡ − Σ g_i‖∞` seen, when auditing.
    pub max_token_drift: Option<f64>,
}

/// Information carried from node to node.
struct Token {
    x0: Vector,
    g_bar: Vector,
    location: usize,
}

/// The token schedule used by the simulator: Metropolis chain on `graph`.
pub fn token_schedule(graph: &Graph, cfg: &DecentralizedConfig) -> Result<IndexSchedule> {
    IndexSchedule::markov(build_metropolis_transitions(graph)?, cfg.start, cfg.seed)
}

pub fn run_decentralized(
    problem: &CompositeProblem,
    graph: &Graph,
    cfg: &DecentralizedConfig,
    iterations: usize,
    x0: &Vector,
    opts: &InnerOptions,
) -> Result<DecentralizedRun> {
    let mut trace = RunTrace::new("dist-stochalm");
    let (ledger, max_token_drift) =
        run_decentralized_observed(problem, graph, cfg, iterations, x0, opts, |o| trace.push(&o))?;
    Ok(DecentralizedRun {
        trace,
        ledger,
        max_token_drift,
    })
}

pub fn run_decentralized_observed<F>(
    problem: &CompositeProblem,
    graph: &Graph,
    cfg: &DecentralizedConfig,
    iterations: usize,
    x0: &Vector,
    opts: &InnerOptions,
    mut observe: F,
) -> Result<(CommLedger, Option<f64>)>
where
    F: FnMut(Observation<'_>),
{
    check_dim(problem.dim(), x0.len())?;
    let n = problem.n_components();
    if graph.n_nodes() != n {
        return Err(Error::InvalidGraph(format!(
            "graph has {} nodes but the problem has {n} components",
            graph.n_nodes()
        )));
    }
    if cfg.start >= n {
        return Err(Error::InvalidGraph(format!("token start node {} out of range", cfg.start)));
    }
    if iterations == 0 {
        return Err(Error::InvalidParameter("iteration count must be >= 1".into()));
    }
    opts.validate()?;
    let p = problem.dim();
    let mut walk = token_schedule(graph, cfg)?.stream();
    let mut ledger = CommLedger::new();

    let mut nodes = Vec::with_capacity(n);
    for c in problem.components() {
        nodes.push(LocalState {
            anchor: x0.clone(),
            grad: c.gradient(x0)?,
            value: c.eval(x0)?,
        });
    }
    // collect ḡ: one contribution per node
    let mut token = Token {
        x0: x0.clone(),
        g_bar: Vector::zeros(p),
        location: cfg.start,
    };
    for (i, node) in nodes.iter().enumerate() {
        token.g_bar += &node.grad;
        ledger.send(0, Party::Node(i), Party::Node(cfg.start), p);
    }

    // probe-side copies for observers; never read by the protocol
    let mut anchors: Vec<Vector> = nodes.iter().map(|s| s.anchor.clone()).collect();
    let mut grads: Vec<Vector> = nodes.iter().map(|s| s.grad.clone()).collect();
    let mut values: Vec<f64> = nodes.iter().map(|s| s.value).collect();
    let mut max_drift = if cfg.audit { Some(0.0_f64) } else { None };

    observe(Observation {
        t: 0,
        index: None,
        iterate: &token.x0,
        locals: &anchors,
        f_star: None,
        messages: ledger.total_messages(),
    });

    for round in 1..=iterations {
        let j = walk.next_index();
        debug_assert!(j == token.location || graph.has_edge(token.location, j));
        ledger.hop(round, token.location, j, 2 * p);
        token.location = j;

        let snapshot = cfg.audit.then(|| nodes.clone());

        let node = &mut nodes[j];
        let s = &token.g_bar - &node.grad;
        let sol = solve_subproblem(problem.regularizer(), problem.component(j), &s, opts, &node.anchor)?;
        node.anchor.copy_from(&sol.x_new);
        node.value = problem.component(j).eval(&sol.x_new)?;
        token.g_bar = s + &sol.g_new;
        node.grad = sol.g_new;
        token.x0 = sol.x_new;

        anchors[j].copy_from(&nodes[j].anchor);
        grads[j].copy_from(&nodes[j].grad);
        values[j] = nodes[j].value;

        if let Some(before) = snapshot {
            let others_changed = before
                .iter()
                .zip(&nodes)
                .enumerate()
                .any(|(i, (a, b))| i != j && a != b);
            if others_changed {
                return Err(Error::InvalidParameter(format!(
                    "round {round}: a node other than {j} changed state"
                )));
            }
            let mut sum = Vector::zeros(p);
            for node in &nodes {
                sum += &node.grad;
            }
            let drift = (&token.g_bar - sum).amax();
            max_drift = max_drift.map(|m| m.max(drift));
        }

        let f_star = certificate(problem, &anchors, &grads, &values, &token.x0);
        observe(Observation {
            t: round,
            index: Some(j),
            iterate: &token.x0,
            locals: &anchors,
            f_star: Some(f_star),
            messages: ledger.total_messages(),
        });
    }
    Ok((ledger, max_drift))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::problem::{LossComponent, Regularizer};

    #[test]
    fn hops_match_rounds() {
        let c = LossComponent::quadratic(Matrix::from_element(1, 1, 1.0), Vector::from_element(1, 2.0), 3)
            .unwrap();
        let p = CompositeProblem::new(Regularizer::ridge(1.0).unwrap(), vec![c; 3]).unwrap();
        let g = Graph::path(3).unwrap();
        let cfg = DecentralizedConfig {
            audit: true,
            ..Default::default()
        };
        let run = run_decentralized(&p, &g, &cfg, 25, &Vector::zeros(1), &InnerOptions::default()).unwrap();
        assert_eq!(run.ledger.hops(), 25);
        assert_eq!(run.ledger.total_messages(), 25 + 3);
        assert!(run.max_token_drift.unwrap() <= 1e-12);
        // consecutive indices are neighbors or repeats
        let idx = run.trace.indices();
        for w in idx.windows(2) {
            assert!(w[0] == w[1] || g.has_edge(w[0], w[1]));
        }
    }

    #[test]
    fn rejects_wrong_graph_size() {
        let c = LossComponent::quadratic(Matrix::from_element(1, 1, 1.0), Vector::from_element(1, 2.0), 2)
            .unwrap();
        let p = CompositeProblem::new(Regularizer::ridge(1.0).unwrap(), vec![c; 2]).unwrap();
        let g = Graph::path(3).unwrap();
        assert!(run_decentralized(&p, &g, &Default::default(), 5, &Vector::zeros(1), &InnerOptions::default()).is_err());
    }
}
