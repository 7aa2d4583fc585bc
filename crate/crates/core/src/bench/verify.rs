use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{ExperimentConfig, Scenario};
use super::dataset::generate_dataset;
use crate::distributed::{
    build_metropolis_transitions, run_decentralized, run_federated, token_schedule, DecentralizedConfig, Graph,
};
use crate::engine::{run_observed, SolverState};
use crate::error::Result;
use crate::linalg::{Matrix, Vector};
use crate::problem::{CompositeProblem, LossComponent, Regularizer};
use crate::reference::solve_reference;
use crate::schedule::IndexSchedule;
use crate::subproblem::InnerOptions;

/// Outcome of one invariant suite.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl SuiteOutcome {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        SuiteOutcome { name, passed, detail }
    }
}

fn small_config(scenario: Scenario, seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        n: 8,
        p: 20,
        m: 4,
        seed,
        ..ExperimentConfig::default_for(scenario)
    }
}

/// Linearizations of every loss kind never exceed the loss.
pub fn minorant_suite(samples: usize, seed: u64) -> Result<SuiteOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::NEG_INFINITY;
    let mut failures = 0usize;
    for k in 0..samples {
        let p = rng.random_range(1..6);
        let m = rng.random_range(1..5);
        let a = Matrix::from_fn(m, p, |_, _| rng.random_range(-2.0..2.0));
        let y = Vector::from_fn(m, |_, _| rng.random_range(-2.0..2.0));
        let comp = if k % 2 == 0 {
            LossComponent::quadratic(a, y, 1 + k % 5)?
        } else {
            LossComponent::huber(a, y, 1 + k % 5, rng.random_range(0.05..2.0))?
        };
        let anchor = Vector::from_fn(p, |_, _| rng.random_range(-3.0..3.0));
        let probe = Vector::from_fn(p, |_, _| rng.random_range(-3.0..3.0));
        let value = comp.eval(&probe)?;
        let lin = comp.eval(&anchor)? + comp.gradient(&anchor)?.dot(&(&probe - &anchor));
        let gap = lin - value;
        worst = worst.max(gap);
        if gap > 1e-12 * (1.0 + value.abs()) {
            failures += 1;
        }
    }
    Ok(SuiteOutcome::new(
        "minorant",
        failures == 0,
        format!("{samples} triples, {failures} violations, max excess {worst:e}"),
    ))
}

/// Certificate is monotone, below `F*`, and dominates the strong-convexity gap.
pub fn certificate_suite(iterations: usize, seed: u64) -> Result<SuiteOutcome> {
    let cfg = small_config(Scenario::CentralElasticNet, seed);
    let problem = generate_dataset(&cfg)?.problem;
    let reference = solve_reference(&problem)?;
    let mu = problem.regularizer().mu();
    let sched = IndexSchedule::uniform(cfg.n, seed)?;
    let mut history: Vec<(Vector, f64)> = Vec::with_capacity(iterations + 1);
    run_observed(
        &problem,
        sched.stream(),
        iterations,
        &problem.zeros(),
        &InnerOptions::default(),
        |o| history.push((o.iterate.clone(), o.f_star.unwrap_or(f64::NEG_INFINITY))),
    )?;
    let mut problems = Vec::new();
    for t in 1..history.len() {
        let (prev, cur) = (history[t - 1].1, history[t].1);
        if cur < prev - 1e-9 {
            problems.push(format!("decrease at t={t}"));
        }
        if cur > reference.f_star + 1e-8 {
            problems.push(format!("above F* at t={t}"));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    for _ in 0..100 {
        let t = rng.random_range(1..history.len() - 1);
        let s = rng.random_range(t + 1..history.len());
        let lhs = 0.5 * mu * (&history[s].0 - &history[t].0).norm_squared();
        if lhs > history[s].1 - history[t].1 + 1e-8 {
            problems.push(format!("strong-convexity gap violated for (s, t) = ({s}, {t})"));
        }
    }
    Ok(SuiteOutcome::new(
        "certificate",
        problems.is_empty(),
        if problems.is_empty() {
            format!("{iterations} iterations, final gap {:e}", reference.f_star - history[iterations].1)
        } else {
            problems.join("; ")
        },
    ))
}

/// Centralized, federated and token-passing runs agree on a shared index stream.
pub fn equivalence_suite(rounds: usize, seed: u64) -> Result<SuiteOutcome> {
    let cfg = small_config(Scenario::DecElasticNet, seed);
    let problem = generate_dataset(&cfg)?.problem;
    let graph = Graph::ring(cfg.n)?;
    let dc = DecentralizedConfig {
        seed,
        ..Default::default()
    };
    let sched = token_schedule(&graph, &dc)?;
    let opts = InnerOptions::default();
    let x0 = problem.zeros();
    let mut central = Vec::with_capacity(rounds + 1);
    run_observed(&problem, sched.stream(), rounds, &x0, &opts, |o| central.push(o.iterate.clone()))?;
    let (fed, _) = run_federated(&problem, &sched, rounds, &x0, &opts)?;
    let dist = run_decentralized(&problem, &graph, &dc, rounds, &x0, &opts)?;
    let mut worst = 0.0f64;
    for ((c, f), d) in central.iter().zip(fed.iterates()).zip(dist.trace.iterates()) {
        worst = worst.max((c - f).amax()).max((c - d).amax());
    }
    let same_len = central.len() == fed.len() && central.len() == dist.trace.len();
    Ok(SuiteOutcome::new(
        "equivalence",
        same_len && worst <= 1e-12,
        format!("{rounds} rounds, max coordinate gap {worst:e}"),
    ))
}

/// Incremental gradient sum matches the recomputed sum.
pub fn grad_sum_suite(rounds: usize, seed: u64) -> Result<SuiteOutcome> {
    let cfg = small_config(Scenario::FedHuber, seed);
    let problem = generate_dataset(&cfg)?.problem;
    let sched = IndexSchedule::uniform(cfg.n, seed)?;
    let opts = InnerOptions::default();
    let mut state = SolverState::init(&problem, &problem.zeros())?;
    let mut worst = state.grad_sum_drift();
    for j in sched.stream().take(rounds) {
        state.step(&problem, j, &opts)?;
        worst = worst.max(state.grad_sum_drift());
    }
    Ok(SuiteOutcome::new(
        "grad-sum",
        worst <= 1e-10,
        format!("{rounds} rounds, max drift {worst:e}"),
    ))
}

/// Metropolis matrices are row-stochastic and symmetric on several topologies.
pub fn metropolis_suite(seed: u64) -> Result<SuiteOutcome> {
    let mut problems = Vec::new();
    for n in [2, 5, 12, 30] {
        let graphs = [
            ("path", Graph::path(n)?),
            ("ring", Graph::ring(n)?),
            ("star", Graph::star(n)?),
            ("random", Graph::random_connected(n, 0.2, seed)?),
        ];
        for (name, g) in graphs {
            let p = build_metropolis_transitions(&g)?;
            let rows_ok = p.matrix().row_iter().all(|r| (r.sum() - 1.0).abs() <= 1e-12);
            if !rows_ok || !p.is_symmetric(1e-15) {
                problems.push(format!("{name}({n})"));
            }
        }
    }
    Ok(SuiteOutcome::new(
        "metropolis",
        problems.is_empty(),
        if problems.is_empty() {
            "16 graphs".into()
        } else {
            format!("bad matrices: {}", problems.join(", "))
        },
    ))
}

/// With a single loss, one step solves the whole problem.
pub fn single_component_suite(instances: usize, seed: u64) -> Result<SuiteOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for k in 0..instances {
        let p = rng.random_range(1..=20);
        let m = rng.random_range(1..=20);
        let a = Matrix::from_fn(m, p, |_, _| rng.random_range(-1.0..1.0));
        let y = Vector::from_fn(m, |_, _| rng.random_range(-1.0..1.0));
        let reg = if k % 2 == 0 {
            Regularizer::ridge(rng.random_range(0.01..1.0))?
        } else {
            Regularizer::elastic_net(rng.random_range(0.0..0.05), rng.random_range(0.01..1.0))?
        };
        let problem = CompositeProblem::new(reg, vec![LossComponent::quadratic(a, y, 1)?])?;
        let reference = solve_reference(&problem)?;
        let norm = reference.x_star.norm();
        if norm == 0.0 {
            continue;
        }
        let mut state = SolverState::init(&problem, &problem.zeros())?;
        state.step(&problem, 0, &InnerOptions::default())?;
        worst = worst.max((state.current() - &reference.x_star).norm() / norm);
    }
    Ok(SuiteOutcome::new(
        "single-component",
        worst <= 1e-8,
        format!("{instances} instances, max relative error {worst:e}"),
    ))
}

/// Runs every suite at a modest size.
pub fn run_all(seed: u64) -> Result<Vec<SuiteOutcome>> {
    Ok(vec![
        single_component_suite(20, seed)?,
        minorant_suite(100_000, seed)?,
        certificate_suite(500, seed)?,
        equivalence_suite(300, seed)?,
        grad_sum_suite(2_000, seed)?,
        metropolis_suite(seed)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_suites_pass() {
        for s in run_all(3).unwrap() {
            assert!(s.passed, "{}: {}", s.name, s.detail);
        }
    }
}
