//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stochalm::bench::{relative_error, run_benchmark, BenchReport, ExperimentConfig, Scenario};
use stochalm::distributed::{
    build_metropolis_transitions, run_decentralized, run_federated, token_schedule, DecentralizedConfig, Graph,
};
use stochalm::engine::SolverState;
use stochalm::parallel::Execution;
use stochalm::{
    run_observed, solve_reference, CompositeProblem, IndexSchedule, InnerOptions, LossComponent, Regularizer, Vector,
};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn uniform_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
}

fn uniform_vector(rng: &mut ChaCha8Rng, len: usize, scale: f64) -> DVector<f64> {
    DVector::from_fn(len, |_, _| rng.random_range(-scale..scale))
}

/// Independent oracle for ridge least squares: `(λI + AᵀA/n) x = Aᵀy/n`.
fn ridge_oracle(a: &DMatrix<f64>, y: &DVector<f64>, lambda: f64) -> DVector<f64> {
    let p = a.ncols();
    let h = a.transpose() * a + DMatrix::identity(p, p) * lambda;
    h.cholesky().unwrap().solve(&(a.transpose() * y))
}

fn c1_single_component() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    for k in 0..50 {
        let p = rng.random_range(1..=20);
        let m = rng.random_range(1..=20);
        let a = uniform_matrix(&mut rng, m, p);
        let y = uniform_vector(&mut rng, m, 2.0);
        let elastic = k % 2 == 1;
        let (reg, x_star) = if elastic {
            let reg = Regularizer::elastic_net(rng.random_range(0.0..0.05), rng.random_range(0.05..1.0)).unwrap();
            let problem = CompositeProblem::new(reg, vec![LossComponent::quadratic(a.clone(), y.clone(), 1).unwrap()]).unwrap();
            (reg, solve_reference(&problem).unwrap().x_star)
        } else {
            let lambda = rng.random_range(0.05..1.0);
            (Regularizer::ridge(lambda).unwrap(), ridge_oracle(&a, &y, lambda))
        };
        let problem = CompositeProblem::new(reg, vec![LossComponent::quadratic(a, y, 1).unwrap()]).unwrap();
        let mut state = SolverState::init(&problem, &problem.zeros()).unwrap();
        state.step(&problem, 0, &InnerOptions::default()).unwrap();
        let norm = x_star.norm();
        if norm > 0.0 {
            worst = worst.max((state.current() - &x_star).norm() / norm);
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= 1e-8 && elapsed < Duration::from_secs(5),
        format!("50 instances, max relative error {worst:.2e}, {:.2}s", elapsed.as_secs_f64()),
    )
}

/// Iterates and certificates of the default elastic-net instance for 5 seeds.
fn certificate_runs() -> (f64, f64, Vec<Vec<(Vector, f64)>>) {
    let cfg = ExperimentConfig::default_for(Scenario::CentralElasticNet);
    let dataset = stochalm::bench::generate_dataset(&cfg).unwrap();
    let problem = &dataset.problem;
    let reference = solve_reference(problem).unwrap();
    let runs = (1..=5)
        .map(|seed| {
            let sched = IndexSchedule::uniform(cfg.n, seed).unwrap();
            let mut hist = Vec::with_capacity(2001);
            run_observed(problem, sched.stream(), 2000, &problem.zeros(), &InnerOptions::default(), |o| {
                if let Some(f) = o.f_star {
                    hist.push((o.iterate.clone(), f));
                }
            })
            .unwrap();
            hist
        })
        .collect();
    (reference.f_star, problem.regularizer().mu(), runs)
}

fn c2_monotone(f_ref: f64, runs: &[Vec<(Vector, f64)>]) -> Outcome {
    let mut worst_drop = f64::NEG_INFINITY;
    let mut worst_excess = f64::NEG_INFINITY;
    for hist in runs {
        for w in hist.windows(2) {
            worst_drop = worst_drop.max(w[0].1 - w[1].1);
        }
        for (_, f) in hist {
            worst_excess = worst_excess.max(f - f_ref);
        }
    }
    outcome(
        worst_drop <= 1e-9 && worst_excess <= 1e-8 && runs.iter().all(|h| h.len() == 2000),
        format!("5 seeds x 2000 iterations, max decrease {worst_drop:.2e}, max f_* - F* {worst_excess:.2e}"),
    )
}

fn c3_strong_convexity_bound(mu: f64, runs: &[Vec<(Vector, f64)>]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut violations = 0;
    let mut worst = f64::NEG_INFINITY;
    for k in 0..100 {
        let hist = &runs[k % runs.len()];
        let t = rng.random_range(0..hist.len() - 1);
        let s = rng.random_range(t + 1..hist.len());
        let lhs = mu / 2.0 * (&hist[s].0 - &hist[t].0).norm_squared();
        let slack = lhs - (hist[s].1 - hist[t].1);
        worst = worst.max(slack);
        if slack > 1e-8 {
            violations += 1;
        }
    }
    outcome(
        violations == 0,
        format!("100 pairs, mu = {mu}, {violations} violations, max excess {worst:.2e}"),
    )
}

fn c4_equivalence() -> Outcome {
    let cfg = ExperimentConfig {
        n: 10,
        ..ExperimentConfig::default_for(Scenario::DecElasticNet)
    };
    let problem = stochalm::bench::generate_dataset(&cfg).unwrap().problem;
    let graph = Graph::ring(10).unwrap();
    let opts = InnerOptions::default();
    let x0 = problem.zeros();
    let mut worst = 0.0f64;
    let mut lengths_ok = true;
    for seed in 0..10 {
        let dc = DecentralizedConfig {
            seed,
            ..Default::default()
        };
        let sched = token_schedule(&graph, &dc).unwrap();
        let mut central = Vec::with_capacity(1001);
        run_observed(&problem, sched.stream(), 1000, &x0, &opts, |o| central.push(o.iterate.clone())).unwrap();
        let (fed, _) = run_federated(&problem, &sched, 1000, &x0, &opts).unwrap();
        let dist = run_decentralized(&problem, &graph, &dc, 1000, &x0, &opts).unwrap();
        lengths_ok &= fed.len() == 1001 && dist.trace.len() == 1001 && central.len() == 1001;
        for ((c, f), d) in central.iter().zip(fed.iterates()).zip(dist.trace.iterates()) {
            worst = worst.max((c - f).amax()).max((c - d).amax());
        }
    }
    outcome(
        lengths_ok && worst <= 1e-12,
        format!("10-node ring, 10 seeds x 1000 rounds, max coordinate gap {worst:.2e}"),
    )
}

fn c5_schedules() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    let mut instances = 0;
    for (k, scenario) in Scenario::ALL.into_iter().cycle().take(15).enumerate() {
        let n = rng.random_range(2..=10);
        let p = rng.random_range(2..=20);
        let cfg = ExperimentConfig {
            n,
            p,
            m: 4,
            lambda: 0.8,
            lambda2: 0.8,
            seed: 5000 + k as u64,
            ..ExperimentConfig::default_for(scenario)
        };
        let problem = stochalm::bench::generate_dataset(&cfg).unwrap().problem;
        let reference = solve_reference(&problem).unwrap();
        if reference.x_star.norm() == 0.0 {
            continue;
        }
        instances += 1;
        let seed = k as u64;
        let weights: Vec<f64> = (1..=n).map(|i| i as f64).collect();
        let schedules = [
            ("uniform", IndexSchedule::uniform(n, seed).unwrap()),
            ("proportional", IndexSchedule::weighted(&weights, seed).unwrap()),
            ("cyclic", IndexSchedule::cyclic(n).unwrap()),
            (
                "markov",
                IndexSchedule::markov(build_metropolis_transitions(&Graph::ring(n).unwrap()).unwrap(), 0, seed).unwrap(),
            ),
        ];
        for (name, sched) in schedules {
            let trace = stochalm::run(&problem, &sched, 200 * n, &problem.zeros(), &InnerOptions::default()).unwrap();
            let err = relative_error(trace.final_iterate().unwrap(), &reference).unwrap();
            worst = worst.max(err);
            if err > 1e-6 {
                failures.push(format!("{scenario} n={n} p={p} {name}: {err:.2e}"));
            }
        }
    }
    outcome(
        failures.is_empty() && instances >= 12,
        if failures.is_empty() {
            format!("{instances} instances x 4 schedules, max error after 200n iterations {worst:.2e}")
        } else {
            failures.join("; ")
        },
    )
}

fn c6_metropolis() -> Outcome {
    let mut worst_dev = 0.0f64;
    let mut bad = Vec::new();
    for n in [4, 11, 30] {
        let graphs = [
            ("path", Graph::path(n).unwrap()),
            ("ring", Graph::ring(n).unwrap()),
            ("star", Graph::star(n).unwrap()),
            ("random", Graph::random_connected(n, 0.1, n as u64).unwrap()),
        ];
        for (name, g) in graphs {
            let p = build_metropolis_transitions(&g).unwrap();
            let m = p.matrix();
            let stochastic = m.row_iter().all(|r| (r.sum() - 1.0).abs() <= 1e-12) && m.iter().all(|&v| v >= 0.0);
            let symmetric = (m - m.transpose()).amax() <= 1e-15;
            let steps = 100_000;
            let mut counts = vec![0usize; n];
            for j in IndexSchedule::markov(p, 0, 606).unwrap().stream().take(steps) {
                counts[j] += 1;
            }
            let dev = counts
                .iter()
                .map(|&c| (c as f64 / steps as f64 - 1.0 / n as f64).abs())
                .fold(0.0, f64::max);
            worst_dev = worst_dev.max(dev);
            if !stochastic || !symmetric || dev > 0.02 {
                bad.push(format!("{name}({n})"));
            }
        }
    }
    outcome(
        bad.is_empty(),
        format!("12 graphs, max visit-fraction deviation {worst_dev:.4}{}", if bad.is_empty() { String::new() } else { format!(", bad: {}", bad.join(", ")) }),
    )
}

fn mean_curve(report: &BenchReport, alg: &str) -> Vec<f64> {
    report.mean_curve(alg).iter().map(|m| m.mean_error).collect()
}

fn c7_orderings() -> Outcome {
    let start = Instant::now();
    let mut notes = Vec::new();
    let mut passed = true;

    let central = run_benchmark(&ExperimentConfig::default_for(Scenario::CentralElasticNet), Execution::Parallel).unwrap();
    let (s, o) = (mean_curve(&central, "stochalm"), mean_curve(&central, "saga-opt"));
    let bad = (50..s.len()).filter(|&t| s[t] > o[t]).count();
    let ratio = (50..s.len()).map(|t| s[t] / o[t]).fold(0.0, f64::max);
    passed &= bad == 0 && s.len() == o.len() && central.passed();
    notes.push(format!("(a) {bad} t>=50 with StochaLM > SAGA(opt), max ratio {ratio:.3}"));

    let fed = run_benchmark(&ExperimentConfig::default_for(Scenario::FedRidge), Execution::Parallel).unwrap();
    let ours = *mean_curve(&fed, "fed-stochalm").last().unwrap();
    let (best_label, best) = fed
        .algorithms()
        .into_iter()
        .filter(|a| a.starts_with("admm"))
        .map(|a| {
            let e = *mean_curve(&fed, &a).last().unwrap();
            (a, e)
        })
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .unwrap();
    passed &= ours < best && fed.passed();
    notes.push(format!("(b) fed-stochalm {ours:.3e} vs best {best_label} {best:.3e}"));

    let dec = run_benchmark(&ExperimentConfig::default_for(Scenario::DecElasticNet), Execution::Parallel).unwrap();
    let d = *mean_curve(&dec, "dist-stochalm").last().unwrap();
    let c = *mean_curve(&dec, "sgd-constant").last().unwrap();
    let h = *mean_curve(&dec, "sgd-1/t").last().unwrap();
    passed &= d < c && c < h && dec.passed();
    notes.push(format!("(c) dist {d:.3e} < sgd-constant {c:.3e} < sgd-1/t {h:.3e}"));

    let elapsed = start.elapsed();
    passed &= elapsed < Duration::from_secs(600);
    notes.push(format!("{:.1}s", elapsed.as_secs_f64()));
    outcome(passed, notes.join("; "))
}

fn c8_gradient_sum() -> Outcome {
    let cfg = ExperimentConfig::default_for(Scenario::FedHuber);
    let problem = stochalm::bench::generate_dataset(&cfg).unwrap().problem;
    let sched = IndexSchedule::uniform(cfg.n, 808).unwrap();
    let opts = InnerOptions::default();
    let mut state = SolverState::init(&problem, &problem.zeros()).unwrap();
    let mut worst = state.grad_sum_drift();
    for j in sched.stream().take(10_000) {
        state.step(&problem, j, &opts).unwrap();
        worst = worst.max(state.grad_sum_drift());
    }
    let graph = Graph::ring(cfg.n).unwrap();
    let dc = DecentralizedConfig {
        seed: 808,
        audit: true,
        ..Default::default()
    };
    let dist = run_decentralized(&problem, &graph, &dc, 10_000, &problem.zeros(), &opts).unwrap();
    let token = dist.max_token_drift.unwrap();
    outcome(
        worst <= 1e-10 && token <= 1e-10,
        format!("10^4 rounds, engine drift {worst:.2e}, token drift {token:.2e}"),
    )
}

fn c9_minorants() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let total = 1_000_000usize;
    let per_component = 1_000;
    let mut violations = 0usize;
    let mut worst = f64::NEG_INFINITY;
    for k in 0..total / per_component {
        let p = rng.random_range(1..=8);
        let m = rng.random_range(1..=6);
        let a = DMatrix::from_fn(m, p, |_, _| rng.random_range(-3.0..3.0));
        let y = uniform_vector(&mut rng, m, 3.0);
        let comp = if k % 2 == 0 {
            LossComponent::quadratic(a, y, 1 + k % 7).unwrap()
        } else {
            LossComponent::huber(a, y, 1 + k % 7, rng.random_range(0.01..3.0)).unwrap()
        };
        for _ in 0..per_component {
            let anchor = uniform_vector(&mut rng, p, 5.0);
            let probe = uniform_vector(&mut rng, p, 5.0);
            let value = comp.eval(&probe).unwrap();
            let lin = comp.eval(&anchor).unwrap() + comp.gradient(&anchor).unwrap().dot(&(&probe - &anchor));
            let excess = lin - value;
            worst = worst.max(excess / (1.0 + value.abs()));
            if excess > 1e-12 * (1.0 + value.abs()) {
                violations += 1;
            }
        }
    }
    outcome(
        violations == 0,
        format!("{total} triples, {violations} violations, max scaled excess {worst:.2e}"),
    )
}

fn c10_cli_determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_stochalm");
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for dir in &dirs {
        let status = Command::new(bin)
            .args(["bench", "--scenario", "fed_huber", "--seed", "77", "--trials", "4", "--iterations", "300"])
            .arg("--out-dir")
            .arg(dir.path())
            .env("RUST_LOG", "warn")
            .status()
            .unwrap();
        if !status.success() {
            return outcome(false, format!("bench exited with {status}"));
        }
    }
    let mut same = true;
    let mut bytes = 0;
    for f in ["trace.csv", "mean.csv"] {
        let a = std::fs::read(dirs[0].path().join(f)).unwrap();
        let b = std::fs::read(dirs[1].path().join(f)).unwrap();
        bytes += a.len();
        same &= a == b && !a.is_empty();
    }
    outcome(same, format!("two invocations, {bytes} CSV bytes compared"))
}

fn main() -> ExitCode {
    let start = Instant::now();
    let mut results: Vec<(&str, Outcome)> = Vec::new();
    let mut report = |name, o: Outcome| {
        println!("{} criterion {name}: {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
        results.push((name, o));
    };
    report("1 (single-component exactness)", c1_single_component());
    let (f_ref, mu, runs) = certificate_runs();
    report("2 (certificate monotone, below F*)", c2_monotone(f_ref, &runs));
    report("3 (strong-convexity bound)", c3_strong_convexity_bound(mu, &runs));
    drop(runs);
    report("4 (three-way equivalence)", c4_equivalence());
    report("5 (all schedule kinds converge)", c5_schedules());
    report("6 (Metropolis chains)", c6_metropolis());
    report("7 (benchmark orderings)", c7_orderings());
    report("8 (gradient-sum integrity)", c8_gradient_sum());
    report("9 (minorants)", c9_minorants());
    report("10 (CLI determinism)", c10_cli_determinism());
    let failed = results.iter().filter(|(_, o)| !o.passed).count();
    println!(
        "acceptance: {}/{} criteria passed in {:.1}s",
        results.len() - failed,
        results.len(),
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
