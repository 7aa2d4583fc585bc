use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use log::{info, warn};

use super::config::{AlgorithmSpec, ExperimentConfig, GraphSpec, SagaStepSpec, ScheduleSpec};
use super::dataset::{generate_dataset, Dataset};
use super::metrics::{mean_local_error, relative_error};
use crate::baselines::{run_admm_observed, run_saga_observed, run_token_sgd_observed, token_sgd_lipschitz, SagaStep, StepRule};
use crate::distributed::{build_metropolis_transitions, run_decentralized_observed, run_federated_observed, DecentralizedConfig, Graph};
use crate::engine::run_observed;
use crate::error::Result;
use crate::io::{save_json, ProblemFile, ReferenceFile};
use crate::parallel::{map_indexed, with_workers, Execution};
use crate::reference::{solve_reference, Reference};
use crate::schedule::{IndexSchedule, ScheduleKind};
use crate::subproblem::InnerOptions;
use crate::trace::Observation;

const MONOTONE_SLACK: f64 = 1e-9;
const UPPER_SLACK: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub t: usize,
    pub error: f64,
    pub f_star: Option<f64>,
    pub messages: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialCurve {
    pub trial: usize,
    pub algorithm: String,
    pub points: Vec<CurvePoint>,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeanPoint {
    pub algorithm: String,
    pub t: usize,
    pub mean_error: f64,
    pub messages: u64,
    pub trials: usize,
}

#[derive(Debug, Clone)]
pub struct BenchReport {
    pub config: ExperimentConfig,
    pub dataset: Dataset,
    pub reference: Reference,
    /// Algorithm-major, then trial order.
    pub curves: Vec<TrialCurve>,
    pub means: Vec<MeanPoint>,
    pub failures: Vec<String>,
    pub invariant_violations: Vec<String>,
}

impl BenchReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.invariant_violations.is_empty()
    }

    pub fn mean_curve(&self, algorithm: &str) -> Vec<&MeanPoint> {
        self.means.iter().filter(|m| m.algorithm == algorithm).collect()
    }

    pub fn algorithms(&self) -> Vec<String> {
        self.config.algorithms.iter().map(|a| a.label()).collect()
    }

    /// `trial,algorithm,t,error,f_star,messages`
    pub fn write_trace_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "trial,algorithm,t,error,f_star,messages")?;
        for c in &self.curves {
            for p in &c.points {
                let f = p.f_star.map(|f| f.to_string()).unwrap_or_default();
                writeln!(out, "{},{},{},{},{},{}", c.trial, c.algorithm, p.t, p.error, f, p.messages)?;
            }
        }
        Ok(())
    }

    /// `algorithm,t,mean_error,messages,trials`
    pub fn write_mean_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "algorithm,t,mean_error,messages,trials")?;
        for m in &self.means {
            writeln!(out, "{},{},{},{},{}", m.algorithm, m.t, m.mean_error, m.messages, m.trials)?;
        }
        Ok(())
    }

    /// One whitespace-separated block per algorithm, separated by two blank
    /// lines so gnuplot can address them with `index`.
    pub fn write_gnuplot<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (k, alg) in self.algorithms().iter().enumerate() {
            if k > 0 {
                writeln!(out, "\n")?;
            }
            writeln!(out, "# {alg}\n# t mean_error messages")?;
            for m in self.mean_curve(alg) {
                writeln!(out, "{} {} {}", m.t, m.mean_error, m.messages)?;
            }
        }
        Ok(())
    }
}

/// Seed of the index stream used in `trial`; shared by all algorithms of that trial.
pub fn trial_seed(base: u64, trial: usize) -> u64 {
    base.wrapping_add(trial as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn build_graph(cfg: &ExperimentConfig) -> Result<Graph> {
    let n = cfg.n;
    match &cfg.graph {
        GraphSpec::Path => Graph::path(n),
        GraphSpec::Ring => Graph::ring(n),
        GraphSpec::Star => Graph::star(n),
        GraphSpec::Complete => Graph::complete(n),
        GraphSpec::Random { extra_edge_prob } => Graph::random_connected(n, *extra_edge_prob, cfg.seed ^ 0x0067_7261_7068),
        GraphSpec::File { path } => Graph::load(path),
    }
}

struct Context<'a> {
    cfg: &'a ExperimentConfig,
    dataset: &'a Dataset,
    reference: &'a Reference,
    graph: &'a Graph,
}

impl Context<'_> {
    fn error(&self, o: &Observation<'_>) -> Result<f64> {
        if self.cfg.scenario.is_federated() && !o.locals.is_empty() {
            mean_local_error(o.locals, self.reference)
        } else {
            relative_error(o.iterate, self.reference)
        }
    }

    fn schedule(&self, spec: &ScheduleSpec, seed: u64) -> Result<IndexSchedule> {
        let n = self.cfg.n;
        match *spec {
            ScheduleSpec::Uniform => IndexSchedule::uniform(n, seed),
            ScheduleSpec::Proportional => {
                let w: Vec<f64> = (1..=n).map(|k| k as f64).collect();
                IndexSchedule::weighted(&w, seed)
            }
            ScheduleSpec::Cyclic => IndexSchedule::cyclic(n),
            ScheduleSpec::EssentiallyCyclic { period } => {
                IndexSchedule::new(ScheduleKind::EssentiallyCyclic { n, period }, seed)
            }
            ScheduleSpec::Markov => IndexSchedule::markov(build_metropolis_transitions(self.graph)?, 0, seed),
        }
    }
}

/// Runs one algorithm for one trial and returns its error curve.
fn run_one(ctx: &Context<'_>, spec: &AlgorithmSpec, trial: usize) -> Result<Vec<CurvePoint>> {
    let cfg = ctx.cfg;
    let problem = &ctx.dataset.problem;
    let x0 = problem.zeros();
    let seed = trial_seed(cfg.seed, trial);
    let opts = InnerOptions::default();
    let iterations = cfg.iterations;

    let mut points = Vec::with_capacity(iterations + 1);
    let mut failure = None;
    let mut record = |o: Observation<'_>| match ctx.error(&o) {
        Ok(error) => points.push(CurvePoint {
            t: o.t,
            error,
            f_star: o.f_star,
            messages: o.messages,
        }),
        Err(e) => {
            failure.get_or_insert(e);
        }
    };

    match spec {
        AlgorithmSpec::Stochalm { schedule } => {
            let s = ctx.schedule(schedule, seed)?;
            run_observed(problem, s.stream(), iterations, &x0, &opts, &mut record)?;
        }
        AlgorithmSpec::FedStochalm { schedule } => {
            let s = ctx.schedule(schedule, seed)?;
            run_federated_observed(problem, s.stream(), iterations, &x0, &opts, &mut record)?;
        }
        AlgorithmSpec::DistStochalm => {
            let dc = DecentralizedConfig {
                seed,
                ..Default::default()
            };
            run_decentralized_observed(problem, ctx.graph, &dc, iterations, &x0, &opts, &mut record)?;
        }
        AlgorithmSpec::Saga { step } => {
            let step = match *step {
                SagaStepSpec::Optimal => SagaStep::Optimal,
                SagaStepSpec::Conservative => SagaStep::Conservative,
                SagaStepSpec::Fixed(g) => SagaStep::Fixed(g),
            };
            let s = IndexSchedule::uniform(cfg.n, seed)?;
            run_saga_observed(problem, step, &s, iterations, &x0, &mut record)?;
        }
        AlgorithmSpec::Admm { rho, rounds } => {
            let rounds = rounds.unwrap_or_else(|| iterations.div_ceil(cfg.n));
            run_admm_observed(problem, *rho, rounds, &x0, &opts, &mut record)?;
        }
        AlgorithmSpec::SgdConstant { alpha0 } | AlgorithmSpec::SgdOneOverT { alpha0 } => {
            let a = alpha0.unwrap_or_else(|| 1.0 / token_sgd_lipschitz(problem));
            let rule = match spec {
                AlgorithmSpec::SgdConstant { .. } => StepRule::Constant(a),
                _ => StepRule::OneOverT(a),
            };
            let dc = DecentralizedConfig {
                seed,
                ..Default::default()
            };
            run_token_sgd_observed(problem, ctx.graph, &dc, rule, iterations, &x0, &mut record)?;
        }
    }
    match failure {
        Some(e) => Err(e),
        None => Ok(points),
    }
}

/// Runs a single algorithm for `trial` on an already generated dataset.
pub fn run_algorithm(
    cfg: &ExperimentConfig,
    dataset: &Dataset,
    reference: &Reference,
    spec: &AlgorithmSpec,
    trial: usize,
) -> Result<Vec<CurvePoint>> {
    let graph = build_graph(cfg)?;
    let ctx = Context {
        cfg,
        dataset,
        reference,
        graph: &graph,
    };
    run_one(&ctx, spec, trial)
}

fn check_certificate(label: &str, trial: usize, points: &[CurvePoint], f_star_ref: f64, out: &mut Vec<String>) {
    let mut prev: Option<f64> = None;
    for p in points {
        let Some(f) = p.f_star else { continue };
        if let Some(q) = prev {
            if f < q - MONOTONE_SLACK {
                out.push(format!("{label} trial {trial}: certificate decreased at t={} ({q} -> {f})", p.t));
                return;
            }
        }
        if f > f_star_ref + UPPER_SLACK {
            out.push(format!("{label} trial {trial}: certificate {f} exceeds F* {f_star_ref} at t={}", p.t));
            return;
        }
        prev = Some(f);
    }
}

/// Generates the dataset, solves the reference, runs every algorithm for
/// every trial and aggregates mean curves. Algorithm failures are recorded
/// and do not abort the batch.
pub fn run_benchmark(cfg: &ExperimentConfig, exec: Execution) -> Result<BenchReport> {
    cfg.validate()?;
    let dataset = generate_dataset(cfg)?;
    let reference = solve_reference(&dataset.problem)?;
    let graph = build_graph(cfg)?;
    info!(
        "{:?}: n={} p={} m={} F*={} ({:?}, residual {:e})",
        cfg.scenario, cfg.n, cfg.p, cfg.m, reference.f_star, reference.method, reference.residual
    );
    let ctx = Context {
        cfg,
        dataset: &dataset,
        reference: &reference,
        graph: &graph,
    };

    let n_alg = cfg.algorithms.len();
    let jobs = n_alg * cfg.trials;
    let results = with_workers(cfg.workers, || {
        map_indexed(jobs, exec, |job| {
            let (a, trial) = (job / cfg.trials, job % cfg.trials);
            run_one(&ctx, &cfg.algorithms[a], trial)
        })
    });

    let mut curves = Vec::with_capacity(jobs);
    let mut failures = Vec::new();
    let mut invariant_violations = Vec::new();
    for (job, result) in results.into_iter().enumerate() {
        let spec = &cfg.algorithms[job / cfg.trials];
        let trial = job % cfg.trials;
        let algorithm = spec.label();
        let (points, failure) = match result {
            Ok(points) => (points, None),
            Err(e) => {
                warn!("{algorithm} trial {trial} failed: {e}");
                failures.push(format!("{algorithm} trial {trial}: {e}"));
                (Vec::new(), Some(e.to_string()))
            }
        };
        if spec.has_certificate() {
            check_certificate(&algorithm, trial, &points, reference.f_star, &mut invariant_violations);
        }
        curves.push(TrialCurve {
            trial,
            algorithm,
            points,
            failure,
        });
    }

    let mut means = Vec::new();
    for a in 0..n_alg {
        let group: Vec<&TrialCurve> = curves[a * cfg.trials..(a + 1) * cfg.trials]
            .iter()
            .filter(|c| c.failure.is_none())
            .collect();
        let Some(first) = group.first() else { continue };
        for (k, p) in first.points.iter().enumerate() {
            let total: f64 = group.iter().map(|c| c.points[k].error).sum();
            means.push(MeanPoint {
                algorithm: first.algorithm.clone(),
                t: p.t,
                mean_error: total / group.len() as f64,
                messages: p.messages,
                trials: group.len(),
            });
        }
    }

    Ok(BenchReport {
        config: cfg.clone(),
        dataset,
        reference,
        curves,
        means,
        failures,
        invariant_violations,
    })
}

/// Writes `trace.csv`, `mean.csv`, `dataset.json`, `reference.json` and,
/// optionally, `mean.dat` for gnuplot.
pub fn write_outputs(report: &BenchReport, out_dir: &Path, gnuplot: bool) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    let mut w = BufWriter::new(File::create(out_dir.join("trace.csv"))?);
    report.write_trace_csv(&mut w)?;
    w.flush()?;
    let mut w = BufWriter::new(File::create(out_dir.join("mean.csv"))?);
    report.write_mean_csv(&mut w)?;
    w.flush()?;
    if gnuplot {
        let mut w = BufWriter::new(File::create(out_dir.join("mean.dat"))?);
        report.write_gnuplot(&mut w)?;
        w.flush()?;
    }
    save_json(
        &out_dir.join("dataset.json"),
        &ProblemFile::from_problem(&report.dataset.problem, Some(&report.dataset.x_true))?,
    )?;
    save_json(&out_dir.join("reference.json"), &ReferenceFile::from(&report.reference))?;
    Ok(())
}
