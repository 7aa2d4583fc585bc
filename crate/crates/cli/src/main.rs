//! `stochalm` command-line harness: dataset generation, single solves,
//! Monte Carlo benchmarks and invariant checks.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use stochalm::baselines::{run_admm, run_saga, run_token_sgd, token_sgd_lipschitz, SagaStep, StepRule};
use stochalm::bench::{
    generate_dataset, relative_error, run_benchmark, verify, write_outputs, ExperimentConfig, Scenario,
};
use stochalm::distributed::{run_decentralized, run_federated, CommLedger, DecentralizedConfig, Graph};
use stochalm::io::{load_problem, save_json, ProblemFile, ReferenceFile};
use stochalm::parallel::Execution;
use stochalm::{solve_reference, IndexSchedule, InnerOptions, Reference, RunTrace};

#[derive(Parser)]
#[command(name = "stochalm", version, about = "Stochastic alternating linearization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset and its reference solution.
    Generate(GenerateArgs),
    /// Run one algorithm on a problem file.
    Solve(SolveArgs),
    /// Run a Monte Carlo benchmark and write CSV traces.
    Bench(BenchArgs),
    /// Run the invariant suites.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct ConfigArgs {
    /// TOML experiment config.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Scenario, used when no config file is given.
    #[arg(long, default_value = "central_elastic_net")]
    scenario: Scenario,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path).with_context(|| format!("loading {}", path.display()))?,
            None => ExperimentConfig::default_for(self.scenario),
        };
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.trials {
            cfg.trials = v;
        }
        if let Some(v) = self.iterations {
            cfg.iterations = v;
        }
        if let Some(v) = self.n {
            cfg.n = v;
        }
        if let Some(v) = self.p {
            cfg.p = v;
        }
        if let Some(v) = self.m {
            cfg.m = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Algorithm {
    Stochalm,
    FedStochalm,
    DistStochalm,
    SagaOpt,
    SagaConservative,
    Admm,
    SgdConstant,
    SgdOneOverT,
}

#[derive(Clone, Copy, ValueEnum)]
enum Topology {
    Path,
    Ring,
    Star,
    Complete,
}

#[derive(Args)]
struct SolveArgs {
    /// Problem file written by `generate`.
    #[arg(long)]
    problem: PathBuf,
    #[arg(long, value_enum, default_value = "stochalm")]
    algorithm: Algorithm,
    #[arg(long, default_value_t = 1000)]
    iterations: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// ADMM penalty.
    #[arg(long, default_value_t = 1.0)]
    rho: f64,
    /// Initial SGD step; defaults to `1/L_max`.
    #[arg(long)]
    alpha0: Option<f64>,
    /// Network for the token-passing algorithms.
    #[arg(long, value_enum, default_value = "ring")]
    graph: Topology,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Worker threads; 0 uses all cores.
    #[arg(long)]
    workers: Option<usize>,
    /// Run trials one after another.
    #[arg(long)]
    sequential: bool,
    /// Also write `mean.dat` for gnuplot.
    #[arg(long)]
    gnuplot: bool,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Generate(args) => generate(&args),
        Command::Solve(args) => solve(&args),
        Command::Bench(args) => bench(&args),
        Command::Verify(args) => verify_cmd(&args),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn generate(args: &GenerateArgs) -> Result<ExitCode> {
    let cfg = args.config.resolve()?;
    let dataset = generate_dataset(&cfg)?;
    let reference = solve_reference(&dataset.problem)?;
    std::fs::create_dir_all(&args.out_dir)?;
    save_json(
        &args.out_dir.join("dataset.json"),
        &ProblemFile::from_problem(&dataset.problem, Some(&dataset.x_true))?,
    )?;
    save_json(&args.out_dir.join("reference.json"), &ReferenceFile::from(&reference))?;
    info!(
        "wrote {} ({} components, dim {}), F* = {}",
        args.out_dir.join("dataset.json").display(),
        dataset.problem.n_components(),
        dataset.problem.dim(),
        reference.f_star
    );
    Ok(ExitCode::SUCCESS)
}

fn build_graph(topology: Topology, n: usize) -> Result<Graph> {
    Ok(match topology {
        Topology::Path => Graph::path(n)?,
        Topology::Ring => Graph::ring(n)?,
        Topology::Star => Graph::star(n)?,
        Topology::Complete => Graph::complete(n)?,
    })
}

fn solve(args: &SolveArgs) -> Result<ExitCode> {
    let (problem, _) = load_problem(&args.problem).with_context(|| format!("loading {}", args.problem.display()))?;
    let reference = solve_reference(&problem)?;
    let n = problem.n_components();
    let x0 = problem.zeros();
    let opts = InnerOptions::default();
    let schedule = IndexSchedule::uniform(n, args.seed)?;
    let dc = DecentralizedConfig {
        seed: args.seed,
        ..Default::default()
    };
    let alpha0 = || args.alpha0.unwrap_or_else(|| 1.0 / token_sgd_lipschitz(&problem));

    let (trace, ledger): (RunTrace, Option<CommLedger>) = match args.algorithm {
        Algorithm::Stochalm => (stochalm::run(&problem, &schedule, args.iterations, &x0, &opts)?, None),
        Algorithm::FedStochalm => {
            let (t, l) = run_federated(&problem, &schedule, args.iterations, &x0, &opts)?;
            (t, Some(l))
        }
        Algorithm::DistStochalm => {
            let graph = build_graph(args.graph, n)?;
            let run = run_decentralized(&problem, &graph, &dc, args.iterations, &x0, &opts)?;
            (run.trace, Some(run.ledger))
        }
        Algorithm::SagaOpt => (run_saga(&problem, SagaStep::Optimal, &schedule, args.iterations, &x0)?, None),
        Algorithm::SagaConservative => (
            run_saga(&problem, SagaStep::Conservative, &schedule, args.iterations, &x0)?,
            None,
        ),
        Algorithm::Admm => (run_admm(&problem, args.rho, args.iterations, &x0, &opts)?, None),
        Algorithm::SgdConstant | Algorithm::SgdOneOverT => {
            let rule = match args.algorithm {
                Algorithm::SgdConstant => StepRule::Constant(alpha0()),
                _ => StepRule::OneOverT(alpha0()),
            };
            let graph = build_graph(args.graph, n)?;
            let (t, l) = run_token_sgd(&problem, &graph, &dc, rule, args.iterations, &x0)?;
            (t, Some(l))
        }
    };

    std::fs::create_dir_all(&args.out_dir)?;
    write_trace(&args.out_dir.join("trace.csv"), &trace, &reference)?;
    if let Some(ledger) = &ledger {
        let mut w = BufWriter::new(File::create(args.out_dir.join("ledger.csv"))?);
        ledger.write_csv(&mut w)?;
        w.flush()?;
    }
    save_json(&args.out_dir.join("reference.json"), &ReferenceFile::from(&reference))?;
    if let Some(x) = trace.final_iterate() {
        info!(
            "{}: {} iterations, final relative error {:e}",
            trace.algorithm,
            args.iterations,
            relative_error(x, &reference)?
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn write_trace(path: &Path, trace: &RunTrace, reference: &Reference) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "t,index,error,f_star,messages")?;
    for r in &trace.records {
        writeln!(
            w,
            "{},{},{},{},{}",
            r.t,
            r.index.map(|j| j.to_string()).unwrap_or_default(),
            relative_error(&r.iterate, reference)?,
            r.f_star.map(|f| f.to_string()).unwrap_or_default(),
            r.messages
        )?;
    }
    w.flush()?;
    Ok(())
}

fn bench(args: &BenchArgs) -> Result<ExitCode> {
    let mut cfg = args.config.resolve()?;
    if let Some(w) = args.workers {
        cfg.workers = w;
    }
    let exec = if args.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    info!(
        "{}: {} algorithms x {} trials x {} iterations",
        cfg.scenario,
        cfg.algorithms.len(),
        cfg.trials,
        cfg.iterations
    );
    let report = run_benchmark(&cfg, exec)?;
    write_outputs(&report, &args.out_dir, args.gnuplot)?;
    for alg in report.algorithms() {
        if let Some(last) = report.mean_curve(&alg).last() {
            info!("{alg:>16}: final mean error {:e} after {} messages", last.mean_error, last.messages);
        }
    }
    for f in &report.failures {
        eprintln!("failed run: {f}");
    }
    for v in &report.invariant_violations {
        eprintln!("invariant violated: {v}");
    }
    if report.invariant_violations.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        bail!("{} invariant violations", report.invariant_violations.len())
    }
}

fn verify_cmd(args: &VerifyArgs) -> Result<ExitCode> {
    let mut ok = true;
    for s in verify::run_all(args.seed)? {
        println!("{} {:<18} {}", if s.passed { "PASS" } else { "FAIL" }, s.name, s.detail);
        ok &= s.passed;
    }
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}
