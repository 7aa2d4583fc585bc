use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::baselines::RHO_GRID;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// Elastic-net least squares, StochaLM against SAGA.
    CentralElasticNet,
    /// Ridge least squares (`λ1 = 0`), StochaLM against SAGA.
    CentralQuadratic,
    /// Ridge regression on a star network, Fed-StochaLM against ADMM.
    FedRidge,
    /// Ridge-regularized Huber regression with Laplace noise, Fed-StochaLM against ADMM.
    FedHuber,
    /// Elastic-net least squares on a graph, Dist-StochaLM against token SGD.
    DecElasticNet,
}

impl Scenario {
    pub const ALL: [Scenario; 5] = [
        Scenario::CentralElasticNet,
        Scenario::CentralQuadratic,
        Scenario::FedRidge,
        Scenario::FedHuber,
        Scenario::DecElasticNet,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::CentralElasticNet => "central_elastic_net",
            Scenario::CentralQuadratic => "central_quadratic",
            Scenario::FedRidge => "fed_ridge",
            Scenario::FedHuber => "fed_huber",
            Scenario::DecElasticNet => "dec_elastic_net",
        }
    }

    pub fn is_federated(self) -> bool {
        matches!(self, Scenario::FedRidge | Scenario::FedHuber)
    }
}

impl std::str::FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.replace('-', "_");
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == key)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown scenario `{s}`")))
    }
}

impl std::fmt::Display for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Noise {
    Gaussian { sigma: f64 },
    /// Standard Laplace draws multiplied by `scale`.
    Laplace { scale: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GraphSpec {
    Path,
    Ring,
    Star,
    Complete,
    /// Random spanning tree plus extra edges, seeded from the experiment seed.
    Random { extra_edge_prob: f64 },
    /// TOML graph file with `n_nodes` and `edges`.
    File { path: PathBuf },
}

impl Default for GraphSpec {
    fn default() -> Self {
        GraphSpec::Random { extra_edge_prob: 0.1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SagaStepSpec {
    Optimal,
    Conservative,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScheduleSpec {
    #[default]
    Uniform,
    /// i.i.d. with probabilities proportional to `1, 2, …, n`.
    Proportional,
    Cyclic,
    EssentiallyCyclic { period: usize },
    /// Metropolis walk on the experiment graph.
    Markov,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AlgorithmSpec {
    Stochalm {
        #[serde(default)]
        schedule: ScheduleSpec,
    },
    FedStochalm {
        #[serde(default)]
        schedule: ScheduleSpec,
    },
    DistStochalm,
    Saga { step: SagaStepSpec },
    /// Runs `rounds` synchronous rounds; default `ceil(iterations / n)`, the
    /// same message budget as Fed-StochaLM.
    Admm {
        rho: f64,
        #[serde(default)]
        rounds: Option<usize>,
    },
    /// `alpha0` defaults to `1/L_max`.
    SgdConstant {
        #[serde(default)]
        alpha0: Option<f64>,
    },
    SgdOneOverT {
        #[serde(default)]
        alpha0: Option<f64>,
    },
}

impl AlgorithmSpec {
    /// Name used in CSV output.
    pub fn label(&self) -> String {
        match self {
            AlgorithmSpec::Stochalm { schedule } => match schedule {
                ScheduleSpec::Uniform => "stochalm".into(),
                other => format!("stochalm-{}", schedule_label(other)),
            },
            AlgorithmSpec::FedStochalm { schedule } => match schedule {
                ScheduleSpec::Uniform => "fed-stochalm".into(),
                other => format!("fed-stochalm-{}", schedule_label(other)),
            },
            AlgorithmSpec::DistStochalm => "dist-stochalm".into(),
            AlgorithmSpec::Saga { step } => match step {
                SagaStepSpec::Optimal => "saga-opt".into(),
                SagaStepSpec::Conservative => "saga-1/3L".into(),
                SagaStepSpec::Fixed(g) => format!("saga-{g}"),
            },
            AlgorithmSpec::Admm { rho, .. } => format!("admm-{rho}"),
            AlgorithmSpec::SgdConstant { .. } => "sgd-constant".into(),
            AlgorithmSpec::SgdOneOverT { .. } => "sgd-1/t".into(),
        }
    }

    /// Whether the trace carries the monotone certificate.
    pub fn has_certificate(&self) -> bool {
        matches!(
            self,
            AlgorithmSpec::Stochalm { .. } | AlgorithmSpec::FedStochalm { .. } | AlgorithmSpec::DistStochalm
        )
    }
}

fn schedule_label(s: &ScheduleSpec) -> String {
    match s {
        ScheduleSpec::Uniform => "uniform".into(),
        ScheduleSpec::Proportional => "proportional".into(),
        ScheduleSpec::Cyclic => "cyclic".into(),
        ScheduleSpec::EssentiallyCyclic { period } => format!("ecyclic{period}"),
        ScheduleSpec::Markov => "markov".into(),
    }
}

/// Fully resolved experiment settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub n: usize,
    pub p: usize,
    pub m: usize,
    pub lambda1: f64,
    pub lambda2: f64,
    /// Ridge weight for the ridge-regularized scenarios.
    pub lambda: f64,
    pub huber_m: f64,
    pub noise: Noise,
    pub trials: usize,
    pub iterations: usize,
    pub seed: u64,
    /// Worker threads for the trial pool; 0 lets rayon decide.
    pub workers: usize,
    pub graph: GraphSpec,
    pub algorithms: Vec<AlgorithmSpec>,
}

impl ExperimentConfig {
    /// Full-scale defaults: `n = 30`, `p = 120`, `m = 4`, 20 trials.
    pub fn default_for(scenario: Scenario) -> Self {
        let noise = match scenario {
            Scenario::FedHuber => Noise::Laplace { scale: 0.1 },
            _ => Noise::Gaussian { sigma: 0.1 },
        };
        ExperimentConfig {
            scenario,
            n: 30,
            p: 120,
            m: 4,
            lambda1: match scenario {
                Scenario::CentralElasticNet => 1.0,
                Scenario::CentralQuadratic => 0.0,
                _ => 0.1,
            },
            lambda2: match scenario {
                Scenario::CentralElasticNet | Scenario::CentralQuadratic => 0.8,
                _ => 0.1,
            },
            lambda: 0.1,
            huber_m: 1.0,
            noise,
            trials: 20,
            iterations: 1500,
            seed: 1,
            workers: 0,
            graph: GraphSpec::default(),
            algorithms: default_algorithms(scenario),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let file: ConfigFile = toml::from_str(text)?;
        file.resolve()
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.n == 0 || self.p == 0 || self.m == 0 {
            return bad(format!("n, p, m must be positive (got {}, {}, {})", self.n, self.p, self.m));
        }
        if self.trials == 0 || self.iterations == 0 {
            return bad("trials and iterations must be positive".into());
        }
        if self.algorithms.is_empty() {
            return bad("no algorithms configured".into());
        }
        match self.noise {
            Noise::Gaussian { sigma: s } | Noise::Laplace { scale: s } if !(s >= 0.0 && s.is_finite()) => {
                return bad(format!("noise scale must be non-negative, got {s}"));
            }
            _ => {}
        }
        for a in &self.algorithms {
            let bad_param = match a {
                AlgorithmSpec::Admm { rho, rounds } => rho.is_nan() || *rho <= 0.0 || *rounds == Some(0),
                AlgorithmSpec::Saga {
                    step: SagaStepSpec::Fixed(g),
                } => g.is_nan() || *g <= 0.0,
                AlgorithmSpec::SgdConstant { alpha0 } | AlgorithmSpec::SgdOneOverT { alpha0 } => {
                    alpha0.is_some_and(|a| a.is_nan() || a <= 0.0)
                }
                AlgorithmSpec::Stochalm {
                    schedule: ScheduleSpec::EssentiallyCyclic { period },
                }
                | AlgorithmSpec::FedStochalm {
                    schedule: ScheduleSpec::EssentiallyCyclic { period },
                } => *period < self.n,
                _ => false,
            };
            if bad_param {
                return bad(format!("invalid parameters for algorithm {}", a.label()));
            }
        }
        Ok(())
    }
}

fn default_algorithms(scenario: Scenario) -> Vec<AlgorithmSpec> {
    match scenario {
        Scenario::CentralElasticNet | Scenario::CentralQuadratic => vec![
            AlgorithmSpec::Stochalm {
                schedule: ScheduleSpec::Uniform,
            },
            AlgorithmSpec::Saga {
                step: SagaStepSpec::Optimal,
            },
            AlgorithmSpec::Saga {
                step: SagaStepSpec::Conservative,
            },
        ],
        Scenario::FedRidge | Scenario::FedHuber => {
            let mut algs = vec![AlgorithmSpec::FedStochalm {
                schedule: ScheduleSpec::Uniform,
            }];
            algs.extend(RHO_GRID.iter().map(|&rho| AlgorithmSpec::Admm { rho, rounds: None }));
            algs
        }
        Scenario::DecElasticNet => vec![
            AlgorithmSpec::DistStochalm,
            AlgorithmSpec::SgdConstant { alpha0: None },
            AlgorithmSpec::SgdOneOverT { alpha0: None },
        ],
    }
}

/// Config file as written by users: only `scenario` is required, everything
/// else falls back to the scenario defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub scenario: Option<Scenario>,
    pub n: Option<usize>,
    pub p: Option<usize>,
    pub m: Option<usize>,
    pub lambda1: Option<f64>,
    pub lambda2: Option<f64>,
    pub lambda: Option<f64>,
    pub huber_m: Option<f64>,
    pub noise: Option<Noise>,
    pub trials: Option<usize>,
    pub iterations: Option<usize>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub graph: Option<GraphSpec>,
    pub algorithms: Option<Vec<AlgorithmSpec>>,
}

impl ConfigFile {
    pub fn resolve(self) -> Result<ExperimentConfig> {
        let scenario = self
            .scenario
            .ok_or_else(|| Error::InvalidParameter("config must name a scenario".into()))?;
        let d = ExperimentConfig::default_for(scenario);
        let cfg = ExperimentConfig {
            scenario,
            n: self.n.unwrap_or(d.n),
            p: self.p.unwrap_or(d.p),
            m: self.m.unwrap_or(d.m),
            lambda1: self.lambda1.unwrap_or(d.lambda1),
            lambda2: self.lambda2.unwrap_or(d.lambda2),
            lambda: self.lambda.unwrap_or(d.lambda),
            huber_m: self.huber_m.unwrap_or(d.huber_m),
            noise: self.noise.unwrap_or(d.noise),
            trials: self.trials.unwrap_or(d.trials),
            iterations: self.iterations.unwrap_or(d.iterations),
            seed: self.seed.unwrap_or(d.seed),
            workers: self.workers.unwrap_or(d.workers),
            graph: self.graph.unwrap_or(d.graph),
            algorithms: self.algorithms.unwrap_or(d.algorithms),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
