use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::config::{ExperimentConfig, Noise, Scenario};
use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::problem::{CompositeProblem, LossComponent, LossKind, Regularizer};

/// A generated problem and the vector the data was drawn around.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub problem: CompositeProblem,
    pub x_true: Vector,
}

/// `x_true ~ U(−1,1)^p`, `A_i ~ U(−1,1)^{m×p}`, `y_i = A_i x_true + v_i`.
/// Deterministic in `cfg.seed`.
pub fn generate_dataset(cfg: &ExperimentConfig) -> Result<Dataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (n, p, m) = (cfg.n, cfg.p, cfg.m);
    let x_true = Vector::from_fn(p, |_, _| rng.random_range(-1.0..1.0));

    let regularizer = match cfg.scenario {
        Scenario::CentralElasticNet | Scenario::DecElasticNet => Regularizer::elastic_net(cfg.lambda1, cfg.lambda2)?,
        Scenario::CentralQuadratic => Regularizer::ridge(cfg.lambda2)?,
        Scenario::FedRidge | Scenario::FedHuber => Regularizer::ridge(cfg.lambda)?,
    };
    let kind = match cfg.scenario {
        Scenario::FedHuber => LossKind::Huber {
            half_width: cfg.huber_m,
        },
        _ => LossKind::Quadratic,
    };

    let gaussian = match cfg.noise {
        Noise::Gaussian { sigma } => Some(
            Normal::new(0.0, sigma).map_err(|e| Error::InvalidParameter(format!("noise: {e}")))?,
        ),
        Noise::Laplace { .. } => None,
    };

    let mut components = Vec::with_capacity(n);
    for _ in 0..n {
        let a = Matrix::from_row_iterator(m, p, (0..m * p).map(|_| rng.random_range(-1.0..1.0)));
        let mut y = &a * &x_true;
        for yk in y.iter_mut() {
            *yk += match (&gaussian, cfg.noise) {
                (Some(d), _) => d.sample(&mut rng),
                (None, Noise::Laplace { scale }) => scale * standard_laplace(&mut rng),
                (None, Noise::Gaussian { .. }) => unreachable!(),
            };
        }
        components.push(LossComponent::new(kind, a, y, n)?);
    }
    Ok(Dataset {
        problem: CompositeProblem::new(regularizer, components)?,
        x_true,
    })
}

/// Inverse-CDF draw from the unit-scale Laplace distribution.
fn standard_laplace<R: Rng>(rng: &mut R) -> f64 {
    let u: f64 = rng.random_range(-0.5..0.5);
    -u.signum() * (1.0 - 2.0 * u.abs()).ln()
}
