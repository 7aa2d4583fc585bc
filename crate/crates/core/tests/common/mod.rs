#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stochalm::{CompositeProblem, LossComponent, Matrix, Regularizer, Vector};

#[derive(Clone, Copy, Debug)]
pub enum Reg {
    Ridge,
    ElasticNet,
}

#[derive(Clone, Copy, Debug)]
pub enum Loss {
    Quadratic,
    Huber,
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_vector(rng: &mut ChaCha8Rng, p: usize, scale: f64) -> Vector {
    Vector::from_fn(p, |_, _| rng.random_range(-scale..scale))
}

pub fn random_problem(seed: u64, n: usize, p: usize, m: usize, reg: Reg, loss: Loss) -> CompositeProblem {
    let mut rng = rng(seed);
    let x_true = random_vector(&mut rng, p, 1.0);
    let components = (0..n)
        .map(|_| {
            let a = Matrix::from_fn(m, p, |_, _| rng.random_range(-1.0..1.0));
            let y = &a * &x_true + random_vector(&mut rng, m, 0.3);
            match loss {
                Loss::Quadratic => LossComponent::quadratic(a, y, n).unwrap(),
                Loss::Huber => LossComponent::huber(a, y, n, 0.5).unwrap(),
            }
        })
        .collect();
    let regularizer = match reg {
        Reg::Ridge => Regularizer::ridge(0.1 + rng.random_range(0.0..0.5)).unwrap(),
        Reg::ElasticNet => Regularizer::elastic_net(rng.random_range(0.01..0.1), 0.1 + rng.random_range(0.0..0.5)).unwrap(),
    };
    CompositeProblem::new(regularizer, components).unwrap()
}
