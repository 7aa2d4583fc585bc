//! On-disk formats: problem/dataset files and persisted references (JSON).

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::problem::{CompositeProblem, LossComponent, LossKind, Regularizer};
use crate::reference::{Reference, ReferenceMethod};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RegularizerSpec {
    Ridge { lambda: f64 },
    ElasticNet { lambda1: f64, lambda2: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossSpec {
    Quadratic,
    Huber,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentData {
    /// Row-major feature matrix.
    pub a: Vec<Vec<f64>>,
    pub y: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemFile {
    pub regularizer: RegularizerSpec,
    pub loss: LossSpec,
    /// Huber half-width `M`; required for Huber losses.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub huber_m: Option<f64>,
    pub n: usize,
    pub p: usize,
    pub m: usize,
    pub components: Vec<ComponentData>,
    /// Ground-truth generator of the synthetic data, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_true: Option<Vec<f64>>,
}

impl ProblemFile {
    pub fn from_problem(problem: &CompositeProblem, x_true: Option<&Vector>) -> Result<Self> {
        let regularizer = match *problem.regularizer() {
            Regularizer::Ridge { lambda } => RegularizerSpec::Ridge { lambda },
            Regularizer::ElasticNet { l1, l2 } => RegularizerSpec::ElasticNet {
                lambda1: l1,
                lambda2: l2,
            },
        };
        let first = problem.component(0);
        let (loss, huber_m) = match first.kind() {
            LossKind::Quadratic => (LossSpec::Quadratic, None),
            LossKind::Huber { half_width } => (LossSpec::Huber, Some(half_width)),
        };
        if problem.components().iter().any(|c| c.kind() != first.kind()) {
            return Err(Error::InvalidParameter(
                "problem files hold a single loss kind for all components".into(),
            ));
        }
        let components = problem
            .components()
            .iter()
            .map(|c| ComponentData {
                a: c
                    .features()
                    .row_iter()
                    .map(|r| r.iter().copied().collect())
                    .collect(),
                y: c.targets().iter().copied().collect(),
            })
            .collect();
        Ok(ProblemFile {
            regularizer,
            loss,
            huber_m,
            n: problem.n_components(),
            p: problem.dim(),
            m: first.features().nrows(),
            components,
            x_true: x_true.map(|x| x.iter().copied().collect()),
        })
    }

    pub fn to_problem(&self) -> Result<CompositeProblem> {
        if self.components.len() != self.n {
            return Err(Error::InvalidParameter(format!(
                "file declares n = {} but holds {} components",
                self.n,
                self.components.len()
            )));
        }
        let regularizer = match self.regularizer {
            RegularizerSpec::Ridge { lambda } => Regularizer::ridge(lambda)?,
            RegularizerSpec::ElasticNet { lambda1, lambda2 } => Regularizer::elastic_net(lambda1, lambda2)?,
        };
        let kind = match self.loss {
            LossSpec::Quadratic => LossKind::Quadratic,
            LossSpec::Huber => LossKind::Huber {
                half_width: self.huber_m.ok_or_else(|| {
                    Error::InvalidParameter("Huber loss requires huber_m".into())
                })?,
            },
        };
        let mut components = Vec::with_capacity(self.n);
        for (i, c) in self.components.iter().enumerate() {
            if c.a.len() != self.m || c.y.len() != self.m {
                return Err(Error::InvalidParameter(format!(
                    "component {i} does not have m = {} rows",
                    self.m
                )));
            }
            if let Some(row) = c.a.iter().find(|r| r.len() != self.p) {
                return Err(Error::DimensionMismatch {
                    expected: self.p,
                    found: row.len(),
                });
            }
            let a = Matrix::from_row_iterator(self.m, self.p, c.a.iter().flatten().copied());
            let y = Vector::from_column_slice(&c.y);
            components.push(LossComponent::new(kind, a, y, self.n)?);
        }
        CompositeProblem::new(regularizer, components)
    }

    pub fn x_true(&self) -> Option<Vector> {
        self.x_true.as_ref().map(|x| Vector::from_column_slice(x))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceFile {
    pub method: ReferenceMethod,
    pub x_star: Vec<f64>,
    pub f_star: f64,
    pub residual: f64,
}

impl From<&Reference> for ReferenceFile {
    fn from(r: &Reference) -> Self {
        ReferenceFile {
            method: r.method,
            x_star: r.x_star.iter().copied().collect(),
            f_star: r.f_star,
            residual: r.residual,
        }
    }
}

impl From<ReferenceFile> for Reference {
    fn from(r: ReferenceFile) -> Self {
        Reference {
            x_star: Vector::from_vec(r.x_star),
            f_star: r.f_star,
            residual: r.residual,
            method: r.method,
        }
    }
}

pub fn save_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

pub fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
}

/// Loads a problem file and, if present, the reference stored next to it.
pub fn load_problem(path: &Path) -> Result<(CompositeProblem, ProblemFile)> {
    let file: ProblemFile = load_json(path)?;
    Ok((file.to_problem()?, file))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn problem_file_round_trip() {
        let a = Matrix::from_row_slice(2, 3, &[0.1, -0.7, 1.0 / 3.0, 2.5, 0.0, -1e-9]);
        let c = LossComponent::huber(a, Vector::from_row_slice(&[0.3, -0.2]), 2, 1.5).unwrap();
        let p = CompositeProblem::new(Regularizer::ridge(0.1).unwrap(), vec![c.clone(), c]).unwrap();
        let file = ProblemFile::from_problem(&p, None).unwrap();
        let text = serde_json::to_string(&file).unwrap();
        let back: ProblemFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_problem().unwrap(), p);
        assert!(text.contains("\"huber_m\":1.5"));
    }

    #[test]
    fn rejects_inconsistent_files() {
        let file = ProblemFile {
            regularizer: RegularizerSpec::Ridge { lambda: 1.0 },
            loss: LossSpec::Huber,
            huber_m: None,
            n: 1,
            p: 1,
            m: 1,
            components: vec![ComponentData {
                a: vec![vec![1.0]],
                y: vec![1.0],
            }],
            x_true: None,
        };
        assert!(file.to_problem().is_err());
        let file = ProblemFile {
            loss: LossSpec::Quadratic,
            n: 2,
            ..file
        };
        assert!(file.to_problem().is_err());
    }
}
