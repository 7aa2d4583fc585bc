//! Per-iteration records shared by every algorithm in the crate.

use crate::linalg::Vector;

/// Snapshot handed to observers after initialization (`t = 0`) and after each round.
#[derive(Debug, Clone, Copy)]
pub struct Observation<'a> {
    pub t: usize,
    /// Component or node active in this round; `None` at `t = 0` and for synchronous rounds.
    pub index: Option<usize>,
    /// The algorithm's current iterate.
    pub iterate: &'a Vector,
    /// Per-node local iterates, when the algorithm has them (anchors, ADMM locals).
    pub locals: &'a [Vector],
    /// Certificate value `f_*^(t)` for the StochaLM family.
    pub f_star: Option<f64>,
    /// Cumulative messages sent so far.
    pub messages: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub t: usize,
    pub index: Option<usize>,
    pub iterate: Vector,
    pub f_star: Option<f64>,
    pub messages: u64,
}

impl From<&Observation<'_>> for TraceRecord {
    fn from(o: &Observation<'_>) -> Self {
        TraceRecord {
            t: o.t,
            index: o.index,
            iterate: o.iterate.clone(),
            f_star: o.f_star,
            messages: o.messages,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub algorithm: String,
    pub records: Vec<TraceRecord>,
}

impl RunTrace {
    pub fn new(algorithm: impl Into<String>) -> Self {
        RunTrace {
            algorithm: algorithm.into(),
            records: Vec::new(),
        }
    }

    pub fn push(&mut self, obs: &Observation<'_>) {
        self.records.push(obs.into());
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn final_iterate(&self) -> Option<&Vector> {
        self.records.last().map(|r| &r.iterate)
    }

    pub fn iterates(&self) -> impl Iterator<Item = &Vector> {
        self.records.iter().map(|r| &r.iterate)
    }

    /// `(t, f_*^(t))` for every record that carries a certificate.
    pub fn certificates(&self) -> Vec<(usize, f64)> {
        self.records
            .iter()
            .filter_map(|r| r.f_star.map(|f| (r.t, f)))
            .collect()
    }

    pub fn indices(&self) -> Vec<usize> {
        self.records.iter().filter_map(|r| r.index).collect()
    }
}
