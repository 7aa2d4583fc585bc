//! Index processes that pick the component `j(t)` solved at each round.
//!
//! Every kind visits each index infinitely often with probability one:
//! i.i.d. sampling with full support, cyclic sweeps, essentially cyclic
//! sequences with a bounded revisit window, and irreducible Markov chains.
//! Indices are zero-based.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

const ROW_SUM_TOL: f64 = 1e-12;

/// Row-stochastic matrix whose positive entries form a strongly connected graph.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix(Matrix);

impl TransitionMatrix {
    pub fn new(m: Matrix) -> Result<Self> {
        let n = m.nrows();
        if n == 0 || m.ncols() != n {
            return Err(Error::InvalidSchedule(format!(
                "transition matrix must be square and non-empty, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|&v| !v.is_finite() || v < 0.0) {
            return Err(Error::InvalidSchedule(
                "transition probabilities must be finite and non-negative".into(),
            ));
        }
        for i in 0..n {
            let sum: f64 = m.row(i).iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::InvalidSchedule(format!("row {i} sums to {sum}, not 1")));
            }
        }
        if !strongly_connected(&m) {
            return Err(Error::InvalidSchedule(
                "transition graph is not strongly connected (chain not irreducible)".into(),
            ));
        }
        Ok(TransitionMatrix(m))
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn size(&self) -> usize {
        self.0.nrows()
    }

    /// A positive self-loop somewhere is enough for aperiodicity of an irreducible chain.
    pub fn has_self_loop(&self) -> bool {
        (0..self.size()).any(|i| self.0[(i, i)] > 0.0)
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        let n = self.size();
        (0..n).all(|i| (0..n).all(|j| (self.0[(i, j)] - self.0[(j, i)]).abs() <= tol))
    }
}

fn reachable_all(m: &Matrix, transpose: bool) -> bool {
    let n = m.nrows();
    let mut seen = vec![false; n];
    let mut stack = vec![0usize];
    seen[0] = true;
    while let Some(i) = stack.pop() {
        for j in 0..n {
            let w = if transpose { m[(j, i)] } else { m[(i, j)] };
            if w > 0.0 && !seen[j] {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

fn strongly_connected(m: &Matrix) -> bool {
    reachable_all(m, false) && reachable_all(m, true)
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScheduleKind {
    /// Independent draws with the given probabilities.
    Iid { probs: Vec<f64> },
    /// `0, 1, …, n−1, 0, 1, …`
    Cyclic { n: usize },
    /// Random order in which every index shows up in every window of `period` rounds.
    EssentiallyCyclic { n: usize, period: usize },
    /// State of a Markov chain; the first emitted index is one transition away from `start`.
    MarkovChain {
        transition: TransitionMatrix,
        start: usize,
    },
}

/// A validated index process together with its RNG seed.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexSchedule {
    kind: ScheduleKind,
    seed: u64,
}

impl IndexSchedule {
    pub fn new(kind: ScheduleKind, seed: u64) -> Result<Self> {
        match &kind {
            ScheduleKind::Iid { probs } => {
                if probs.is_empty() {
                    return Err(Error::InvalidSchedule("no indices to sample".into()));
                }
                if let Some(k) = probs.iter().position(|&p| !(p > 0.0 && p.is_finite())) {
                    return Err(Error::InvalidSchedule(format!(
                        "index {k} has probability {}; every index needs positive mass",
                        probs[k]
                    )));
                }
                let total: f64 = probs.iter().sum();
                if (total - 1.0).abs() > 1e-9 {
                    return Err(Error::InvalidSchedule(format!(
                        "probabilities sum to {total}, not 1"
                    )));
                }
            }
            ScheduleKind::Cyclic { n } => {
                if *n == 0 {
                    return Err(Error::InvalidSchedule("cyclic schedule over zero indices".into()));
                }
            }
            ScheduleKind::EssentiallyCyclic { n, period } => {
                if *n == 0 || period < n {
                    return Err(Error::InvalidSchedule(format!(
                        "essentially cyclic window {period} must be at least n = {n}"
                    )));
                }
            }
            ScheduleKind::MarkovChain { transition, start } => {
                if *start >= transition.size() {
                    return Err(Error::InvalidSchedule(format!(
                        "start state {start} out of range for {} states",
                        transition.size()
                    )));
                }
            }
        }
        Ok(IndexSchedule { kind, seed })
    }

    pub fn uniform(n: usize, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSchedule("no indices to sample".into()));
        }
        Self::new(
            ScheduleKind::Iid {
                probs: vec![1.0 / n as f64; n],
            },
            seed,
        )
    }

    /// i.i.d. with probabilities proportional to `weights`.
    pub fn weighted(weights: &[f64], seed: u64) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        Self::new(
            ScheduleKind::Iid {
                probs: weights.iter().map(|w| w / total).collect(),
            },
            seed,
        )
    }

    pub fn cyclic(n: usize) -> Result<Self> {
        Self::new(ScheduleKind::Cyclic { n }, 0)
    }

    pub fn markov(transition: TransitionMatrix, start: usize, seed: u64) -> Result<Self> {
        Self::new(ScheduleKind::MarkovChain { transition, start }, seed)
    }

    pub fn kind(&self) -> &ScheduleKind {
        &self.kind
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        IndexSchedule {
            kind: self.kind.clone(),
            seed,
        }
    }

    /// Number of indices the schedule ranges over.
    pub fn n_indices(&self) -> usize {
        match &self.kind {
            ScheduleKind::Iid { probs } => probs.len(),
            ScheduleKind::Cyclic { n } | ScheduleKind::EssentiallyCyclic { n, .. } => *n,
            ScheduleKind::MarkovChain { transition, .. } => transition.size(),
        }
    }

    /// Fresh stream of indices starting from the schedule's seed.
    pub fn stream(&self) -> IndexStream {
        let rng = ChaCha8Rng::seed_from_u64(self.seed);
        let state = match &self.kind {
            ScheduleKind::Iid { probs } => StreamState::Iid(
                WeightedIndex::new(probs.iter().copied()).expect("validated probabilities"),
            ),
            ScheduleKind::Cyclic { n } => StreamState::Cyclic { n: *n, next: 0 },
            ScheduleKind::EssentiallyCyclic { n, period } => StreamState::Essential {
                period: *period,
                last_seen: vec![-1; *n],
                t: 0,
            },
            ScheduleKind::MarkovChain { transition, start } => StreamState::Markov {
                rows: (0..transition.size())
                    .map(|i| {
                        WeightedIndex::new(transition.matrix().row(i).iter().copied())
                            .expect("row-stochastic")
                    })
                    .collect(),
                current: *start,
            },
        };
        IndexStream { rng, state }
    }
}

#[derive(Debug, Clone)]
enum StreamState {
    Iid(WeightedIndex<f64>),
    Cyclic {
        n: usize,
        next: usize,
    },
    Essential {
        period: usize,
        last_seen: Vec<i64>,
        t: i64,
    },
    Markov {
        rows: Vec<WeightedIndex<f64>>,
        current: usize,
    },
}

/// Running sampler produced by [`IndexSchedule::stream`].
#[derive(Debug, Clone)]
pub struct IndexStream {
    rng: ChaCha8Rng,
    state: StreamState,
}

impl IndexStream {
    pub fn next_index(&mut self) -> usize {
        match &mut self.state {
            StreamState::Iid(dist) => dist.sample(&mut self.rng),
            StreamState::Cyclic { n, next } => {
                let j = *next;
                *next = (*next + 1) % *n;
                j
            }
            StreamState::Essential {
                period,
                last_seen,
                t,
            } => {
                let n = last_seen.len();
                let candidate = self.rng.random_range(0..n);
                let j = if deadlines_feasible(last_seen, *period, *t, candidate) {
                    candidate
                } else {
                    // earliest deadline first always keeps the window constraint satisfiable
                    (0..n).min_by_key(|&i| (last_seen[i], i)).unwrap()
                };
                last_seen[j] = *t;
                *t += 1;
                j
            }
            StreamState::Markov { rows, current } => {
                *current = rows[*current].sample(&mut self.rng);
                *current
            }
        }
    }

    /// Current Markov-chain state, if this is a chain.
    pub fn chain_state(&self) -> Option<usize> {
        match &self.state {
            StreamState::Markov { current, .. } => Some(*current),
            _ => None,
        }
    }
}

impl Iterator for IndexStream {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        Some(self.next_index())
    }
}

/// Whether emitting `pick` at time `t` still lets every index meet its deadline
/// `last_seen + period` in the following rounds.
fn deadlines_feasible(last_seen: &[i64], period: usize, t: i64, pick: usize) -> bool {
    let mut deadlines: Vec<i64> = last_seen
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != pick)
        .map(|(_, &l)| l + period as i64)
        .collect();
    deadlines.sort_unstable();
    deadlines
        .iter()
        .enumerate()
        .all(|(k, &d)| d >= t + 1 + k as i64)
}
