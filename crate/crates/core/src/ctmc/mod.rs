//! CTMC with levels: construction, transient solution and queries.

mod build;
mod poisson;
pub mod query;
mod sweep;

pub use build::{build_level_ctmc, derive_species_info, BuildOptions, LevelCtmc};
pub use poisson::{poisson_weights, PoissonWeights};
pub use query::{
    eval_cumulative_reward, eval_instantaneous_reward, eval_prob, evaluate_queries,
    parse_queries, parse_queries_named, Comparison, Query, QueryError, QueryKind, QueryRow,
};
pub use sweep::{sweep, SweepRow};

use thiserror::Error;

use crate::model::SpeciesRef;
use crate::network::RateError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CtmcError {
    #[error("species {0} has no step size or maximum amount")]
    MissingInfo(SpeciesRef),
    #[error("species {0}: {1}")]
    BadInfo(SpeciesRef, String),
    #[error("reaction `{action}` changes species with different step sizes: {}", .species.join(", "))]
    MixedStepSizes { action: String, species: Vec<String> },
    #[error("level space does not fit in 128 bits")]
    LevelSpaceTooLarge,
    #[error("state space exceeds the cap of {cap} states ({discovered} discovered, {explored} expanded)")]
    StateCapExceeded { cap: usize, explored: usize, discovered: usize },
    #[error("{error} in state {state}")]
    Rate { error: RateError, state: String },
    #[error("time {0} is negative or not finite")]
    BadTime(f64),
    #[error("time points must be sorted")]
    UnsortedTimes,
    #[error("transition {0} -> {1} is invalid: {2}")]
    BadTransition(usize, usize, String),
}

/// Generator in row-compressed form: off-diagonal rates per source state,
/// each labelled with the reaction that causes it.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseCtmc {
    row_ptr: Vec<usize>,
    col: Vec<usize>,
    rate: Vec<f64>,
    label: Vec<usize>,
    exit: Vec<f64>,
    pub initial: usize,
}

impl SparseCtmc {
    /// Builds from `(source, target, rate, label)` triplets in any order.
    pub fn from_triplets(
        states: usize,
        mut triplets: Vec<(usize, usize, f64, usize)>,
        initial: usize,
    ) -> Result<Self, CtmcError> {
        for &(s, t, r, _) in &triplets {
            if s >= states || t >= states {
                return Err(CtmcError::BadTransition(s, t, "state out of range".into()));
            }
            if s == t {
                return Err(CtmcError::BadTransition(s, t, "self-loop".into()));
            }
            if !(r > 0.0 && r.is_finite()) {
                return Err(CtmcError::BadTransition(s, t, format!("rate {r}")));
            }
        }
        triplets.sort_by(|a, b| (a.0, a.1, a.3).cmp(&(b.0, b.1, b.3)));
        let mut row_ptr = vec![0; states + 1];
        for &(s, ..) in &triplets {
            row_ptr[s + 1] += 1;
        }
        for i in 0..states {
            row_ptr[i + 1] += row_ptr[i];
        }
        let mut exit = vec![0.0; states];
        for &(s, _, r, _) in &triplets {
            exit[s] += r;
        }
        Ok(SparseCtmc {
            row_ptr,
            col: triplets.iter().map(|t| t.1).collect(),
            rate: triplets.iter().map(|t| t.2).collect(),
            label: triplets.iter().map(|t| t.3).collect(),
            exit,
            initial,
        })
    }

    pub fn len(&self) -> usize {
        self.exit.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exit.is_empty()
    }

    pub fn transition_count(&self) -> usize {
        self.col.len()
    }

    /// `(target, rate, label)` for each transition out of `s`.
    pub fn row(&self, s: usize) -> impl Iterator<Item = (usize, f64, usize)> + '_ {
        let r = self.row_ptr[s]..self.row_ptr[s + 1];
        r.map(move |k| (self.col[k], self.rate[k], self.label[k]))
    }

    pub fn exit_rate(&self, s: usize) -> f64 {
        self.exit[s]
    }

    pub fn max_exit_rate(&self) -> f64 {
        self.exit.iter().cloned().fold(0.0, f64::max)
    }

    pub fn point_mass(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.len()];
        v[self.initial] = 1.0;
        v
    }

    /// One step of the uniformised chain: `out = v (I + Q / lambda)`.
    fn dtmc_step(&self, v: &[f64], lambda: f64, out: &mut [f64]) {
        for (o, (&x, &e)) in out.iter_mut().zip(v.iter().zip(&self.exit)) {
            *o = x * (1.0 - e / lambda);
        }
        for (s, &x) in v.iter().enumerate() {
            if x == 0.0 {
                continue;
            }
            let scaled = x / lambda;
            for k in self.row_ptr[s]..self.row_ptr[s + 1] {
                out[self.col[k]] += scaled * self.rate[k];
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Poisson mass that may be dropped per solve segment.
    pub epsilon: f64,
    /// Uniformisation rate as a multiple of the largest exit rate.
    pub factor: f64,
    /// Upper bound on the number of probabilities held at once for a batch
    /// of time points.
    pub batch_memory: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { epsilon: 1e-10, factor: 1.02, batch_memory: 1 << 24 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransientDistribution {
    pub time: f64,
    pub probabilities: Vec<f64>,
}

impl TransientDistribution {
    pub fn total(&self) -> f64 {
        self.probabilities.iter().sum()
    }
}

/// `π(t) = π(0) e^{Qt}` from the initial state of `chain`.
pub fn transient(chain: &SparseCtmc, t: f64) -> Result<TransientDistribution, CtmcError> {
    let mut out = None;
    solve(chain, &chain.point_mass(), &[t], &[], SolverOptions::default(), |_, p| {
        out = Some(p.to_vec());
        Ok(())
    })?;
    Ok(TransientDistribution { time: t, probabilities: out.expect("one time point") })
}

/// Uniformisation over a sorted list of time points.
///
/// `visit(k, π(times[k]))` is called for each time point in order. For each
/// reward vector `r` the return value holds `∫_0^t π(u)·r du` at every time
/// point, from the cumulative form `(1/Λ) Σ_k (1 - F(k)) (π(0) P^k)·r`.
/// Time points are processed in batches sharing one pass of DTMC powers;
/// each batch starts from the distribution at the end of the previous one.
pub fn solve(
    chain: &SparseCtmc,
    initial: &[f64],
    times: &[f64],
    rewards: &[Vec<f64>],
    options: SolverOptions,
    mut visit: impl FnMut(usize, &[f64]) -> Result<(), CtmcError>,
) -> Result<Vec<Vec<f64>>, CtmcError> {
    for &t in times {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(CtmcError::BadTime(t));
        }
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(CtmcError::UnsortedTimes);
    }
    let n = chain.len();
    let mut cumulative = vec![vec![0.0; times.len()]; rewards.len()];
    let lambda = options.factor * chain.max_exit_rate();
    if lambda == 0.0 {
        let rates: Vec<f64> = rewards.iter().map(|r| dot(initial, r)).collect();
        for (k, &t) in times.iter().enumerate() {
            visit(k, initial)?;
            for (c, &rate) in cumulative.iter_mut().zip(&rates) {
                c[k] = rate * t;
            }
        }
        return Ok(cumulative);
    }

    let batch = (options.batch_memory / n.max(1)).max(1);
    let mass: f64 = initial.iter().sum();
    let mut segments = 0.0;
    let mut current = initial.to_vec();
    let mut now = 0.0;
    let mut base = vec![0.0; rewards.len()];
    let mut v = vec![0.0; n];
    let mut next = vec![0.0; n];
    let mut start = 0;
    while start < times.len() {
        let end = (start + batch).min(times.len());
        let seg: Vec<PoissonWeights> =
            times[start..end].iter().map(|&t| poisson_weights(lambda * (t - now), options.epsilon)).collect();
        let last = seg.iter().map(PoissonWeights::right).max().unwrap_or(0);
        let mut acc = vec![vec![0.0; n]; end - start];
        let mut cdf = vec![0.0; end - start];
        let mut cum = vec![vec![0.0; rewards.len()]; end - start];
        segments += 1.0;
        v.copy_from_slice(&current);
        for k in 0..=last {
            if k > 0 {
                chain.dtmc_step(&v, lambda, &mut next);
                std::mem::swap(&mut v, &mut next);
            }
            let dots: Vec<f64> = rewards.iter().map(|r| dot(&v, r)).collect();
            for (j, w) in seg.iter().enumerate() {
                if k > w.right() {
                    continue;
                }
                let p = w.get(k);
                if p > 0.0 {
                    for (a, &x) in acc[j].iter_mut().zip(&v) {
                        *a += p * x;
                    }
                }
                cdf[j] += p;
                let tail = (1.0 - cdf[j]).max(0.0) / lambda;
                for (c, d) in cum[j].iter_mut().zip(&dots) {
                    *c += tail * d;
                }
            }
        }
        for j in 0..end - start {
            debug_assert!(acc[j].iter().all(|&x| x >= 0.0), "negative probability");
            debug_assert!(
                (acc[j].iter().sum::<f64>() - mass).abs() <= 1e-9f64.max(2.0 * options.epsilon * segments) * mass.max(1.0),
                "probability mass not conserved"
            );
            visit(start + j, &acc[j])?;
            for (r, c) in cumulative.iter_mut().enumerate() {
                c[start + j] = base[r] + cum[j][r];
            }
        }
        current = acc.pop().expect("non-empty batch");
        now = times[end - 1];
        for (r, b) in base.iter_mut().enumerate() {
            *b = cumulative[r][end - 1];
        }
        start = end;
    }
    Ok(cumulative)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
