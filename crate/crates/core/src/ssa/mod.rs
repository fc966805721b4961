//! Exact stochastic simulation with the Gibson-Bruck next-reaction method.
//!
//! Each run owns a `ChaCha8Rng` seeded with `base_seed + run_index`, so any
//! single run of an ensemble can be reproduced on its own. Ensemble runs are
//! processed in fixed-size chunks in parallel and the per-chunk statistics
//! are merged in chunk order, which makes the output independent of the
//! number of threads.

mod queue;

pub use queue::EventQueue;

use indexmap::IndexMap;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use thiserror::Error;

use crate::network::{RateError, ReactionNetwork, State};
use crate::trace::{EnsembleTrace, Grid};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error(transparent)]
    Rate(#[from] RateError),
    #[error("{0}")]
    InvalidArgument(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub time: f64,
    pub reaction: usize,
}

/// One realisation: the initial state plus the firing sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub initial: State,
    pub events: Vec<Event>,
    pub end_time: f64,
    /// Time at which every propensity dropped to zero, if before `end_time`.
    pub stalled_at: Option<f64>,
    /// Number of rate evaluations clamped from a negative value.
    pub clamped: u64,
}

impl Trajectory {
    /// State after all events with time `<= t`.
    pub fn state_at(&self, network: &ReactionNetwork, t: f64) -> State {
        let mut s = self.initial.clone();
        for e in self.events.iter().take_while(|e| e.time <= t) {
            network.fire(e.reaction, &mut s);
        }
        s
    }
}

/// Summary of one run that did not keep its events.
#[derive(Debug, Clone, Copy, PartialEq)]
struct RunSummary {
    stalled_at: Option<f64>,
    clamped: u64,
}

fn exp_draw(rng: &mut ChaCha8Rng, rate: f64, now: f64) -> f64 {
    if rate > 0.0 {
        let e: f64 = rng.sample(Exp1);
        now + e / rate
    } else {
        f64::INFINITY
    }
}

/// Core loop. `on_event(time, reaction, state_after)` sees every firing.
fn run(
    network: &ReactionNetwork,
    deps: &[Vec<usize>],
    t_end: f64,
    seed: u64,
    mut on_event: impl FnMut(f64, usize, &[u64]),
) -> Result<RunSummary, SimError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = network.reactions.len();
    let mut state: State = network.initial.clone();
    let mut amounts: Vec<f64> = network.initial_amounts();
    let mut clamped = 0u64;
    let mut prop = vec![0.0; n];
    let mut times = vec![f64::INFINITY; n];
    for r in 0..n {
        let v = network.propensity(r, &amounts)?;
        clamped += v.clamped as u64;
        prop[r] = v.value;
        times[r] = exp_draw(&mut rng, v.value, 0.0);
    }
    let mut queue = EventQueue::new(times);
    let mut now = 0.0;
    loop {
        let Some((r, t)) = queue.peek() else {
            return Ok(RunSummary { stalled_at: None, clamped });
        };
        if t.is_infinite() {
            return Ok(RunSummary { stalled_at: Some(now), clamped });
        }
        if t > t_end {
            return Ok(RunSummary { stalled_at: None, clamped });
        }
        debug_assert!(t >= now, "event queue went back in time");
        now = t;
        network.fire(r, &mut state);
        for &(i, _) in &network.compiled()[r].delta {
            amounts[i] = state[i] as f64;
        }
        on_event(now, r, &state);

        let v = network.propensity(r, &amounts)?;
        clamped += v.clamped as u64;
        prop[r] = v.value;
        queue.update(r, exp_draw(&mut rng, v.value, now));
        for &d in &deps[r] {
            if d == r {
                continue;
            }
            let v = network.propensity(d, &amounts)?;
            clamped += v.clamped as u64;
            let (old, new) = (prop[d], v.value);
            prop[d] = new;
            let next = if new <= 0.0 {
                f64::INFINITY
            } else if old > 0.0 {
                now + (old / new) * (queue.time(d) - now)
            } else {
                exp_draw(&mut rng, new, now)
            };
            queue.update(d, next);
        }
    }
}

/// Simulates one trajectory up to `t_end`. Deterministic in `seed`.
pub fn simulate(network: &ReactionNetwork, t_end: f64, seed: u64) -> Result<Trajectory, SimError> {
    if !(t_end > 0.0) {
        return Err(SimError::InvalidArgument(format!("end time must be positive, got {t_end}")));
    }
    let deps = network.dependency_graph();
    let mut events = Vec::new();
    let summary = run(network, &deps, t_end, seed, |time, reaction, _| events.push(Event { time, reaction }))?;
    Ok(Trajectory {
        initial: network.initial.clone(),
        events,
        end_time: t_end,
        stalled_at: summary.stalled_at,
        clamped: summary.clamped,
    })
}

/// Firings per reaction, keyed by action name.
pub fn record_firing_counts(network: &ReactionNetwork, trajectory: &Trajectory) -> IndexMap<String, u64> {
    let mut counts: IndexMap<String, u64> = network.reactions.iter().map(|r| (r.action.clone(), 0)).collect();
    for e in trajectory.events.iter().filter(|e| e.time <= trajectory.end_time) {
        counts[e.reaction] += 1;
    }
    counts
}

/// Streaming mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Welford {
    pub n: u64,
    pub mean: f64,
    pub m2: f64,
}

impl Welford {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    /// Chan et al. pairwise combination.
    pub fn merge(&mut self, other: &Welford) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        self.mean += d * other.n as f64 / n as f64;
        self.m2 += other.m2 + d * d * (self.n as f64 * other.n as f64) / n as f64;
        self.n = n;
    }

    /// Unbiased variance; zero for fewer than two samples.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            (self.m2 / (self.n - 1) as f64).max(0.0)
        }
    }
}

#[derive(Debug, Clone)]
struct Accumulator {
    /// `[species][grid]`
    grid: Vec<Vec<Welford>>,
    firings: Vec<Welford>,
    stalled: Vec<(u64, f64)>,
    clamped: u64,
}

impl Accumulator {
    fn new(species: usize, points: usize, reactions: usize) -> Self {
        Accumulator {
            grid: vec![vec![Welford::default(); points]; species],
            firings: vec![Welford::default(); reactions],
            stalled: Vec::new(),
            clamped: 0,
        }
    }

    fn merge(&mut self, other: &Accumulator) {
        for (a, b) in self.grid.iter_mut().zip(&other.grid) {
            for (x, y) in a.iter_mut().zip(b) {
                x.merge(y);
            }
        }
        for (x, y) in self.firings.iter_mut().zip(&other.firings) {
            x.merge(y);
        }
        self.stalled.extend_from_slice(&other.stalled);
        self.clamped += other.clamped;
    }
}

/// Ensemble statistics of a batch of runs.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResult {
    pub trace: EnsembleTrace,
    /// Mean and unbiased variance of the firing count of each reaction
    /// over `[0, t_end]`.
    pub firing_mean: IndexMap<String, f64>,
    pub firing_variance: IndexMap<String, f64>,
    /// `(seed, stall time)` of runs that ran out of enabled reactions early.
    pub stalled: Vec<(u64, f64)>,
    pub clamped: u64,
    pub seeds: std::ops::Range<u64>,
}

const CHUNK: usize = 16;

/// Runs `runs` simulations with seeds `base_seed..base_seed + runs` and
/// samples each as a right-continuous step function on `grid`.
pub fn ensemble(network: &ReactionNetwork, grid: &Grid, runs: usize, base_seed: u64) -> Result<EnsembleResult, SimError> {
    if runs == 0 {
        return Err(SimError::InvalidArgument("at least one run is required".into()));
    }
    if grid.is_empty() || grid.times.windows(2).any(|w| w[1] <= w[0]) || grid.times[0] < 0.0 {
        return Err(SimError::InvalidArgument("grid times must be nonnegative and increasing".into()));
    }
    let t_end = grid.end();
    let deps = network.dependency_graph();
    let (ns, np, nr) = (network.species.len(), grid.len(), network.reactions.len());

    let chunks: Vec<Result<Accumulator, SimError>> = (0..runs.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut acc = Accumulator::new(ns, np, nr);
            for run_idx in c * CHUNK..((c + 1) * CHUNK).min(runs) {
                let seed = base_seed.wrapping_add(run_idx as u64);
                let mut k = 0usize;
                let mut counts = vec![0u64; nr];
                let mut current = network.initial.clone();
                let summary = run(network, &deps, t_end, seed, |time, r, state| {
                    while k < np && grid.times[k] < time {
                        for (s, col) in acc.grid.iter_mut().enumerate() {
                            col[k].push(current[s] as f64);
                        }
                        k += 1;
                    }
                    counts[r] += 1;
                    current.copy_from_slice(state);
                })?;
                while k < np {
                    for (s, col) in acc.grid.iter_mut().enumerate() {
                        col[k].push(current[s] as f64);
                    }
                    k += 1;
                }
                for (w, &c) in acc.firings.iter_mut().zip(&counts) {
                    w.push(c as f64);
                }
                if let Some(t) = summary.stalled_at {
                    acc.stalled.push((seed, t));
                }
                acc.clamped += summary.clamped;
            }
            Ok(acc)
        })
        .collect();

    let mut total = Accumulator::new(ns, np, nr);
    for c in chunks {
        total.merge(&c?);
    }
    let mean = total.grid.iter().map(|col| col.iter().map(|w| w.mean).collect()).collect();
    let variance = total.grid.iter().map(|col| col.iter().map(Welford::variance).collect()).collect();
    let names = network.reactions.iter().map(|r| r.action.clone());
    Ok(EnsembleResult {
        trace: EnsembleTrace {
            times: grid.times.clone(),
            species: network.species.iter().cloned().collect(),
            mean,
            variance: Some(variance),
            runs,
        },
        firing_mean: names.clone().zip(total.firings.iter().map(|w| w.mean)).collect(),
        firing_variance: names.zip(total.firings.iter().map(Welford::variance)).collect(),
        stalled: total.stalled,
        clamped: total.clamped,
        seeds: base_seed..base_seed.wrapping_add(runs as u64),
    })
}
