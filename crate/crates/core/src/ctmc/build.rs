use std::collections::HashMap;

use crate::model::{amount_to_level, Origin, SpeciesInfo, SpeciesRef};
use crate::network::{RateError, ReactionNetwork};
use crate::trace::EnsembleTrace;

use super::{CtmcError, SparseCtmc};

/// Explicit CTMC over species levels, reachable states only.
#[derive(Debug, Clone)]
pub struct LevelCtmc {
    pub species: Vec<SpeciesRef>,
    pub steps: Vec<f64>,
    pub max_levels: Vec<u32>,
    /// Action names, indexed by transition label.
    pub reactions: Vec<String>,
    /// Step size shared by the species each reaction changes.
    pub reaction_steps: Vec<f64>,
    /// Flat `[state][species]` level table.
    levels: Vec<u32>,
    pub chain: SparseCtmc,
    /// `(state, reaction, rate)` for firings that leave every level unchanged.
    pub silent: Vec<(usize, usize, f64)>,
    /// Rate evaluations clamped from a negative value.
    pub clamped: u64,
}

impl LevelCtmc {
    pub fn state_count(&self) -> usize {
        self.chain.len()
    }

    pub fn levels(&self, state: usize) -> &[u32] {
        let n = self.species.len();
        &self.levels[state * n..(state + 1) * n]
    }

    pub fn amounts(&self, state: usize) -> Vec<f64> {
        self.levels(state).iter().zip(&self.steps).map(|(&l, &h)| l as f64 * h).collect()
    }

    pub fn species_index(&self, s: &SpeciesRef) -> Option<usize> {
        self.species.iter().position(|x| x == s)
    }

    pub fn reaction_index(&self, action: &str) -> Option<usize> {
        self.reactions.iter().position(|r| r == action)
    }

    /// Per-state expected firing rate (molecular firings per time unit) of
    /// the given reactions.
    pub fn firing_rate_vector(&self, reactions: &[usize]) -> Vec<f64> {
        let mut out = vec![0.0; self.state_count()];
        for (s, slot) in out.iter_mut().enumerate() {
            for (_, rate, label) in self.chain.row(s) {
                if reactions.contains(&label) {
                    *slot += rate * self.reaction_steps[label];
                }
            }
        }
        for &(s, r, rate) in &self.silent {
            if reactions.contains(&r) {
                out[s] += rate * self.reaction_steps[r];
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BuildOptions {
    pub state_cap: usize,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions { state_cap: 5_000_000 }
    }
}

/// Breadth-first construction from the initial level state.
///
/// A firing of `r` moves each changed species by its net stoichiometry in
/// levels and has rate `f_r(levels * h) / h_r`. Firings that would leave
/// `[0, max_level]` in any dimension are not generated.
pub fn build_level_ctmc(
    network: &ReactionNetwork,
    info: &[SpeciesInfo],
    options: BuildOptions,
) -> Result<LevelCtmc, CtmcError> {
    let n = network.species.len();
    let mut steps = Vec::with_capacity(n);
    let mut max_levels = Vec::with_capacity(n);
    let mut start = Vec::with_capacity(n);
    for (i, s) in network.species.iter().enumerate() {
        let si = info.iter().find(|x| &x.subject == s).ok_or_else(|| CtmcError::MissingInfo(s.clone()))?;
        if !(si.step_size > 0.0) {
            return Err(CtmcError::BadInfo(s.clone(), format!("step size {} is not positive", si.step_size)));
        }
        let max = si.max_level().ok_or_else(|| CtmcError::MissingInfo(s.clone()))?;
        steps.push(si.step_size);
        max_levels.push(max);
        let l = amount_to_level(network.initial[i] as f64, si).map_err(|e| CtmcError::BadInfo(s.clone(), e.to_string()))?;
        start.push(l);
    }

    let mut reaction_steps = Vec::new();
    for (r, c) in network.reactions.iter().zip(network.compiled()) {
        let changed: Vec<usize> = r
            .reactants
            .iter()
            .chain(&r.products)
            .map(|p| network.species_index(&p.species).expect("network is consistent"))
            .collect();
        let h = changed.first().map(|&i| steps[i]).unwrap_or(1.0);
        if changed.iter().any(|&i| steps[i] != h) {
            let detail = changed.iter().map(|&i| format!("{} (h = {})", network.species[i], steps[i])).collect();
            return Err(CtmcError::MixedStepSizes { action: r.action.clone(), species: detail });
        }
        debug_assert!(c.delta.iter().all(|&(i, _)| changed.contains(&i)));
        reaction_steps.push(h);
    }

    let mut radix = Vec::with_capacity(n);
    let mut capacity: u128 = 1;
    for &m in &max_levels {
        radix.push(capacity);
        capacity = capacity.checked_mul(m as u128 + 1).ok_or(CtmcError::LevelSpaceTooLarge)?;
    }
    let key = |levels: &[u32]| -> u128 { levels.iter().zip(&radix).map(|(&l, &r)| l as u128 * r).sum() };

    let mut index: HashMap<u128, usize> = HashMap::new();
    let mut levels: Vec<u32> = start.clone();
    index.insert(key(&start), 0);
    let mut triplets: Vec<(usize, usize, f64, usize)> = Vec::new();
    let mut silent = Vec::new();
    let mut clamped = 0u64;
    let mut amounts = vec![0.0; n];
    let mut next = vec![0u32; n];
    let mut s = 0;
    while s * n < levels.len() {
        let cur: Vec<u32> = levels[s * n..(s + 1) * n].to_vec();
        for (a, (&l, &h)) in amounts.iter_mut().zip(cur.iter().zip(&steps)) {
            *a = l as f64 * h;
        }
        for (r, c) in network.compiled().iter().enumerate() {
            next.copy_from_slice(&cur);
            let mut ok = true;
            for &(i, d) in &c.delta {
                let v = cur[i] as i64 + d;
                if v < 0 || v > max_levels[i] as i64 {
                    ok = false;
                    break;
                }
                next[i] = v as u32;
            }
            if !ok {
                continue;
            }
            let v = network.evaluate_rate(r, &amounts).map_err(|e| CtmcError::Rate {
                error: e,
                state: describe(&network.species.iter().cloned().collect::<Vec<_>>(), &cur),
            })?;
            clamped += v.clamped as u64;
            let rate = v.value / reaction_steps[r];
            if rate <= 0.0 {
                continue;
            }
            if c.delta.is_empty() {
                silent.push((s, r, rate));
                continue;
            }
            let k = key(&next);
            let target = match index.get(&k) {
                Some(&t) => t,
                None => {
                    let t = index.len();
                    if t >= options.state_cap {
                        return Err(CtmcError::StateCapExceeded {
                            cap: options.state_cap,
                            explored: s,
                            discovered: t,
                        });
                    }
                    index.insert(k, t);
                    levels.extend_from_slice(&next);
                    t
                }
            };
            triplets.push((s, target, rate, r));
        }
        s += 1;
    }
    let states = levels.len() / n.max(1);
    let chain = SparseCtmc::from_triplets(states.max(1), triplets, 0)?;
    Ok(LevelCtmc {
        species: network.species.iter().cloned().collect(),
        steps,
        max_levels,
        reactions: network.reactions.iter().map(|r| r.action.clone()).collect(),
        reaction_steps,
        levels,
        chain,
        silent,
        clamped,
    })
}

fn describe(species: &[SpeciesRef], levels: &[u32]) -> String {
    let parts: Vec<String> = species.iter().zip(levels).map(|(s, l)| format!("{s}={l}")).collect();
    format!("[{}]", parts.join(", "))
}

impl From<RateError> for CtmcError {
    fn from(error: RateError) -> Self {
        CtmcError::Rate { error, state: String::new() }
    }
}

/// Species information with maxima taken from simulation: the largest value
/// of `mean + sigma_margin * sd` over the grid, rounded up to a multiple of
/// the step size (and at least one step).
///
/// `steps` lists the species to derive, in output order. Species missing
/// from the trace are an error.
pub fn derive_species_info(
    trace: &EnsembleTrace,
    steps: &[(SpeciesRef, f64)],
    sigma_margin: f64,
) -> Result<Vec<SpeciesInfo>, CtmcError> {
    steps
        .iter()
        .map(|(s, h)| {
            let i = trace.index_of(s).ok_or_else(|| CtmcError::BadInfo(s.clone(), "not in the reference trace".into()))?;
            if !(*h > 0.0) {
                return Err(CtmcError::BadInfo(s.clone(), format!("step size {h} is not positive")));
            }
            let sd = |k: usize| match &trace.variance {
                Some(v) => v[i][k].max(0.0).sqrt(),
                None => 0.0,
            };
            let peak = trace.mean[i].iter().enumerate().map(|(k, m)| m + sigma_margin * sd(k)).fold(0.0, f64::max);
            let levels = (peak / h - 1e-9).ceil().max(1.0);
            Ok(SpeciesInfo { subject: s.clone(), step_size: *h, max_amount: Some(levels * h), origin: Origin::default() })
        })
        .collect()
}
