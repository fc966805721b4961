use indexmap::IndexMap;
use thiserror::Error;

use crate::model::SpeciesRef;
use crate::trace::EnsembleTrace;

/// Worst normalised RMSE accepted by default.
pub const DEFAULT_THRESHOLD: f64 = 0.10;

#[derive(Debug, Clone, PartialEq)]
pub struct SpeciesMetrics {
    pub rmse: f64,
    /// RMSE over the reference maximum; `None` when that maximum is 0.
    pub nrmse: Option<f64>,
    pub max_abs_deviation: f64,
    /// `|argmax candidate − argmax reference|` in time units.
    pub peak_time_difference: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceComparison {
    pub species: IndexMap<SpeciesRef, SpeciesMetrics>,
    pub worst_nrmse: f64,
    pub warnings: Vec<String>,
}

impl TraceComparison {
    pub fn passes(&self, threshold: f64) -> bool {
        self.worst_nrmse <= threshold
    }

    /// Species with the largest normalised RMSE.
    pub fn worst_species(&self) -> Option<&SpeciesRef> {
        self.species
            .iter()
            .filter_map(|(s, m)| m.nrmse.map(|n| (s, n)))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(s, _)| s)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CompareError {
    #[error("{species} is missing from the {side} trace")]
    MissingSpecies { species: SpeciesRef, side: &'static str },
    #[error("the traces have no species in common")]
    Disjoint,
    #[error("the reference trace has no time points")]
    Empty,
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

/// Compares mean traces on the reference grid. The candidate is resampled by
/// step evaluation when its grid differs. With `species` empty, every
/// species the traces share is compared.
pub fn compare_traces(
    candidate: &EnsembleTrace,
    reference: &EnsembleTrace,
    species: &[SpeciesRef],
) -> Result<TraceComparison, CompareError> {
    if reference.times.is_empty() {
        return Err(CompareError::Empty);
    }
    let chosen: Vec<SpeciesRef> = if species.is_empty() {
        let shared: Vec<SpeciesRef> =
            reference.species.iter().filter(|s| candidate.index_of(s).is_some()).cloned().collect();
        if shared.is_empty() {
            return Err(CompareError::Disjoint);
        }
        shared
    } else {
        species.to_vec()
    };
    let resampled;
    let cand = if candidate.times == reference.times {
        candidate
    } else {
        resampled = candidate.resample(&reference.times);
        &resampled
    };
    let mut out = IndexMap::new();
    let mut warnings = Vec::new();
    let mut worst: f64 = 0.0;
    for s in chosen {
        let r = reference
            .mean_of(&s)
            .ok_or_else(|| CompareError::MissingSpecies { species: s.clone(), side: "reference" })?;
        let c = cand.mean_of(&s).ok_or_else(|| CompareError::MissingSpecies { species: s.clone(), side: "candidate" })?;
        let n = r.len() as f64;
        let mut sq = 0.0;
        let mut max_abs: f64 = 0.0;
        for (a, b) in c.iter().zip(r) {
            let d = (a - b).abs();
            sq += d * d;
            max_abs = max_abs.max(d);
        }
        let rmse = (sq / n).sqrt();
        let peak = r.iter().copied().fold(0.0, f64::max);
        let nrmse = if peak > 0.0 {
            Some(rmse / peak)
        } else {
            warnings.push(format!("{s} is never present in the reference; skipped in the normalised error"));
            None
        };
        if let Some(v) = nrmse {
            worst = worst.max(v);
        }
        let peak_time_difference = (reference.times[argmax(c)] - reference.times[argmax(r)]).abs();
        out.insert(s, SpeciesMetrics { rmse, nrmse, max_abs_deviation: max_abs, peak_time_difference });
    }
    Ok(TraceComparison { species: out, worst_nrmse: worst, warnings })
}
