use thiserror::Error;

use crate::model::SpeciesRef;
use crate::trace::EnsembleTrace;

use super::{EnvironmentStub, StubStrategy};

/// Which strategy [`fit_stub`] should produce.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StubHint {
    ZeroOrderCreation,
    /// The reference maximum, or the given quantile of the reference values.
    FixedInitial { quantile: Option<f64> },
    FirstOrderDegradation,
    /// Zero-order creation unless the fitted slope is negligible, then the
    /// reference maximum.
    Auto,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error("reference trace has no column for {0}")]
    MissingSpecies(SpeciesRef),
    #[error("reference trace for {0} needs at least two time points")]
    TooShort(SpeciesRef),
    #[error("quantile {0} is outside [0, 1]")]
    BadQuantile(f64),
    #[error("reference trace for {0} has no positive values to fit a decay to")]
    NoPositiveValues(SpeciesRef),
}

/// Least-squares slope through the first point, and the rms residual.
fn slope_through_origin(t: &[f64], y: &[f64]) -> (f64, f64) {
    let (t0, y0) = (t[0], y[0]);
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (&ti, &yi) in t.iter().zip(y) {
        sxy += (ti - t0) * (yi - y0);
        sxx += (ti - t0) * (ti - t0);
    }
    let k = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let rss: f64 = t.iter().zip(y).map(|(&ti, &yi)| (y0 + k * (ti - t0) - yi).powi(2)).sum();
    (k, (rss / t.len() as f64).sqrt())
}

fn quantile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q * (v.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}

/// Fits an environment stub for `species` to a reference mean trace.
pub fn fit_stub(reference: &EnsembleTrace, species: &SpeciesRef, hint: StubHint) -> Result<EnvironmentStub, FitError> {
    let y = reference.mean_of(species).ok_or_else(|| FitError::MissingSpecies(species.clone()))?;
    let t = &reference.times;
    if t.len() < 2 {
        return Err(FitError::TooShort(species.clone()));
    }
    let (t0, t1) = (t[0], t[t.len() - 1]);
    let window = format!("[{t0}, {t1}]");
    let peak = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let fixed = |amount: f64, how: String| {
        EnvironmentStub::new(species.clone(), StubStrategy::FixedInitial { amount: amount.max(0.0) }).with_note(how)
    };
    let stub = match hint {
        StubHint::FixedInitial { quantile: None } => fixed(peak, format!("maximum of the reference over {window}")),
        StubHint::FixedInitial { quantile: Some(q) } => {
            if !(0.0..=1.0).contains(&q) {
                return Err(FitError::BadQuantile(q));
            }
            fixed(quantile(y, q), format!("quantile {q} of the reference over {window}"))
        }
        StubHint::ZeroOrderCreation | StubHint::Auto => {
            let (k, rms) = slope_through_origin(t, y);
            let scale = y.iter().map(|v| v.abs()).fold(1.0, f64::max);
            if hint == StubHint::Auto && (k * (t1 - t0)).abs() <= 1e-6 * scale {
                fixed(peak, format!("reference is flat over {window}; maximum used"))
            } else {
                EnvironmentStub::new(
                    species.clone(),
                    StubStrategy::ZeroOrderCreation { rate: k.max(0.0), initial: y[0].max(0.0) },
                )
                .with_note(format!("least-squares slope over {window}, rms residual {rms:.4}"))
            }
        }
        StubHint::FirstOrderDegradation => {
            let pts: Vec<(f64, f64)> =
                t.iter().zip(y).filter(|(_, &v)| v > 0.0).map(|(&ti, &v)| (ti, v.ln())).collect();
            if pts.len() < 2 {
                return Err(FitError::NoPositiveValues(species.clone()));
            }
            let (ts, ls): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
            let (slope, rms) = slope_through_origin(&ts, &ls);
            EnvironmentStub::new(species.clone(), StubStrategy::FirstOrderDegradation { rate: (-slope).max(0.0) })
                .with_note(format!("log-linear fit over {window}, rms residual {rms:.4} in log units"))
        }
    };
    Ok(stub)
}
