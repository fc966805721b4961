//! Grid-sampled ensemble traces and their CSV form.

use std::io::{Read, Write};

use thiserror::Error;

use crate::model::SpeciesRef;

/// Sampling times for ensemble statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub times: Vec<f64>,
}

impl Grid {
    /// `points` evenly spaced times over `[0, t_end]`.
    pub fn uniform(t_end: f64, points: usize) -> Self {
        assert!(points >= 2 && t_end > 0.0);
        let step = t_end / (points - 1) as f64;
        let mut times: Vec<f64> = (0..points).map(|i| i as f64 * step).collect();
        times[points - 1] = t_end;
        Grid { times }
    }

    /// `0, step, 2 step, ...` up to `t_end`; `t_end` itself is included
    /// when it falls on the grid.
    pub fn with_step(t_end: f64, step: f64) -> Self {
        assert!(step > 0.0 && t_end >= 0.0);
        let n = (t_end / step + 1e-9).floor() as usize;
        Grid { times: (0..=n).map(|i| i as f64 * step).collect() }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn end(&self) -> f64 {
        *self.times.last().unwrap_or(&0.0)
    }
}

/// Per-species mean (and optionally variance) on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleTrace {
    pub times: Vec<f64>,
    pub species: Vec<SpeciesRef>,
    /// `mean[s][k]` is the mean of species `s` at `times[k]`.
    pub mean: Vec<Vec<f64>>,
    /// Unbiased variance, same layout as `mean`; absent for traces read
    /// from a means-only file.
    pub variance: Option<Vec<Vec<f64>>>,
    pub runs: usize,
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("trace file has no `time` column first")]
    MissingTime,
    #[error("bad column header `{0}`: {1}")]
    BadHeader(String, String),
    #[error("row {row}: {message}")]
    BadRow { row: usize, message: String },
    #[error("trace file has no rows")]
    Empty,
}

impl EnsembleTrace {
    pub fn index_of(&self, s: &SpeciesRef) -> Option<usize> {
        self.species.iter().position(|x| x == s)
    }

    pub fn mean_of(&self, s: &SpeciesRef) -> Option<&[f64]> {
        self.index_of(s).map(|i| self.mean[i].as_slice())
    }

    /// Right-continuous step evaluation of species `i` at time `t`.
    pub fn value_at(&self, i: usize, t: f64) -> f64 {
        let k = self.times.partition_point(|&x| x <= t);
        self.mean[i][k.saturating_sub(1)]
    }

    /// Samples every species onto another grid by step evaluation.
    pub fn resample(&self, times: &[f64]) -> EnsembleTrace {
        let mean = (0..self.species.len()).map(|i| times.iter().map(|&t| self.value_at(i, t)).collect()).collect();
        EnsembleTrace { times: times.to_vec(), species: self.species.clone(), mean, variance: None, runs: self.runs }
    }

    /// Writes `time,species...` rows of either the means or the variances.
    pub fn write_csv<W: Write>(&self, w: W, variances: bool) -> Result<(), TraceError> {
        let data = if variances {
            self.variance.as_ref().unwrap_or(&self.mean)
        } else {
            &self.mean
        };
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["time".to_string()];
        header.extend(self.species.iter().map(|s| s.to_string()));
        out.write_record(&header)?;
        for (k, t) in self.times.iter().enumerate() {
            let mut row = vec![format_float(*t)];
            row.extend(data.iter().map(|col| format_float(col[k])));
            out.write_record(&row)?;
        }
        out.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    /// Reads a means file written by [`Self::write_csv`] or by hand.
    pub fn read_csv<R: Read>(r: R) -> Result<EnsembleTrace, TraceError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(r);
        let headers = rdr.headers()?.clone();
        if headers.get(0) != Some("time") {
            return Err(TraceError::MissingTime);
        }
        let species = headers
            .iter()
            .skip(1)
            .map(|h| h.parse::<SpeciesRef>().map_err(|e| TraceError::BadHeader(h.to_string(), e)))
            .collect::<Result<Vec<_>, _>>()?;
        let mut times = Vec::new();
        let mut mean = vec![Vec::new(); species.len()];
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let parse = |j: usize| -> Result<f64, TraceError> {
                let cell = rec.get(j).unwrap_or("");
                cell.parse::<f64>().map_err(|_| TraceError::BadRow {
                    row: row + 1,
                    message: format!("cannot read `{cell}` as a number"),
                })
            };
            let t = parse(0)?;
            if times.last().is_some_and(|&p| t <= p) {
                return Err(TraceError::BadRow { row: row + 1, message: "times must increase".into() });
            }
            times.push(t);
            for (j, col) in mean.iter_mut().enumerate() {
                col.push(parse(j + 1)?);
            }
        }
        if times.is_empty() {
            return Err(TraceError::Empty);
        }
        Ok(EnsembleTrace { times, species, mean, variance: None, runs: 0 })
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}
