//! Experiment configuration files.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// One experiment: a model, optional decomposition inputs, and exactly one
/// analysis block.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: Option<PathBuf>,
    pub partition: Option<PathBuf>,
    pub stubs: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub ssa: Option<SsaBlock>,
    pub ctmc: Option<CtmcBlock>,
    pub decompose: Option<DecomposeBlock>,
    pub fit: Option<FitBlock>,
    pub compare: Option<CompareBlock>,
}

fn runs() -> usize {
    100
}
fn points() -> usize {
    200
}
fn seed() -> u64 {
    1
}
fn state_cap() -> usize {
    5_000_000
}
fn epsilon() -> f64 {
    1e-10
}
fn threshold() -> f64 {
    biopepa_core::decomp::DEFAULT_THRESHOLD
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SsaBlock {
    #[serde(default = "runs")]
    pub runs: usize,
    pub t_end: Option<f64>,
    #[serde(default = "points")]
    pub points: usize,
    #[serde(default = "seed")]
    pub seed: u64,
    /// Number of individual runs to write next to the ensemble.
    #[serde(default)]
    pub write_runs: usize,
    /// Added standard deviations when deriving maxima for the manifest.
    #[serde(default)]
    pub sigma_margin: f64,
}

impl Default for SsaBlock {
    fn default() -> Self {
        SsaBlock { runs: runs(), t_end: None, points: points(), seed: seed(), write_runs: 0, sigma_margin: 0.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CtmcBlock {
    pub queries: Option<PathBuf>,
    #[serde(default = "state_cap")]
    pub state_cap: usize,
    #[serde(default = "epsilon")]
    pub epsilon: f64,
    /// Manifest of an earlier `simulate` run to take maxima from.
    pub maxima_from: Option<PathBuf>,
    #[serde(default = "runs")]
    pub derive_runs: usize,
    /// Defaults to the last query time.
    pub derive_t_end: Option<f64>,
    #[serde(default = "points")]
    pub derive_points: usize,
    #[serde(default = "seed")]
    pub derive_seed: u64,
    #[serde(default)]
    pub sigma_margin: f64,
    pub sweep: Option<SweepBlock>,
}

impl Default for CtmcBlock {
    fn default() -> Self {
        CtmcBlock {
            queries: None,
            state_cap: state_cap(),
            epsilon: epsilon(),
            maxima_from: None,
            derive_runs: runs(),
            derive_t_end: None,
            derive_points: points(),
            derive_seed: seed(),
            sigma_margin: 0.0,
            sweep: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    pub parameter: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecomposeBlock {
    /// Modules to extract; empty means all of them.
    #[serde(default)]
    pub modules: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum HintName {
    #[default]
    Auto,
    ZeroOrderCreation,
    FixedInitial,
    FirstOrderDegradation,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitBlock {
    /// Means CSV to fit against; the model is simulated when absent.
    pub reference: Option<PathBuf>,
    #[serde(default)]
    pub species: Vec<String>,
    pub module: Option<String>,
    #[serde(default)]
    pub hint: HintName,
    pub quantile: Option<f64>,
    #[serde(default = "runs")]
    pub runs: usize,
    pub t_end: Option<f64>,
    #[serde(default = "points")]
    pub points: usize,
    #[serde(default = "seed")]
    pub seed: u64,
}

impl Default for FitBlock {
    fn default() -> Self {
        FitBlock {
            reference: None,
            species: vec![],
            module: None,
            hint: HintName::Auto,
            quantile: None,
            runs: runs(),
            t_end: None,
            points: points(),
            seed: seed(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareBlock {
    pub candidate: Option<PathBuf>,
    pub reference: Option<PathBuf>,
    #[serde(default)]
    pub species: Vec<String>,
    #[serde(default = "threshold")]
    pub threshold: f64,
}

impl Default for CompareBlock {
    fn default() -> Self {
        CompareBlock { candidate: None, reference: None, species: vec![], threshold: threshold() }
    }
}

/// Analysis kinds, one per config block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    Ssa,
    Ctmc,
    Decompose,
    Fit,
    Compare,
}

impl Block {
    pub fn name(self) -> &'static str {
        match self {
            Block::Ssa => "ssa",
            Block::Ctmc => "ctmc",
            Block::Decompose => "decompose",
            Block::Fit => "fit",
            Block::Compare => "compare",
        }
    }
}

impl ExperimentConfig {
    /// Reads a config and makes its paths relative to the file's directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut cfg: ExperimentConfig =
            toml::from_str(&text).map_err(|e| CliError::Semantic(format!("{}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        cfg.rebase(&base);
        cfg.blocks()?;
        Ok(cfg)
    }

    fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut Option<PathBuf>| {
            if let Some(x) = p.as_mut() {
                if x.is_relative() {
                    *x = base.join(&*x);
                }
            }
        };
        fix(&mut self.model);
        fix(&mut self.partition);
        fix(&mut self.stubs);
        fix(&mut self.output);
        if let Some(c) = self.ctmc.as_mut() {
            fix(&mut c.queries);
            fix(&mut c.maxima_from);
        }
        if let Some(f) = self.fit.as_mut() {
            fix(&mut f.reference);
        }
        if let Some(c) = self.compare.as_mut() {
            fix(&mut c.candidate);
            fix(&mut c.reference);
        }
    }

    /// Analysis blocks present; more than one is an error.
    pub fn blocks(&self) -> Result<Option<Block>, CliError> {
        let present: Vec<Block> = [
            (self.ssa.is_some(), Block::Ssa),
            (self.ctmc.is_some(), Block::Ctmc),
            (self.decompose.is_some(), Block::Decompose),
            (self.fit.is_some(), Block::Fit),
            (self.compare.is_some(), Block::Compare),
        ]
        .into_iter()
        .filter(|(p, _)| *p)
        .map(|(_, b)| b)
        .collect();
        match present.as_slice() {
            [] => Ok(None),
            [b] => Ok(Some(*b)),
            many => Err(CliError::Semantic(format!(
                "a config holds exactly one analysis block, found: {}",
                many.iter().map(|b| format!("[{}]", b.name())).collect::<Vec<_>>().join(", ")
            ))),
        }
    }

    /// Fails when the config was written for a different command.
    pub fn expect_block(&self, wanted: Block) -> Result<(), CliError> {
        match self.blocks()? {
            Some(b) if b != wanted => Err(CliError::Semantic(format!(
                "this config has a [{}] block but the command needs [{}]",
                b.name(),
                wanted.name()
            ))),
            _ => Ok(()),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }
}

pub fn require<T>(v: Option<T>, what: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Semantic(format!("missing {what}")))
}
