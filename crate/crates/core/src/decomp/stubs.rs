use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::SpeciesRef;

/// How the environment of a module is imitated for one species.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StubStrategy {
    /// Start from `amount`; no extra reactions.
    FixedInitial { amount: f64 },
    /// `∅ → S` at a constant `rate`, starting from `initial`.
    ZeroOrderCreation { rate: f64, initial: f64 },
    /// `S → ∅` with mass-action `rate`.
    FirstOrderDegradation { rate: f64 },
}

impl StubStrategy {
    pub fn kind(&self) -> &'static str {
        match self {
            StubStrategy::FixedInitial { .. } => "fixed_initial",
            StubStrategy::ZeroOrderCreation { .. } => "zero_order_creation",
            StubStrategy::FirstOrderDegradation { .. } => "first_order_degradation",
        }
    }

    fn numbers(&self) -> Vec<(&'static str, f64)> {
        match *self {
            StubStrategy::FixedInitial { amount } => vec![("amount", amount)],
            StubStrategy::ZeroOrderCreation { rate, initial } => vec![("rate", rate), ("initial", initial)],
            StubStrategy::FirstOrderDegradation { rate } => vec![("rate", rate)],
        }
    }

    /// Initial amount the stub imposes, if any.
    pub fn initial(&self) -> Option<f64> {
        match *self {
            StubStrategy::FixedInitial { amount } => Some(amount),
            StubStrategy::ZeroOrderCreation { initial, .. } => Some(initial),
            StubStrategy::FirstOrderDegradation { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvironmentStub {
    pub species: SpeciesRef,
    /// Module the stub belongs to; `None` applies to any module.
    pub module: Option<String>,
    pub strategy: StubStrategy,
    /// How the values were obtained.
    pub note: String,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StubError {
    #[error("stub file: {0}")]
    Toml(String),
    #[error("stub for {species}: {message}")]
    Invalid { species: String, message: String },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStub {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    module: Option<String>,
    species: String,
    strategy: StubStrategy,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    note: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StubFile {
    #[serde(default)]
    stub: Vec<RawStub>,
}

impl EnvironmentStub {
    pub fn new(species: SpeciesRef, strategy: StubStrategy) -> Self {
        EnvironmentStub { species, module: None, strategy, note: String::new() }
    }

    pub fn for_module(mut self, module: &str) -> Self {
        self.module = Some(module.to_string());
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    /// Rates and amounts must be finite and nonnegative.
    pub fn validate(&self) -> Result<(), StubError> {
        for (field, v) in self.strategy.numbers() {
            if !v.is_finite() || v < 0.0 {
                return Err(StubError::Invalid {
                    species: self.species.to_string(),
                    message: format!("{field} must be a nonnegative number, found {v}"),
                });
            }
        }
        Ok(())
    }

    pub fn applies_to(&self, module: &str) -> bool {
        self.module.as_deref().is_none_or(|m| m == module)
    }
}

pub fn parse_stubs(text: &str) -> Result<Vec<EnvironmentStub>, StubError> {
    let file: StubFile = toml::from_str(text).map_err(|e| StubError::Toml(e.to_string()))?;
    file.stub
        .into_iter()
        .map(|raw| {
            let species = raw
                .species
                .parse::<SpeciesRef>()
                .map_err(|message| StubError::Invalid { species: raw.species.clone(), message })?;
            let stub = EnvironmentStub { species, module: raw.module, strategy: raw.strategy, note: raw.note };
            stub.validate()?;
            Ok(stub)
        })
        .collect()
}

pub fn stubs_to_toml(stubs: &[EnvironmentStub]) -> String {
    let file = StubFile {
        stub: stubs
            .iter()
            .map(|s| RawStub {
                module: s.module.clone(),
                species: s.species.to_string(),
                strategy: s.strategy,
                note: s.note.clone(),
            })
            .collect(),
    };
    toml::to_string(&file).expect("stubs serialise")
}
