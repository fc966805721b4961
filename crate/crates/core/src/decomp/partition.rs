use std::collections::{BTreeMap, BTreeSet};

use indexmap::{IndexMap, IndexSet};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::SpeciesRef;
use crate::network::ReactionNetwork;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PartitionError {
    #[error("partition file: {0}")]
    Toml(String),
    #[error("partition has no modules")]
    Empty,
    #[error("module `{0}` has no reactions")]
    EmptyModule(String),
    #[error("reaction `{reaction}` is assigned to both `{first}` and `{second}`")]
    Duplicate { reaction: String, first: String, second: String },
    #[error("partition names reactions that are not in the network: {}", .0.join(", "))]
    Unknown(Vec<String>),
    #[error("reactions not assigned to any module: {}", .0.join(", "))]
    Unassigned(Vec<String>),
    #[error("no module named `{0}`")]
    NoSuchModule(String),
}

#[derive(Serialize, Deserialize)]
struct PartitionFile {
    modules: IndexMap<String, Vec<String>>,
}

/// Assignment of every reaction to exactly one module.
#[derive(Debug, Clone, PartialEq)]
pub struct ModulePartition {
    modules: IndexMap<String, Vec<String>>,
    owner: BTreeMap<String, String>,
}

impl ModulePartition {
    /// Builds a partition, rejecting empty modules and reactions listed twice.
    pub fn new(modules: IndexMap<String, Vec<String>>) -> Result<Self, PartitionError> {
        if modules.is_empty() {
            return Err(PartitionError::Empty);
        }
        let mut owner = BTreeMap::new();
        for (name, reactions) in &modules {
            if reactions.is_empty() {
                return Err(PartitionError::EmptyModule(name.clone()));
            }
            for r in reactions {
                if let Some(first) = owner.insert(r.clone(), name.clone()) {
                    return Err(PartitionError::Duplicate {
                        reaction: r.clone(),
                        first,
                        second: name.clone(),
                    });
                }
            }
        }
        Ok(ModulePartition { modules, owner })
    }

    pub fn from_toml(text: &str) -> Result<Self, PartitionError> {
        let file: PartitionFile = toml::from_str(text).map_err(|e| PartitionError::Toml(e.to_string()))?;
        Self::new(file.modules)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(&PartitionFile { modules: self.modules.clone() }).expect("partition serialises")
    }

    /// Everything in one module.
    pub fn single(network: &ReactionNetwork, name: &str) -> Self {
        let all = network.reactions.iter().map(|r| r.action.clone()).collect();
        Self::new([(name.to_string(), all)].into_iter().collect()).expect("network actions are unique")
    }

    /// Checks that the partition covers exactly the network's reactions.
    pub fn check(&self, network: &ReactionNetwork) -> Result<(), PartitionError> {
        let known: BTreeSet<&str> = network.reactions.iter().map(|r| r.action.as_str()).collect();
        let unknown: Vec<String> = self.owner.keys().filter(|r| !known.contains(r.as_str())).cloned().collect();
        if !unknown.is_empty() {
            return Err(PartitionError::Unknown(unknown));
        }
        let unassigned: Vec<String> = network
            .reactions
            .iter()
            .filter(|r| !self.owner.contains_key(&r.action))
            .map(|r| r.action.clone())
            .collect();
        if !unassigned.is_empty() {
            return Err(PartitionError::Unassigned(unassigned));
        }
        Ok(())
    }

    pub fn module_names(&self) -> impl Iterator<Item = &str> {
        self.modules.keys().map(String::as_str)
    }

    pub fn module_of(&self, reaction: &str) -> Option<&str> {
        self.owner.get(reaction).map(String::as_str)
    }

    pub fn reactions(&self, module: &str) -> Result<&[String], PartitionError> {
        self.modules
            .get(module)
            .map(Vec::as_slice)
            .ok_or_else(|| PartitionError::NoSuchModule(module.to_string()))
    }

    /// Species touched, in any role, by the module's reactions. Network order.
    pub fn species(&self, network: &ReactionNetwork, module: &str) -> Result<IndexSet<SpeciesRef>, PartitionError> {
        let own: BTreeSet<&str> = self.reactions(module)?.iter().map(String::as_str).collect();
        let touched: BTreeSet<&SpeciesRef> = network
            .reactions
            .iter()
            .filter(|r| own.contains(r.action.as_str()))
            .flat_map(|r| r.roles().map(|(s, _, _)| s))
            .collect();
        Ok(network.species.iter().filter(|s| touched.contains(s)).cloned().collect())
    }

    /// Union of two modules under a new name; the other modules are kept.
    pub fn merge(&self, a: &str, b: &str, name: &str) -> Result<Self, PartitionError> {
        let mut merged = self.reactions(a)?.to_vec();
        merged.extend_from_slice(self.reactions(b)?);
        let mut modules = IndexMap::new();
        for (m, rs) in &self.modules {
            if m == a {
                modules.insert(name.to_string(), merged.clone());
            } else if m != b {
                modules.insert(m.clone(), rs.clone());
            }
        }
        Self::new(modules)
    }
}
