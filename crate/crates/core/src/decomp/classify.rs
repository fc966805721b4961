use std::collections::BTreeSet;
use std::fmt;

use indexmap::IndexMap;

use crate::model::SpeciesRef;
use crate::network::ReactionNetwork;

use super::{ModulePartition, PartitionError};

/// How a species of a module relates to the rest of the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Boundary {
    /// Only this module's reactions touch it.
    Local,
    /// Other modules read it but never change it.
    ExternalRegulator,
    /// Another module consumes or produces it.
    ExternalReagent,
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Boundary::Local => "local",
            Boundary::ExternalRegulator => "external regulator",
            Boundary::ExternalReagent => "external reagent",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpeciesClass {
    pub boundary: Boundary,
    /// Other modules whose reactions touch the species.
    pub foreign: BTreeSet<String>,
}

/// Per module, per species classification.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SpeciesClassification {
    pub modules: IndexMap<String, IndexMap<SpeciesRef, SpeciesClass>>,
}

impl SpeciesClassification {
    pub fn get(&self, module: &str, species: &SpeciesRef) -> Option<&SpeciesClass> {
        self.modules.get(module)?.get(species)
    }

    /// Species of `module` with the given boundary kind.
    pub fn with_boundary(&self, module: &str, boundary: Boundary) -> Vec<&SpeciesRef> {
        self.modules
            .get(module)
            .map(|m| m.iter().filter(|(_, c)| c.boundary == boundary).map(|(s, _)| s).collect())
            .unwrap_or_default()
    }
}

pub fn classify_species(
    network: &ReactionNetwork,
    partition: &ModulePartition,
) -> Result<SpeciesClassification, PartitionError> {
    partition.check(network)?;
    let mut out = SpeciesClassification::default();
    for module in partition.module_names() {
        let mut table = IndexMap::new();
        for s in partition.species(network, module)? {
            let mut foreign = BTreeSet::new();
            let mut reagent = false;
            for r in &network.reactions {
                let owner = partition.module_of(&r.action).expect("checked");
                if owner == module {
                    continue;
                }
                for (sp, role, _) in r.roles() {
                    if *sp == s {
                        foreign.insert(owner.to_string());
                        reagent |= role.is_reagent();
                    }
                }
            }
            let boundary = if foreign.is_empty() {
                Boundary::Local
            } else if reagent {
                Boundary::ExternalReagent
            } else {
                Boundary::ExternalRegulator
            };
            table.insert(s, SpeciesClass { boundary, foreign });
        }
        out.modules.insert(module.to_string(), table);
    }
    Ok(out)
}
