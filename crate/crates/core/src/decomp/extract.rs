use std::collections::BTreeSet;

use indexmap::{IndexMap, IndexSet};
use thiserror::Error;

use crate::expr::RateExpr;
use crate::model::{
    BioPepaSystem, FunctionalRate, ModelComponent, Origin, PrefixTerm, Role, SpeciesComponent, SpeciesRef,
    SyncSet,
};
use crate::network::{derive_reactions, NetworkError, ReactionNetwork};

use super::{classify_species, Boundary, EnvironmentStub, ModulePartition, PartitionError, StubError, StubStrategy};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExtractError {
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error(transparent)]
    Stub(#[from] StubError),
    #[error("module `{module}` needs a stub for each external reagent; missing: {}", list(.missing))]
    MissingStubs { module: String, missing: Vec<SpeciesRef> },
    #[error("stub for {species} does not apply: {species} is not a species of module `{module}`")]
    NotInModule { module: String, species: SpeciesRef },
    #[error("stub for {species} does not apply: {species} is local to module `{module}`")]
    LocalSpecies { module: String, species: SpeciesRef },
    #[error("conflicting stubs for {species}: {first} and {second}")]
    Conflict { species: SpeciesRef, first: &'static str, second: &'static str },
}

fn list(s: &[SpeciesRef]) -> String {
    s.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

/// A module turned into a model of its own.
#[derive(Debug, Clone)]
pub struct ExtractedModule {
    pub system: BioPepaSystem,
    pub network: ReactionNetwork,
    /// Actions of the synthesised stub reactions.
    pub stub_actions: Vec<String>,
}

/// Builds a standalone system from the reactions of `module`, with the
/// module's external reagents replaced by `stubs`. Stubs that name another
/// module are ignored.
pub fn extract_module(
    system: &BioPepaSystem,
    partition: &ModulePartition,
    module: &str,
    stubs: &[EnvironmentStub],
) -> Result<ExtractedModule, ExtractError> {
    let parent = derive_reactions(system)?;
    let classes = classify_species(&parent, partition)?;
    let own: BTreeSet<&str> = partition.reactions(module)?.iter().map(String::as_str).collect();
    let table = &classes.modules[module];

    let stubs: Vec<&EnvironmentStub> = stubs.iter().filter(|s| s.applies_to(module)).collect();
    let mut kinds: IndexMap<&SpeciesRef, Vec<&StubStrategy>> = IndexMap::new();
    for stub in &stubs {
        stub.validate()?;
        match table.get(&stub.species) {
            None => {
                return Err(ExtractError::NotInModule { module: module.into(), species: stub.species.clone() });
            }
            Some(c) if c.boundary == Boundary::Local => {
                return Err(ExtractError::LocalSpecies { module: module.into(), species: stub.species.clone() });
            }
            Some(_) => {}
        }
        let seen = kinds.entry(&stub.species).or_default();
        for prev in seen.iter() {
            let clash = prev.kind() == stub.strategy.kind()
                || (prev.initial().is_some() && stub.strategy.initial().is_some());
            if clash {
                return Err(ExtractError::Conflict {
                    species: stub.species.clone(),
                    first: prev.kind(),
                    second: stub.strategy.kind(),
                });
            }
        }
        seen.push(&stub.strategy);
    }
    let missing: Vec<SpeciesRef> = table
        .iter()
        .filter(|(s, c)| c.boundary == Boundary::ExternalReagent && !kinds.contains_key(s))
        .map(|(s, _)| s.clone())
        .collect();
    if !missing.is_empty() {
        return Err(ExtractError::MissingStubs { module: module.into(), missing });
    }

    let species: IndexSet<SpeciesRef> = table.keys().cloned().collect();
    let mut rates: IndexMap<String, FunctionalRate> =
        system.rates.iter().filter(|(a, _)| own.contains(a.as_str())).map(|(a, r)| (a.clone(), r.clone())).collect();
    let mut used: BTreeSet<String> = BTreeSet::new();
    for r in rates.values() {
        used.extend(r.expr.parameters().into_iter().map(String::from));
    }
    let mut parameters: IndexMap<String, f64> =
        system.parameters.iter().filter(|(p, _)| used.contains(*p)).map(|(p, v)| (p.clone(), *v)).collect();
    let taken = |name: &str| system.rates.contains_key(name) || system.parameters.contains_key(name);
    let fresh = |base: String| {
        let mut name = base.clone();
        let mut n = 2;
        while taken(&name) || taken(&format!("k_{name}")) {
            name = format!("{base}_{n}");
            n += 1;
        }
        name
    };

    let mut components: Vec<SpeciesComponent> = Vec::new();
    let mut stub_actions = Vec::new();
    for s in &species {
        let parent_comp = system.component(s).expect("network species have components");
        let mut comp = SpeciesComponent {
            subject: s.clone(),
            prefixes: parent_comp.prefixes.iter().filter(|p| own.contains(p.action.as_str())).cloned().collect(),
            origin: parent_comp.origin.clone(),
        };
        for strategy in kinds.get(s).into_iter().flatten() {
            let (prefix, role, rate) = match **strategy {
                StubStrategy::FixedInitial { .. } => continue,
                StubStrategy::ZeroOrderCreation { rate, .. } => ("stub_create", Role::Product, rate),
                StubStrategy::FirstOrderDegradation { rate } => ("stub_decay", Role::Reactant, rate),
            };
            let action = fresh(format!("{prefix}_{}", s.mangled()));
            let param = format!("k_{action}");
            parameters.insert(param.clone(), rate);
            rates.insert(action.clone(), FunctionalRate { expr: RateExpr::mass_action(&param), origin: Origin::default() });
            comp.prefixes.push(PrefixTerm::new(&action, 1, role));
            stub_actions.push(action);
        }
        components.push(comp);
    }

    let locations: BTreeSet<&str> = species.iter().map(|s| s.location.as_str()).collect();
    let actions: BTreeSet<String> = rates.keys().cloned().collect();
    let mut model = system.model.as_ref().and_then(|m| prune(m, &species, &actions));
    if let Some(m) = model.as_mut() {
        m.map_initial(&mut |s, v| kinds.get(s).into_iter().flatten().find_map(|k| k.initial()).unwrap_or(v));
    }
    let out = BioPepaSystem {
        locations: system.locations.iter().filter(|l| locations.contains(l.name.as_str())).cloned().collect(),
        species_info: system.species_info.iter().filter(|i| species.contains(&i.subject)).cloned().collect(),
        parameters,
        rates,
        components,
        model,
    };
    let network = derive_reactions(&out)?;
    Ok(ExtractedModule { system: out, network, stub_actions })
}

/// Drops instances outside `keep`, collapsing cooperations with an empty side.
fn prune(m: &ModelComponent, keep: &IndexSet<SpeciesRef>, actions: &BTreeSet<String>) -> Option<ModelComponent> {
    match m {
        ModelComponent::Instance { subject, .. } => keep.contains(subject).then(|| m.clone()),
        ModelComponent::Cooperation { left, sync, right } => {
            match (prune(left, keep, actions), prune(right, keep, actions)) {
                (Some(l), Some(r)) => {
                    let sync = match sync {
                        SyncSet::Star => SyncSet::Star,
                        SyncSet::Actions(a) => SyncSet::Actions(a.intersection(actions).cloned().collect()),
                    };
                    Some(ModelComponent::cooperate(l, sync, r))
                }
                (l, r) => l.or(r),
            }
        }
    }
}
