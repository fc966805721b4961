#![allow(dead_code)]

pub mod criteria;

use std::collections::BTreeSet;

use biopepa_core::expr::{BinOp, RateExpr};
use biopepa_core::model::{
    check_wellformed, BioPepaSystem, FunctionalRate, Location, LocationKind, ModelComponent, Origin, PrefixTerm,
    Role, SpeciesComponent, SpeciesInfo, SpeciesRef, SyncSet,
};
use biopepa_core::network::{derive_reactions, ReactionNetwork};
use biopepa_core::parser::parse;
use indexmap::IndexMap;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn number(rng: &mut ChaCha8Rng) -> f64 {
    match rng.random_range(0..4) {
        0 => rng.random_range(0..1000) as f64,
        1 => rng.random::<f64>() * 100.0,
        2 => rng.random::<f64>() * 10f64.powi(rng.random_range(-12..12)),
        _ => (rng.random_range(1..200) as f64) / 8.0,
    }
}

fn expr(rng: &mut ChaCha8Rng, depth: u32, params: &[String], species: &[SpeciesRef]) -> RateExpr {
    if depth == 0 || rng.random_bool(0.3) {
        return match rng.random_range(0..3) {
            0 => {
                let v = number(rng);
                RateExpr::Num(if rng.random_bool(0.2) { -v } else { v })
            }
            1 => RateExpr::Param(params[rng.random_range(0..params.len())].clone()),
            _ => RateExpr::Species(species[rng.random_range(0..species.len())].clone()),
        };
    }
    match rng.random_range(0..8) {
        0 => RateExpr::Neg(Box::new(expr(rng, depth - 1, params, species))),
        1 => RateExpr::MassAction(Box::new(expr(rng, depth - 1, params, species))),
        k => {
            let op = [BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div, BinOp::Pow, BinOp::Mul][k as usize - 2];
            RateExpr::binary(op, expr(rng, depth - 1, params, species), expr(rng, depth - 1, params, species))
        }
    }
}

fn actions_of(m: &ModelComponent, sys: &BioPepaSystem) -> BTreeSet<String> {
    m.instances()
        .into_iter()
        .flat_map(|(s, _, _)| sys.component(s).unwrap().prefixes.iter().map(|p| p.action.clone()))
        .collect()
}

fn tree(rng: &mut ChaCha8Rng, leaves: Vec<ModelComponent>, sys: &BioPepaSystem) -> ModelComponent {
    if leaves.len() == 1 {
        return leaves.into_iter().next().unwrap();
    }
    let cut = rng.random_range(1..leaves.len());
    let mut left = leaves;
    let right = left.split_off(cut);
    let l = tree(rng, left, sys);
    let r = tree(rng, right, sys);
    let sync = if rng.random_bool(0.5) {
        SyncSet::Star
    } else {
        SyncSet::Actions(actions_of(&l, sys).intersection(&actions_of(&r, sys)).cloned().collect())
    };
    ModelComponent::cooperate(l, sync, r)
}

/// A random system that passes `check_wellformed` without errors.
pub fn random_system(seed: u64) -> BioPepaSystem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sys = BioPepaSystem::default();
    for i in 0..rng.random_range(1..4) {
        sys.locations.push(Location {
            name: format!("loc{i}"),
            size: number(&mut rng).max(0.5),
            unit: if rng.random_bool(0.5) { "uL".into() } else { String::new() },
            kind: if rng.random_bool(0.5) { LocationKind::Compartment } else { LocationKind::Membrane },
            origin: Origin::default(),
        });
    }
    let params: Vec<String> = (0..rng.random_range(1..5)).map(|i| format!("k{i}")).collect();
    for p in &params {
        let v = number(&mut rng);
        sys.parameters.insert(p.clone(), if rng.random_bool(0.1) { -v } else { v });
    }
    let species: Vec<SpeciesRef> = (0..rng.random_range(1..6))
        .map(|i| SpeciesRef::new(&format!("S{i}"), &sys.locations[rng.random_range(0..sys.locations.len())].name))
        .collect();
    let actions: Vec<String> = (0..rng.random_range(1..6)).map(|i| format!("r{i}")).collect();
    for a in &actions {
        sys.rates.insert(a.clone(), FunctionalRate { expr: expr(&mut rng, 3, &params, &species), origin: Origin::default() });
    }
    for s in &species {
        let mut prefixes = Vec::new();
        for a in &actions {
            if rng.random_bool(0.5) {
                let role = Role::ALL[rng.random_range(0..5)];
                let k = if rng.random_bool(0.7) { 1 } else { rng.random_range(2..5) };
                prefixes.push(PrefixTerm::new(a, k, role));
            }
        }
        if prefixes.is_empty() {
            prefixes.push(PrefixTerm::new(&actions[0], 1, Role::Modifier));
        }
        sys.components.push(SpeciesComponent { subject: s.clone(), prefixes, origin: Origin::default() });
    }
    let mut initial = Vec::new();
    for s in &species {
        let v = if rng.random_bool(0.5) { rng.random_range(0..500) as f64 } else { number(&mut rng) };
        initial.push(v);
        if rng.random_bool(0.6) {
            let max = if rng.random_bool(0.5) { Some(v + 1.0 + rng.random_range(0..100) as f64) } else { None };
            sys.species_info.push(SpeciesInfo {
                subject: s.clone(),
                step_size: number(&mut rng).max(0.25),
                max_amount: max,
                origin: Origin::default(),
            });
        }
    }
    let leaves = species.iter().zip(&initial).map(|(s, v)| ModelComponent::instance(s.clone(), *v)).collect();
    sys.model = Some(tree(&mut rng, leaves, &sys));
    let errors: Vec<String> = check_wellformed(&sys).iter().filter(|d| d.is_error()).map(|d| d.to_string()).collect();
    assert!(errors.is_empty(), "generator produced an ill-formed system: {errors:?}");
    sys
}

pub fn sp(s: &str) -> SpeciesRef {
    s.parse().unwrap()
}

/// `∅ → X` at rate `birth`, `X → ∅` at rate `death · X`, levels of size 1.
pub fn birth_death(birth: f64, death: f64, initial: u64, max: u64) -> (BioPepaSystem, ReactionNetwork) {
    let text = format!(
        "[locations] c : 1, C;\n[parameters] b = {birth}; d = {death};\n[rates] up = fMA(b); down = fMA(d);\n\
         [species] X@c = up >> X@c + down << X@c;\n[info] X@c : step = 1, max = {max};\n[model] M = X@c[{initial}];"
    );
    let sys = parse(&text).unwrap();
    let net = derive_reactions(&sys).unwrap();
    (sys, net)
}

/// Pure death `X → ∅` at rate `k · X`.
pub fn pure_death(initial: u64, k: f64) -> ReactionNetwork {
    let text = format!(
        "[locations] c : 1, C;\n[parameters] k = {k};\n[rates] d = fMA(k);\n\
         [species] X@c = d << X@c;\n[model] M = X@c[{initial}];"
    );
    derive_reactions(&parse(&text).unwrap()).unwrap()
}

/// Random sparse generator on `n` states as `(src, dst, rate)` triples.
pub fn random_ctmc(seed: u64, n: usize) -> Vec<(usize, usize, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j && rng.random_bool(0.25) {
                out.push((i, j, rng.random::<f64>() * 5.0 + 0.01));
            }
        }
    }
    out
}

/// Parameters of a system as a plain map, handy for comparisons.
pub fn params(sys: &BioPepaSystem) -> IndexMap<String, f64> {
    sys.parameters.clone()
}
