mod common;

use std::collections::BTreeSet;

use biopepa_core::corpus;
use biopepa_core::ctmc::{build_level_ctmc, solve, BuildOptions, SolverOptions};
use biopepa_core::decomp::{
    classify_species, extract_module, fit_stub, Boundary, ModulePartition, StubHint, StubStrategy,
};
use biopepa_core::model::SpeciesRef;
use biopepa_core::network::derive_reactions;
use biopepa_core::parser::parse;
use biopepa_core::trace::EnsembleTrace;
use common::criteria::{self, FIDELITY_SEEDS};
use common::sp;
use indexmap::IndexMap;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

#[test]
fn fitted_creation_rate_brackets_reported_value() {
    let outcome = criteria::stub_fitting();
    assert!(outcome.pass, "{}", outcome.detail);
}

#[test]
fn fitted_stub_beats_fixed_initial_on_every_seed() {
    for seed in FIDELITY_SEEDS {
        let (fit, fixed) = criteria::fidelity(seed);
        assert!(fit <= 0.10, "seed {seed}: fitted {fit}");
        assert!(fit < fixed, "seed {seed}: fitted {fit}, fixed {fixed}");
    }
}

fn line_trace(times: Vec<f64>, values: Vec<f64>) -> EnsembleTrace {
    EnsembleTrace { times, species: vec![sp("X@c")], mean: vec![values], variance: None, runs: 1 }
}

#[test]
fn noiseless_slope_is_exact() {
    let times: Vec<f64> = (0..50).map(|i| i as f64 * 0.3).collect();
    let values = times.iter().map(|t| 4.0 + 0.75 * t).collect();
    let stub = fit_stub(&line_trace(times, values), &sp("X@c"), StubHint::ZeroOrderCreation).unwrap();
    match stub.strategy {
        StubStrategy::ZeroOrderCreation { rate, initial } => {
            assert!((rate - 0.75).abs() <= 1e-9, "{rate}");
            assert!((initial - 4.0).abs() <= 1e-9);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn noisy_slope_within_tolerance() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let noise = Normal::new(0.0, 1.0).unwrap();
    let times: Vec<f64> = (0..200).map(|i| i as f64 * 0.5).collect();
    let values = times.iter().map(|t| 2.0 * t + noise.sample(&mut rng)).collect();
    let stub = fit_stub(&line_trace(times, values), &sp("X@c"), StubHint::ZeroOrderCreation).unwrap();
    let k = criteria::creation_rate(&stub);
    assert!((k - 2.0).abs() <= 0.1, "{k}");
}

fn composed_net() -> biopepa_core::network::ReactionNetwork {
    derive_reactions(&corpus::composed()).unwrap()
}

/// A partition of the composed reactions from an owner index per reaction.
fn partition_from(owners: &[usize]) -> ModulePartition {
    let net = composed_net();
    let mut modules: IndexMap<String, Vec<String>> = IndexMap::new();
    for (r, o) in net.reactions.iter().zip(owners) {
        modules.entry(format!("m{o}")).or_default().push(r.action.clone());
    }
    ModulePartition::new(modules).unwrap()
}

fn owners() -> impl Strategy<Value = Vec<usize>> {
    let n = composed_net().reactions.len();
    proptest::collection::vec(0usize..4, n)
}

fn boundary_set(
    c: &biopepa_core::decomp::SpeciesClassification,
    module: &str,
    boundary: Boundary,
) -> BTreeSet<SpeciesRef> {
    c.with_boundary(module, boundary).into_iter().cloned().collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partitions_cover_every_reaction_once(owners in owners()) {
        let net = composed_net();
        let p = partition_from(&owners);
        prop_assert!(p.check(&net).is_ok());
        let mut seen = BTreeSet::new();
        for m in p.module_names() {
            for r in p.reactions(m).unwrap() {
                prop_assert!(seen.insert(r.clone()));
                prop_assert_eq!(p.module_of(r), Some(m));
            }
        }
        prop_assert_eq!(seen.len(), net.reactions.len());
        let c = classify_species(&net, &p).unwrap();
        let touched: BTreeSet<SpeciesRef> = net.reactions.iter().flat_map(|r| r.roles().map(|x| x.0.clone())).collect();
        let covered: BTreeSet<SpeciesRef> = c.modules.values().flat_map(|t| t.keys().cloned()).collect();
        prop_assert_eq!(covered, touched);
        prop_assert!(ModulePartition::from_toml(&p.to_toml()).unwrap() == p);
    }

    #[test]
    fn merging_never_needs_new_stubs(owners in owners()) {
        let net = composed_net();
        let p = partition_from(&owners);
        let names: Vec<String> = p.module_names().map(str::to_string).collect();
        prop_assume!(names.len() >= 2);
        let merged = p.merge(&names[0], &names[1], "merged").unwrap();
        let before = classify_species(&net, &p).unwrap();
        let after = classify_species(&net, &merged).unwrap();
        let mut was = boundary_set(&before, &names[0], Boundary::ExternalReagent);
        was.extend(boundary_set(&before, &names[1], Boundary::ExternalReagent));
        let now = boundary_set(&after, "merged", Boundary::ExternalReagent);
        prop_assert!(now.is_subset(&was), "{:?} not within {:?}", now, was);
        for m in &names[2..] {
            prop_assert_eq!(before.modules[m.as_str()].len(), after.modules[m.as_str()].len());
        }
    }
}

const DECOUPLED: &str = "[locations] c : 1, C;\n\
    [parameters] b = 3; d = 0.5; e = 0.8;\n\
    [rates] up = fMA(b); down = fMA(d); gone = fMA(e);\n\
    [species] X@c = up >> X@c + down << X@c; Y@c = gone << Y@c;\n\
    [info] X@c : step = 1, max = 25; Y@c : step = 1, max = 6;\n\
    [model] M = X@c[2] <*> Y@c[6];";

#[test]
fn decoupled_module_needs_no_stubs_and_keeps_its_law() {
    let sys = parse(DECOUPLED).unwrap();
    let net = derive_reactions(&sys).unwrap();
    let mut modules = IndexMap::new();
    modules.insert("birth".to_string(), vec!["up".to_string(), "down".to_string()]);
    modules.insert("decay".to_string(), vec!["gone".to_string()]);
    let partition = ModulePartition::new(modules).unwrap();
    let c = classify_species(&net, &partition).unwrap();
    assert!(c.modules.values().flat_map(|t| t.values()).all(|x| x.boundary == Boundary::Local));

    let module = extract_module(&sys, &partition, "birth", &[]).unwrap();
    assert!(module.stub_actions.is_empty());
    assert_eq!(module.network.reactions, net.reactions[..2].to_vec());

    // The marginal of X in the full chain equals the module's own law.
    let times = [0.5, 1.0, 3.0, 10.0];
    let full = build_level_ctmc(&net, &sys.species_info, BuildOptions::default()).unwrap();
    let part = build_level_ctmc(&module.network, &module.system.species_info, BuildOptions::default()).unwrap();
    let marginal = |ctmc: &biopepa_core::ctmc::LevelCtmc| {
        let x = ctmc.species_index(&sp("X@c")).unwrap();
        let mut out = Vec::new();
        solve(&ctmc.chain, &ctmc.chain.point_mass(), &times, &[], SolverOptions::default(), |_, p| {
            let mut m = vec![0.0; 26];
            for (s, q) in p.iter().enumerate() {
                m[ctmc.levels(s)[x] as usize] += q;
            }
            out.push(m);
            Ok(())
        })
        .unwrap();
        out
    };
    for (a, b) in marginal(&full).iter().zip(marginal(&part)) {
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() <= 1e-9, "{x} vs {y}");
        }
    }
}
