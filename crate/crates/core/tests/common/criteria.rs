//! One check per acceptance criterion. Each returns whether it held and a
//! short account of what was measured.

use std::time::Instant;

use biopepa_core::corpus;
use biopepa_core::ctmc::{
    build_level_ctmc, derive_species_info, parse_queries, solve, sweep, transient, BuildOptions, LevelCtmc,
    SolverOptions, SparseCtmc,
};
use biopepa_core::decomp::{
    compare_traces, extract_module, fit_stub, parse_stubs, EnvironmentStub, ModulePartition, StubHint,
    StubStrategy,
};
use biopepa_core::expr::RateExpr;
use biopepa_core::model::{BioPepaSystem, Role, SpeciesInfo};
use biopepa_core::network::{derive_reactions, Reaction, ReactionNetwork};
use biopepa_core::parser::{parse, serialize};
use biopepa_core::ssa;
use biopepa_core::trace::{EnsembleTrace, Grid};
use indexmap::IndexMap;
use nalgebra::{DMatrix, DVector};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::sp;

pub struct Outcome {
    pub pass: bool,
    pub detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome { pass, detail: detail.into() }
    }
}

/// Sums that must come out as 1 are checked here as a side effect of every
/// transient solve in the suite.
pub const MASS_TOLERANCE: f64 = 1e-9;

pub fn assert_distribution(p: &[f64], what: &str) {
    let total: f64 = p.iter().sum();
    assert!((total - 1.0).abs() <= MASS_TOLERANCE, "{what}: mass {total}");
    assert!(p.iter().all(|&x| x >= 0.0), "{what}: negative probability");
}

// ---- parsing ----

pub fn parser_round_trip() -> Outcome {
    let start = Instant::now();
    for sys in [corpus::module1(), corpus::module7(), corpus::composed()] {
        if parse(&serialize(&sys)).ok().as_ref() != Some(&sys) {
            return Outcome::new(false, "a bundled model does not round-trip");
        }
    }
    for seed in 0..1000 {
        let sys = super::random_system(seed);
        if parse(&serialize(&sys)).ok().as_ref() != Some(&sys) {
            return Outcome::new(false, format!("random system {seed} does not round-trip"));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Outcome::new(secs < 5.0, format!("3 bundled + 1000 random systems in {secs:.2} s"))
}

pub fn expected_module1() -> Vec<Reaction> {
    let alpha = sp("alpha@extra");
    let ste2 = sp("Ste2@mem");
    let active = sp("Ste2active@mem");
    let bar1 = sp("Bar1active@extra");
    vec![
        Reaction::new("v1", RateExpr::mass_action("k1"))
            .with(Role::Reactant, alpha.clone(), 1)
            .with(Role::Activator, bar1.clone(), 1),
        Reaction::new("v2", RateExpr::mass_action("k2"))
            .with(Role::Reactant, ste2.clone(), 1)
            .with(Role::Product, active.clone(), 1)
            .with(Role::Activator, alpha, 1),
        Reaction::new("v3", RateExpr::mass_action("k3"))
            .with(Role::Reactant, active.clone(), 1)
            .with(Role::Product, ste2.clone(), 1),
        Reaction::new("v4", RateExpr::mass_action("k4")).with(Role::Reactant, active, 1),
        Reaction::new("v5", RateExpr::mass_action("k5")).with(Role::Reactant, ste2, 1),
        Reaction::new("v38", RateExpr::mass_action("k0")).with(Role::Product, bar1, 1),
    ]
}

pub fn reaction_derivation() -> Outcome {
    match derive_reactions(&corpus::module1()) {
        Ok(net) => {
            let pass = net.reactions == expected_module1();
            Outcome::new(pass, format!("module 1 derives {} reactions", net.reactions.len()))
        }
        Err(e) => Outcome::new(false, e.to_string()),
    }
}

// ---- simulation ----

pub fn ssa_analytic() -> Outcome {
    let (a0, k, runs) = (1000.0, 0.1, 1000);
    let start = Instant::now();
    let net = super::pure_death(a0 as u64, k);
    let grid = Grid { times: (1..=20).map(|i| i as f64).collect() };
    let res = ssa::ensemble(&net, &grid, runs, 1).unwrap();
    let mean = &res.trace.mean[0];
    let mut worst: f64 = 0.0;
    for (i, &t) in grid.times.iter().enumerate() {
        let p = (-k * t).exp();
        let sd = (a0 * p * (1.0 - p)).sqrt();
        worst = worst.max((mean[i] - a0 * p).abs() / (3.0 * sd / (runs as f64).sqrt()));
    }
    let secs = start.elapsed().as_secs_f64();
    Outcome::new(
        worst <= 1.0 && secs < 10.0,
        format!("largest deviation {worst:.3} of the 3 sigma band over 20 points, {secs:.2} s"),
    )
}

fn level_info(sys: &BioPepaSystem, net: &ReactionNetwork, t_end: f64) -> Vec<SpeciesInfo> {
    let res = ssa::ensemble(net, &Grid::uniform(t_end, 200), 100, 1).unwrap();
    let steps: Vec<_> = sys.species_info.iter().map(|i| (i.subject.clone(), i.step_size)).collect();
    derive_species_info(&res.trace, &steps, 0.0).unwrap()
}

/// Chi-square statistic and p-value of SSA samples at `t` against the
/// transient distribution of the unit-step CTMC. Bins with expected count
/// below 5 are pooled.
pub fn birth_death_chi_square(runs: usize, t: f64) -> (f64, f64) {
    let (sys, net) = super::birth_death(4.0, 0.4, 2, 40);
    let ctmc = build_level_ctmc(&net, &sys.species_info, BuildOptions::default()).unwrap();
    let pi = transient(&ctmc.chain, t).unwrap();
    assert_distribution(&pi.probabilities, "birth-death");
    let mut expected = vec![0.0; 41];
    for (s, p) in pi.probabilities.iter().enumerate() {
        expected[ctmc.levels(s)[0] as usize] += p * runs as f64;
    }
    let mut observed = vec![0.0; 41];
    for seed in 0..runs as u64 {
        let tr = ssa::simulate(&net, t, 10_000 + seed).unwrap();
        let x = tr.state_at(&net, t)[0].min(40);
        observed[x as usize] += 1.0;
    }
    let (mut bins, mut eo, mut ee) = (Vec::new(), 0.0, 0.0);
    for (o, e) in observed.iter().zip(&expected) {
        eo += o;
        ee += e;
        if ee >= 5.0 {
            bins.push((eo, ee));
            eo = 0.0;
            ee = 0.0;
        }
    }
    if let Some(last) = bins.last_mut() {
        last.0 += eo;
        last.1 += ee;
    }
    let stat: f64 = bins.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
    let dof = (bins.len() - 1) as f64;
    (stat, 1.0 - ChiSquared::new(dof).unwrap().cdf(stat))
}

pub fn ssa_ctmc_cross() -> Outcome {
    let start = Instant::now();
    let (stat, p) = birth_death_chi_square(10_000, 2.0);
    let secs = start.elapsed().as_secs_f64();
    Outcome::new(p > 0.01 && secs < 60.0, format!("chi-square {stat:.2}, p = {p:.3}, {secs:.2} s"))
}

// ---- uniformisation ----

fn dense_generator(n: usize, edges: &[(usize, usize, f64)]) -> DMatrix<f64> {
    let mut q = DMatrix::zeros(n, n);
    for &(i, j, r) in edges {
        q[(i, j)] += r;
        q[(i, i)] -= r;
    }
    q
}

pub fn sparse(n: usize, edges: &[(usize, usize, f64)]) -> SparseCtmc {
    SparseCtmc::from_triplets(n, edges.iter().map(|&(i, j, r)| (i, j, r, 0)).collect(), 0).unwrap()
}

/// Max-norm error of the transient distribution and relative error of the
/// cumulative reward for one random chain.
pub fn uniformization_errors(seed: u64) -> (f64, f64) {
    let n = 2 + (seed as usize % 19);
    let edges = super::random_ctmc(seed, n);
    let chain = sparse(n, &edges);
    let q = dense_generator(n, &edges);
    let t = 0.25 + (seed % 7) as f64 * 0.4;
    let reward: Vec<f64> = (0..n).map(|i| ((i * 7 + seed as usize) % 5) as f64 + 0.5).collect();

    let mut pi = Vec::new();
    let cum = solve(&chain, &chain.point_mass(), &[t], &[reward.clone()], SolverOptions::default(), |_, p| {
        pi = p.to_vec();
        Ok(())
    })
    .unwrap();
    assert_distribution(&pi, "random chain");

    let p0 = DVector::from_fn(n, |i, _| if i == 0 { 1.0 } else { 0.0 }).transpose();
    let exact = &p0 * (q.clone() * t).exp();
    let err = (0..n).map(|i| (exact[i] - pi[i]).abs()).fold(0.0, f64::max);

    // Composite Simpson over the reward rate.
    let steps = 4000;
    let h = t / steps as f64;
    let step = (q * h).exp();
    let r = DVector::from_vec(reward);
    let mut v = p0;
    let mut integral = 0.0;
    for k in 0..=steps {
        let w = if k == 0 || k == steps { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
        integral += w * (&v * &r)[0];
        v = &v * &step;
    }
    integral *= h / 3.0;
    (err, (cum[0][0] - integral).abs() / integral.abs())
}

pub fn uniformization_oracle() -> Outcome {
    let start = Instant::now();
    let (mut worst, mut worst_rel) = (0.0f64, 0.0f64);
    for seed in 0..100 {
        let (e, r) = uniformization_errors(seed);
        worst = worst.max(e);
        worst_rel = worst_rel.max(r);
    }
    let secs = start.elapsed().as_secs_f64();
    Outcome::new(
        worst <= 1e-8 && worst_rel <= 1e-6 && secs < 30.0,
        format!("max error {worst:.2e}, reward relative error {worst_rel:.2e}, {secs:.2} s"),
    )
}

// ---- levels ----

pub fn module1_ctmc() -> (BioPepaSystem, ReactionNetwork, Vec<SpeciesInfo>, LevelCtmc) {
    let sys = corpus::module1();
    let net = derive_reactions(&sys).unwrap();
    let info = level_info(&sys, &net, 30.0);
    let ctmc = build_level_ctmc(&net, &info, BuildOptions::default()).unwrap();
    (sys, net, info, ctmc)
}

pub fn module7_ctmc() -> (BioPepaSystem, ReactionNetwork, Vec<SpeciesInfo>, LevelCtmc) {
    let sys = corpus::module7();
    let net = derive_reactions(&sys).unwrap();
    let info = level_info(&sys, &net, 300.0);
    let ctmc = build_level_ctmc(&net, &info, BuildOptions::default()).unwrap();
    (sys, net, info, ctmc)
}

fn levels_of(ctmc: &LevelCtmc, name: &str) -> i64 {
    ctmc.max_levels[ctmc.species_index(&sp(name)).unwrap()] as i64
}

pub fn level_counts() -> Outcome {
    let (_, _, _, m1) = module1_ctmc();
    let (_, _, _, m7) = module7_ctmc();
    let want1 = [("Ste2@mem", 35), ("alpha@extra", 20), ("Ste2active@mem", 17), ("Bar1active@extra", 5)];
    let got1: Vec<i64> = want1.iter().map(|(s, _)| levels_of(&m1, s)).collect();
    let ok1 = want1.iter().zip(&got1).all(|((_, w), g)| (g - w).abs() <= 2);
    let fus3 = levels_of(&m7, "Fus3PP@cyto");
    let others: Vec<i64> = m7
        .species
        .iter()
        .filter(|s| s.name != "Fus3PP")
        .map(|s| levels_of(&m7, &s.to_string()))
        .collect();
    let ok7 = (fus3 - 12).abs() <= 1 && others.iter().all(|l| (l - 8).abs() <= 1);
    Outcome::new(
        ok1 && ok7,
        format!("module 1 {got1:?} against [35, 20, 17, 5]; module 7 Fus3PP {fus3}, others {others:?} against 12/8"),
    )
}

// ---- decomposition ----

pub fn composed_reference(seed: u64) -> EnsembleTrace {
    let net = derive_reactions(&corpus::composed()).unwrap();
    ssa::ensemble(&net, &Grid::uniform(30.0, 200), 100, seed).unwrap().trace
}

pub fn fitted_creation(reference: &EnsembleTrace) -> EnvironmentStub {
    fit_stub(reference, &sp("Bar1active@extra"), StubHint::ZeroOrderCreation).unwrap().for_module("module1")
}

pub fn creation_rate(stub: &EnvironmentStub) -> f64 {
    match stub.strategy {
        StubStrategy::ZeroOrderCreation { rate, .. } => rate,
        _ => f64::NAN,
    }
}

pub fn stub_fitting() -> Outcome {
    let reference = composed_reference(1);
    let start = Instant::now();
    let k = creation_rate(&fitted_creation(&reference));
    let secs = start.elapsed().as_secs_f64();
    Outcome::new((1.5..=1.8).contains(&k) && secs < 5.0, format!("fitted creation rate {k:.3} in {secs:.4} s"))
}

/// Worst normalised RMSE of module 1 run with `stubs` against `reference`.
pub fn module1_nrmse(reference: &EnsembleTrace, stubs: &[EnvironmentStub], seed: u64) -> f64 {
    let composed = corpus::composed();
    let partition = ModulePartition::from_toml(corpus::COMPOSED_PARTITION).unwrap();
    let module = extract_module(&composed, &partition, "module1", stubs).unwrap();
    let run = ssa::ensemble(&module.network, &Grid::uniform(30.0, 200), 100, seed).unwrap();
    compare_traces(&run.trace, reference, &[]).unwrap().worst_nrmse
}

/// `(fitted, fixed)` normalised RMSE for one seed.
pub fn fidelity(seed: u64) -> (f64, f64) {
    let reference = composed_reference(seed);
    let fitted = fitted_creation(&reference);
    let fixed = parse_stubs(corpus::MODULE1_FIXED25_STUBS).unwrap();
    (module1_nrmse(&reference, &[fitted], seed + 500), module1_nrmse(&reference, &fixed, seed + 500))
}

pub const FIDELITY_SEEDS: [u64; 10] = [1, 1000, 2000, 3000, 4000, 5000, 6000, 7000, 8000, 9000];

pub fn fidelity_ordering() -> Outcome {
    let mut lines = Vec::new();
    let mut pass = true;
    for seed in FIDELITY_SEEDS {
        let (fit, fixed) = fidelity(seed);
        pass &= fit <= 0.10 && fit < fixed;
        lines.push(format!("{fit:.3}<{fixed:.3}"));
    }
    Outcome::new(pass, format!("fitted<fixed per seed: {}", lines.join(" ")))
}

// ---- queries ----

fn series(rows: &[(f64, f64)]) -> Vec<f64> {
    rows.iter().map(|r| r.1).collect()
}

pub fn module1_active_curve() -> Vec<(f64, f64)> {
    let (_, net, _, ctmc) = module1_ctmc();
    let q = parse_queries("active: P[Ste2active@mem > 0] @ 0..30 step 0.5;").unwrap();
    biopepa_core::ctmc::evaluate_queries(&ctmc, &net.parameters, &q, SolverOptions::default())
        .unwrap()
        .into_iter()
        .map(|r| (r.time, r.value))
        .collect()
}

pub fn rises_then_falls(curve: &[(f64, f64)]) -> bool {
    let v = series(curve);
    let peak = v.iter().cloned().fold(0.0, f64::max);
    let at = v.iter().position(|&x| x == peak).unwrap();
    peak > 0.95 && v[v.len() - 1] < peak - 0.05 && v[at..].windows(2).all(|w| w[1] <= w[0] + 1e-9)
}

/// Sweep rows grouped as `value -> [(time, result)]`.
fn grouped(rows: Vec<biopepa_core::ctmc::SweepRow>) -> IndexMap<String, Vec<(f64, f64)>> {
    let mut out: IndexMap<String, Vec<(f64, f64)>> = IndexMap::new();
    for r in rows {
        out.entry(r.value.to_string()).or_default().push((r.time, r.result));
    }
    out
}

pub fn k0_sweep() -> IndexMap<String, Vec<(f64, f64)>> {
    let (_, net, info, _) = module1_ctmc();
    let q = parse_queries("P[Ste2active@mem > 0] @ 0..30 step 1;").unwrap();
    grouped(sweep(&net, &info, "k0", &[0.5, 1.66, 5.0], &q, BuildOptions::default(), SolverOptions::default()).unwrap())
}

pub fn k38_sweep() -> IndexMap<String, Vec<(f64, f64)>> {
    let (_, net, info, _) = module7_ctmc();
    let q = parse_queries("P[Bar1active@extra > 0] @ 0..100 step 2;").unwrap();
    grouped(sweep(&net, &info, "k38", &[0.01, 0.1], &q, BuildOptions::default(), SolverOptions::default()).unwrap())
}

pub fn module7_ratio() -> Vec<(f64, f64)> {
    let (_, net, _, ctmc) = module7_ctmc();
    let q = parse_queries("ratio: R[Ste12active@nucl / (Ste12active@nucl + Ste12@nucl)] @ 0..10 step 0.1;").unwrap();
    biopepa_core::ctmc::evaluate_queries(&ctmc, &net.parameters, &q, SolverOptions::default())
        .unwrap()
        .into_iter()
        .map(|r| (r.time, r.value))
        .collect()
}

/// Late-time points (t >= 15) are ordered `first >= second >= third`.
pub fn late_ordered(curves: &IndexMap<String, Vec<(f64, f64)>>) -> bool {
    let c: Vec<&Vec<(f64, f64)>> = curves.values().collect();
    c.windows(2).all(|w| w[0].iter().zip(w[1]).filter(|(a, _)| a.0 >= 15.0).all(|(a, b)| a.1 >= b.1))
}

/// The faster curve dominates pointwise and is the first to get near one.
pub fn grows_faster(slow: &[(f64, f64)], fast: &[(f64, f64)]) -> bool {
    let near = |c: &[(f64, f64)]| c.iter().find(|p| p.1 >= 0.99).map(|p| p.0).unwrap_or(f64::INFINITY);
    slow.iter().zip(fast).all(|(s, f)| f.1 >= s.1 - 1e-9) && near(fast) < near(slow)
}

pub fn nondecreasing(curve: &[(f64, f64)], ripple: f64) -> bool {
    let mut best = f64::NEG_INFINITY;
    for &(_, v) in curve {
        if v < best - ripple {
            return false;
        }
        best = best.max(v);
    }
    true
}

pub fn query_shapes() -> Outcome {
    let active = module1_active_curve();
    let peak = series(&active).iter().cloned().fold(0.0, f64::max);
    let a = rises_then_falls(&active);
    let k0 = k0_sweep();
    let b = late_ordered(&k0);
    let k38 = k38_sweep();
    let c = grows_faster(&k38["0.01"], &k38["0.1"]);
    let ratio = module7_ratio();
    let d = nondecreasing(&ratio, 0.02);
    Outcome::new(
        a && b && c && d,
        format!(
            "peak {peak:.3} then {:.3}; k0 late ordering {b}; k38 ordering {c}; ratio nondecreasing {d} ending at {:.3}",
            active.last().unwrap().1,
            ratio.last().unwrap().1
        ),
    )
}

// ---- conservation ----

/// Every transient distribution over the bundled and random chains sums to
/// one and has no negative entries; every level state and every SSA state
/// stays in range.
pub fn conservation() -> Outcome {
    let mut checked = 0;
    let mut worst: f64 = 0.0;
    let mut check = |p: &[f64]| {
        let total: f64 = p.iter().sum();
        worst = worst.max((total - 1.0).abs());
        checked += 1;
        (total - 1.0).abs() <= MASS_TOLERANCE && p.iter().all(|&x| x >= 0.0)
    };
    let mut pass = true;
    for (name, (_, net, _, ctmc)) in [("module1", module1_ctmc()), ("module7", module7_ctmc())] {
        let times: Vec<f64> = (0..=20).map(|i| i as f64 * if name == "module1" { 1.5 } else { 5.0 }).collect();
        solve(&ctmc.chain, &ctmc.chain.point_mass(), &times, &[], SolverOptions::default(), |_, p| {
            pass &= check(p);
            Ok(())
        })
        .unwrap();
        for s in 0..ctmc.state_count() {
            pass &= ctmc.levels(s).iter().zip(&ctmc.max_levels).all(|(l, m)| l <= m);
        }
        let tr = ssa::simulate(&net, 30.0, 3).unwrap();
        let mut state = tr.initial.clone();
        for e in &tr.events {
            for &(i, k) in &net.compiled()[e.reaction].consumes {
                pass &= state[i] >= k as u64;
            }
            net.fire(e.reaction, &mut state);
        }
    }
    for seed in 0..100 {
        let n = 2 + (seed as usize % 19);
        let chain = sparse(n, &super::random_ctmc(seed, n));
        let times: Vec<f64> = (0..10).map(|i| i as f64 * 0.7).collect();
        solve(&chain, &chain.point_mass(), &times, &[], SolverOptions::default(), |_, p| {
            pass &= check(p);
            Ok(())
        })
        .unwrap();
    }
    let (sys, net) = super::birth_death(4.0, 0.4, 2, 40);
    let ctmc = build_level_ctmc(&net, &sys.species_info, BuildOptions::default()).unwrap();
    for t in [0.0, 0.5, 2.0, 50.0] {
        pass &= check(&transient(&ctmc.chain, t).unwrap().probabilities);
    }
    Outcome::new(pass, format!("{checked} distributions, largest mass defect {worst:.1e}"))
}

pub type Criterion = (&'static str, fn() -> Outcome);

pub const ALL: [Criterion; 10] = [
    ("parser round-trip", parser_round_trip),
    ("reaction derivation oracle", reaction_derivation),
    ("SSA exactness (analytic)", ssa_analytic),
    ("SSA exactness (CTMC cross-oracle)", ssa_ctmc_cross),
    ("uniformization oracle", uniformization_oracle),
    ("level-count reproduction", level_counts),
    ("stub fitting", stub_fitting),
    ("decomposition fidelity ordering", fidelity_ordering),
    ("query shape checks", query_shapes),
    ("conservation invariants", conservation),
];
