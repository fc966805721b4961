//! Flattened reaction network and rate evaluation.

use std::collections::{BTreeMap, BTreeSet};

use indexmap::{IndexMap, IndexSet};
use thiserror::Error;

use crate::expr::{BinOp, RateExpr};
use crate::model::{check_wellformed, BioPepaSystem, Diagnostic, Origin, Role, SpeciesRef};

/// One species taking part in a reaction, with its stoichiometry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Participant {
    pub species: SpeciesRef,
    pub stoichiometry: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reaction {
    pub action: String,
    pub reactants: Vec<Participant>,
    pub products: Vec<Participant>,
    pub activators: Vec<Participant>,
    pub inhibitors: Vec<Participant>,
    pub modifiers: Vec<Participant>,
    pub rate: RateExpr,
}

impl Reaction {
    pub fn new(action: &str, rate: RateExpr) -> Self {
        Reaction {
            action: action.to_string(),
            reactants: vec![],
            products: vec![],
            activators: vec![],
            inhibitors: vec![],
            modifiers: vec![],
            rate,
        }
    }

    pub fn role_list(&self, role: Role) -> &Vec<Participant> {
        match role {
            Role::Reactant => &self.reactants,
            Role::Product => &self.products,
            Role::Activator => &self.activators,
            Role::Inhibitor => &self.inhibitors,
            Role::Modifier => &self.modifiers,
        }
    }

    fn role_list_mut(&mut self, role: Role) -> &mut Vec<Participant> {
        match role {
            Role::Reactant => &mut self.reactants,
            Role::Product => &mut self.products,
            Role::Activator => &mut self.activators,
            Role::Inhibitor => &mut self.inhibitors,
            Role::Modifier => &mut self.modifiers,
        }
    }

    /// Builder used by tests and stub synthesis.
    pub fn with(mut self, role: Role, species: SpeciesRef, stoichiometry: u32) -> Self {
        self.role_list_mut(role).push(Participant { species, stoichiometry });
        self
    }

    /// All `(species, role, κ)` entries.
    pub fn roles(&self) -> impl Iterator<Item = (&SpeciesRef, Role, u32)> {
        Role::ALL
            .into_iter()
            .flat_map(move |r| self.role_list(r).iter().map(move |p| (&p.species, r, p.stoichiometry)))
    }

    /// Net change of each species per firing. Zero entries are omitted.
    pub fn net_change(&self) -> BTreeMap<&SpeciesRef, i64> {
        let mut out = BTreeMap::new();
        for p in &self.reactants {
            *out.entry(&p.species).or_insert(0) -= p.stoichiometry as i64;
        }
        for p in &self.products {
            *out.entry(&p.species).or_insert(0) += p.stoichiometry as i64;
        }
        out.retain(|_, d| *d != 0);
        out
    }
}

/// Counts indexed by the network's species order.
pub type State = Vec<u64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetworkError {
    #[error("the system is not well formed:\n{}", join_diags(.0))]
    IllFormed(Vec<Diagnostic>),
    #[error("rate of `{action}` refers to {species}, which is not in the model")]
    UnknownSpecies { action: String, species: SpeciesRef },
    #[error("rate of `{action}` uses unknown parameter `{parameter}`")]
    UnknownParameter { action: String, parameter: String },
    #[error("unknown parameter `{0}`")]
    NoSuchParameter(String),
    #[error("unknown reaction `{0}`")]
    NoSuchReaction(String),
}

fn join_diags(d: &[Diagnostic]) -> String {
    d.iter().filter(|d| d.is_error()).map(|d| d.to_string()).collect::<Vec<_>>().join("\n")
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RateError {
    #[error("division by zero in the rate of `{action}`")]
    DivisionByZero { action: String },
    #[error("rate of `{action}` evaluated to {value}")]
    NonFinite { action: String, value: f64 },
}

/// Outcome of a rate evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateValue {
    pub value: f64,
    /// The raw expression was negative and has been clamped to zero.
    pub clamped: bool,
}

/// How `x / 0` is treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZeroDivision {
    Error,
    /// `0 / 0` is 0, anything else over 0 is still an error.
    ZeroOverZeroIsZero,
}

#[derive(Debug, Clone, PartialEq)]
enum Op {
    Const(f64),
    Param(usize),
    Species(usize),
    Neg,
    Bin(BinOp),
    MassAction,
}

/// Postfix form of a [`RateExpr`] with names resolved to indices.
#[derive(Debug, Clone, PartialEq)]
pub struct CompiledExpr {
    ops: Vec<Op>,
    /// `(species index, κ)` factors multiplied in by `fMA`.
    mass_action: Vec<(usize, u32)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CompileError {
    Species(SpeciesRef),
    Parameter(String),
    MassAction,
}

impl CompiledExpr {
    /// Compiles `expr`. `mass_action` is `None` where `fMA` is not allowed.
    pub fn compile(
        expr: &RateExpr,
        species: &IndexSet<SpeciesRef>,
        params: &IndexMap<String, f64>,
        mass_action: Option<Vec<(usize, u32)>>,
    ) -> Result<Self, CompileError> {
        fn go(
            e: &RateExpr,
            species: &IndexSet<SpeciesRef>,
            params: &IndexMap<String, f64>,
            allow_ma: bool,
            ops: &mut Vec<Op>,
        ) -> Result<(), CompileError> {
            match e {
                RateExpr::Num(v) => ops.push(Op::Const(*v)),
                RateExpr::Param(p) => {
                    let i = params.get_index_of(p).ok_or_else(|| CompileError::Parameter(p.clone()))?;
                    ops.push(Op::Param(i));
                }
                RateExpr::Species(s) => {
                    let i = species.get_index_of(s).ok_or_else(|| CompileError::Species(s.clone()))?;
                    ops.push(Op::Species(i));
                }
                RateExpr::Neg(e) => {
                    go(e, species, params, allow_ma, ops)?;
                    ops.push(Op::Neg);
                }
                RateExpr::Binary(op, l, r) => {
                    go(l, species, params, allow_ma, ops)?;
                    go(r, species, params, allow_ma, ops)?;
                    ops.push(Op::Bin(*op));
                }
                RateExpr::MassAction(e) => {
                    if !allow_ma {
                        return Err(CompileError::MassAction);
                    }
                    go(e, species, params, allow_ma, ops)?;
                    ops.push(Op::MassAction);
                }
            }
            Ok(())
        }
        let mut ops = Vec::new();
        go(expr, species, params, mass_action.is_some(), &mut ops)?;
        Ok(CompiledExpr { ops, mass_action: mass_action.unwrap_or_default() })
    }

    /// Evaluates against `amounts` (indexed like the species set) and
    /// parameter values. `None` signals a division by zero.
    pub fn eval(&self, amounts: &[f64], params: &[f64], zero_div: ZeroDivision) -> Option<f64> {
        let mut stack: Vec<f64> = Vec::with_capacity(8);
        for op in &self.ops {
            match op {
                Op::Const(v) => stack.push(*v),
                Op::Param(i) => stack.push(params[*i]),
                Op::Species(i) => stack.push(amounts[*i]),
                Op::Neg => {
                    let v = stack.pop()?;
                    stack.push(-v);
                }
                Op::Bin(op) => {
                    let r = stack.pop()?;
                    let l = stack.pop()?;
                    if *op == BinOp::Div && r == 0.0 {
                        match zero_div {
                            ZeroDivision::ZeroOverZeroIsZero if l == 0.0 => {
                                stack.push(0.0);
                                continue;
                            }
                            _ => return None,
                        }
                    }
                    stack.push(op.apply(l, r));
                }
                Op::MassAction => {
                    let k = stack.pop()?;
                    let prod: f64 = self.mass_action.iter().map(|&(i, kappa)| amounts[i].powi(kappa as i32)).product();
                    stack.push(k * prod);
                }
            }
        }
        stack.pop()
    }

    /// Species indices read by the expression, including `fMA` factors.
    pub fn inputs(&self) -> BTreeSet<usize> {
        let mut out: BTreeSet<usize> = self.mass_action.iter().map(|&(i, _)| i).collect();
        for op in &self.ops {
            if let Op::Species(i) = op {
                out.insert(*i);
            }
        }
        out
    }
}

/// Index-based view of a reaction for the simulation and CTMC back ends.
#[derive(Debug, Clone, PartialEq)]
pub struct CompiledReaction {
    /// `(species index, κ)` consumed per firing.
    pub consumes: Vec<(usize, u32)>,
    /// `(species index, Δ)` net change per firing, zero entries dropped.
    pub delta: Vec<(usize, i64)>,
    pub rate: CompiledExpr,
    /// Species whose counts the rate depends on.
    pub inputs: BTreeSet<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReactionNetwork {
    pub species: IndexSet<SpeciesRef>,
    pub reactions: Vec<Reaction>,
    pub initial: State,
    pub parameters: IndexMap<String, f64>,
    /// Warnings collected while flattening.
    pub diagnostics: Vec<Diagnostic>,
    compiled: Vec<CompiledReaction>,
    param_values: Vec<f64>,
}

impl ReactionNetwork {
    /// Assembles a network from explicit parts.
    pub fn new(
        species: IndexSet<SpeciesRef>,
        reactions: Vec<Reaction>,
        initial: State,
        parameters: IndexMap<String, f64>,
    ) -> Result<Self, NetworkError> {
        assert_eq!(species.len(), initial.len(), "initial state must cover every species");
        let mut diagnostics = Vec::new();
        let mut compiled = Vec::with_capacity(reactions.len());
        for r in &reactions {
            let index = |s: &SpeciesRef| {
                species
                    .get_index_of(s)
                    .ok_or_else(|| NetworkError::UnknownSpecies { action: r.action.clone(), species: s.clone() })
            };
            let mut ma = Vec::new();
            for p in r.reactants.iter().chain(&r.activators) {
                ma.push((index(&p.species)?, p.stoichiometry));
            }
            let consumes = r
                .reactants
                .iter()
                .map(|p| Ok((index(&p.species)?, p.stoichiometry)))
                .collect::<Result<Vec<_>, NetworkError>>()?;
            let mut delta = Vec::new();
            for (s, d) in r.net_change() {
                delta.push((index(s)?, d));
            }
            for p in r.products.iter().chain(&r.inhibitors).chain(&r.modifiers) {
                index(&p.species)?;
            }
            let rate = CompiledExpr::compile(&r.rate, &species, &parameters, Some(ma)).map_err(|e| match e {
                CompileError::Species(s) => NetworkError::UnknownSpecies { action: r.action.clone(), species: s },
                CompileError::Parameter(p) => NetworkError::UnknownParameter { action: r.action.clone(), parameter: p },
                CompileError::MassAction => unreachable!(),
            })?;
            let named: BTreeSet<&SpeciesRef> = r.roles().map(|(s, _, _)| s).collect();
            for s in r.rate.species() {
                if !named.contains(s) {
                    diagnostics.push(Diagnostic::warning(
                        format!("rate of `{}` reads {s}, which has no role in the reaction", r.action),
                        &Origin::default(),
                    ));
                }
            }
            let mut inputs = rate.inputs();
            inputs.extend(consumes.iter().map(|&(i, _)| i));
            compiled.push(CompiledReaction { consumes, delta, rate, inputs });
        }
        let param_values = parameters.values().copied().collect();
        Ok(ReactionNetwork { species, reactions, initial, parameters, diagnostics, compiled, param_values })
    }

    pub fn compiled(&self) -> &[CompiledReaction] {
        &self.compiled
    }

    pub fn param_values(&self) -> &[f64] {
        &self.param_values
    }

    pub fn species_index(&self, s: &SpeciesRef) -> Option<usize> {
        self.species.get_index_of(s)
    }

    pub fn reaction_index(&self, action: &str) -> Option<usize> {
        self.reactions.iter().position(|r| r.action == action)
    }

    pub fn set_parameter(&mut self, name: &str, value: f64) -> Result<(), NetworkError> {
        let i = self.parameters.get_index_of(name).ok_or_else(|| NetworkError::NoSuchParameter(name.into()))?;
        self.parameters[i] = value;
        self.param_values[i] = value;
        Ok(())
    }

    /// Evaluates the rate of reaction `r` with species bound to `amounts`.
    /// Negative results are clamped to zero and flagged.
    pub fn evaluate_rate(&self, r: usize, amounts: &[f64]) -> Result<RateValue, RateError> {
        let action = || self.reactions[r].action.clone();
        let v = self.compiled[r]
            .rate
            .eval(amounts, &self.param_values, ZeroDivision::Error)
            .ok_or_else(|| RateError::DivisionByZero { action: action() })?;
        if !v.is_finite() {
            return Err(RateError::NonFinite { action: action(), value: v });
        }
        if v < 0.0 {
            return Ok(RateValue { value: 0.0, clamped: true });
        }
        Ok(RateValue { value: v, clamped: false })
    }

    /// Rate of `r` in a concrete molecular state: zero when some reactant
    /// has fewer than κ molecules.
    pub fn propensity(&self, r: usize, counts: &[f64]) -> Result<RateValue, RateError> {
        if self.compiled[r].consumes.iter().any(|&(i, k)| counts[i] < k as f64) {
            return Ok(RateValue { value: 0.0, clamped: false });
        }
        self.evaluate_rate(r, counts)
    }

    /// Applies one firing of `r` to `state`.
    pub fn fire(&self, r: usize, state: &mut [u64]) {
        for &(i, d) in &self.compiled[r].delta {
            let next = state[i] as i64 + d;
            debug_assert!(next >= 0, "negative count for {}", self.species[i]);
            state[i] = next.max(0) as u64;
        }
    }

    /// `r → r'` when `r` changes a species that `r'` reads.
    pub fn dependency_graph(&self) -> Vec<Vec<usize>> {
        self.compiled
            .iter()
            .map(|r| {
                let changed: BTreeSet<usize> = r.delta.iter().map(|&(i, _)| i).collect();
                self.compiled
                    .iter()
                    .enumerate()
                    .filter(|(_, other)| other.inputs.iter().any(|i| changed.contains(i)))
                    .map(|(j, _)| j)
                    .collect()
            })
            .collect()
    }

    /// [`Self::dependency_graph`] keyed by action names.
    pub fn dependency_map(&self) -> BTreeMap<String, BTreeSet<String>> {
        self.dependency_graph()
            .into_iter()
            .enumerate()
            .map(|(i, deps)| {
                (self.reactions[i].action.clone(), deps.into_iter().map(|j| self.reactions[j].action.clone()).collect())
            })
            .collect()
    }

    pub fn initial_amounts(&self) -> Vec<f64> {
        self.initial.iter().map(|&c| c as f64).collect()
    }
}

/// Flattens a system into one reaction per action that has a functional
/// rate and is performed by some species in the model.
pub fn derive_reactions(system: &BioPepaSystem) -> Result<ReactionNetwork, NetworkError> {
    let diags = check_wellformed(system);
    if diags.iter().any(Diagnostic::is_error) {
        return Err(NetworkError::IllFormed(diags));
    }
    let model = system.model.as_ref();
    let instances = model.map(|m| m.instances()).unwrap_or_default();
    let species: IndexSet<SpeciesRef> = instances.iter().map(|(s, _, _)| (*s).clone()).collect();
    let initial: State = instances.iter().map(|(_, v, _)| v.round() as u64).collect();

    let mut by_action: IndexMap<&str, Reaction> = IndexMap::new();
    for (action, rate) in &system.rates {
        by_action.insert(action.as_str(), Reaction::new(action, rate.expr.clone()));
    }
    for s in &species {
        let comp = system.component(s).expect("checked by check_wellformed");
        for p in &comp.prefixes {
            if let Some(r) = by_action.get_mut(p.action.as_str()) {
                r.role_list_mut(p.role).push(Participant { species: s.clone(), stoichiometry: p.stoichiometry });
            }
        }
    }
    let reactions: Vec<Reaction> = by_action.into_values().filter(|r| r.roles().next().is_some()).collect();
    let mut net = ReactionNetwork::new(species, reactions, initial, system.parameters.clone())?;
    let mut warnings: Vec<Diagnostic> = diags;
    warnings.append(&mut net.diagnostics);
    net.diagnostics = warnings;
    Ok(net)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse;

    fn sp(n: &str) -> SpeciesRef {
        SpeciesRef::new(n, "c")
    }

    #[test]
    fn pure_creation() {
        let sys = parse("[locations] c : 1, C;\n[parameters] k = 2;\n[rates] a = fMA(k);\n[species] X@c = a >> X@c;\n[model] M = X@c[0];").unwrap();
        let net = derive_reactions(&sys).unwrap();
        assert_eq!(net.reactions.len(), 1);
        assert!(net.reactions[0].reactants.is_empty());
        assert_eq!(net.reactions[0].products, vec![Participant { species: sp("X"), stoichiometry: 1 }]);
        assert_eq!(net.evaluate_rate(0, &[5.0]).unwrap().value, 2.0);
    }

    #[test]
    fn clamping_and_division() {
        let species: IndexSet<_> = [sp("A"), sp("B")].into_iter().collect();
        let params: IndexMap<String, f64> = [("k".to_string(), 1.0)].into_iter().collect();
        let neg = Reaction::new(
            "n",
            RateExpr::binary(BinOp::Sub, RateExpr::Param("k".into()), RateExpr::Species(sp("A"))),
        )
        .with(Role::Activator, sp("A"), 1);
        let div = Reaction::new(
            "d",
            RateExpr::binary(BinOp::Div, RateExpr::Param("k".into()), RateExpr::Species(sp("B"))),
        )
        .with(Role::Modifier, sp("B"), 1);
        let net = ReactionNetwork::new(species, vec![neg, div], vec![5, 0], params).unwrap();
        assert_eq!(net.evaluate_rate(0, &[5.0, 0.0]).unwrap(), RateValue { value: 0.0, clamped: true });
        assert_eq!(net.evaluate_rate(1, &[5.0, 0.0]), Err(RateError::DivisionByZero { action: "d".into() }));
        assert_eq!(net.evaluate_rate(1, &[5.0, 4.0]).unwrap().value, 0.25);
    }

    #[test]
    fn insufficient_reactants_disable() {
        let species: IndexSet<_> = [sp("A")].into_iter().collect();
        let params: IndexMap<String, f64> = [("k".to_string(), 1.0)].into_iter().collect();
        let r = Reaction::new("d", RateExpr::mass_action("k")).with(Role::Reactant, sp("A"), 2);
        let net = ReactionNetwork::new(species, vec![r], vec![1], params).unwrap();
        assert_eq!(net.evaluate_rate(0, &[1.0]).unwrap().value, 1.0);
        assert_eq!(net.propensity(0, &[1.0]).unwrap().value, 0.0);
        assert_eq!(net.propensity(0, &[3.0]).unwrap().value, 9.0);
    }

    #[test]
    fn disjoint_reactions_have_no_cross_edges() {
        let species: IndexSet<_> = [sp("A"), sp("B")].into_iter().collect();
        let params: IndexMap<String, f64> = [("k".to_string(), 1.0)].into_iter().collect();
        let a = Reaction::new("a", RateExpr::mass_action("k")).with(Role::Reactant, sp("A"), 1);
        let b = Reaction::new("b", RateExpr::mass_action("k")).with(Role::Reactant, sp("B"), 1);
        let net = ReactionNetwork::new(species, vec![a, b], vec![1, 1], params).unwrap();
        assert_eq!(net.dependency_graph(), vec![vec![0], vec![1]]);
    }

    #[test]
    fn set_parameter_updates_rates() {
        let sys = parse("[locations] c : 1, C;\n[parameters] k = 2;\n[rates] a = fMA(k);\n[species] X@c = a << X@c;\n[model] M = X@c[3];").unwrap();
        let mut net = derive_reactions(&sys).unwrap();
        net.set_parameter("k", 5.0).unwrap();
        assert_eq!(net.evaluate_rate(0, &[3.0]).unwrap().value, 15.0);
        assert!(net.set_parameter("zz", 1.0).is_err());
    }
}
