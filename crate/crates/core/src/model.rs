//! Domain types for a Bio-PEPA system and its well-formedness checks.
//!
//! A system is the tuple of locations, species information, parameters,
//! functional rates, species components and the model component. Species
//! identity is the `(name, location)` pair written `name@location`.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use indexmap::IndexMap;
use thiserror::Error;

use crate::expr::RateExpr;

/// Position of a construct in a source document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceSpan {
    pub file: Arc<str>,
    pub line: usize,
    pub column: usize,
    pub length: usize,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.column)
    }
}

/// Optional source position attached to a model element.
///
/// Always compares equal, so structural equality of systems ignores where
/// things were written.
#[derive(Debug, Clone, Default)]
pub struct Origin(pub Option<SourceSpan>);

impl PartialEq for Origin {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl Origin {
    pub fn span(&self) -> Option<&SourceSpan> {
        self.0.as_ref()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpeciesRef {
    pub name: String,
    pub location: String,
}

impl SpeciesRef {
    pub fn new(name: &str, location: &str) -> Self {
        SpeciesRef { name: name.to_string(), location: location.to_string() }
    }

    /// Identifier-safe form, `name_location`.
    pub fn mangled(&self) -> String {
        format!("{}_{}", self.name, self.location)
    }
}

impl fmt::Display for SpeciesRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.name, self.location)
    }
}

impl std::str::FromStr for SpeciesRef {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().split_once('@') {
            Some((n, l)) if !n.is_empty() && !l.is_empty() => Ok(SpeciesRef::new(n.trim(), l.trim())),
            _ => Err(format!("expected `name@location`, found `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LocationKind {
    Compartment,
    Membrane,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Location {
    pub name: String,
    pub size: f64,
    pub unit: String,
    pub kind: LocationKind,
    pub origin: Origin,
}

/// Role of a species in a reaction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    Reactant,
    Product,
    Activator,
    Inhibitor,
    Modifier,
}

impl Role {
    pub const ALL: [Role; 5] =
        [Role::Reactant, Role::Product, Role::Activator, Role::Inhibitor, Role::Modifier];

    pub fn symbol(self) -> &'static str {
        match self {
            Role::Reactant => "<<",
            Role::Product => ">>",
            Role::Activator => "(+)",
            Role::Inhibitor => "(-)",
            Role::Modifier => "(.)",
        }
    }

    /// Reactants and products change the amount of the species.
    pub fn is_reagent(self) -> bool {
        matches!(self, Role::Reactant | Role::Product)
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Role::Reactant => "reactant",
            Role::Product => "product",
            Role::Activator => "activator",
            Role::Inhibitor => "inhibitor",
            Role::Modifier => "modifier",
        };
        f.write_str(s)
    }
}

/// `(action, κ) op S` inside a species component.
#[derive(Debug, Clone, PartialEq)]
pub struct PrefixTerm {
    pub action: String,
    pub stoichiometry: u32,
    pub role: Role,
    pub origin: Origin,
}

impl PrefixTerm {
    pub fn new(action: &str, stoichiometry: u32, role: Role) -> Self {
        PrefixTerm { action: action.to_string(), stoichiometry, role, origin: Origin::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpeciesComponent {
    pub subject: SpeciesRef,
    pub prefixes: Vec<PrefixTerm>,
    pub origin: Origin,
}

/// Synchronisation set of a cooperation.
#[derive(Debug, Clone, PartialEq)]
pub enum SyncSet {
    /// `<*>`: every action common to both sides.
    Star,
    Actions(BTreeSet<String>),
}

impl SyncSet {
    pub fn contains(&self, action: &str) -> bool {
        match self {
            SyncSet::Star => true,
            SyncSet::Actions(a) => a.contains(action),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelComponent {
    Instance { subject: SpeciesRef, initial: f64, origin: Origin },
    Cooperation { left: Box<ModelComponent>, sync: SyncSet, right: Box<ModelComponent> },
}

impl ModelComponent {
    pub fn instance(subject: SpeciesRef, initial: f64) -> Self {
        ModelComponent::Instance { subject, initial, origin: Origin::default() }
    }

    pub fn cooperate(left: ModelComponent, sync: SyncSet, right: ModelComponent) -> Self {
        ModelComponent::Cooperation { left: Box::new(left), sync, right: Box::new(right) }
    }

    /// Left-nested `<*>` composition of the given instances.
    pub fn star_of(instances: impl IntoIterator<Item = ModelComponent>) -> Option<Self> {
        instances.into_iter().reduce(|acc, m| ModelComponent::cooperate(acc, SyncSet::Star, m))
    }

    /// Instances in left-to-right order.
    pub fn instances(&self) -> Vec<(&SpeciesRef, f64, &Origin)> {
        let mut out = Vec::new();
        self.collect_instances(&mut out);
        out
    }

    fn collect_instances<'a>(&'a self, out: &mut Vec<(&'a SpeciesRef, f64, &'a Origin)>) {
        match self {
            ModelComponent::Instance { subject, initial, origin } => out.push((subject, *initial, origin)),
            ModelComponent::Cooperation { left, right, .. } => {
                left.collect_instances(out);
                right.collect_instances(out);
            }
        }
    }

    pub fn map_initial(&mut self, f: &mut impl FnMut(&SpeciesRef, f64) -> f64) {
        match self {
            ModelComponent::Instance { subject, initial, .. } => *initial = f(subject, *initial),
            ModelComponent::Cooperation { left, right, .. } => {
                left.map_initial(f);
                right.map_initial(f);
            }
        }
    }
}

/// Level abstraction data for one species.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeciesInfo {
    pub subject: SpeciesRef,
    pub step_size: f64,
    /// Upper bound on the amount. May be left open in a model file and
    /// filled in later from simulation results.
    pub max_amount: Option<f64>,
    pub origin: Origin,
}

impl SpeciesInfo {
    pub fn new(subject: SpeciesRef, step_size: f64, max_amount: f64) -> Self {
        SpeciesInfo { subject, step_size, max_amount: Some(max_amount), origin: Origin::default() }
    }

    pub fn max_level(&self) -> Option<u32> {
        self.max_amount.map(|m| (m / self.step_size - 1e-9).ceil().max(0.0) as u32)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum LevelError {
    #[error("amount {0} is negative")]
    NegativeAmount(f64),
    #[error("species {0} has no maximum amount")]
    MissingMax(SpeciesRef),
}

/// Discretises an amount to its level: `round(amount / h)` clamped to
/// `[0, max_level]`.
pub fn amount_to_level(amount: f64, info: &SpeciesInfo) -> Result<u32, LevelError> {
    if amount < 0.0 || amount.is_nan() {
        return Err(LevelError::NegativeAmount(amount));
    }
    let max = info.max_level().ok_or_else(|| LevelError::MissingMax(info.subject.clone()))?;
    let level = (amount / info.step_size).round();
    Ok(level.min(max as f64) as u32)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalRate {
    pub expr: RateExpr,
    pub origin: Origin,
}

/// A complete system: `⟨L, N, K, F_R, Comp, P⟩`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BioPepaSystem {
    pub locations: Vec<Location>,
    pub species_info: Vec<SpeciesInfo>,
    pub parameters: IndexMap<String, f64>,
    pub rates: IndexMap<String, FunctionalRate>,
    pub components: Vec<SpeciesComponent>,
    pub model: Option<ModelComponent>,
}

impl BioPepaSystem {
    pub fn component(&self, s: &SpeciesRef) -> Option<&SpeciesComponent> {
        self.components.iter().find(|c| &c.subject == s)
    }

    pub fn info(&self, s: &SpeciesRef) -> Option<&SpeciesInfo> {
        self.species_info.iter().find(|i| &i.subject == s)
    }

    pub fn location(&self, name: &str) -> Option<&Location> {
        self.locations.iter().find(|l| l.name == name)
    }

    /// Species in model-declaration order.
    pub fn species(&self) -> Vec<SpeciesRef> {
        self.model
            .as_ref()
            .map(|m| m.instances().into_iter().map(|(s, _, _)| s.clone()).collect())
            .unwrap_or_default()
    }

    pub fn initial_amount(&self, s: &SpeciesRef) -> Option<f64> {
        self.model
            .as_ref()?
            .instances()
            .into_iter()
            .find(|(r, _, _)| *r == s)
            .map(|(_, v, _)| v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub message: String,
    pub span: Option<SourceSpan>,
}

impl Diagnostic {
    pub fn error(message: impl Into<String>, origin: &Origin) -> Self {
        Diagnostic { severity: Severity::Error, message: message.into(), span: origin.0.clone() }
    }

    pub fn warning(message: impl Into<String>, origin: &Origin) -> Self {
        Diagnostic { severity: Severity::Warning, message: message.into(), span: origin.0.clone() }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        match &self.span {
            Some(span) => write!(f, "{span}: {sev}: {}", self.message),
            None => write!(f, "{sev}: {}", self.message),
        }
    }
}

/// Cross-reference checks over a system. Returns no diagnostics for a clean
/// system; never fails.
pub fn check_wellformed(system: &BioPepaSystem) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let mut seen = HashSet::new();
    for loc in &system.locations {
        if !seen.insert(loc.name.as_str()) {
            diags.push(Diagnostic::error(format!("location `{}` declared twice", loc.name), &loc.origin));
        }
        if !(loc.size > 0.0) {
            diags.push(Diagnostic::error(
                format!("location `{}` must have a positive size", loc.name),
                &loc.origin,
            ));
        }
    }
    let check_loc = |s: &SpeciesRef, origin: &Origin, diags: &mut Vec<Diagnostic>| {
        if system.location(&s.location).is_none() {
            diags.push(Diagnostic::error(
                format!("species {s} refers to unknown location `{}`", s.location),
                origin,
            ));
        }
    };

    // Which actions move mass, so a missing rate matters.
    let mut reagent_actions = BTreeSet::new();
    let mut used_actions = BTreeSet::new();
    let mut component_of = HashMap::new();
    for comp in &system.components {
        check_loc(&comp.subject, &comp.origin, &mut diags);
        if component_of.insert(&comp.subject, comp).is_some() {
            diags.push(Diagnostic::error(
                format!("species {} has more than one component", comp.subject),
                &comp.origin,
            ));
        }
        let mut pairs = HashSet::new();
        for p in &comp.prefixes {
            if !pairs.insert((p.action.as_str(), p.role)) {
                diags.push(Diagnostic::error(
                    format!("species {} lists action `{}` as {} twice", comp.subject, p.action, p.role),
                    &p.origin,
                ));
            }
            if p.stoichiometry == 0 {
                diags.push(Diagnostic::error(
                    format!("stoichiometry of {} in `{}` must be at least 1", comp.subject, p.action),
                    &p.origin,
                ));
            }
            used_actions.insert(p.action.as_str());
            if p.role.is_reagent() {
                reagent_actions.insert(p.action.as_str());
            }
        }
    }
    for comp in &system.components {
        for p in &comp.prefixes {
            if system.rates.contains_key(&p.action) {
                continue;
            }
            if reagent_actions.contains(p.action.as_str()) {
                diags.push(Diagnostic::error(
                    format!("action `{}` has no functional rate", p.action),
                    &p.origin,
                ));
            } else {
                diags.push(Diagnostic::warning(
                    format!(
                        "action `{}` has no functional rate; the {} role of {} is ignored",
                        p.action, p.role, comp.subject
                    ),
                    &p.origin,
                ));
            }
        }
    }

    let declared: HashSet<&SpeciesRef> = system
        .components
        .iter()
        .map(|c| &c.subject)
        .chain(system.model.iter().flat_map(|m| m.instances().into_iter().map(|(s, _, _)| s)))
        .collect();
    for (action, rate) in &system.rates {
        for p in rate.expr.parameters() {
            if !system.parameters.contains_key(p) {
                diags.push(Diagnostic::error(
                    format!("rate of `{action}` uses unknown parameter `{p}`"),
                    &rate.origin,
                ));
            }
        }
        for s in rate.expr.species() {
            if !declared.contains(s) {
                diags.push(Diagnostic::error(
                    format!("rate of `{action}` uses undeclared species {s}"),
                    &rate.origin,
                ));
            }
        }
        if !used_actions.contains(action.as_str()) {
            diags.push(Diagnostic::warning(
                format!("rate `{action}` is not used by any species component"),
                &rate.origin,
            ));
        }
    }

    let mut info_seen = HashSet::new();
    for info in &system.species_info {
        check_loc(&info.subject, &info.origin, &mut diags);
        if !info_seen.insert(&info.subject) {
            diags.push(Diagnostic::error(
                format!("species {} has more than one information entry", info.subject),
                &info.origin,
            ));
        }
        if !declared.contains(&info.subject) {
            diags.push(Diagnostic::error(
                format!("information given for undeclared species {}", info.subject),
                &info.origin,
            ));
        }
        if !(info.step_size > 0.0) {
            diags.push(Diagnostic::error(
                format!("step size of {} must be positive", info.subject),
                &info.origin,
            ));
        }
        if let Some(max) = info.max_amount {
            if !(max > 0.0) {
                diags.push(Diagnostic::error(
                    format!("maximum amount of {} must be positive", info.subject),
                    &info.origin,
                ));
            }
        }
    }

    if let Some(model) = &system.model {
        let mut inst_seen = HashSet::new();
        for (s, initial, origin) in model.instances() {
            check_loc(s, origin, &mut diags);
            if !inst_seen.insert(s) {
                diags.push(Diagnostic::error(format!("species {s} appears twice in the model"), origin));
            }
            if !component_of.contains_key(s) {
                diags.push(Diagnostic::error(format!("species {s} has no species component"), origin));
            }
            if !(initial >= 0.0) || !initial.is_finite() {
                diags.push(Diagnostic::error(
                    format!("initial amount {initial} of {s} must be a nonnegative number"),
                    origin,
                ));
            }
            if let Some(max) = system.info(s).and_then(|i| i.max_amount) {
                if initial > max {
                    diags.push(Diagnostic::error(
                        format!("initial amount {initial} of {s} exceeds its maximum {max}"),
                        origin,
                    ));
                }
            }
        }
        for comp in &system.components {
            if !inst_seen.contains(&comp.subject) {
                diags.push(Diagnostic::warning(
                    format!("species {} is not part of the model component", comp.subject),
                    &comp.origin,
                ));
            }
        }
        for issue in cooperation_issues(system) {
            diags.push(Diagnostic::error(issue.to_string(), &Origin::default()));
        }
    } else {
        for comp in &system.components {
            diags.push(Diagnostic::warning(
                format!("species {} is not part of the model component", comp.subject),
                &comp.origin,
            ));
        }
    }
    diags
}

/// A synchronisation defect in the model component.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CooperationIssue {
    #[error("action `{action}` is in a cooperation set but not performed by {missing}")]
    MissingParticipant { action: String, missing: String },
    #[error("action `{action}` is shared across a cooperation but not synchronised")]
    Unsynchronised { action: String },
}

/// Checks that every shared action is synchronised and that every explicitly
/// listed action is offered by both sides.
pub fn cooperation_issues(system: &BioPepaSystem) -> Vec<CooperationIssue> {
    fn actions_of(m: &ModelComponent, system: &BioPepaSystem) -> BTreeSet<String> {
        match m {
            ModelComponent::Instance { subject, .. } => system
                .component(subject)
                .map(|c| {
                    c.prefixes
                        .iter()
                        .filter(|p| system.rates.contains_key(&p.action))
                        .map(|p| p.action.clone())
                        .collect()
                })
                .unwrap_or_default(),
            ModelComponent::Cooperation { left, right, .. } => {
                let mut a = actions_of(left, system);
                a.extend(actions_of(right, system));
                a
            }
        }
    }
    fn describe(m: &ModelComponent) -> String {
        let names: Vec<String> = m.instances().iter().map(|(s, _, _)| s.to_string()).collect();
        names.join(", ")
    }
    fn walk(m: &ModelComponent, system: &BioPepaSystem, out: &mut Vec<CooperationIssue>) {
        if let ModelComponent::Cooperation { left, sync, right } = m {
            walk(left, system, out);
            walk(right, system, out);
            let la = actions_of(left, system);
            let ra = actions_of(right, system);
            if let SyncSet::Actions(set) = sync {
                for a in set {
                    if !la.contains(a) {
                        out.push(CooperationIssue::MissingParticipant { action: a.clone(), missing: describe(left) });
                    }
                    if !ra.contains(a) {
                        out.push(CooperationIssue::MissingParticipant { action: a.clone(), missing: describe(right) });
                    }
                }
            }
            for a in la.intersection(&ra) {
                if !sync.contains(a) {
                    out.push(CooperationIssue::Unsynchronised { action: a.clone() });
                }
            }
        }
    }
    let mut out = Vec::new();
    if let Some(m) = &system.model {
        walk(m, system, &mut out);
    }
    out
}

/// Species grouped by location, handy for reports.
pub fn species_by_location(system: &BioPepaSystem) -> BTreeMap<String, Vec<SpeciesRef>> {
    let mut out: BTreeMap<String, Vec<SpeciesRef>> = BTreeMap::new();
    for s in system.species() {
        out.entry(s.location.clone()).or_default().push(s);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn info(h: f64, max: f64) -> SpeciesInfo {
        SpeciesInfo::new(SpeciesRef::new("X", "c"), h, max)
    }

    #[test]
    fn level_of_zero_is_zero() {
        assert_eq!(amount_to_level(0.0, &info(7.0, 70.0)).unwrap(), 0);
    }

    #[test]
    fn level_examples() {
        assert_eq!(amount_to_level(50.0, &info(10.0, 50.0)).unwrap(), 5);
        let i = info(50.0, 1750.0);
        assert_eq!(i.max_level(), Some(35));
        assert_eq!(amount_to_level(1666.0, &i).unwrap(), 33);
        // clamped at the top
        assert_eq!(amount_to_level(5000.0, &i).unwrap(), 35);
    }

    #[test]
    fn negative_amount_rejected() {
        assert_eq!(amount_to_level(-1.0, &info(1.0, 3.0)), Err(LevelError::NegativeAmount(-1.0)));
    }

    #[test]
    fn level_round_trip_on_grid() {
        let i = info(25.0, 300.0);
        for level in 0..=i.max_level().unwrap() {
            assert_eq!(amount_to_level(level as f64 * 25.0, &i).unwrap(), level);
        }
    }

    #[test]
    fn empty_system_is_wellformed() {
        assert!(check_wellformed(&BioPepaSystem::default()).is_empty());
    }

    #[test]
    fn origin_is_ignored_by_equality() {
        let span = SourceSpan { file: "a".into(), line: 1, column: 1, length: 1 };
        assert_eq!(Origin(Some(span)), Origin(None));
    }
}
