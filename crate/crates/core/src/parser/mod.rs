//! Text front end for the model language.
//!
//! A document is a sequence of sections, each introduced by a header:
//!
//! ```text
//! [locations]   extra : 1 uL, C;
//! [parameters]  k1 = 0.01;
//! [rates]       v1 = fMA(k1);
//! [species]     alpha@extra = v1 << alpha@extra + v2 (+) alpha@extra;
//! [info]        alpha@extra : step = 50, max = 1000;
//! [model]       Module1 = alpha@extra[1000] <*> ...;
//! ```
//!
//! See `docs/grammar.md` for the full grammar.

mod lexer;
mod serialize;

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use thiserror::Error;

use crate::expr::{BinOp, RateExpr};
use crate::model::{
    BioPepaSystem, FunctionalRate, Location, LocationKind, ModelComponent, Origin, PrefixTerm, Role,
    SourceSpan, SpeciesComponent, SpeciesInfo, SpeciesRef, SyncSet,
};

pub(crate) use lexer::{tokenize, Tok, Token};
pub use serialize::serialize;

#[derive(Debug, Clone, PartialEq, Error)]
pub struct ParseError {
    pub span: SourceSpan,
    pub message: String,
    pub expected: Vec<String>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.span, self.message)?;
        if !self.expected.is_empty() {
            write!(f, " (expected {})", self.expected.join(" or "))?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// Parses a model document.
pub fn parse(text: &str) -> Result<BioPepaSystem, ParseError> {
    parse_named(text, "<input>")
}

/// Parses a model document, labelling spans with `file`.
pub fn parse_named(text: &str, file: &str) -> Result<BioPepaSystem, ParseError> {
    let file: Arc<str> = Arc::from(file);
    let tokens = tokenize(text, &file)?;
    DocumentParser::new(Cursor::new(tokens)).parse()
}

pub fn parse_file(path: &Path) -> Result<BioPepaSystem, LoadError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| LoadError::Io { path: path.display().to_string(), source })?;
    Ok(parse_named(&text, &path.display().to_string())?)
}

/// Token stream with one-token lookahead, shared by the model and query
/// grammars.
pub(crate) struct Cursor {
    tokens: Vec<Token>,
    pos: usize,
    /// Parameter-name occurrences seen by the last expression parse.
    pub names: Vec<(String, SourceSpan)>,
}

impl Cursor {
    pub fn new(tokens: Vec<Token>) -> Self {
        Cursor { tokens, pos: 0, names: Vec::new() }
    }

    pub fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    pub fn peek_at(&self, n: usize) -> &Tok {
        &self.tokens[(self.pos + n).min(self.tokens.len() - 1)].tok
    }

    pub fn span(&self) -> SourceSpan {
        self.tokens[self.pos].span.clone()
    }

    pub fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    pub fn at(&self, tok: &Tok) -> bool {
        self.peek() == tok
    }

    pub fn eat(&mut self, tok: &Tok) -> bool {
        if self.at(tok) {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn error(&self, message: impl Into<String>, expected: &[&str]) -> ParseError {
        ParseError {
            span: self.span(),
            message: message.into(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn unexpected(&self, expected: &[&str]) -> ParseError {
        self.error(format!("unexpected {}", self.peek().describe()), expected)
    }

    pub fn expect(&mut self, tok: &Tok) -> Result<Token, ParseError> {
        if self.at(tok) {
            Ok(self.bump())
        } else {
            Err(self.unexpected(&[&format!("`{}`", tok.spelling())]))
        }
    }

    pub fn ident(&mut self) -> Result<(String, SourceSpan), ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let span = self.bump().span;
                Ok((s, span))
            }
            _ => Err(self.unexpected(&["identifier"])),
        }
    }

    pub fn species_ref(&mut self) -> Result<(SpeciesRef, SourceSpan), ParseError> {
        let (name, span) = self.ident()?;
        self.expect(&Tok::At)?;
        let (loc, _) = self.ident()?;
        Ok((SpeciesRef { name, location: loc }, span))
    }

    pub fn number(&mut self) -> Result<f64, ParseError> {
        match *self.peek() {
            Tok::Number(v) => {
                self.bump();
                Ok(v)
            }
            _ => Err(self.unexpected(&["number"])),
        }
    }

    /// `expr := term (('+'|'-') term)*`
    pub fn expr(&mut self) -> Result<RateExpr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            lhs = RateExpr::binary(op, lhs, self.term()?);
        }
    }

    fn term(&mut self) -> Result<RateExpr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            lhs = RateExpr::binary(op, lhs, self.unary()?);
        }
    }

    fn unary(&mut self) -> Result<RateExpr, ParseError> {
        if self.eat(&Tok::Minus) {
            if let Tok::Number(v) = *self.peek() {
                if *self.peek_at(1) != Tok::Caret {
                    self.bump();
                    return Ok(RateExpr::Num(-v));
                }
            }
            return Ok(RateExpr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<RateExpr, ParseError> {
        let base = self.atom()?;
        if self.eat(&Tok::Caret) {
            let exp = self.unary()?;
            return Ok(RateExpr::binary(BinOp::Pow, base, exp));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<RateExpr, ParseError> {
        match self.peek().clone() {
            Tok::Number(v) => {
                self.bump();
                Ok(RateExpr::Num(v))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(&Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if name == "fMA" && *self.peek_at(1) == Tok::LParen {
                    self.bump();
                    self.bump();
                    let e = self.expr()?;
                    self.expect(&Tok::RParen)?;
                    return Ok(RateExpr::MassAction(Box::new(e)));
                }
                if name == "amount" && *self.peek_at(1) == Tok::LParen {
                    self.bump();
                    self.bump();
                    let (s, _) = self.species_ref()?;
                    self.expect(&Tok::RParen)?;
                    return Ok(RateExpr::Species(s));
                }
                if *self.peek_at(1) == Tok::At {
                    let (s, _) = self.species_ref()?;
                    return Ok(RateExpr::Species(s));
                }
                let span = self.bump().span;
                self.names.push((name.clone(), span));
                Ok(RateExpr::Param(name))
            }
            _ => Err(self.unexpected(&["number", "identifier", "`(`"])),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    Locations,
    Parameters,
    Rates,
    Species,
    Info,
    Model,
}

/// An expression whose parameter references are resolved after the whole
/// document has been read.
struct Deferred {
    expr: RateExpr,
    names: Vec<(String, SourceSpan)>,
    span: SourceSpan,
}

enum ModelAst {
    Instance { subject: SpeciesRef, initial: Deferred, span: SourceSpan },
    Ref { name: String, span: SourceSpan },
    Coop { left: Box<ModelAst>, sync: SyncSet, right: Box<ModelAst> },
}

struct InfoAst {
    subject: SpeciesRef,
    step: Deferred,
    max: Option<Deferred>,
    span: SourceSpan,
}

struct DocumentParser {
    cur: Cursor,
    system: BioPepaSystem,
    infos: Vec<InfoAst>,
    defs: Vec<(String, ModelAst, SourceSpan)>,
}

impl DocumentParser {
    fn new(cur: Cursor) -> Self {
        DocumentParser { cur, system: BioPepaSystem::default(), infos: Vec::new(), defs: Vec::new() }
    }

    fn parse(mut self) -> Result<BioPepaSystem, ParseError> {
        let mut section = None;
        while !self.cur.at(&Tok::Eof) {
            if self.cur.at(&Tok::LBracket) {
                section = Some(self.header()?);
                continue;
            }
            match section {
                None => return Err(self.cur.unexpected(&["section header such as `[species]`"])),
                Some(Section::Locations) => self.location()?,
                Some(Section::Parameters) => self.parameter()?,
                Some(Section::Rates) => self.rate()?,
                Some(Section::Species) => self.species()?,
                Some(Section::Info) => self.info()?,
                Some(Section::Model) => self.model_def()?,
            }
        }
        self.finish()
    }

    fn header(&mut self) -> Result<Section, ParseError> {
        self.cur.expect(&Tok::LBracket)?;
        let span = self.cur.span();
        let (name, _) = self.cur.ident()?;
        let section = match name.as_str() {
            "locations" => Section::Locations,
            "parameters" => Section::Parameters,
            "rates" => Section::Rates,
            "species" => Section::Species,
            "info" => Section::Info,
            "model" => Section::Model,
            _ => {
                return Err(ParseError {
                    span,
                    message: format!("unknown section `{name}`"),
                    expected: ["locations", "parameters", "rates", "species", "info", "model"]
                        .iter()
                        .map(|s| s.to_string())
                        .collect(),
                })
            }
        };
        self.cur.expect(&Tok::RBracket)?;
        Ok(section)
    }

    fn duplicate(span: SourceSpan, what: String) -> ParseError {
        ParseError { span, message: format!("duplicate definition of {what}"), expected: vec![] }
    }

    fn location(&mut self) -> Result<(), ParseError> {
        let (name, span) = self.cur.ident()?;
        self.cur.expect(&Tok::Colon)?;
        let size = self.cur.number()?;
        let unit = match self.cur.peek() {
            Tok::Ident(_) => self.cur.ident()?.0,
            _ => String::new(),
        };
        self.cur.expect(&Tok::Comma)?;
        let kind_span = self.cur.span();
        let (kind, _) = self.cur.ident()?;
        let kind = match kind.as_str() {
            "C" => LocationKind::Compartment,
            "M" => LocationKind::Membrane,
            _ => {
                return Err(ParseError {
                    span: kind_span,
                    message: format!("unknown location kind `{kind}`"),
                    expected: vec!["`C`".into(), "`M`".into()],
                })
            }
        };
        self.cur.expect(&Tok::Semi)?;
        if self.system.location(&name).is_some() {
            return Err(Self::duplicate(span, format!("location `{name}`")));
        }
        self.system.locations.push(Location { name, size, unit, kind, origin: Origin(Some(span)) });
        Ok(())
    }

    fn parameter(&mut self) -> Result<(), ParseError> {
        let (name, span) = self.cur.ident()?;
        self.cur.expect(&Tok::Eq)?;
        self.cur.names.clear();
        let expr_span = self.cur.span();
        let expr = self.cur.expr()?;
        self.cur.expect(&Tok::Semi)?;
        if self.system.parameters.contains_key(&name) {
            return Err(Self::duplicate(span, format!("parameter `{name}`")));
        }
        let d = Deferred { expr, names: std::mem::take(&mut self.cur.names), span: expr_span };
        let value = self.eval(&d)?;
        self.system.parameters.insert(name, value);
        Ok(())
    }

    fn rate(&mut self) -> Result<(), ParseError> {
        let (action, span) = self.cur.ident()?;
        self.cur.expect(&Tok::Eq)?;
        let expr = self.cur.expr()?;
        self.cur.expect(&Tok::Semi)?;
        if self.system.rates.contains_key(&action) {
            return Err(Self::duplicate(span, format!("rate `{action}`")));
        }
        self.system.rates.insert(action, FunctionalRate { expr, origin: Origin(Some(span)) });
        Ok(())
    }

    fn species(&mut self) -> Result<(), ParseError> {
        let (subject, span) = self.cur.species_ref()?;
        self.cur.expect(&Tok::Eq)?;
        let mut prefixes = vec![self.prefix(&subject)?];
        while self.cur.eat(&Tok::Plus) {
            prefixes.push(self.prefix(&subject)?);
        }
        self.cur.expect(&Tok::Semi)?;
        if self.system.component(&subject).is_some() {
            return Err(Self::duplicate(span, format!("species {subject}")));
        }
        self.system.components.push(SpeciesComponent { subject, prefixes, origin: Origin(Some(span)) });
        Ok(())
    }

    fn prefix(&mut self, subject: &SpeciesRef) -> Result<PrefixTerm, ParseError> {
        let span = self.cur.span();
        let (action, stoichiometry) = if self.cur.eat(&Tok::LParen) {
            let (a, _) = self.cur.ident()?;
            self.cur.expect(&Tok::Comma)?;
            let k_span = self.cur.span();
            let k = self.cur.number()?;
            if k < 1.0 || k.fract() != 0.0 || k > u32::MAX as f64 {
                return Err(ParseError {
                    span: k_span,
                    message: format!("stoichiometry must be a positive integer, found {k}"),
                    expected: vec![],
                });
            }
            self.cur.expect(&Tok::RParen)?;
            (a, k as u32)
        } else {
            (self.cur.ident()?.0, 1)
        };
        let role = match self.cur.peek() {
            Tok::Reactant => Role::Reactant,
            Tok::Product => Role::Product,
            Tok::Activator => Role::Activator,
            Tok::Inhibitor => Role::Inhibitor,
            Tok::Modifier => Role::Modifier,
            _ => return Err(self.cur.unexpected(&["`<<`", "`>>`", "`(+)`", "`(-)`", "`(.)`"])),
        };
        self.cur.bump();
        let target_span = self.cur.span();
        let (target, _) = self.cur.species_ref()?;
        if &target != subject {
            return Err(ParseError {
                span: target_span,
                message: format!("prefix in the component of {subject} must continue as {subject}, not {target}"),
                expected: vec![],
            });
        }
        Ok(PrefixTerm { action, stoichiometry, role, origin: Origin(Some(span)) })
    }

    fn deferred(&mut self) -> Result<Deferred, ParseError> {
        self.cur.names.clear();
        let span = self.cur.span();
        let expr = self.cur.expr()?;
        Ok(Deferred { expr, names: std::mem::take(&mut self.cur.names), span })
    }

    fn info(&mut self) -> Result<(), ParseError> {
        let (subject, span) = self.cur.species_ref()?;
        self.cur.expect(&Tok::Colon)?;
        let (mut step, mut max) = (None, None);
        loop {
            let key_span = self.cur.span();
            let (key, _) = self.cur.ident()?;
            self.cur.expect(&Tok::Eq)?;
            let value = self.deferred()?;
            let slot = match key.as_str() {
                "step" => &mut step,
                "max" => &mut max,
                _ => {
                    return Err(ParseError {
                        span: key_span,
                        message: format!("unknown species information `{key}`"),
                        expected: vec!["`step`".into(), "`max`".into()],
                    })
                }
            };
            if slot.replace(value).is_some() {
                return Err(Self::duplicate(key_span, format!("`{key}` for {subject}")));
            }
            if !self.cur.eat(&Tok::Comma) {
                break;
            }
        }
        self.cur.expect(&Tok::Semi)?;
        let Some(step) = step else {
            return Err(ParseError {
                span,
                message: format!("species information for {subject} needs a `step`"),
                expected: vec![],
            });
        };
        if self.infos.iter().any(|i| i.subject == subject) {
            return Err(Self::duplicate(span, format!("species information for {subject}")));
        }
        self.infos.push(InfoAst { subject, step, max, span });
        Ok(())
    }

    fn model_def(&mut self) -> Result<(), ParseError> {
        let (name, span) = self.cur.ident()?;
        self.cur.expect(&Tok::Eq)?;
        let body = self.coop()?;
        self.cur.expect(&Tok::Semi)?;
        if self.defs.iter().any(|(n, _, _)| *n == name) {
            return Err(Self::duplicate(span, format!("model component `{name}`")));
        }
        self.defs.push((name, body, span));
        Ok(())
    }

    /// `coop := matom (sync matom)*`, left associative.
    fn coop(&mut self) -> Result<ModelAst, ParseError> {
        let mut lhs = self.matom()?;
        while self.cur.at(&Tok::Lt) {
            let sync = self.sync_set()?;
            let rhs = self.matom()?;
            lhs = ModelAst::Coop { left: Box::new(lhs), sync, right: Box::new(rhs) };
        }
        Ok(lhs)
    }

    fn sync_set(&mut self) -> Result<SyncSet, ParseError> {
        self.cur.expect(&Tok::Lt)?;
        if self.cur.eat(&Tok::Star) {
            self.cur.expect(&Tok::Gt)?;
            return Ok(SyncSet::Star);
        }
        let mut set = std::collections::BTreeSet::new();
        if !self.cur.at(&Tok::Gt) {
            loop {
                set.insert(self.cur.ident()?.0);
                if !self.cur.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        self.cur.expect(&Tok::Gt)?;
        Ok(SyncSet::Actions(set))
    }

    fn matom(&mut self) -> Result<ModelAst, ParseError> {
        match self.cur.peek() {
            Tok::LParen => {
                self.cur.bump();
                let inner = self.coop()?;
                self.cur.expect(&Tok::RParen)?;
                Ok(inner)
            }
            Tok::Ident(_) if *self.cur.peek_at(1) == Tok::At => {
                let (subject, span) = self.cur.species_ref()?;
                self.cur.expect(&Tok::LBracket)?;
                let initial = self.deferred()?;
                self.cur.expect(&Tok::RBracket)?;
                Ok(ModelAst::Instance { subject, initial, span })
            }
            Tok::Ident(_) => {
                let (name, span) = self.cur.ident()?;
                Ok(ModelAst::Ref { name, span })
            }
            _ => Err(self.cur.unexpected(&["species instance `S@L[x]`", "component name", "`(`"])),
        }
    }

    fn eval(&self, d: &Deferred) -> Result<f64, ParseError> {
        for (name, span) in &d.names {
            if !self.system.parameters.contains_key(name) {
                return Err(ParseError {
                    span: span.clone(),
                    message: format!("unresolved name `{name}`"),
                    expected: vec!["a parameter defined earlier".into()],
                });
            }
        }
        d.expr.eval_constant(&|p| self.system.parameters.get(p).copied()).map_err(|what| ParseError {
            span: d.span.clone(),
            message: format!("`{what}` is not allowed in a constant expression"),
            expected: vec![],
        })
    }

    fn finish(mut self) -> Result<BioPepaSystem, ParseError> {
        for info in std::mem::take(&mut self.infos) {
            let step = self.eval(&info.step)?;
            let max = info.max.as_ref().map(|m| self.eval(m)).transpose()?;
            self.system.species_info.push(SpeciesInfo {
                subject: info.subject,
                step_size: step,
                max_amount: max,
                origin: Origin(Some(info.span)),
            });
        }

        let defs = std::mem::take(&mut self.defs);
        let mut referenced = HashSet::new();
        let mut built: HashMap<String, ModelComponent> = HashMap::new();
        let mut order = Vec::new();
        for (name, ast, _) in &defs {
            let m = self.lower(ast, &built, &mut referenced)?;
            built.insert(name.clone(), m);
            order.push(name.clone());
        }
        let roots = order.into_iter().filter(|n| !referenced.contains(n)).map(|n| built.remove(&n).unwrap());
        self.system.model = ModelComponent::star_of(roots);
        Ok(self.system)
    }

    fn lower(
        &self,
        ast: &ModelAst,
        built: &HashMap<String, ModelComponent>,
        referenced: &mut HashSet<String>,
    ) -> Result<ModelComponent, ParseError> {
        Ok(match ast {
            ModelAst::Instance { subject, initial, span } => ModelComponent::Instance {
                subject: subject.clone(),
                initial: self.eval(initial)?,
                origin: Origin(Some(span.clone())),
            },
            ModelAst::Ref { name, span } => {
                let Some(m) = built.get(name) else {
                    return Err(ParseError {
                        span: span.clone(),
                        message: format!("unresolved model component `{name}`"),
                        expected: vec!["a component defined earlier".into()],
                    });
                };
                if !referenced.insert(name.clone()) {
                    return Err(ParseError {
                        span: span.clone(),
                        message: format!("model component `{name}` is used more than once"),
                        expected: vec![],
                    });
                }
                m.clone()
            }
            ModelAst::Coop { left, sync, right } => ModelComponent::cooperate(
                self.lower(left, built, referenced)?,
                sync.clone(),
                self.lower(right, built, referenced)?,
            ),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::check_wellformed;

    #[test]
    fn ste2_component() {
        let sys = parse(
            "[locations] mem : 1 uL, M;\n[species]\nSte2@mem = v2 << Ste2@mem + v5 << Ste2@mem + v3 >> Ste2@mem;",
        )
        .unwrap();
        let c = &sys.components[0];
        assert_eq!(c.subject, SpeciesRef::new("Ste2", "mem"));
        let roles: Vec<_> = c.prefixes.iter().map(|p| (p.action.as_str(), p.role, p.stoichiometry)).collect();
        assert_eq!(
            roles,
            vec![("v2", Role::Reactant, 1), ("v5", Role::Reactant, 1), ("v3", Role::Product, 1)]
        );
    }

    #[test]
    fn explicit_stoichiometry() {
        let sys = parse("[species] X@c = (a, 2) << X@c;").unwrap();
        assert_eq!(sys.components[0].prefixes[0].stoichiometry, 2);
        assert!(parse("[species] X@c = (a, 0) << X@c;").is_err());
        assert!(parse("[species] X@c = (a, 1.5) << X@c;").is_err());
    }

    #[test]
    fn unresolved_initial_value_is_reported() {
        let err = parse(
            "[species] Bar1active@extra = v38 >> Bar1active@extra;\nSte2active@mem = v4 << Ste2active@mem;\n\
             [model] Module1_IO = Bar1active@extra[0] <*> Ste2active@mem[init];",
        )
        .unwrap_err();
        assert!(err.message.contains("`init`"), "{err}");
        assert_eq!(err.span.line, 3);
    }

    #[test]
    fn parameters_are_one_pass() {
        let sys = parse("[parameters] a = 2; b = a * 3;").unwrap();
        assert_eq!(sys.parameters["b"], 6.0);
        assert!(parse("[parameters] b = a * 3; a = 2;").is_err());
        assert!(parse("[parameters] a = 1; a = 2;").is_err());
    }

    #[test]
    fn model_roots_are_composed() {
        let sys = parse(
            "[locations] c : 1, C;\n[parameters] n = 4;\n[rates] a = fMA(n);\n\
             [species] X@c = a << X@c; Y@c = a >> Y@c; Z@c = a (+) Z@c;\n\
             [model] L = X@c[n] <*> Y@c[0]; R = Z@c[1];",
        )
        .unwrap();
        let inst: Vec<_> = sys.model.as_ref().unwrap().instances().iter().map(|(s, v, _)| (s.name.clone(), *v)).collect();
        assert_eq!(inst, vec![("X".into(), 4.0), ("Y".into(), 0.0), ("Z".into(), 1.0)]);
        assert!(check_wellformed(&sys).is_empty());
    }

    #[test]
    fn precedence_in_model_and_rates() {
        let sys = parse("[rates] a = -x ^ 2 + 3 * y;").unwrap();
        assert_eq!(sys.rates["a"].expr.to_string(), "-x ^ 2 + 3 * y");
        let sys = parse(
            "[species] A@c = a << A@c; B@c = a >> B@c; C@c = b << C@c;\n[model] M = A@c[1] <a> (B@c[0] <> C@c[2]);",
        )
        .unwrap();
        match sys.model.unwrap() {
            ModelComponent::Cooperation { sync: SyncSet::Actions(s), right, .. } => {
                assert!(s.contains("a"));
                assert!(matches!(*right, ModelComponent::Cooperation { .. }));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn errors_carry_expected_tokens() {
        let err = parse("[species] X@c = v1 X@c;").unwrap_err();
        assert!(err.expected.iter().any(|e| e.contains("<<")));
        assert!(parse("X@c = v1 << X@c;").is_err());
        assert!(parse("[bogus]").is_err());
    }

    #[test]
    fn empty_document() {
        assert_eq!(parse("").unwrap(), BioPepaSystem::default());
        assert_eq!(parse("// nothing\n[model]").unwrap(), BioPepaSystem::default());
    }
}
