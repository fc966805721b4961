//! Query files and their evaluation on a level CTMC.
//!
//! ```text
//! active: P[Ste2active@mem > 0] @ 0..30 step 0.5;
//! R[amount(Ste2active@mem)] @ 0..30 step 0.5;
//! R[count(v2)] @ 30;
//! ```

use std::fmt;
use std::sync::Arc;

use indexmap::{IndexMap, IndexSet};
use thiserror::Error;

use crate::expr::RateExpr;
use crate::model::SpeciesRef;
use crate::network::{CompiledExpr, CompileError, ZeroDivision};
use crate::parser::{tokenize, Cursor, ParseError, Tok};

use super::{solve, CtmcError, LevelCtmc, SolverOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    Gt,
    Ge,
    Lt,
    Le,
    Eq,
}

impl Comparison {
    pub fn holds(self, level: u32, threshold: u32) -> bool {
        match self {
            Comparison::Gt => level > threshold,
            Comparison::Ge => level >= threshold,
            Comparison::Lt => level < threshold,
            Comparison::Le => level <= threshold,
            Comparison::Eq => level == threshold,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Comparison::Gt => ">",
            Comparison::Ge => ">=",
            Comparison::Lt => "<",
            Comparison::Le => "<=",
            Comparison::Eq => "=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum QueryKind {
    /// Probability that the level of `species` compares to `level`.
    Prob { species: SpeciesRef, cmp: Comparison, level: u32 },
    /// Expected value of an expression over species amounts (`level * h`).
    Instantaneous { expr: RateExpr },
    /// Expected number of firings of the listed reactions in `[0, t]`.
    Cumulative { reactions: Vec<String> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Query {
    pub id: String,
    pub kind: QueryKind,
    pub times: Vec<f64>,
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            QueryKind::Prob { species, cmp, level } => write!(f, "P[{species} {} {level}]", cmp.symbol()),
            QueryKind::Instantaneous { expr } => write!(f, "R[{expr}]"),
            QueryKind::Cumulative { reactions } => write!(f, "R[count({})]", reactions.join(", ")),
        }
    }
}

/// One value of one query.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryRow {
    pub query: String,
    pub time: f64,
    pub value: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QueryError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("query `{query}`: unknown species {species}")]
    UnknownSpecies { query: String, species: SpeciesRef },
    #[error("query `{query}`: unknown reaction `{action}`")]
    UnknownReaction { query: String, action: String },
    #[error("query `{query}`: unknown parameter `{parameter}`")]
    UnknownParameter { query: String, parameter: String },
    #[error("query `{query}`: fMA is not allowed in a reward")]
    MassAction { query: String },
    #[error("query `{query}`: level {level} is outside [0, {max}] for {species}")]
    LevelOutOfRange { query: String, species: SpeciesRef, level: u32, max: u32 },
    #[error("query `{query}`: reward is not finite in state {state}")]
    NonFinite { query: String, state: String },
    #[error(transparent)]
    Ctmc(#[from] CtmcError),
}

/// Parses a query file: one query per `;`, `//` comments allowed.
pub fn parse_queries(text: &str) -> Result<Vec<Query>, ParseError> {
    parse_queries_named(text, "<queries>")
}

pub fn parse_queries_named(text: &str, file: &str) -> Result<Vec<Query>, ParseError> {
    let file: Arc<str> = Arc::from(file);
    let mut cur = Cursor::new(tokenize(text, &file)?);
    let mut out = Vec::new();
    while !cur.at(&Tok::Eof) {
        let id = if matches!(cur.peek(), Tok::Ident(_)) && *cur.peek_at(1) == Tok::Colon {
            let (id, _) = cur.ident()?;
            cur.bump();
            id
        } else {
            format!("q{}", out.len() + 1)
        };
        let kind = query_body(&mut cur)?;
        cur.expect(&Tok::At)?;
        let times = time_spec(&mut cur)?;
        cur.expect(&Tok::Semi)?;
        out.push(Query { id, kind, times });
    }
    Ok(out)
}

fn query_body(cur: &mut Cursor) -> Result<QueryKind, ParseError> {
    let head = match cur.peek() {
        Tok::Ident(s) if s == "P" || s == "R" => s.clone(),
        _ => return Err(cur.unexpected(&["`P[`", "`R[`"])),
    };
    cur.bump();
    cur.expect(&Tok::LBracket)?;
    let kind = if head == "P" {
        let (species, _) = cur.species_ref()?;
        let cmp = match cur.peek() {
            Tok::Gt if *cur.peek_at(1) == Tok::Eq => Comparison::Ge,
            Tok::Lt if *cur.peek_at(1) == Tok::Eq => Comparison::Le,
            Tok::Gt => Comparison::Gt,
            Tok::Lt => Comparison::Lt,
            Tok::Eq => Comparison::Eq,
            _ => return Err(cur.unexpected(&["`>`", "`>=`", "`<`", "`<=`", "`=`"])),
        };
        cur.bump();
        if matches!(cmp, Comparison::Ge | Comparison::Le) {
            cur.bump();
        }
        let span = cur.span();
        let level = cur.number()?;
        if level < 0.0 || level.fract() != 0.0 || level > u32::MAX as f64 {
            return Err(ParseError { span, message: format!("level must be a nonnegative integer, found {level}"), expected: vec![] });
        }
        QueryKind::Prob { species, cmp, level: level as u32 }
    } else if matches!(cur.peek(), Tok::Ident(s) if s == "count") && *cur.peek_at(1) == Tok::LParen {
        cur.bump();
        cur.bump();
        let mut reactions = vec![cur.ident()?.0];
        while cur.eat(&Tok::Comma) {
            reactions.push(cur.ident()?.0);
        }
        cur.expect(&Tok::RParen)?;
        QueryKind::Cumulative { reactions }
    } else {
        QueryKind::Instantaneous { expr: cur.expr()? }
    };
    cur.expect(&Tok::RBracket)?;
    Ok(kind)
}

/// `a..b step s`, or a comma-separated list of times.
fn time_spec(cur: &mut Cursor) -> Result<Vec<f64>, ParseError> {
    let span = cur.span();
    let first = cur.number()?;
    let bad = |message: String| ParseError { span: span.clone(), message, expected: vec![] };
    let times = if cur.eat(&Tok::DotDot) {
        let last = cur.number()?;
        match cur.peek() {
            Tok::Ident(s) if s == "step" => {
                cur.bump();
            }
            _ => return Err(cur.unexpected(&["`step`"])),
        }
        let step = cur.number()?;
        if !(step > 0.0) || last < first {
            return Err(bad(format!("bad range {first}..{last} step {step}")));
        }
        let n = ((last - first) / step + 1e-9).floor() as usize;
        (0..=n).map(|i| first + i as f64 * step).collect()
    } else {
        let mut v = vec![first];
        while cur.eat(&Tok::Comma) {
            v.push(cur.number()?);
        }
        v
    };
    if times.iter().any(|&t| t < 0.0) || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(bad("time points must be nonnegative and increasing".into()));
    }
    Ok(times)
}

fn describe_state(ctmc: &LevelCtmc, s: usize) -> String {
    let parts: Vec<String> = ctmc.species.iter().zip(ctmc.levels(s)).map(|(x, l)| format!("{x}={l}")).collect();
    format!("[{}]", parts.join(", "))
}

/// Per-state value of a query, or the reward rate for cumulative queries.
fn state_vector(ctmc: &LevelCtmc, params: &IndexMap<String, f64>, q: &Query) -> Result<Vec<f64>, QueryError> {
    match &q.kind {
        QueryKind::Prob { species, cmp, level } => {
            let i = ctmc
                .species_index(species)
                .ok_or_else(|| QueryError::UnknownSpecies { query: q.id.clone(), species: species.clone() })?;
            if *level > ctmc.max_levels[i] {
                return Err(QueryError::LevelOutOfRange {
                    query: q.id.clone(),
                    species: species.clone(),
                    level: *level,
                    max: ctmc.max_levels[i],
                });
            }
            Ok((0..ctmc.state_count()).map(|s| cmp.holds(ctmc.levels(s)[i], *level) as u8 as f64).collect())
        }
        QueryKind::Instantaneous { expr } => {
            let species: IndexSet<SpeciesRef> = ctmc.species.iter().cloned().collect();
            let compiled = CompiledExpr::compile(expr, &species, params, None).map_err(|e| match e {
                CompileError::Species(s) => QueryError::UnknownSpecies { query: q.id.clone(), species: s },
                CompileError::Parameter(p) => QueryError::UnknownParameter { query: q.id.clone(), parameter: p },
                CompileError::MassAction => QueryError::MassAction { query: q.id.clone() },
            })?;
            let pv: Vec<f64> = params.values().copied().collect();
            (0..ctmc.state_count())
                .map(|s| {
                    match compiled.eval(&ctmc.amounts(s), &pv, ZeroDivision::ZeroOverZeroIsZero) {
                        Some(v) if v.is_finite() => Ok(v),
                        _ => Err(QueryError::NonFinite { query: q.id.clone(), state: describe_state(ctmc, s) }),
                    }
                })
                .collect()
        }
        QueryKind::Cumulative { reactions } => {
            let idx = reactions
                .iter()
                .map(|a| {
                    ctmc.reaction_index(a)
                        .ok_or_else(|| QueryError::UnknownReaction { query: q.id.clone(), action: a.clone() })
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(ctmc.firing_rate_vector(&idx))
        }
    }
}

/// Evaluates every query with one transient pass over the union of their
/// time points. Rows come out grouped by query, in time order.
pub fn evaluate_queries(
    ctmc: &LevelCtmc,
    params: &IndexMap<String, f64>,
    queries: &[Query],
    options: SolverOptions,
) -> Result<Vec<QueryRow>, QueryError> {
    let vectors = queries.iter().map(|q| state_vector(ctmc, params, q)).collect::<Result<Vec<_>, _>>()?;
    let mut all: Vec<f64> = queries.iter().flat_map(|q| q.times.iter().copied()).collect();
    all.sort_by(f64::total_cmp);
    all.dedup();

    let cumulative_ids: Vec<usize> =
        (0..queries.len()).filter(|&i| matches!(queries[i].kind, QueryKind::Cumulative { .. })).collect();
    let rewards: Vec<Vec<f64>> = cumulative_ids.iter().map(|&i| vectors[i].clone()).collect();

    // values[q][k] for the union grid, filled for point queries.
    let mut values = vec![vec![f64::NAN; all.len()]; queries.len()];
    let cum = solve(&ctmc.chain, &ctmc.chain.point_mass(), &all, &rewards, options, |k, pi| {
        for (qi, q) in queries.iter().enumerate() {
            if matches!(q.kind, QueryKind::Cumulative { .. }) {
                continue;
            }
            if q.times.binary_search_by(|t| t.total_cmp(&all[k])).is_ok() {
                values[qi][k] = pi.iter().zip(&vectors[qi]).map(|(p, v)| p * v).sum();
            }
        }
        Ok(())
    })?;
    for (c, &qi) in cum.into_iter().zip(&cumulative_ids) {
        values[qi] = c;
    }

    let mut rows = Vec::new();
    for (qi, q) in queries.iter().enumerate() {
        for &t in &q.times {
            let k = all.binary_search_by(|x| x.total_cmp(&t)).expect("time is in the union");
            rows.push(QueryRow { query: q.id.clone(), time: t, value: values[qi][k] });
        }
    }
    Ok(rows)
}

fn single(ctmc: &LevelCtmc, params: &IndexMap<String, f64>, kind: QueryKind, times: &[f64]) -> Result<Vec<f64>, QueryError> {
    let q = Query { id: "query".into(), kind, times: times.to_vec() };
    Ok(evaluate_queries(ctmc, params, &[q], SolverOptions::default())?.into_iter().map(|r| r.value).collect())
}

/// `P[species cmp level]` at each time point.
pub fn eval_prob(
    ctmc: &LevelCtmc,
    species: &SpeciesRef,
    cmp: Comparison,
    level: u32,
    times: &[f64],
) -> Result<Vec<f64>, QueryError> {
    single(ctmc, &IndexMap::new(), QueryKind::Prob { species: species.clone(), cmp, level }, times)
}

/// Expected value of `expr` at each time point; `0 / 0` counts as 0.
pub fn eval_instantaneous_reward(
    ctmc: &LevelCtmc,
    params: &IndexMap<String, f64>,
    expr: &RateExpr,
    times: &[f64],
) -> Result<Vec<f64>, QueryError> {
    single(ctmc, params, QueryKind::Instantaneous { expr: expr.clone() }, times)
}

/// Expected number of firings of `reactions` in `[0, t]`.
pub fn eval_cumulative_reward(ctmc: &LevelCtmc, reactions: &[&str], times: &[f64]) -> Result<Vec<f64>, QueryError> {
    let reactions = reactions.iter().map(|s| s.to_string()).collect();
    single(ctmc, &IndexMap::new(), QueryKind::Cumulative { reactions }, times)
}
