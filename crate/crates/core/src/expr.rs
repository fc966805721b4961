//! Kinetic-law expressions.
//!
//! A [`RateExpr`] is kept symbolic (parameter names, species references) so a
//! model can be re-parameterised without re-parsing. Evaluation against a
//! concrete state goes through [`crate::network`], which compiles the tree
//! down to index lookups.

use std::collections::BTreeSet;
use std::fmt;

use crate::model::SpeciesRef;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }

    pub fn apply(self, l: f64, r: f64) -> f64 {
        match self {
            BinOp::Add => l + r,
            BinOp::Sub => l - r,
            BinOp::Mul => l * r,
            BinOp::Div => l / r,
            BinOp::Pow => l.powf(r),
        }
    }
}

/// A functional rate (or reward) expression.
#[derive(Debug, Clone, PartialEq)]
pub enum RateExpr {
    Num(f64),
    Param(String),
    Species(SpeciesRef),
    Neg(Box<RateExpr>),
    Binary(BinOp, Box<RateExpr>, Box<RateExpr>),
    /// `fMA(k)`: `k` times the product of reactant and activator amounts,
    /// each raised to its stoichiometry.
    MassAction(Box<RateExpr>),
}

impl RateExpr {
    pub fn mass_action(param: &str) -> Self {
        RateExpr::MassAction(Box::new(RateExpr::Param(param.to_string())))
    }

    pub fn binary(op: BinOp, l: RateExpr, r: RateExpr) -> Self {
        RateExpr::Binary(op, Box::new(l), Box::new(r))
    }

    pub fn uses_mass_action(&self) -> bool {
        match self {
            RateExpr::MassAction(_) => true,
            RateExpr::Neg(e) => e.uses_mass_action(),
            RateExpr::Binary(_, l, r) => l.uses_mass_action() || r.uses_mass_action(),
            _ => false,
        }
    }

    /// Parameter names referenced anywhere in the expression.
    pub fn parameters(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.visit(&mut |e| {
            if let RateExpr::Param(p) = e {
                out.insert(p.as_str());
            }
        });
        out
    }

    /// Species referenced by name in the expression (not counting the
    /// implicit participants of `fMA`).
    pub fn species(&self) -> BTreeSet<&SpeciesRef> {
        let mut out = BTreeSet::new();
        self.visit(&mut |e| {
            if let RateExpr::Species(s) = e {
                out.insert(s);
            }
        });
        out
    }

    fn visit<'a>(&'a self, f: &mut impl FnMut(&'a RateExpr)) {
        f(self);
        match self {
            RateExpr::Neg(e) | RateExpr::MassAction(e) => e.visit(f),
            RateExpr::Binary(_, l, r) => {
                l.visit(f);
                r.visit(f);
            }
            _ => {}
        }
    }

    /// Evaluates an expression that may only mention parameters.
    pub fn eval_constant(&self, lookup: &impl Fn(&str) -> Option<f64>) -> Result<f64, String> {
        match self {
            RateExpr::Num(v) => Ok(*v),
            RateExpr::Param(p) => lookup(p).ok_or_else(|| p.clone()),
            RateExpr::Species(s) => Err(s.to_string()),
            RateExpr::Neg(e) => Ok(-e.eval_constant(lookup)?),
            RateExpr::Binary(op, l, r) => {
                Ok(op.apply(l.eval_constant(lookup)?, r.eval_constant(lookup)?))
            }
            RateExpr::MassAction(_) => Err("fMA".to_string()),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            RateExpr::Binary(BinOp::Add | BinOp::Sub, ..) => 1,
            RateExpr::Binary(BinOp::Mul | BinOp::Div, ..) => 2,
            RateExpr::Neg(_) => 3,
            RateExpr::Num(v) if v.is_sign_negative() && *v != 0.0 => 3,
            RateExpr::Binary(BinOp::Pow, ..) => 4,
            _ => 5,
        }
    }

    fn write_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.precedence() < min {
            write!(f, "(")?;
            self.write_prec(f, 0)?;
            return write!(f, ")");
        }
        match self {
            RateExpr::Num(v) => write!(f, "{}", format_number(*v)),
            RateExpr::Param(p) => write!(f, "{p}"),
            RateExpr::Species(s) => write!(f, "{s}"),
            RateExpr::Neg(e) => {
                // `-3` would re-parse as a negative literal, not a negation.
                if matches!(**e, RateExpr::Num(_)) {
                    write!(f, "-({})", format_number(match **e {
                        RateExpr::Num(v) => v,
                        _ => unreachable!(),
                    }))
                } else {
                    write!(f, "-")?;
                    e.write_prec(f, 3)
                }
            }
            RateExpr::Binary(op, l, r) => {
                let (lmin, rmin) = match op {
                    BinOp::Add | BinOp::Sub => (1, 2),
                    BinOp::Mul | BinOp::Div => (2, 3),
                    BinOp::Pow => (5, 3),
                };
                l.write_prec(f, lmin)?;
                write!(f, " {} ", op.symbol())?;
                r.write_prec(f, rmin)
            }
            RateExpr::MassAction(e) => {
                write!(f, "fMA(")?;
                e.write_prec(f, 0)?;
                write!(f, ")")
            }
        }
    }
}

impl fmt::Display for RateExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_prec(f, 0)
    }
}

/// Shortest decimal form that parses back to the same `f64`.
pub fn format_number(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:?}")
    }
}
