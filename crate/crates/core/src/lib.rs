//! Bio-PEPA style modelling toolkit.
//!
//! Models are parsed with [`parser::parse`], flattened into a
//! [`network::ReactionNetwork`], and then analysed either by stochastic
//! simulation ([`ssa`]) or by transient analysis of the CTMC with levels
//! ([`ctmc`]). [`decomp`] splits a model into modules and checks a module
//! analysed on its own against a reference.

pub mod expr;
pub mod model;
pub mod network;
pub mod parser;
pub mod corpus;
pub mod ctmc;
pub mod decomp;
pub mod ssa;
pub mod trace;
