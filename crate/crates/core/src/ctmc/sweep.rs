use rayon::prelude::*;

use crate::model::SpeciesInfo;
use crate::network::ReactionNetwork;

use super::{build_level_ctmc, evaluate_queries, BuildOptions, Query, QueryError, SolverOptions};

/// One row of a long-format sweep table.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub query: String,
    pub time: f64,
    pub result: f64,
}

/// Rebuilds the CTMC for each value of `parameter` and evaluates `queries`.
/// Sweep points run in parallel; rows keep the order of `values`.
pub fn sweep(
    network: &ReactionNetwork,
    info: &[SpeciesInfo],
    parameter: &str,
    values: &[f64],
    queries: &[Query],
    build: BuildOptions,
    solver: SolverOptions,
) -> Result<Vec<SweepRow>, QueryError> {
    if !network.parameters.contains_key(parameter) {
        return Err(QueryError::UnknownParameter { query: "sweep".into(), parameter: parameter.into() });
    }
    let tables: Vec<Result<Vec<SweepRow>, QueryError>> = values
        .par_iter()
        .map(|&value| {
            let mut net = network.clone();
            net.set_parameter(parameter, value).expect("checked above");
            let ctmc = build_level_ctmc(&net, info, build)?;
            let rows = evaluate_queries(&ctmc, &net.parameters, queries, solver)?;
            Ok(rows.into_iter().map(|r| SweepRow { value, query: r.query, time: r.time, result: r.value }).collect())
        })
        .collect();
    let mut out = Vec::new();
    for t in tables {
        out.extend(t?);
    }
    Ok(out)
}
