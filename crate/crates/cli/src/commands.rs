use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use biopepa_core::ctmc::{self, BuildOptions, CtmcError, LevelCtmc, Query, QueryError, SolverOptions};
use biopepa_core::decomp::{self, Boundary, EnvironmentStub, ExtractError, ModulePartition, StubHint};
use biopepa_core::model::{check_wellformed, BioPepaSystem, SpeciesInfo, SpeciesRef};
use biopepa_core::network::{derive_reactions, ReactionNetwork};
use biopepa_core::parser::{self, LoadError};
use biopepa_core::ssa;
use biopepa_core::trace::{format_float, EnsembleTrace, Grid};

use crate::config::{require, Block, ExperimentConfig, HintName};
use crate::error::{semantic, CliError};
use crate::manifest::{Outputs, RunManifest, Seeds};
use crate::svg::{line_chart, Series};
use crate::{CheckArgs, Common, CompareArgs, DecomposeArgs, FitArgs, SimulateArgs};

type Exit = Result<u8, CliError>;

fn load_config(common: &Common, command: &str) -> Result<(ExperimentConfig, String), CliError> {
    let mut cfg = match &common.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(m) = &common.model {
        cfg.model = Some(m.clone());
    }
    if let Some(o) = &common.output {
        cfg.output = Some(o.clone());
    }
    let name = common
        .config
        .as_ref()
        .and_then(|p| p.file_stem())
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| command.to_string());
    Ok((cfg, name))
}

fn output_dir(common: &Common, cfg: &ExperimentConfig, name: &str) -> PathBuf {
    if let Some(o) = &cfg.output {
        return o.clone();
    }
    common.output_root.clone().unwrap_or_else(|| PathBuf::from("biopepa-out")).join(name)
}

fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn load_model(path: &Path) -> Result<BioPepaSystem, CliError> {
    parser::parse_file(path).map_err(|e| match e {
        LoadError::Io { source, .. } => CliError::io(path, source),
        LoadError::Parse(p) => CliError::Semantic(p.to_string()),
    })
}

fn load_network(cfg: &ExperimentConfig) -> Result<(BioPepaSystem, ReactionNetwork), CliError> {
    let path = require(cfg.model.as_deref(), "model (`--model` or `model` in the config)")?;
    let sys = load_model(path)?;
    let net = derive_reactions(&sys).map_err(semantic)?;
    for d in &net.diagnostics {
        eprintln!("{d}");
    }
    Ok((sys, net))
}

fn read_trace(path: &Path) -> Result<EnsembleTrace, CliError> {
    let text = read_text(path)?;
    EnsembleTrace::read_csv(text.as_bytes()).map_err(|e| CliError::Semantic(format!("{}: {e}", path.display())))
}

fn parse_species(list: &[String]) -> Result<Vec<SpeciesRef>, CliError> {
    list.iter().map(|s| s.parse::<SpeciesRef>().map_err(CliError::Semantic)).collect()
}

fn trace_csv(trace: &EnsembleTrace, variances: bool) -> Vec<u8> {
    let mut buf = Vec::new();
    trace.write_csv(&mut buf, variances).expect("writing to memory");
    buf
}

fn trace_chart(trace: &EnsembleTrace, title: &str) -> String {
    let series: Vec<Series> = trace
        .species
        .iter()
        .zip(&trace.mean)
        .map(|(s, m)| Series { name: s.to_string(), x: &trace.times, y: m })
        .collect();
    line_chart(title, "time", "mean amount", &series)
}

pub fn validate(path: Option<PathBuf>, config: Option<PathBuf>) -> Exit {
    let path = match (path, config) {
        (Some(p), _) => p,
        (None, Some(c)) => require(ExperimentConfig::load(&c)?.model, "model in the config")?,
        (None, None) => return Err(CliError::Semantic("give a model path or --config".into())),
    };
    let sys = load_model(&path)?;
    let diags = check_wellformed(&sys);
    for d in &diags {
        eprintln!("{d}");
    }
    let errors = diags.iter().filter(|d| d.is_error()).count();
    if errors > 0 {
        eprintln!("{}: {errors} error(s)", path.display());
        return Ok(1);
    }
    let net = derive_reactions(&sys).map_err(semantic)?;
    for d in net.diagnostics.iter().skip(diags.len()) {
        eprintln!("{d}");
    }
    println!(
        "{}: ok ({} species, {} reactions, {} warning(s))",
        path.display(),
        net.species.len(),
        net.reactions.len(),
        net.diagnostics.len()
    );
    Ok(0)
}

/// Maximum amounts derived from an ensemble for every species with a step size.
fn derived_infos(sys: &BioPepaSystem, trace: &EnsembleTrace, margin: f64) -> Result<Vec<SpeciesInfo>, CliError> {
    let steps: Vec<(SpeciesRef, f64)> = sys
        .species_info
        .iter()
        .filter(|i| trace.index_of(&i.subject).is_some())
        .map(|i| (i.subject.clone(), i.step_size))
        .collect();
    ctmc::derive_species_info(trace, &steps, margin).map_err(semantic)
}

pub fn simulate(a: SimulateArgs) -> Exit {
    let (mut cfg, name) = load_config(&a.common, "simulate")?;
    cfg.expect_block(Block::Ssa)?;
    let mut block = cfg.ssa.take().unwrap_or_default();
    block.runs = a.runs.unwrap_or(block.runs);
    block.t_end = a.t_end.or(block.t_end);
    block.points = a.points.unwrap_or(block.points);
    block.seed = a.seed.unwrap_or(block.seed);
    block.write_runs = a.write_runs.unwrap_or(block.write_runs);
    cfg.ssa = Some(block.clone());

    let t_end = require(block.t_end, "t_end (`--t-end` or `t_end` in [ssa])")?;
    if !(t_end > 0.0) || block.points < 2 || block.runs == 0 {
        return Err(CliError::Semantic("need t_end > 0, points >= 2 and runs >= 1".into()));
    }
    let (sys, net) = load_network(&cfg)?;
    let grid = Grid::uniform(t_end, block.points);
    let res = ssa::ensemble(&net, &grid, block.runs, block.seed).map_err(semantic)?;

    let mut manifest = RunManifest::new("simulate", cfg.to_toml());
    manifest.seeds.push(Seeds { base: block.seed, runs: block.runs });
    let mut out = Outputs::create(output_dir(&a.common, &cfg, &name), manifest)?;
    out.write("means.csv", &trace_csv(&res.trace, false))?;
    out.write("variances.csv", &trace_csv(&res.trace, true))?;
    let mut firings = String::from("reaction,mean,variance\n");
    for (r, m) in &res.firing_mean {
        let _ = writeln!(firings, "{r},{},{}", format_float(*m), format_float(res.firing_variance[r]));
    }
    out.write("firings.csv", firings.as_bytes())?;
    out.write("means.svg", trace_chart(&res.trace, &format!("{name}: mean of {} runs", block.runs)).as_bytes())?;
    for i in 0..block.write_runs.min(block.runs) {
        let seed = block.seed + i as u64;
        let traj = ssa::simulate(&net, t_end, seed).map_err(semantic)?;
        let states: Vec<Vec<u64>> = grid.times.iter().map(|&t| traj.state_at(&net, t)).collect();
        let mean = (0..net.species.len()).map(|s| states.iter().map(|st| st[s] as f64).collect()).collect();
        let one = EnsembleTrace {
            times: grid.times.clone(),
            species: net.species.iter().cloned().collect(),
            mean,
            variance: None,
            runs: 1,
        };
        out.write(&format!("runs/run_{seed}.csv"), &trace_csv(&one, false))?;
    }

    let infos = derived_infos(&sys, &res.trace, block.sigma_margin)?;
    for i in &infos {
        out.manifest.derived_maxima.insert(i.subject.to_string(), i.max_amount.unwrap_or(0.0));
    }
    let levels: BTreeMap<String, u32> = infos.iter().map(|i| (i.subject.to_string(), i.max_level().unwrap_or(0))).collect();
    out.manifest.note("max_levels", &levels);
    out.manifest.note("firing_mean", &res.firing_mean);
    for (seed, t) in &res.stalled {
        out.manifest.warnings.push(format!("run with seed {seed} stalled at t = {t}: no reaction enabled"));
    }
    if res.clamped > 0 {
        out.manifest.warnings.push(format!("{} negative rate evaluations were clamped to 0", res.clamped));
    }
    for w in &out.manifest.warnings {
        eprintln!("warning: {w}");
    }
    println!("{} runs to t = {t_end}, {} species, {} reactions", block.runs, net.species.len(), net.reactions.len());
    for (s, col) in res.trace.species.iter().zip(&res.trace.mean) {
        let peak = col.iter().copied().fold(0.0, f64::max);
        println!("  {:<24} final {:>12.4}  max {:>12.4}", s.to_string(), col[col.len() - 1], peak);
    }
    let dir = out.dir.clone();
    out.finish()?;
    println!("wrote {}", dir.display());
    Ok(0)
}

fn cap_error(e: &CtmcError) -> Option<CliError> {
    match e {
        CtmcError::StateCapExceeded { cap, explored, discovered } => Some(CliError::Cap(format!(
            "state space exceeds the cap of {cap} states: {discovered} states discovered, {explored} expanded"
        ))),
        _ => None,
    }
}

fn query_error(e: QueryError) -> CliError {
    match &e {
        QueryError::Ctmc(c) => cap_error(c).unwrap_or_else(|| semantic(&e)),
        _ => semantic(e),
    }
}

pub fn check(a: CheckArgs) -> Exit {
    let (mut cfg, name) = load_config(&a.common, "check")?;
    cfg.expect_block(Block::Ctmc)?;
    let mut block = cfg.ctmc.take().unwrap_or_default();
    block.queries = a.queries.clone().or(block.queries);
    block.state_cap = a.state_cap.unwrap_or(block.state_cap);
    block.epsilon = a.epsilon.unwrap_or(block.epsilon);
    block.maxima_from = a.maxima_from.clone().or(block.maxima_from);
    if let (Some(p), Some(v)) = (&a.sweep, &a.values) {
        block.sweep = Some(crate::config::SweepBlock { parameter: p.clone(), values: v.clone() });
    }
    cfg.ctmc = Some(block.clone());

    let qpath = require(block.queries.as_deref(), "query file (`--queries` or `queries` in [ctmc])")?;
    let queries: Vec<Query> =
        ctmc::parse_queries_named(&read_text(qpath)?, &qpath.display().to_string()).map_err(semantic)?;
    let (sys, net) = load_network(&cfg)?;
    let mut manifest = RunManifest::new("check", cfg.to_toml());

    let mut infos = Vec::new();
    let mut missing = Vec::new();
    for s in &net.species {
        match sys.info(s) {
            None => return Err(CliError::Semantic(format!("species {s} has no step size in [info]"))),
            Some(i) => {
                if i.max_amount.is_none() {
                    missing.push(s.clone());
                }
                infos.push(i.clone());
            }
        }
    }
    if !missing.is_empty() {
        let derived: BTreeMap<String, f64> = if let Some(path) = &block.maxima_from {
            RunManifest::read(path)?.derived_maxima
        } else {
            let t_end = block
                .derive_t_end
                .or_else(|| queries.iter().flat_map(|q| q.times.iter().copied()).reduce(f64::max))
                .filter(|t| *t > 0.0)
                .ok_or_else(|| CliError::Semantic("cannot derive maxima: set derive_t_end".into()))?;
            let grid = Grid::uniform(t_end, block.derive_points.max(2));
            let res = ssa::ensemble(&net, &grid, block.derive_runs, block.derive_seed).map_err(semantic)?;
            manifest.seeds.push(Seeds { base: block.derive_seed, runs: block.derive_runs });
            derived_infos(&sys, &res.trace, block.sigma_margin)?
                .into_iter()
                .map(|i| (i.subject.to_string(), i.max_amount.unwrap_or(0.0)))
                .collect()
        };
        for info in infos.iter_mut().filter(|i| i.max_amount.is_none()) {
            let max = derived.get(&info.subject.to_string()).ok_or_else(|| {
                CliError::Semantic(format!("no maximum amount available for {}", info.subject))
            })?;
            info.max_amount = Some(*max);
            manifest.derived_maxima.insert(info.subject.to_string(), *max);
        }
    }
    let levels: BTreeMap<String, u32> = infos.iter().map(|i| (i.subject.to_string(), i.max_level().unwrap_or(0))).collect();
    println!("levels (max level per species):");
    for (s, l) in &levels {
        println!("  {s:<24} {l}");
    }
    manifest.note("max_levels", &levels);

    let build = BuildOptions { state_cap: block.state_cap };
    let solver = SolverOptions { epsilon: block.epsilon, ..SolverOptions::default() };
    let mut out = Outputs::create(output_dir(&a.common, &cfg, &name), manifest)?;
    if let Some(sweep) = &block.sweep {
        let rows = ctmc::sweep(&net, &infos, &sweep.parameter, &sweep.values, &queries, build, solver)
            .map_err(query_error)?;
        let mut csv = format!("{},query,time,value\n", sweep.parameter);
        for r in &rows {
            let _ = writeln!(csv, "{},{},{},{}", format_float(r.value), r.query, format_float(r.time), format_float(r.result));
        }
        out.write("sweep.csv", csv.as_bytes())?;
        for q in &queries {
            let cols: Vec<(String, Vec<f64>, Vec<f64>)> = sweep
                .values
                .iter()
                .map(|&v| {
                    let pts = rows.iter().filter(|r| r.query == q.id && r.value == v);
                    let (x, y): (Vec<f64>, Vec<f64>) = pts.map(|r| (r.time, r.result)).unzip();
                    (format!("{} = {v}", sweep.parameter), x, y)
                })
                .collect();
            let series: Vec<Series> = cols.iter().map(|(n, x, y)| Series { name: n.clone(), x, y }).collect();
            out.write(&format!("{}.svg", q.id), line_chart(&q.to_string(), "time", &q.id, &series).as_bytes())?;
        }
        println!("swept {} over {} values, {} rows", sweep.parameter, sweep.values.len(), rows.len());
    } else {
        let chain: LevelCtmc = match ctmc::build_level_ctmc(&net, &infos, build) {
            Ok(c) => c,
            Err(e) => return Err(cap_error(&e).unwrap_or_else(|| semantic(e))),
        };
        println!("{} states, {} transitions", chain.state_count(), chain.chain.transition_count());
        out.manifest.note("states", chain.state_count());
        out.manifest.note("transitions", chain.chain.transition_count());
        if chain.clamped > 0 {
            out.manifest.warnings.push(format!("{} negative rate evaluations were clamped to 0", chain.clamped));
        }
        let rows = ctmc::evaluate_queries(&chain, &net.parameters, &queries, solver).map_err(query_error)?;
        let mut csv = String::from("query,time,value\n");
        for r in &rows {
            let _ = writeln!(csv, "{},{},{}", r.query, format_float(r.time), format_float(r.value));
        }
        out.write("queries.csv", csv.as_bytes())?;
        for q in &queries {
            let (x, y): (Vec<f64>, Vec<f64>) = rows.iter().filter(|r| r.query == q.id).map(|r| (r.time, r.value)).unzip();
            let series = [Series { name: q.id.clone(), x: &x, y: &y }];
            out.write(&format!("{}.svg", q.id), line_chart(&q.to_string(), "time", &q.id, &series).as_bytes())?;
            let last = y.last().copied().unwrap_or(f64::NAN);
            let peak = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            println!("  {:<16} {} points, final {last:.6}, max {peak:.6}", q.id, y.len());
        }
    }
    let dir = out.dir.clone();
    out.finish()?;
    println!("wrote {}", dir.display());
    Ok(0)
}

fn load_stubs(path: Option<&Path>) -> Result<Vec<EnvironmentStub>, CliError> {
    match path {
        Some(p) => decomp::parse_stubs(&read_text(p)?).map_err(|e| CliError::Semantic(format!("{}: {e}", p.display()))),
        None => Ok(vec![]),
    }
}

pub fn decompose(a: DecomposeArgs) -> Exit {
    let (mut cfg, name) = load_config(&a.common, "decompose")?;
    cfg.expect_block(Block::Decompose)?;
    let mut block = cfg.decompose.take().unwrap_or_default();
    if let Some(m) = &a.modules {
        block.modules = m.clone();
    }
    cfg.partition = a.partition.clone().or(cfg.partition);
    cfg.stubs = a.stubs.clone().or(cfg.stubs);
    cfg.decompose = Some(block.clone());

    let ppath = require(cfg.partition.as_deref(), "partition (`--partition` or `partition` in the config)")?;
    let partition = ModulePartition::from_toml(&read_text(ppath)?).map_err(semantic)?;
    let stubs = load_stubs(cfg.stubs.as_deref())?;
    let (sys, net) = load_network(&cfg)?;
    partition.check(&net).map_err(semantic)?;
    let classes = decomp::classify_species(&net, &partition).map_err(semantic)?;

    let mut out = Outputs::create(output_dir(&a.common, &cfg, &name), RunManifest::new("decompose", cfg.to_toml()))?;
    let mut csv = String::from("module,species,class,foreign_modules\n");
    for (module, table) in &classes.modules {
        println!("module {module}");
        for (s, c) in table {
            let foreign: Vec<&str> = c.foreign.iter().map(String::as_str).collect();
            let class = match c.boundary {
                Boundary::Local => "local",
                Boundary::ExternalRegulator => "external_regulator",
                Boundary::ExternalReagent => "external_reagent",
            };
            let _ = writeln!(csv, "{module},{s},{class},{}", foreign.join(";"));
            println!("  {:<24} {:<20} {}", s.to_string(), c.boundary.to_string(), foreign.join(", "));
        }
    }
    out.write("classification.csv", csv.as_bytes())?;

    let selected: Vec<String> = if block.modules.is_empty() {
        partition.module_names().map(String::from).collect()
    } else {
        block.modules.clone()
    };
    let mut failures = Vec::new();
    let mut extracted = BTreeMap::new();
    for module in &selected {
        match decomp::extract_module(&sys, &partition, module, &stubs) {
            Ok(m) => {
                let text = parser::serialize(&m.system);
                out.write(&format!("{module}.biopepa"), text.as_bytes())?;
                println!("extracted {module}: {} species, {} reactions", m.network.species.len(), m.network.reactions.len());
                extracted.insert(module.clone(), m.network.reactions.iter().map(|r| r.action.clone()).collect::<Vec<_>>());
            }
            Err(e @ ExtractError::MissingStubs { .. }) => failures.push(e.to_string()),
            Err(e) => return Err(semantic(e)),
        }
    }
    out.manifest.note("extracted", &extracted);
    out.manifest.warnings.extend(failures.iter().cloned());
    out.finish()?;
    if failures.is_empty() {
        Ok(0)
    } else {
        Err(CliError::Semantic(failures.join("\n")))
    }
}

pub fn fit_env(a: FitArgs) -> Exit {
    let (mut cfg, name) = load_config(&a.common, "fit-env")?;
    cfg.expect_block(Block::Fit)?;
    let mut block = cfg.fit.take().unwrap_or_default();
    block.reference = a.reference.clone().or(block.reference);
    if let Some(s) = &a.species {
        block.species = s.clone();
    }
    block.module = a.module.clone().or(block.module);
    block.hint = a.hint.unwrap_or(block.hint);
    block.quantile = a.quantile.or(block.quantile);
    block.runs = a.runs.unwrap_or(block.runs);
    block.t_end = a.t_end.or(block.t_end);
    block.seed = a.seed.unwrap_or(block.seed);
    cfg.fit = Some(block.clone());

    if block.species.is_empty() {
        return Err(CliError::Semantic("missing species to fit (`--species` or `species` in [fit])".into()));
    }
    let species = parse_species(&block.species)?;
    let mut manifest = RunManifest::new("fit-env", cfg.to_toml());
    let reference = match &block.reference {
        Some(p) => read_trace(p)?,
        None => {
            let (_, net) = load_network(&cfg)?;
            let t_end = require(block.t_end, "reference CSV or t_end to simulate one")?;
            if !(t_end > 0.0) || block.points < 2 {
                return Err(CliError::Semantic("need t_end > 0 and points >= 2".into()));
            }
            let grid = Grid::uniform(t_end, block.points);
            manifest.seeds.push(Seeds { base: block.seed, runs: block.runs });
            ssa::ensemble(&net, &grid, block.runs, block.seed).map_err(semantic)?.trace
        }
    };
    let hint = match block.hint {
        HintName::Auto => StubHint::Auto,
        HintName::ZeroOrderCreation => StubHint::ZeroOrderCreation,
        HintName::FixedInitial => StubHint::FixedInitial { quantile: block.quantile },
        HintName::FirstOrderDegradation => StubHint::FirstOrderDegradation,
    };
    let mut stubs = Vec::new();
    for s in &species {
        let mut stub = decomp::fit_stub(&reference, s, hint).map_err(semantic)?;
        if let Some(m) = &block.module {
            stub = stub.for_module(m);
        }
        println!("{s}: {:?} ({})", stub.strategy, stub.note);
        stubs.push(stub);
    }
    let mut out = Outputs::create(output_dir(&a.common, &cfg, &name), manifest)?;
    if block.reference.is_none() {
        out.write("reference.csv", &trace_csv(&reference, false))?;
    }
    out.write("stubs.toml", decomp::stubs_to_toml(&stubs).as_bytes())?;
    let dir = out.dir.clone();
    out.finish()?;
    println!("wrote {}", dir.join("stubs.toml").display());
    Ok(0)
}

pub fn compare(a: CompareArgs) -> Exit {
    let (mut cfg, name) = load_config(&a.common, "compare")?;
    cfg.expect_block(Block::Compare)?;
    let mut block = cfg.compare.take().unwrap_or_default();
    block.candidate = a.candidate.clone().or(block.candidate);
    block.reference = a.reference.clone().or(block.reference);
    if let Some(s) = &a.species {
        block.species = s.clone();
    }
    block.threshold = a.threshold.unwrap_or(block.threshold);
    cfg.compare = Some(block.clone());

    let cand = read_trace(require(block.candidate.as_deref(), "candidate CSV")?)?;
    let reference = read_trace(require(block.reference.as_deref(), "reference CSV")?)?;
    let species = parse_species(&block.species)?;
    let cmp = decomp::compare_traces(&cand, &reference, &species).map_err(semantic)?;

    let mut csv = String::from("species,rmse,nrmse,max_abs_deviation,peak_time_difference\n");
    println!("{:<24} {:>12} {:>10} {:>12} {:>10}", "species", "rmse", "nrmse", "max |dev|", "peak dt");
    for (s, m) in &cmp.species {
        let n = m.nrmse.map(format_float).unwrap_or_default();
        let _ = writeln!(
            csv,
            "{s},{},{n},{},{}",
            format_float(m.rmse),
            format_float(m.max_abs_deviation),
            format_float(m.peak_time_difference)
        );
        let shown = m.nrmse.map(|v| format!("{v:.4}")).unwrap_or_else(|| "-".into());
        println!(
            "{:<24} {:>12.4} {:>10} {:>12.4} {:>10.4}",
            s.to_string(),
            m.rmse,
            shown,
            m.max_abs_deviation,
            m.peak_time_difference
        );
    }
    for w in &cmp.warnings {
        eprintln!("warning: {w}");
    }
    let pass = cmp.passes(block.threshold);
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("{verdict}: worst normalised RMSE {:.4} (threshold {})", cmp.worst_nrmse, block.threshold);

    let mut out = Outputs::create(output_dir(&a.common, &cfg, &name), RunManifest::new("compare", cfg.to_toml()))?;
    out.write("comparison.csv", csv.as_bytes())?;
    out.manifest.note("worst_nrmse", cmp.worst_nrmse);
    out.manifest.note("verdict", verdict);
    out.manifest.warnings.extend(cmp.warnings.iter().cloned());
    out.finish()?;
    Ok(if a.strict && !pass { 1 } else { 0 })
}
