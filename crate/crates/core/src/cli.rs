//! Command-line front end.
//!
//! Exit codes: 0 success, 1 scientific mismatch or conjecture violation,
//! 2 configuration or validation error, 3 numerical failure. Every command
//! finishes its computation before writing, so a failing run leaves no
//! output files behind.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::config::{ConjectureSpec, GraphSpec, PolaritonConfig, Prepared, RunConfig, StateSpec};
use crate::darkstate::{aleph_state, predict_all_pairs, predict_p, SUPPORT_TOL};
use crate::dynamics::{
    build_liouvillian, default_dt, evolve_with, steady_state, EvolveOptions, SteadyMethod, SteadyOptions,
};
use crate::entanglement::{concurrence_map, ConcurrenceMap};
use crate::error::{Error, Result};
use crate::hilbert::{DensityMatrix, PureState};
use crate::optimizer::{conjecture_sweep, OptimizerOptions};
use crate::polariton::{effective_parameters, to_network, EffectiveChainParams};
use crate::report::{
    basis_spec, concurrence_rows, write_csv, write_json, write_trajectory_csv, ConcurrenceRow, ConjectureRow,
    ConjectureSummaryRow, GraphSummary, PredictionReport, TopologyView, TrajectoryRow,
};
use crate::topology::{classify_topology, resonance_check, ResonanceClass, TopologyClass, DEFAULT_RESONANCE_TOL};

/// Default number of trajectory rows when `record_every` is not given.
const DEFAULT_TRAJECTORY_ROWS: usize = 1000;

#[derive(Debug, Parser)]
#[command(name = "dissnet", version, about = "Steady-state entanglement in dissipative qubit networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate the master equation and write the trajectory.
    Simulate(CommonArgs),
    /// Closed-form stationary pair states, no time evolution.
    Predict(CommonArgs),
    /// Compare the closed-form prediction with the computed steady state.
    Verify(CommonArgs),
    /// Search for initial states exceeding the single-excitation bound.
    Conjecture(CommonArgs),
    /// Reduce cavity-array parameters to an effective qubit chain.
    MapPolariton(CommonArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Directory for output files.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Treat regime warnings as errors.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    Mismatch,
}

pub fn exit_code(r: &Result<Outcome>) -> i32 {
    match r {
        Ok(Outcome::Success) => 0,
        Ok(Outcome::Mismatch) => 1,
        Err(e) if e.is_numerical() => 3,
        Err(_) => 2,
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = dispatch(&cli.command);
    if let Err(e) = &result {
        let kind = if e.is_numerical() { "numerical failure" } else { "error" };
        eprintln!("{kind}: {e}");
    }
    exit_code(&result)
}

pub fn dispatch(cmd: &Command) -> Result<Outcome> {
    match cmd {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Predict(a) => cmd_predict(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Conjecture(a) => cmd_conjecture(a),
        Command::MapPolariton(a) => cmd_map_polariton(a),
    }
}

fn output_path(out: &Path, configured: Option<&String>, default: &str) -> PathBuf {
    out.join(configured.map(String::as_str).unwrap_or(default))
}

fn summary(p: &Prepared) -> GraphSummary {
    GraphSummary {
        n: p.graph.n(),
        edges: p.graph.edges().len(),
        topology: TopologyView::from(&classify_topology(&p.graph)),
        resonance: resonance_check(&p.graph, DEFAULT_RESONANCE_TOL),
    }
}

fn print_concurrence(label: &str, map: &ConcurrenceMap) {
    println!("{label}");
    println!("{:>4} {:>4} {:>14}", "k", "j", "concurrence");
    for ((k, j), c) in map.iter() {
        println!("{:>4} {:>4} {:>14.9}", k + 1, j + 1, c);
    }
}

#[derive(Serialize)]
struct FinalState {
    trace: f64,
    excitation_number: f64,
    purity: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    p_overlap: Option<f64>,
    concurrence: Vec<ConcurrenceRow>,
}

#[derive(Serialize)]
struct SimulateReport {
    command: &'static str,
    graph: GraphSpec,
    summary: GraphSummary,
    basis: crate::config::BasisSpec,
    initial_state: StateSpec,
    t_final: f64,
    dt: f64,
    final_state: FinalState,
}

pub fn cmd_simulate(args: &CommonArgs) -> Result<Outcome> {
    let cfg = RunConfig::load(&args.config)?;
    let prepared = cfg.prepare()?;
    let ev = cfg
        .evolution
        .as_ref()
        .ok_or_else(|| Error::Config("simulate needs an \"evolution\" block with t_final".into()))?;
    let spec = build_liouvillian(&prepared.graph, prepared.basis.clone())?;
    let dt = match ev.dt {
        Some(dt) => dt,
        None => default_dt(&spec),
    };
    let steps = (ev.t_final / dt).ceil().max(1.0) as usize;
    let record_every = ev.record_every.unwrap_or_else(|| steps.div_ceil(DEFAULT_TRAJECTORY_ROWS).max(1));
    let aleph = classify_topology(&prepared.graph)
        .is_bipartite()
        .then(|| aleph_state(&prepared.graph, &prepared.basis))
        .transpose()?;

    let rho0 = prepared.initial.to_density();
    let opts = EvolveOptions { dt: ev.dt, record_every, ..Default::default() };
    let mut rows = Vec::new();
    let mut failure = None;
    let last = evolve_with(&spec, &rho0, ev.t_final, &opts, |t, rho| {
        if failure.is_some() {
            return;
        }
        match snapshot(t, rho, aleph.as_ref()) {
            Ok(r) => rows.push(r),
            Err(e) => failure = Some(e),
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    let map = concurrence_map(&last)?;
    let report = SimulateReport {
        command: "simulate",
        graph: GraphSpec::from_graph(&prepared.graph),
        summary: summary(&prepared),
        basis: basis_spec(&prepared.basis),
        initial_state: StateSpec::from_state(&prepared.initial),
        t_final: ev.t_final,
        dt: ev.t_final / steps as f64,
        final_state: FinalState {
            trace: last.trace(),
            excitation_number: last.excitation_number(),
            purity: last.purity(),
            p_overlap: aleph.as_ref().map(|a| last.expectation(a)).transpose()?,
            concurrence: concurrence_rows(&map),
        },
    };

    print_concurrence(&format!("final state at t = {}", ev.t_final), &map);
    write_trajectory_csv(
        &output_path(&args.out, cfg.outputs.trajectory_csv.as_ref(), "trajectory.csv"),
        prepared.graph.n(),
        &rows,
    )?;
    write_csv(&args.out.join("concurrence.csv"), &report.final_state.concurrence)?;
    write_json(&output_path(&args.out, cfg.outputs.report_json.as_ref(), "report.json"), &report)?;
    Ok(Outcome::Success)
}

fn snapshot(t: f64, rho: &DensityMatrix, aleph: Option<&PureState>) -> Result<TrajectoryRow> {
    Ok(TrajectoryRow {
        t,
        trace: rho.trace(),
        excitation_number: rho.excitation_number(),
        p_overlap: aleph.map(|a| rho.expectation(a)).transpose()?,
        purity: rho.purity(),
        concurrence: concurrence_map(rho)?.iter().map(|(_, c)| c).collect(),
    })
}

fn prediction(prepared: &Prepared) -> Result<PredictionReport> {
    let rho0 = prepared.initial.to_density();
    let p = predict_p(&rho0, &prepared.graph)?;
    let pairs = predict_all_pairs(p, &prepared.graph)?;
    Ok(PredictionReport::new(p, prepared.graph.n(), &pairs))
}

fn print_prediction(r: &PredictionReport) {
    println!("p = {}", r.p);
    println!("{:>4} {:>4} {:>5} {:>14}", "k", "j", "sign", "concurrence");
    for x in &r.pairs {
        println!("{:>4} {:>4} {:>5} {:>14.9}", x.k, x.j, x.sign, x.concurrence);
    }
}

pub fn cmd_predict(args: &CommonArgs) -> Result<Outcome> {
    let cfg = RunConfig::load(&args.config)?;
    let prepared = cfg.prepare()?;
    let report = prediction(&prepared)?;
    print_prediction(&report);
    write_json(&output_path(&args.out, cfg.outputs.report_json.as_ref(), "prediction.json"), &report)?;
    Ok(Outcome::Success)
}

#[derive(Serialize)]
struct VerifyRow {
    k: usize,
    j: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    predicted: Option<f64>,
    measured: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    diff: Option<f64>,
}

#[derive(Serialize)]
struct VerifyReport {
    command: &'static str,
    summary: GraphSummary,
    tolerance: f64,
    steady_method: SteadyMethod,
    #[serde(skip_serializing_if = "Option::is_none")]
    refused: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    p_predicted: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    p_measured: Option<f64>,
    max_diff: Option<f64>,
    passed: bool,
    pairs: Vec<VerifyRow>,
}

pub fn cmd_verify(args: &CommonArgs) -> Result<Outcome> {
    let cfg = RunConfig::load(&args.config)?;
    let prepared = cfg.prepare()?;
    let g = &prepared.graph;
    let rho0 = prepared.initial.to_density();

    let leak = rho0.support_leak_above(1);
    if leak > SUPPORT_TOL {
        return Err(Error::Precondition(format!(
            "initial state has support above one excitation (entry {leak:e}); no prediction exists"
        )));
    }
    if let TopologyClass::OddCycle { witness } = classify_topology(g) {
        return Err(Error::OddCycle { witness });
    }
    let resonance = resonance_check(g, DEFAULT_RESONANCE_TOL);
    let (refused, predicted) = if resonance.class == ResonanceClass::OffResonant {
        let msg = format!(
            "refusing to predict: onsite energies are off resonance (detunings {:?}), so p is not conserved",
            resonance.per_vertex
        );
        (Some(msg), None)
    } else {
        (None, Some(prediction(&prepared)?))
    };

    let spec = build_liouvillian(g, prepared.basis.clone())?;
    let steady = steady_state(&spec, &rho0, &SteadyOptions::with_method(cfg.steady_method))?;
    let measured = concurrence_map(&steady)?;
    let aleph = aleph_state(g, &prepared.basis)?;
    let p_measured = steady.expectation(&aleph)?;

    let mut pairs = Vec::with_capacity(measured.len());
    for ((k, j), c) in measured.iter() {
        let pred = predicted
            .as_ref()
            .and_then(|r| r.pairs.iter().find(|x| x.k == k + 1 && x.j == j + 1))
            .map(|x| x.concurrence);
        pairs.push(VerifyRow { k: k + 1, j: j + 1, predicted: pred, measured: c, diff: pred.map(|p| (c - p).abs()) });
    }
    let p_diff = predicted.as_ref().map(|r| (r.p - p_measured).abs());
    let max_diff = pairs.iter().filter_map(|r| r.diff).chain(p_diff).reduce(f64::max);
    let passed = refused.is_none() && max_diff.is_some_and(|d| d <= cfg.tolerance);
    let report = VerifyReport {
        command: "verify",
        summary: summary(&prepared),
        tolerance: cfg.tolerance,
        steady_method: cfg.steady_method,
        refused: refused.clone(),
        p_predicted: predicted.as_ref().map(|r| r.p),
        p_measured: Some(p_measured),
        max_diff,
        passed,
        pairs,
    };

    if let Some(msg) = &refused {
        eprintln!("{msg}");
    }
    println!("{:>4} {:>4} {:>14} {:>14} {:>10}", "k", "j", "predicted", "measured", "diff");
    for r in &report.pairs {
        let fmt = |x: Option<f64>, p: usize| x.map_or("-".to_string(), |v| format!("{v:.p$}"));
        println!(
            "{:>4} {:>4} {:>14} {:>14.9} {:>10}",
            r.k,
            r.j,
            fmt(r.predicted, 9),
            r.measured,
            r.diff.map_or("-".to_string(), |d| format!("{d:.2e}"))
        );
    }
    println!("p measured = {p_measured}");
    println!("{}", if passed { "verify: PASS" } else { "verify: FAIL" });
    write_json(&output_path(&args.out, cfg.outputs.report_json.as_ref(), "verify.json"), &report)?;
    Ok(if passed { Outcome::Success } else { Outcome::Mismatch })
}

pub fn cmd_conjecture(args: &CommonArgs) -> Result<Outcome> {
    let cfg = RunConfig::load(&args.config)?;
    let g = cfg.graph.build()?;
    let spec = cfg.conjecture.clone().unwrap_or_else(ConjectureSpec::default);
    if spec.budget == 0 {
        return Err(Error::Config("conjecture budget must be positive".into()));
    }
    if spec.restarts == 0 {
        return Err(Error::Config("conjecture needs at least one restart".into()));
    }
    let n_max = spec.n_max.unwrap_or(g.n());
    if n_max == 0 || n_max > g.n() {
        return Err(Error::Config(format!("N_max must lie in 1..={}, got {n_max}", g.n())));
    }
    let opts = OptimizerOptions {
        restarts: spec.restarts,
        seed: args.seed.unwrap_or(cfg.seed),
        slack: spec.slack,
        ..Default::default()
    };
    let reports = conjecture_sweep(&g, n_max, spec.budget, &opts)?;
    let rows: Vec<ConjectureRow> = reports.iter().map(ConjectureRow::from).collect();
    let summary: Vec<ConjectureSummaryRow> = reports.iter().map(ConjectureSummaryRow::from).collect();

    println!("{:>3} {:>3} {:>3} {:>14} {:>14} {:>6}", "n", "N", "m", "best", "2m/n^2", "holds");
    for r in &summary {
        println!(
            "{:>3} {:>3} {:>3} {:>14.9} {:>14.9} {:>6}",
            r.n, r.max_excitations, r.m, r.best_value, r.formula_value, r.holds
        );
    }
    let violations: Vec<&ConjectureRow> = rows.iter().filter(|r| !r.conjecture_holds).collect();
    let mut err = std::io::stderr().lock();
    for v in &violations {
        let _ = writeln!(
            err,
            "CONJECTURE VIOLATION at N={}, m={}, support {:?}: best {} exceeds 2m/n^2 = {}\nwitness state: {}",
            v.max_excitations,
            v.m,
            v.support,
            v.best_value,
            v.formula_value,
            serde_json::to_string(&v.best_state)?
        );
    }
    write_json(&output_path(&args.out, cfg.outputs.report_json.as_ref(), "conjecture.json"), &rows)?;
    write_csv(&args.out.join("conjecture.csv"), &summary)?;
    Ok(if violations.is_empty() { Outcome::Success } else { Outcome::Mismatch })
}

#[derive(Serialize)]
struct PolaritonReport {
    effective: EffectiveChainParams,
    gamma: Vec<f64>,
    gamma_defaulted: bool,
    graph: GraphSpec,
    resonance: crate::topology::ResonanceReport,
}

pub fn cmd_map_polariton(args: &CommonArgs) -> Result<Outcome> {
    let cfg = PolaritonConfig::load(&args.config)?;
    let effective = effective_parameters(&cfg.params)?;
    if args.strict && !effective.regime_ok() {
        return Err(Error::Config(format!("regime check failed: {}", effective.warnings.join("; "))));
    }
    let gamma = cfg.gamma()?;
    let g = to_network(&effective, &gamma)?;
    for w in &effective.warnings {
        eprintln!("warning: {w}");
    }
    let report = PolaritonReport {
        resonance: resonance_check(&g, DEFAULT_RESONANCE_TOL),
        graph: GraphSpec::from_graph(&g),
        gamma,
        gamma_defaulted: cfg.gamma.is_none(),
        effective,
    };
    println!("J' = {:?}", report.effective.j_prime);
    println!("omega' = {:?}", report.effective.omega_prime);
    write_json(&args.out.join("effective.json"), &report)?;
    Ok(Outcome::Success)
}
