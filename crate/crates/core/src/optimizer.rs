//! Search for initial states that beat the single-excitation bound on
//! stationary pair concurrence.
//!
//! The search space is every pure state in the span of basis patterns with
//! at most `N` excitations, all of them inside an `m`-vertex support. The
//! vacuum is included. Amplitudes are parametrized by their real and
//! imaginary parts and normalized before each evaluation, so the simplex
//! search runs unconstrained.

use std::cell::{Cell, RefCell};
use std::sync::Arc;

use argmin::core::{CostFunction, Error as ArgminError, Executor, State, TerminationReason, TerminationStatus};
use argmin::solver::neldermead::NelderMead;
use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::darkstate::max_concurrence_formula;
use crate::dynamics::{build_liouvillian, steady_state_kernel, KernelProjector, DEFAULT_SUPEROP_CAP};
use crate::entanglement::concurrence_map;
use crate::error::{Error, Result};
use crate::hilbert::{build_basis, DensityMatrix, ExcitationBasis, PureState};
use crate::topology::{
    classify_topology, ensure_valid, resonance_check, NetworkGraph, ResonanceClass, TopologyClass,
    DEFAULT_RESONANCE_TOL,
};
use crate::{Ket, C64};

pub const DEFAULT_RESTARTS: usize = 20;
pub const DEFAULT_SIMPLEX_TOL: f64 = 1e-8;
pub const DEFAULT_SLACK: f64 = 1e-4;

/// Edge length of the initial simplex around each random start.
const SIMPLEX_STEP: f64 = 0.25;

pub const SEARCH_SPACE_NOTE: &str =
    "pure states spanned by basis patterns of weight <= N with every excitation inside the support (vacuum included)";

#[derive(Debug, Clone)]
pub struct OptimizerOptions {
    pub restarts: usize,
    pub seed: u64,
    /// A best value above `2m/n² + slack` counts as a violation.
    pub slack: f64,
    /// Standard deviation of simplex values at which a restart stops.
    pub simplex_tol: f64,
    pub kernel_tol: Option<f64>,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        Self {
            restarts: DEFAULT_RESTARTS,
            seed: 0,
            slack: DEFAULT_SLACK,
            simplex_tol: DEFAULT_SIMPLEX_TOL,
            kernel_tol: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ConjectureReport {
    pub n: usize,
    /// Excitation cap `N`.
    pub max_excitations: usize,
    pub m: usize,
    /// 0-based, sorted.
    pub support: Vec<usize>,
    pub best_value: f64,
    /// Global phase fixed so the largest amplitude is real and positive.
    pub best_state: PureState,
    pub formula_value: f64,
    pub conjecture_holds: bool,
    /// Some restart met the simplex tolerance before its budget ran out.
    pub converged: bool,
    pub restarts: usize,
    pub evaluations: usize,
    pub search_space: String,
}

/// Steady-state machinery for one graph and excitation cap, shared by every
/// objective evaluation.
pub struct SectorContext {
    graph: NetworkGraph,
    basis: Arc<ExcitationBasis>,
    projector: KernelProjector,
}

impl SectorContext {
    pub fn new(g: &NetworkGraph, max_excitations: usize, kernel_tol: Option<f64>) -> Result<Self> {
        check_graph(g)?;
        if max_excitations == 0 || max_excitations > g.n() {
            return Err(Error::InvalidArgument(format!(
                "need 1 <= N <= n, got N={max_excitations}, n={}",
                g.n()
            )));
        }
        let basis = Arc::new(build_basis(g.n(), max_excitations)?);
        let spec = build_liouvillian(g, basis.clone())?;
        let projector = KernelProjector::new(&spec, kernel_tol, DEFAULT_SUPEROP_CAP)?;
        Ok(Self { graph: g.clone(), basis, projector })
    }

    pub fn basis(&self) -> &Arc<ExcitationBasis> {
        &self.basis
    }

    /// Largest pair concurrence of the steady state reached from `psi`.
    pub fn stationary_concurrence(&self, psi: &PureState) -> Result<f64> {
        self.value_of(psi.amplitudes())
    }

    fn value_of(&self, amplitudes: &Ket) -> Result<f64> {
        let rho0 = DensityMatrix::from_matrix_unchecked(self.basis.clone(), amplitudes * amplitudes.adjoint());
        let rho = steady_state_kernel(&self.projector, &rho0)?;
        Ok(concurrence_map(&rho)?.max())
    }
}

fn check_graph(g: &NetworkGraph) -> Result<()> {
    ensure_valid(g)?;
    if let TopologyClass::OddCycle { witness } = classify_topology(g) {
        return Err(Error::OddCycle { witness });
    }
    let r = resonance_check(g, DEFAULT_RESONANCE_TOL);
    if r.class != ResonanceClass::Degenerate {
        return Err(Error::Precondition(format!(
            "the search needs all detunings to vanish, got {:?}",
            r.per_vertex
        )));
    }
    Ok(())
}

fn check_support(n: usize, support: &[usize]) -> Result<Vec<usize>> {
    let sorted: Vec<usize> = support.iter().copied().sorted().dedup().collect();
    if sorted.len() != support.len() || sorted.iter().any(|&v| v >= n) {
        return Err(Error::InvalidArgument(format!(
            "support must hold distinct vertices below {n}, got {support:?}"
        )));
    }
    Ok(sorted)
}

/// Evaluation-counting wrapper. The incumbent is tracked here so it is
/// kept even when a restart stops on its budget.
struct Problem<'a> {
    ctx: &'a SectorContext,
    coords: &'a [usize],
    budget: usize,
    used: Cell<usize>,
    best: RefCell<Option<(f64, Vec<f64>)>>,
    failure: RefCell<Option<Error>>,
}

impl Problem<'_> {
    fn amplitudes(&self, x: &[f64]) -> Option<Ket> {
        let mut v = Ket::zeros(self.ctx.basis.dim());
        for (c, &i) in self.coords.iter().enumerate() {
            v[i] = C64::new(x[2 * c], x[2 * c + 1]);
        }
        let norm = v.norm();
        (norm > 1e-12).then(|| v / C64::new(norm, 0.0))
    }

    fn evaluate(&self, x: &[f64]) -> Result<f64> {
        self.used.set(self.used.get() + 1);
        let value = match self.amplitudes(x) {
            Some(v) => self.ctx.value_of(&v)?,
            None => 0.0,
        };
        let mut best = self.best.borrow_mut();
        if best.as_ref().is_none_or(|(b, _)| value > *b) {
            *best = Some((value, x.to_vec()));
        }
        Ok(value)
    }
}

impl CostFunction for Problem<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, x: &Vec<f64>) -> std::result::Result<f64, ArgminError> {
        if self.used.get() >= self.budget {
            return Err(ArgminError::msg("evaluation budget exhausted"));
        }
        match self.evaluate(x) {
            Ok(v) => Ok(-v),
            Err(e) => {
                *self.failure.borrow_mut() = Some(e);
                Err(ArgminError::msg("objective failed"))
            }
        }
    }
}

struct RestartOutcome {
    best: Option<(f64, Vec<f64>)>,
    evaluations: usize,
    converged: bool,
}

fn run_restart(ctx: &SectorContext, coords: &[usize], budget: usize, mut rng: ChaCha8Rng, tol: f64) -> Result<RestartOutcome> {
    let dim = 2 * coords.len();
    let start: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    let problem = Problem {
        ctx,
        coords,
        budget,
        used: Cell::new(0),
        best: RefCell::new(None),
        failure: RefCell::new(None),
    };
    let mut converged = false;
    if budget > dim + 1 {
        let mut simplex = vec![start.clone()];
        for i in 0..dim {
            let mut p = start.clone();
            p[i] += SIMPLEX_STEP;
            simplex.push(p);
        }
        let solver = NelderMead::new(simplex)
            .with_sd_tolerance(tol)
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        let problem_ref = &problem;
        let outcome = Executor::new(Wrapped(problem_ref), solver)
            .configure(|s| s.max_iters(u64::MAX))
            .run();
        if let Some(e) = problem.failure.borrow_mut().take() {
            return Err(e);
        }
        if let Ok(r) = outcome {
            converged = matches!(
                r.state().get_termination_status(),
                TerminationStatus::Terminated(TerminationReason::SolverConverged)
            );
        }
    } else {
        // too few evaluations for a simplex: sample instead
        for _ in 0..budget {
            let x: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
            problem.evaluate(&x)?;
        }
    }
    Ok(RestartOutcome { best: problem.best.into_inner(), evaluations: problem.used.get(), converged })
}

/// Lets the executor own a reference to the counting problem.
struct Wrapped<'a, 'b>(&'a Problem<'b>);

impl CostFunction for Wrapped<'_, '_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, x: &Vec<f64>) -> std::result::Result<f64, ArgminError> {
        self.0.cost(x)
    }
}

fn fix_global_phase(v: Ket) -> Ket {
    let Some(lead) = v.iter().copied().max_by(|a, b| a.norm().total_cmp(&b.norm())) else {
        return v;
    };
    if lead.norm() == 0.0 {
        return v;
    }
    let phase = lead.conj() / lead.norm();
    v * phase
}

/// Best stationary concurrence found from initial states on `support` with
/// at most `n_exc` excitations.
pub fn maximize_stationary_concurrence(
    g: &NetworkGraph,
    n_exc: usize,
    support: &[usize],
    budget: usize,
    opts: &OptimizerOptions,
) -> Result<ConjectureReport> {
    let ctx = SectorContext::new(g, n_exc, opts.kernel_tol)?;
    maximize_in(&ctx, support, budget, opts)
}

/// As [`maximize_stationary_concurrence`], reusing a prepared context.
pub fn maximize_in(ctx: &SectorContext, support: &[usize], budget: usize, opts: &OptimizerOptions) -> Result<ConjectureReport> {
    let n = ctx.graph.n();
    let n_exc = ctx.basis.max_excitations();
    let support = check_support(n, support)?;
    let m = support.len();
    if m < n_exc {
        return Err(Error::InvalidArgument(format!("need N <= m, got N={n_exc}, m={m}")));
    }
    if budget == 0 {
        return Err(Error::InvalidArgument("evaluation budget must be positive".into()));
    }
    if opts.restarts == 0 {
        return Err(Error::InvalidArgument("need at least one restart".into()));
    }
    let mask: u32 = support.iter().map(|&v| 1u32 << v).sum();
    let coords: Vec<usize> = (0..ctx.basis.dim()).filter(|&i| ctx.basis.state(i) & !mask == 0).collect();

    let shares: Vec<usize> = (0..opts.restarts)
        .map(|r| budget / opts.restarts + usize::from(r < budget % opts.restarts))
        .collect();
    let outcomes: Vec<Result<RestartOutcome>> = shares
        .par_iter()
        .enumerate()
        .map(|(r, &share)| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(r as u64);
            run_restart(ctx, &coords, share, rng, opts.simplex_tol)
        })
        .collect();

    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut evaluations = 0;
    let mut converged = false;
    let mut restarts = 0;
    for o in outcomes {
        let o = o?;
        evaluations += o.evaluations;
        converged |= o.converged;
        restarts += usize::from(o.evaluations > 0);
        if let Some((v, x)) = o.best {
            if best.as_ref().is_none_or(|(b, _)| v > *b) {
                best = Some((v, x));
            }
        }
    }
    let (raw_value, x) = best.ok_or_else(|| Error::InvalidArgument("no evaluations were made".into()))?;

    let problem = Problem {
        ctx,
        coords: &coords,
        budget: 0,
        used: Cell::new(0),
        best: RefCell::new(None),
        failure: RefCell::new(None),
    };
    let best_state = match problem.amplitudes(&x) {
        Some(v) => PureState::new(ctx.basis.clone(), fix_global_phase(v))?,
        None => PureState::vacuum(ctx.basis.clone()),
    };
    let best_value = raw_value.clamp(0.0, 1.0);
    let formula_value = max_concurrence_formula(n, m)?;
    Ok(ConjectureReport {
        n,
        max_excitations: n_exc,
        m,
        support,
        best_value,
        best_state,
        formula_value,
        conjecture_holds: best_value <= formula_value + opts.slack,
        converged,
        restarts,
        evaluations,
        search_space: SEARCH_SPACE_NOTE.to_string(),
    })
}

/// One report per `(N, m)` with `1 <= N <= min(m, N_max)`, `m <= n`. For
/// `n <= 5` every support of size `m` is searched and the best is kept;
/// larger graphs use the first `m` vertices. `budget` applies to each
/// support searched.
pub fn conjecture_sweep(
    g: &NetworkGraph,
    n_max: usize,
    budget: usize,
    opts: &OptimizerOptions,
) -> Result<Vec<ConjectureReport>> {
    let n = g.n();
    if n_max == 0 {
        return Err(Error::InvalidArgument("N_max must be at least 1".into()));
    }
    if budget == 0 {
        return Err(Error::InvalidArgument("evaluation budget must be positive".into()));
    }
    check_graph(g)?;
    let mut out = Vec::new();
    for n_exc in 1..=n_max.min(n) {
        let ctx = SectorContext::new(g, n_exc, opts.kernel_tol)?;
        for m in n_exc..=n {
            let supports: Vec<Vec<usize>> =
                if n <= 5 { (0..n).combinations(m).collect() } else { vec![(0..m).collect()] };
            let mut cell: Option<ConjectureReport> = None;
            let mut evaluations = 0;
            for s in &supports {
                let r = maximize_in(&ctx, s, budget, opts)?;
                evaluations += r.evaluations;
                if cell.as_ref().is_none_or(|c| r.best_value > c.best_value) {
                    cell = Some(r);
                }
            }
            let mut cell = cell.expect("at least one support");
            cell.evaluations = evaluations;
            out.push(cell);
        }
    }
    Ok(out)
}
