//! JSON run configurations. Vertex labels are 1-based throughout.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::darkstate::{aleph_state, optimal_initial_state};
use crate::dynamics::SteadyMethod;
use crate::error::{Error, Result};
use crate::hilbert::{build_basis, ExcitationBasis, PureState};
use crate::optimizer::{DEFAULT_RESTARTS, DEFAULT_SLACK};
use crate::polariton::CavityChainParams;
use crate::topology::{degenerate_or_uniform, ensure_valid, make_named_topology, NamedTopology, NetworkGraph, OmegaMode};
use crate::{Ket, C64};

pub const DEFAULT_TOLERANCE: f64 = 1e-5;
pub const DEFAULT_BUDGET: usize = 5000;

/// A number shared by every edge, or one per edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerEdge {
    Uniform(f64),
    List(Vec<f64>),
}

impl PerEdge {
    fn expand(&self, what: &str, count: usize) -> Result<Vec<f64>> {
        match self {
            PerEdge::Uniform(x) => Ok(vec![*x; count]),
            PerEdge::List(v) if v.len() == count => Ok(v.clone()),
            PerEdge::List(v) => Err(Error::Config(format!("{what} lists {} values for {count} edges", v.len()))),
        }
    }
}

fn one() -> PerEdge {
    PerEdge::Uniform(1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OmegaSpec {
    List(Vec<f64>),
    Mode(OmegaMode),
}

/// Either `kind` (a named topology) or `edges` must be given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<NamedTopology>,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<[usize; 2]>>,
    #[serde(rename = "J", default = "one")]
    pub coupling: PerEdge,
    #[serde(default = "one")]
    pub gamma: PerEdge,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<OmegaSpec>,
}

impl GraphSpec {
    /// Builds and fully validates the graph.
    pub fn build(&self) -> Result<NetworkGraph> {
        let mode = match &self.omega {
            None => Some(OmegaMode::Degenerate),
            Some(OmegaSpec::Mode(m)) => Some(*m),
            Some(OmegaSpec::List(_)) => None,
        };
        let g = match (&self.kind, &self.edges) {
            (Some(kind), None) => {
                let (PerEdge::Uniform(j), PerEdge::Uniform(gamma)) = (&self.coupling, &self.gamma) else {
                    return Err(Error::Config("named topologies take scalar J and gamma".into()));
                };
                make_named_topology(*kind, self.n, *j, *gamma, OmegaMode::Degenerate)?
            }
            (None, Some(pairs)) => {
                let j = self.coupling.expand("J", pairs.len())?;
                let gamma = self.gamma.expand("gamma", pairs.len())?;
                let mut edges = Vec::with_capacity(pairs.len());
                for (i, &[a, b]) in pairs.iter().enumerate() {
                    if a == 0 || b == 0 {
                        return Err(Error::Config(format!("edge {} uses vertex 0; labels start at 1", i + 1)));
                    }
                    edges.push((a - 1, b - 1, j[i], gamma[i]));
                }
                NetworkGraph::new(self.n, &edges, vec![0.0; self.n])?
            }
            _ => return Err(Error::Config("graph needs exactly one of \"kind\" or \"edges\"".into())),
        };
        let g = match (&self.omega, mode) {
            (Some(OmegaSpec::List(w)), _) => g.with_omega(w.clone())?,
            (_, Some(m)) => {
                let w = degenerate_or_uniform(&g, m);
                g.with_omega(w)?
            }
            _ => unreachable!("omega is either a list or a mode"),
        };
        ensure_valid(&g)?;
        Ok(g)
    }

    /// Explicit spec reproducing `g`.
    pub fn from_graph(g: &NetworkGraph) -> Self {
        Self {
            kind: None,
            n: g.n(),
            edges: Some(g.edges().iter().map(|e| [e.a + 1, e.b + 1]).collect()),
            coupling: PerEdge::List(g.edges().iter().map(|e| e.coupling).collect()),
            gamma: PerEdge::List(g.edges().iter().map(|e| e.gamma).collect()),
            omega: Some(OmegaSpec::List(g.omega().to_vec())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisSpec {
    pub n: usize,
    #[serde(rename = "N_max")]
    pub max_excitations: usize,
}

/// Serialized pure state; amplitudes are `[re, im]` in basis order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSpec {
    pub basis: BasisSpec,
    pub amplitudes: Vec<[f64; 2]>,
}

impl StateSpec {
    pub fn from_state(psi: &PureState) -> Self {
        let b = psi.basis();
        Self {
            basis: BasisSpec { n: b.n(), max_excitations: b.max_excitations() },
            amplitudes: psi.amplitudes().iter().map(|z| [z.re, z.im]).collect(),
        }
    }

    pub fn to_state(&self) -> Result<PureState> {
        let basis = Arc::new(build_basis(self.basis.n, self.basis.max_excitations)?);
        if self.amplitudes.len() != basis.dim() {
            return Err(Error::Config(format!(
                "basis (n={}, N_max={}) has dimension {}, got {} amplitudes",
                self.basis.n,
                self.basis.max_excitations,
                basis.dim(),
                self.amplitudes.len()
            )));
        }
        let v = Ket::from_iterator(basis.dim(), self.amplitudes.iter().map(|[re, im]| C64::new(*re, *im)));
        PureState::normalized(basis, v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum InitialStateSpec {
    Vacuum,
    Aleph,
    Single { site: usize },
    Optm { support: Vec<usize> },
    Custom(StateSpec),
}

impl InitialStateSpec {
    /// Smallest excitation cap that holds the state.
    fn min_excitations(&self) -> usize {
        match self {
            InitialStateSpec::Custom(s) => s.basis.max_excitations.max(1),
            _ => 1,
        }
    }

    pub fn build(&self, g: &NetworkGraph, basis: &Arc<ExcitationBasis>) -> Result<PureState> {
        let site = |v: usize| -> Result<usize> {
            if v == 0 || v > g.n() {
                return Err(Error::Config(format!("vertex {v} outside 1..={}", g.n())));
            }
            Ok(v - 1)
        };
        match self {
            InitialStateSpec::Vacuum => Ok(PureState::vacuum(basis.clone())),
            InitialStateSpec::Aleph => aleph_state(g, basis),
            InitialStateSpec::Single { site: v } => PureState::single(basis.clone(), site(*v)?),
            InitialStateSpec::Optm { support } => {
                let s: Vec<usize> = support.iter().map(|&v| site(v)).collect::<Result<_>>()?;
                optimal_initial_state(g, basis, &s)
            }
            InitialStateSpec::Custom(spec) => {
                if spec.basis.n != g.n() {
                    return Err(Error::Config(format!(
                        "custom state has {} qubits, graph has {}",
                        spec.basis.n,
                        g.n()
                    )));
                }
                spec.to_state()?.embed(basis)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionSpec {
    pub t_final: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    /// Trajectory rows are written every this many steps.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub record_every: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectory_csv: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report_json: Option<String>,
}

fn default_budget() -> usize {
    DEFAULT_BUDGET
}

fn default_restarts() -> usize {
    DEFAULT_RESTARTS
}

fn default_slack() -> f64 {
    DEFAULT_SLACK
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConjectureSpec {
    /// Largest excitation number searched; defaults to `n`.
    #[serde(rename = "N_max", default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    #[serde(default = "default_budget")]
    pub budget: usize,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default = "default_slack")]
    pub slack: f64,
}

impl Default for ConjectureSpec {
    fn default() -> Self {
        Self { n_max: None, budget: DEFAULT_BUDGET, restarts: DEFAULT_RESTARTS, slack: DEFAULT_SLACK }
    }
}

fn default_tolerance() -> f64 {
    DEFAULT_TOLERANCE
}

fn default_initial() -> InitialStateSpec {
    InitialStateSpec::Aleph
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub graph: GraphSpec,
    #[serde(default = "default_initial")]
    pub initial_state: InitialStateSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evolution: Option<EvolutionSpec>,
    #[serde(default)]
    pub steady_method: SteadyMethod,
    #[serde(default)]
    pub outputs: OutputsSpec,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conjecture: Option<ConjectureSpec>,
    /// Excitation cap of the simulation basis; defaults to the smallest
    /// cap holding the initial state.
    #[serde(rename = "N_max", default, skip_serializing_if = "Option::is_none")]
    pub max_excitations: Option<usize>,
}

/// Graph, basis and initial state built from a [`RunConfig`].
#[derive(Debug, Clone)]
pub struct Prepared {
    pub graph: NetworkGraph,
    pub basis: Arc<ExcitationBasis>,
    pub initial: PureState,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Builds everything and checks the scalar fields; nothing here writes.
    pub fn prepare(&self) -> Result<Prepared> {
        if let Some(ev) = &self.evolution {
            if !(ev.t_final > 0.0) || !ev.t_final.is_finite() {
                return Err(Error::Config(format!("t_final must be positive, got {}", ev.t_final)));
            }
            if let Some(dt) = ev.dt {
                if !(dt > 0.0) || !dt.is_finite() {
                    return Err(Error::Config(format!("dt must be positive, got {dt}")));
                }
            }
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Config(format!("tolerance must be positive, got {}", self.tolerance)));
        }
        let graph = self.graph.build()?;
        let cap = self.max_excitations.unwrap_or_else(|| self.initial_state.min_excitations());
        if cap == 0 || cap > graph.n() {
            return Err(Error::Config(format!("N_max must lie in 1..={}, got {cap}", graph.n())));
        }
        let basis = Arc::new(build_basis(graph.n(), cap)?);
        let initial = self.initial_state.build(&graph, &basis)?;
        Ok(Prepared { graph, basis, initial })
    }
}

/// Input of the cavity-array mapping: the physical parameters plus the
/// per-link decay rates of the resulting chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolaritonConfig {
    #[serde(flatten)]
    pub params: CavityChainParams,
    /// Per-link decay rates; every link gets 1 when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<PerEdge>,
}

impl PolaritonConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn gamma(&self) -> Result<Vec<f64>> {
        let links = self.params.n.saturating_sub(1);
        self.gamma.clone().unwrap_or(PerEdge::Uniform(1.0)).expand("gamma", links)
    }
}
