//! Network graphs, their cycle structure and the resonance condition.
//!
//! A network is an undirected simple graph. Each edge carries an XY
//! coupling `J` and a shared-bath decay rate `gamma`; each vertex carries
//! an onsite energy `omega`.

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default absolute tolerance for the resonance equality tests.
pub const DEFAULT_RESONANCE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    /// Smaller endpoint (0-based).
    pub a: usize,
    /// Larger endpoint (0-based).
    pub b: usize,
    pub coupling: f64,
    pub gamma: f64,
}

impl Edge {
    pub fn other(&self, v: usize) -> usize {
        if v == self.a {
            self.b
        } else {
            self.a
        }
    }
}

/// Undirected simple graph with couplings, decay rates and onsite energies.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkGraph {
    n: usize,
    edges: Vec<Edge>,
    omega: Vec<f64>,
    adjacency: Vec<Vec<usize>>, // vertex -> incident edge ids
}

impl NetworkGraph {
    /// Builds a graph from `(k, l, J, gamma)` tuples with 0-based endpoints.
    ///
    /// Structural defects (self-loops, repeated edges, out-of-range vertices,
    /// wrong `omega` length) are rejected here. Semantic requirements
    /// (connectivity, positive rates) are reported by [`validate_graph`].
    pub fn new(n: usize, edges: &[(usize, usize, f64, f64)], omega: Vec<f64>) -> Result<Self> {
        if omega.len() != n {
            return Err(Error::InvalidArgument(format!(
                "omega has {} entries for {} vertices",
                omega.len(),
                n
            )));
        }
        let mut adjacency = vec![Vec::new(); n];
        let mut out = Vec::with_capacity(edges.len());
        for &(k, l, coupling, gamma) in edges {
            if k >= n || l >= n {
                return Err(Error::InvalidArgument(format!(
                    "edge {{{}, {}}} references a vertex outside 1..={}",
                    k + 1,
                    l + 1,
                    n
                )));
            }
            if k == l {
                return Err(Error::InvalidArgument(format!("self-loop at vertex {}", k + 1)));
            }
            let (a, b) = if k < l { (k, l) } else { (l, k) };
            if out.iter().any(|e: &Edge| e.a == a && e.b == b) {
                return Err(Error::InvalidArgument(format!(
                    "repeated edge {{{}, {}}}",
                    a + 1,
                    b + 1
                )));
            }
            adjacency[a].push(out.len());
            adjacency[b].push(out.len());
            out.push(Edge { a, b, coupling, gamma });
        }
        Ok(Self { n, edges: out, omega, adjacency })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.adjacency[v].iter().map(move |&e| self.edges[e].other(v))
    }

    pub fn incident_edges(&self, v: usize) -> impl Iterator<Item = &Edge> + '_ {
        self.adjacency[v].iter().map(move |&e| &self.edges[e])
    }

    pub fn has_edge(&self, k: usize, l: usize) -> bool {
        k < self.n && self.neighbors(k).any(|x| x == l)
    }

    /// Returns the same graph with onsite energies replaced.
    pub fn with_omega(&self, omega: Vec<f64>) -> Result<Self> {
        let edges: Vec<_> = self.edges.iter().map(|e| (e.a, e.b, e.coupling, e.gamma)).collect();
        Self::new(self.n, &edges, omega)
    }

    /// Relabels vertices: vertex `v` becomes `perm[v]`.
    pub fn relabeled(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(Error::InvalidArgument("permutation length differs from n".into()));
        }
        let mut omega = vec![0.0; self.n];
        for (v, &p) in perm.iter().enumerate() {
            omega[p] = self.omega[v];
        }
        let edges: Vec<_> = self
            .edges
            .iter()
            .map(|e| (perm[e.a], perm[e.b], e.coupling, e.gamma))
            .collect();
        Self::new(self.n, &edges, omega)
    }

    fn components(&self) -> usize {
        let mut seen = vec![false; self.n];
        let mut count = 0;
        for s in 0..self.n {
            if seen[s] {
                continue;
            }
            count += 1;
            seen[s] = true;
            let mut stack = vec![s];
            while let Some(v) = stack.pop() {
                for w in self.neighbors(v) {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
        }
        count
    }
}

/// A violated standing assumption on a network.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Violation {
    TooFewVertices { n: usize },
    Disconnected { components: usize },
    NonPositiveDecay { edge: (usize, usize), gamma: f64 },
    NonFinite { what: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::TooFewVertices { n } => write!(f, "too few vertices ({n} < 2)"),
            Violation::Disconnected { components } => {
                write!(f, "disconnected ({components} components)")
            }
            Violation::NonPositiveDecay { edge, gamma } => write!(
                f,
                "nonpositive decay rate {gamma} on edge {{{}, {}}}",
                edge.0 + 1,
                edge.1 + 1
            ),
            Violation::NonFinite { what } => write!(f, "non-finite value in {what}"),
        }
    }
}

/// Checks connectivity, `n >= 2` and positive finite rates. Violations are
/// returned as data; an empty list means the graph is valid.
pub fn validate_graph(g: &NetworkGraph) -> Vec<Violation> {
    let mut out = Vec::new();
    if g.n < 2 {
        out.push(Violation::TooFewVertices { n: g.n });
    }
    if g.n > 0 {
        let c = g.components();
        if c > 1 {
            out.push(Violation::Disconnected { components: c });
        }
    }
    for e in &g.edges {
        if !e.gamma.is_finite() || !e.coupling.is_finite() {
            out.push(Violation::NonFinite { what: format!("edge {{{}, {}}}", e.a + 1, e.b + 1) });
        } else if e.gamma <= 0.0 {
            out.push(Violation::NonPositiveDecay { edge: (e.a, e.b), gamma: e.gamma });
        }
    }
    if g.omega.iter().any(|w| !w.is_finite()) {
        out.push(Violation::NonFinite { what: "omega".into() });
    }
    out
}

/// `validate_graph` as a `Result`.
pub fn ensure_valid(g: &NetworkGraph) -> Result<()> {
    let v = validate_graph(g);
    if v.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidGraph(v))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "class", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TopologyClass {
    Bipartite,
    /// One odd cycle, as a closed vertex sequence without the repeated start.
    OddCycle { witness: Vec<usize> },
}

impl TopologyClass {
    pub fn is_bipartite(&self) -> bool {
        matches!(self, TopologyClass::Bipartite)
    }
}

/// Two-colors the graph breadth-first. Returns the coloring (distance
/// parity from each component root) or an odd cycle witness.
fn two_color(g: &NetworkGraph) -> std::result::Result<Vec<i8>, Vec<usize>> {
    let mut color = vec![0i8; g.n];
    let mut parent = vec![usize::MAX; g.n];
    let mut depth = vec![0usize; g.n];
    for root in 0..g.n {
        if color[root] != 0 {
            continue;
        }
        color[root] = 1;
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for w in g.neighbors(v) {
                if color[w] == 0 {
                    color[w] = -color[v];
                    parent[w] = v;
                    depth[w] = depth[v] + 1;
                    queue.push_back(w);
                } else if color[w] == color[v] {
                    return Err(odd_cycle_through(v, w, &parent, &depth));
                }
            }
        }
    }
    Ok(color)
}

/// Closes the BFS-tree paths from `u` and `v` (same color, adjacent) at their
/// lowest common ancestor.
fn odd_cycle_through(u: usize, v: usize, parent: &[usize], depth: &[usize]) -> Vec<usize> {
    let (mut x, mut y) = (u, v);
    let mut left = vec![x];
    let mut right = vec![y];
    while depth[x] > depth[y] {
        x = parent[x];
        left.push(x);
    }
    while depth[y] > depth[x] {
        y = parent[y];
        right.push(y);
    }
    while x != y {
        x = parent[x];
        y = parent[y];
        left.push(x);
        right.push(y);
    }
    right.pop(); // common ancestor already ends `left`
    left.extend(right.into_iter().rev());
    left
}

pub fn classify_topology(g: &NetworkGraph) -> TopologyClass {
    match two_color(g) {
        Ok(_) => TopologyClass::Bipartite,
        Err(witness) => TopologyClass::OddCycle { witness },
    }
}

/// Signs `(-1)^{n_k}` with `n_k` the distance from vertex 0.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParityLabeling {
    pub signs: Vec<i8>,
}

impl ParityLabeling {
    pub fn sign(&self, v: usize) -> f64 {
        f64::from(self.signs[v])
    }
}

/// Breadth-first parity labeling. Fails on graphs with an odd cycle.
pub fn parity_signs(g: &NetworkGraph) -> Result<ParityLabeling> {
    let signs = two_color(g).map_err(|witness| Error::OddCycle { witness })?;
    // every edge must join opposite signs, otherwise the alternating
    // amplitude pattern would not be annihilated by σ_k + σ_l
    for e in &g.edges {
        if signs[e.a] != -signs[e.b] {
            return Err(Error::Precondition(format!(
                "parity labeling inconsistent on edge {{{}, {}}}",
                e.a + 1,
                e.b + 1
            )));
        }
    }
    Ok(ParityLabeling { signs })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ResonanceClass {
    /// All detunings vanish: the steady subspace is two-dimensional.
    Degenerate,
    /// All detunings equal and nonzero.
    ResonantNonzero,
    OffResonant,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResonanceReport {
    /// `d_k = omega_k - sum_l J_{k,l}` over neighbors `l`.
    pub per_vertex: Vec<f64>,
    pub class: ResonanceClass,
    pub tolerance: f64,
}

impl ResonanceReport {
    pub fn is_resonant(&self) -> bool {
        self.class != ResonanceClass::OffResonant
    }

    /// Common detuning when resonant.
    pub fn detuning(&self) -> Option<f64> {
        self.is_resonant().then(|| self.per_vertex[0])
    }
}

pub fn resonance_check(g: &NetworkGraph, tolerance: f64) -> ResonanceReport {
    let per_vertex: Vec<f64> = (0..g.n)
        .map(|k| g.omega[k] - g.incident_edges(k).map(|e| e.coupling).sum::<f64>())
        .collect();
    let max_abs = per_vertex.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    let first = per_vertex.first().copied().unwrap_or(0.0);
    let spread = per_vertex.iter().fold(0.0f64, |m, d| m.max((d - first).abs()));
    let class = if max_abs <= tolerance {
        ResonanceClass::Degenerate
    } else if spread <= tolerance {
        ResonanceClass::ResonantNonzero
    } else {
        ResonanceClass::OffResonant
    };
    ResonanceReport { per_vertex, class, tolerance }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NamedTopology {
    Chain,
    Ring,
    Star,
    Complete,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum OmegaMode {
    /// `omega_k = sum of incident couplings`, so every detuning vanishes.
    Degenerate,
    Uniform { value: f64 },
}

/// Builds a named graph with uniform `J` and `gamma`. Star uses vertex 0 as hub.
pub fn make_named_topology(
    kind: NamedTopology,
    n: usize,
    coupling: f64,
    gamma: f64,
    omega_mode: OmegaMode,
) -> Result<NetworkGraph> {
    let min_n = if kind == NamedTopology::Ring { 3 } else { 2 };
    if n < min_n {
        return Err(Error::InvalidArgument(format!("{kind:?} needs at least {min_n} vertices, got {n}")));
    }
    let pairs: Vec<(usize, usize)> = match kind {
        NamedTopology::Chain => (0..n - 1).map(|k| (k, k + 1)).collect(),
        NamedTopology::Ring => (0..n).map(|k| (k, (k + 1) % n)).collect(),
        NamedTopology::Star => (1..n).map(|k| (0, k)).collect(),
        NamedTopology::Complete => (0..n).flat_map(|k| (k + 1..n).map(move |l| (k, l))).collect(),
    };
    let edges: Vec<_> = pairs.iter().map(|&(k, l)| (k, l, coupling, gamma)).collect();
    let g = NetworkGraph::new(n, &edges, vec![0.0; n])?;
    let omega = degenerate_or_uniform(&g, omega_mode);
    g.with_omega(omega)
}

/// Onsite energies for `mode` on the edge structure of `g`.
pub fn degenerate_or_uniform(g: &NetworkGraph, mode: OmegaMode) -> Vec<f64> {
    match mode {
        OmegaMode::Degenerate => (0..g.n)
            .map(|k| g.incident_edges(k).map(|e| e.coupling).sum())
            .collect(),
        OmegaMode::Uniform { value } => vec![value; g.n],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(n: usize) -> NetworkGraph {
        make_named_topology(NamedTopology::Chain, n, 1.0, 1.0, OmegaMode::Degenerate).unwrap()
    }

    fn from_pairs(n: usize, pairs: &[(usize, usize)]) -> NetworkGraph {
        let e: Vec<_> = pairs.iter().map(|&(a, b)| (a, b, 1.0, 1.0)).collect();
        NetworkGraph::new(n, &e, vec![0.0; n]).unwrap()
    }

    #[test]
    fn validation() {
        assert!(validate_graph(&chain(3)).is_empty());

        let g = from_pairs(4, &[(0, 1), (2, 3)]);
        let v = validate_graph(&g);
        assert_eq!(v.len(), 1);
        assert!(v[0].to_string().starts_with("disconnected"));

        let g = NetworkGraph::new(2, &[(0, 1, 1.0, -0.5)], vec![0.0; 2]).unwrap();
        let v = validate_graph(&g);
        assert!(v[0].to_string().starts_with("nonpositive decay rate"));

        let g = NetworkGraph::new(1, &[], vec![0.0]).unwrap();
        assert_eq!(validate_graph(&g), vec![Violation::TooFewVertices { n: 1 }]);
    }

    #[test]
    fn structural_errors() {
        assert!(NetworkGraph::new(2, &[(0, 0, 1.0, 1.0)], vec![0.0; 2]).is_err());
        assert!(NetworkGraph::new(2, &[(0, 1, 1.0, 1.0), (1, 0, 1.0, 1.0)], vec![0.0; 2]).is_err());
        assert!(NetworkGraph::new(2, &[(0, 2, 1.0, 1.0)], vec![0.0; 2]).is_err());
        assert!(NetworkGraph::new(2, &[(0, 1, 1.0, 1.0)], vec![0.0; 3]).is_err());
    }

    #[test]
    fn classification() {
        let ring4 = make_named_topology(NamedTopology::Ring, 4, 1.0, 1.0, OmegaMode::Degenerate).unwrap();
        assert_eq!(classify_topology(&ring4), TopologyClass::Bipartite);
        for n in 2..8 {
            assert!(classify_topology(&chain(n)).is_bipartite());
        }
        let tri = make_named_topology(NamedTopology::Complete, 3, 1.0, 1.0, OmegaMode::Degenerate).unwrap();
        match classify_topology(&tri) {
            TopologyClass::OddCycle { witness } => assert_eq!(witness.len(), 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn parity() {
        assert_eq!(parity_signs(&chain(3)).unwrap().signs, vec![1, -1, 1]);
        let ring4 = make_named_topology(NamedTopology::Ring, 4, 1.0, 1.0, OmegaMode::Degenerate).unwrap();
        assert_eq!(parity_signs(&ring4).unwrap().signs, vec![1, -1, 1, -1]);
        let tri = make_named_topology(NamedTopology::Ring, 3, 1.0, 1.0, OmegaMode::Degenerate).unwrap();
        assert!(matches!(parity_signs(&tri), Err(Error::OddCycle { .. })));
    }

    #[test]
    fn resonance() {
        let base = chain(3);
        let r = resonance_check(&base.with_omega(vec![1.0, 2.0, 1.0]).unwrap(), DEFAULT_RESONANCE_TOL);
        assert_eq!(r.class, ResonanceClass::Degenerate);
        let r = resonance_check(&base.with_omega(vec![2.0, 3.0, 2.0]).unwrap(), DEFAULT_RESONANCE_TOL);
        assert_eq!(r.class, ResonanceClass::ResonantNonzero);
        assert_eq!(r.per_vertex, vec![1.0, 1.0, 1.0]);
        let r = resonance_check(&base.with_omega(vec![1.0, 1.0, 1.0]).unwrap(), DEFAULT_RESONANCE_TOL);
        assert_eq!(r.class, ResonanceClass::OffResonant);
        assert_eq!(r.per_vertex, vec![0.0, -1.0, 0.0]);
    }

    #[test]
    fn named_factories() {
        assert_eq!(chain(4).omega(), &[1.0, 2.0, 2.0, 1.0]);
        let ring = make_named_topology(NamedTopology::Ring, 4, 1.0, 1.0, OmegaMode::Degenerate).unwrap();
        assert_eq!(ring.omega(), &[2.0; 4]);
        let star = make_named_topology(NamedTopology::Star, 4, 0.5, 1.0, OmegaMode::Degenerate).unwrap();
        assert_eq!(star.omega(), &[1.5, 0.5, 0.5, 0.5]);
        assert!(make_named_topology(NamedTopology::Ring, 2, 1.0, 1.0, OmegaMode::Degenerate).is_err());
        assert!(make_named_topology(NamedTopology::Chain, 1, 1.0, 1.0, OmegaMode::Degenerate).is_err());
        let u = make_named_topology(NamedTopology::Chain, 3, 1.0, 1.0, OmegaMode::Uniform { value: 0.3 }).unwrap();
        assert_eq!(u.omega(), &[0.3; 3]);
    }
}
