#![allow(dead_code)]

use std::sync::Arc;

use dissnet::hilbert::{build_basis, lowering_operator, DensityMatrix, ExcitationBasis, PureState};
use dissnet::topology::{make_named_topology, NamedTopology, NetworkGraph, OmegaMode};
use dissnet::{Ket, Operator, C64};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn basis(n: usize, cap: usize) -> Arc<ExcitationBasis> {
    Arc::new(build_basis(n, cap).unwrap())
}

pub fn named(kind: NamedTopology, n: usize) -> NetworkGraph {
    make_named_topology(kind, n, 1.0, 1.0, OmegaMode::Degenerate).unwrap()
}

pub fn chain(n: usize) -> NetworkGraph {
    named(NamedTopology::Chain, n)
}

pub fn ring(n: usize) -> NetworkGraph {
    named(NamedTopology::Ring, n)
}

/// Graph with unit couplings and rates and vanishing detunings.
pub fn degenerate(n: usize, pairs: &[(usize, usize)]) -> NetworkGraph {
    let edges: Vec<_> = pairs.iter().map(|&(a, b)| (a, b, 1.0, 1.0)).collect();
    let g = NetworkGraph::new(n, &edges, vec![0.0; n]).unwrap();
    let omega = (0..n).map(|k| g.incident_edges(k).map(|e| e.coupling).sum()).collect();
    g.with_omega(omega).unwrap()
}

/// Name, vertex count, edge list and whether the graph is bipartite.
pub type GraphClass = (&'static str, usize, Vec<(usize, usize)>, bool);

/// One representative per isomorphism class of connected graphs on 2 to 4
/// vertices.
pub fn connected_graphs_up_to_4() -> Vec<GraphClass> {
    vec![
        ("P2", 2, vec![(0, 1)], true),
        ("P3", 3, vec![(0, 1), (1, 2)], true),
        ("K3", 3, vec![(0, 1), (1, 2), (0, 2)], false),
        ("P4", 4, vec![(0, 1), (1, 2), (2, 3)], true),
        ("S4", 4, vec![(0, 1), (0, 2), (0, 3)], true),
        ("C4", 4, vec![(0, 1), (1, 2), (2, 3), (0, 3)], true),
        ("paw", 4, vec![(0, 1), (1, 2), (0, 2), (2, 3)], false),
        ("diamond", 4, vec![(0, 1), (1, 2), (2, 3), (0, 3), (0, 2)], false),
        ("K4", 4, vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)], false),
    ]
}

fn gauss(rng: &mut impl Rng) -> C64 {
    C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
}

/// Random pure state supported on weights <= `max_weight`.
pub fn random_pure(b: &Arc<ExcitationBasis>, max_weight: usize, rng: &mut impl Rng) -> PureState {
    let v = Ket::from_fn(b.dim(), |i, _| if b.weight(i) <= max_weight { gauss(rng) } else { c(0.0) });
    PureState::normalized(b.clone(), v).unwrap()
}

pub fn random_density(b: &Arc<ExcitationBasis>, max_weight: usize, rng: &mut impl Rng) -> DensityMatrix {
    let mut m = DMatrix::<C64>::zeros(b.dim(), b.dim());
    for _ in 0..3 {
        let w = rng.random::<f64>();
        m += random_pure(b, max_weight, rng).to_density().into_matrix() * c(w);
    }
    let tr = m.trace();
    DensityMatrix::new(b.clone(), m / tr).unwrap()
}

pub fn random_matrix(d: usize, rng: &mut impl Rng) -> Operator {
    DMatrix::from_fn(d, d, |_, _| gauss(rng))
}

/// Hamiltonian and jump operators assembled from single-site lowering
/// operators, independently of the library's generator.
pub fn reference_model(g: &NetworkGraph, b: &ExcitationBasis) -> (Operator, Vec<(f64, Operator)>) {
    let s: Vec<Operator> = (0..g.n()).map(|k| lowering_operator(b, k).unwrap()).collect();
    let d = b.dim();
    let mut h = DMatrix::<C64>::zeros(d, d);
    for (sk, w) in s.iter().zip(g.omega()) {
        h += sk.adjoint() * sk * c(*w);
    }
    let mut jumps = Vec::new();
    for e in g.edges() {
        let hop = s[e.a].adjoint() * &s[e.b];
        h += (&hop + hop.adjoint()) * c(e.coupling);
        jumps.push((e.gamma, &s[e.a] + &s[e.b]));
    }
    (h, jumps)
}

/// `L(ρ) = −i[H,ρ] + Σ γ (2LρL† − L†Lρ − ρL†L)`.
pub fn reference_generator(h: &Operator, jumps: &[(f64, Operator)], rho: &Operator) -> Operator {
    let i = C64::new(0.0, 1.0);
    let mut out = (h * rho - rho * h) * (-i);
    for (gamma, l) in jumps {
        let ld = l.adjoint();
        let ldl = &ld * l;
        out += (l * rho * &ld * c(2.0) - &ldl * rho - rho * &ldl) * c(*gamma);
    }
    out
}

/// Adjoint generator acting on observables; jumps carry `L†L` precomputed.
fn reference_adjoint(h: &Operator, jumps: &[(f64, Operator, Operator, Operator)], a: &Operator) -> Operator {
    let i = C64::new(0.0, 1.0);
    let mut out = (h * a - a * h) * i;
    for (gamma, l, ld, ldl) in jumps {
        out += (ld * a * l * c(2.0) - ldl * a - a * ldl) * c(*gamma);
    }
    out
}

/// Integrates `dA/dt = L†(A)` with RK4 up to `t`.
pub fn heisenberg_evolve(h: &Operator, jumps: &[(f64, Operator)], a0: &Operator, t: f64, dt: f64) -> Operator {
    let jumps: Vec<_> = jumps
        .iter()
        .map(|(g, l)| {
            let ld = l.adjoint();
            let ldl = &ld * l;
            (*g, l.clone(), ld, ldl)
        })
        .collect();
    let steps = (t / dt).ceil() as usize;
    let dt = t / steps as f64;
    let mut a = a0.clone();
    for _ in 0..steps {
        let k1 = reference_adjoint(h, &jumps, &a);
        let k2 = reference_adjoint(h, &jumps, &(&a + &k1 * c(dt / 2.0)));
        let k3 = reference_adjoint(h, &jumps, &(&a + &k2 * c(dt / 2.0)));
        let k4 = reference_adjoint(h, &jumps, &(&a + &k3 * c(dt)));
        a += (k1 + (k2 + k3) * c(2.0) + k4) * c(dt / 6.0);
    }
    a
}
