//! Analytic dark-state constructions and the closed-form entanglement
//! predictions that follow from them.
//!
//! On a bipartite network the alternating single-excitation state
//! `|ℵ⟩ = n^{-1/2} Σ_k (−1)^{n_k} |k⟩` is annihilated by every jump
//! operator. When all detunings `ω_k − Σ_l J_{k,l}` agree it is also an
//! eigenvector of `H`, hence stationary. For initial states with at most
//! one excitation, `p = ⟨ℵ|ρ|ℵ⟩` is conserved, and every pair of qubits
//! ends up with concurrence `2p/n`.

use std::sync::Arc;

use nalgebra::Matrix4;
use serde::Serialize;

use crate::dynamics::build_hamiltonian;
use crate::error::{Error, Result};
use crate::hilbert::{jump_operator, DensityMatrix, ExcitationBasis, PairState, PureState};
use crate::topology::{
    classify_topology, ensure_valid, parity_signs, resonance_check, NetworkGraph, ResonanceClass, TopologyClass,
    DEFAULT_RESONANCE_TOL,
};
use crate::{Ket, C64};

/// Largest tolerated matrix entry outside the ≤1-excitation sector when a
/// prediction requires single-excitation support.
pub const SUPPORT_TOL: f64 = 1e-12;

fn require_bipartite(g: &NetworkGraph) -> Result<()> {
    match classify_topology(g) {
        TopologyClass::Bipartite => Ok(()),
        TopologyClass::OddCycle { witness } => Err(Error::OddCycle { witness }),
    }
}

pub fn aleph_state(g: &NetworkGraph, basis: &Arc<ExcitationBasis>) -> Result<PureState> {
    if basis.n() != g.n() {
        return Err(Error::InvalidArgument(format!("basis has {} qubits, graph has {}", basis.n(), g.n())));
    }
    if basis.max_excitations() < 1 {
        return Err(Error::InvalidArgument("|ℵ⟩ needs a basis with at least one excitation".into()));
    }
    let signs = parity_signs(g)?;
    let amp = 1.0 / (g.n() as f64).sqrt();
    let mut v = Ket::zeros(basis.dim());
    for k in 0..g.n() {
        v[basis.single(k).expect("N_max >= 1")] = C64::new(signs.sign(k) * amp, 0.0);
    }
    PureState::new(basis.clone(), v)
}

#[derive(Debug, Clone, Serialize)]
pub struct DarkConditionsReport {
    /// `‖L_e|ψ⟩‖` per edge (0-based endpoints).
    pub cond1_residuals: Vec<((usize, usize), f64)>,
    /// `‖K|ψ⟩ − λ|ψ⟩‖` with `K = iH + Σ_e γ_e L_e†L_e`.
    pub cond2_residual: f64,
    /// `λ = ⟨ψ|K|ψ⟩`.
    pub lambda: C64,
    /// `|Re λ − Σ_e γ_e |λ_e|²|`; the jump eigenvalues `λ_e` vanish.
    pub cond3_gap: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Evaluates the three pure steady-state conditions for `psi`.
pub fn verify_dark_conditions(psi: &PureState, g: &NetworkGraph, tolerance: f64) -> Result<DarkConditionsReport> {
    let basis = psi.basis();
    let h = build_hamiltonian(g, basis)?;
    let v = psi.amplitudes();
    let i = C64::new(0.0, 1.0);
    let mut k_op = h * i;
    let mut cond1_residuals = Vec::with_capacity(g.edges().len());
    for e in g.edges() {
        let l = jump_operator(basis, e.a, e.b)?;
        cond1_residuals.push(((e.a, e.b), (&l * v).norm()));
        k_op += (l.adjoint() * &l) * C64::new(e.gamma, 0.0);
    }
    let kv = &k_op * v;
    let lambda = v.dotc(&kv);
    let cond2_residual = (&kv - v * lambda).norm();
    let cond3_gap = lambda.re.abs();
    let passed = cond1_residuals.iter().all(|(_, r)| *r <= tolerance)
        && cond2_residual <= tolerance
        && cond3_gap <= tolerance;
    Ok(DarkConditionsReport { cond1_residuals, cond2_residual, lambda, cond3_gap, tolerance, passed })
}

/// Stationary weight of `|ℵ⟩`, `p = ⟨ℵ|ρ(0)|ℵ⟩`.
///
/// Refuses states with weight above one excitation, non-bipartite graphs
/// and off-resonant onsite energies, since `p` is only conserved there.
pub fn predict_p(rho0: &DensityMatrix, g: &NetworkGraph) -> Result<f64> {
    ensure_valid(g)?;
    let leak = rho0.support_leak_above(1);
    if leak > SUPPORT_TOL {
        return Err(Error::Precondition(format!(
            "initial state has support above one excitation (entry {leak:e}); p is not conserved"
        )));
    }
    require_bipartite(g)?;
    let res = resonance_check(g, DEFAULT_RESONANCE_TOL);
    if res.class == ResonanceClass::OffResonant {
        return Err(Error::Precondition(format!(
            "onsite energies are off resonance (detunings {:?}); |ℵ⟩ is not an eigenstate of H",
            res.per_vertex
        )));
    }
    let aleph = aleph_state(g, rho0.basis())?;
    rho0.expectation(&aleph)
}

#[derive(Debug, Clone)]
pub struct PairPrediction {
    pub p: f64,
    pub n: usize,
    pub k: usize,
    pub j: usize,
    /// `(−1)^{n_j − n_k}`.
    pub sign: i8,
    pub concurrence: f64,
    pub pair_state: PairState,
}

/// Reduced steady state of sites `k`, `j`:
/// `(1 − 2p/n)|00⟩⟨00| + (2p/n)|Ψ⟩⟨Ψ|`, `|Ψ⟩ = (|10⟩ ± |01⟩)/√2`.
pub fn predict_pair(p: f64, g: &NetworkGraph, k: usize, j: usize) -> Result<PairPrediction> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("p = {p} outside [0, 1]")));
    }
    let n = g.n();
    if k >= n || j >= n || k == j {
        return Err(Error::InvalidArgument(format!("invalid pair ({}, {})", k + 1, j + 1)));
    }
    let signs = parity_signs(g)?;
    let sign = signs.signs[k] * signs.signs[j];
    let c = 2.0 * p / n as f64;
    let s = f64::from(sign);
    let mut m = Matrix4::<C64>::zeros();
    m[(0, 0)] = C64::new(1.0 - c, 0.0);
    m[(2, 2)] = C64::new(c / 2.0, 0.0);
    m[(1, 1)] = C64::new(c / 2.0, 0.0);
    m[(2, 1)] = C64::new(s * c / 2.0, 0.0);
    m[(1, 2)] = C64::new(s * c / 2.0, 0.0);
    Ok(PairPrediction { p, n, k, j, sign, concurrence: c, pair_state: PairState { matrix: m } })
}

/// Predictions for every pair `k < j`.
pub fn predict_all_pairs(p: f64, g: &NetworkGraph) -> Result<Vec<PairPrediction>> {
    let n = g.n();
    let mut out = Vec::with_capacity(n * (n - 1) / 2);
    for k in 0..n {
        for j in k + 1..n {
            out.push(predict_pair(p, g, k, j)?);
        }
    }
    Ok(out)
}

/// `m^{-1/2} Σ_{j ∈ support} (−1)^{n_j} |j⟩`, the single-excitation state on
/// `support` with the largest overlap with `|ℵ⟩`.
pub fn optimal_initial_state(g: &NetworkGraph, basis: &Arc<ExcitationBasis>, support: &[usize]) -> Result<PureState> {
    if support.is_empty() {
        return Err(Error::InvalidArgument("support must not be empty".into()));
    }
    if basis.n() != g.n() || basis.max_excitations() < 1 {
        return Err(Error::InvalidArgument("basis must match the graph and allow one excitation".into()));
    }
    let mut seen = vec![false; g.n()];
    for &v in support {
        if v >= g.n() || std::mem::replace(&mut seen[v], true) {
            return Err(Error::InvalidArgument(format!("invalid or repeated support vertex {}", v + 1)));
        }
    }
    let signs = parity_signs(g)?;
    let amp = 1.0 / (support.len() as f64).sqrt();
    let mut v = Ket::zeros(basis.dim());
    for &j in support {
        v[basis.single(j).expect("N_max >= 1")] = C64::new(signs.sign(j) * amp, 0.0);
    }
    PureState::new(basis.clone(), v)
}

/// Largest stationary pair concurrence reachable from a single excitation
/// spread over `m` of `n` sites, `2m/n²`.
pub fn max_concurrence_formula(n: usize, m: usize) -> Result<f64> {
    if m == 0 || m > n {
        return Err(Error::InvalidArgument(format!("need 1 <= m <= n, got m={m}, n={n}")));
    }
    Ok(2.0 * m as f64 / (n * n) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::build_basis;
    use crate::topology::{make_named_topology, NamedTopology, OmegaMode};

    fn chain(n: usize) -> NetworkGraph {
        make_named_topology(NamedTopology::Chain, n, 1.0, 1.0, OmegaMode::Degenerate).unwrap()
    }

    fn sector(n: usize, cap: usize) -> Arc<ExcitationBasis> {
        Arc::new(build_basis(n, cap).unwrap())
    }

    #[test]
    fn aleph_examples() {
        let b = sector(2, 2);
        let a = aleph_state(&chain(2), &b).unwrap();
        let h = 1.0 / 2f64.sqrt();
        assert!((a.amplitudes()[b.single(0).unwrap()].re - h).abs() < 1e-15);
        assert!((a.amplitudes()[b.single(1).unwrap()].re + h).abs() < 1e-15);

        let b = sector(3, 1);
        let a = aleph_state(&chain(3), &b).unwrap();
        let t = 1.0 / 3f64.sqrt();
        let amps: Vec<f64> = (1..4).map(|i| a.amplitudes()[i].re).collect();
        assert_eq!(amps, vec![t, -t, t]);

        let tri = make_named_topology(NamedTopology::Ring, 3, 1.0, 1.0, OmegaMode::Degenerate).unwrap();
        assert!(matches!(aleph_state(&tri, &b), Err(Error::OddCycle { .. })));
        assert!(aleph_state(&chain(3), &sector(3, 0)).is_err());
    }

    #[test]
    fn dark_conditions() {
        let g = chain(3);
        let b = sector(3, 3);
        let r = verify_dark_conditions(&aleph_state(&g, &b).unwrap(), &g, 1e-12).unwrap();
        assert!(r.passed);
        assert!(r.lambda.norm() < 1e-14);

        let shifted = g.with_omega(vec![1.7, 2.7, 1.7]).unwrap();
        let r = verify_dark_conditions(&aleph_state(&shifted, &b).unwrap(), &shifted, 1e-12).unwrap();
        assert!(r.passed);
        assert!((r.lambda - C64::new(0.0, 0.7)).norm() < 1e-14);

        let b2 = sector(2, 2);
        let one = PureState::single(b2, 0).unwrap();
        let r = verify_dark_conditions(&one, &chain(2), 1e-12).unwrap();
        assert!(!r.passed);
        assert!((r.cond1_residuals[0].1 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn predicted_p() {
        let g = chain(4);
        let b = sector(4, 1);
        let a = aleph_state(&g, &b).unwrap();
        assert!((predict_p(&a.to_density(), &g).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(predict_p(&DensityMatrix::vacuum(b.clone()), &g).unwrap(), 0.0);
        for k in 0..4 {
            let rho = PureState::single(b.clone(), k).unwrap().to_density();
            assert!((predict_p(&rho, &g).unwrap() - 0.25).abs() < 1e-15);
        }

        let b2 = sector(4, 2);
        let two = PureState::basis_state(b2, 0b0011).unwrap().to_density();
        assert!(matches!(predict_p(&two, &g), Err(Error::Precondition(_))));

        let off = g.with_omega(vec![1.0; 4]).unwrap();
        let rho = a.to_density();
        assert!(matches!(predict_p(&rho, &off), Err(Error::Precondition(_))));
    }

    #[test]
    fn pair_predictions() {
        let p = predict_pair(1.0, &chain(2), 0, 1).unwrap();
        assert_eq!(p.concurrence, 1.0);
        assert_eq!(p.sign, -1);
        assert_eq!(p.pair_state.matrix[(1, 2)].re, -0.5);
        assert_eq!(p.pair_state.matrix[(0, 0)].re, 0.0);

        let p = predict_pair(0.0, &chain(3), 0, 2).unwrap();
        assert_eq!(p.concurrence, 0.0);
        assert_eq!(p.pair_state.matrix[(0, 0)].re, 1.0);

        let p = predict_pair(1.0, &chain(4), 0, 2).unwrap();
        assert_eq!(p.concurrence, 0.5);
        assert_eq!(p.sign, 1);
        assert!((p.pair_state.trace() - 1.0).abs() < 1e-15);
        assert!(predict_pair(1.5, &chain(4), 0, 2).is_err());
        assert!(predict_pair(0.5, &chain(4), 1, 1).is_err());
    }

    #[test]
    fn optimal_states() {
        let g = chain(4);
        let b = sector(4, 1);
        let all = optimal_initial_state(&g, &b, &[0, 1, 2, 3]).unwrap();
        let a = aleph_state(&g, &b).unwrap();
        assert!((all.inner(&a).unwrap().norm() - 1.0).abs() < 1e-15);

        let one = optimal_initial_state(&g, &b, &[0]).unwrap();
        assert!((predict_p(&one.to_density(), &g).unwrap() - 0.25).abs() < 1e-15);

        let two = optimal_initial_state(&g, &b, &[0, 1]).unwrap();
        let h = 1.0 / 2f64.sqrt();
        assert!((two.amplitudes()[1].re - h).abs() < 1e-15);
        assert!((two.amplitudes()[2].re + h).abs() < 1e-15);
        assert!((predict_p(&two.to_density(), &g).unwrap() - 0.5).abs() < 1e-15);

        assert!(optimal_initial_state(&g, &b, &[]).is_err());
        assert!(optimal_initial_state(&g, &b, &[1, 1]).is_err());
    }

    #[test]
    fn formula_values() {
        assert_eq!(max_concurrence_formula(2, 2).unwrap(), 1.0);
        assert_eq!(max_concurrence_formula(4, 2).unwrap(), 0.25);
        assert!((max_concurrence_formula(10, 10).unwrap() - 0.2).abs() < 1e-15);
        assert!(max_concurrence_formula(3, 4).is_err());
    }
}
