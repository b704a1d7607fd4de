//! Wootters concurrence of two-qubit reduced states.

use std::collections::BTreeMap;

use nalgebra::Matrix4;

use crate::error::{Error, Result};
use crate::hilbert::{DensityMatrix, PairState, POSITIVITY_TOL};
use crate::C64;

/// Round-off below this is reported as zero concurrence.
pub const CONCURRENCE_FLOOR: f64 = 1e-12;

/// Eigenvalues of `ρ` below this (relative to the largest) are round-off.
const RANK_FLOOR: f64 = 1e-14;

/// `σ_y ⊗ σ_y` in the basis 00, 01, 10, 11.
fn yy() -> Matrix4<C64> {
    let mut m = Matrix4::zeros();
    m[(0, 3)] = C64::new(-1.0, 0.0);
    m[(1, 2)] = C64::new(1.0, 0.0);
    m[(2, 1)] = C64::new(1.0, 0.0);
    m[(3, 0)] = C64::new(-1.0, 0.0);
    m
}

fn hermitian_part(m: &Matrix4<C64>) -> Matrix4<C64> {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

/// `C = max(0, λ₁ − λ₂ − λ₃ − λ₄)` with `λᵢ²` the eigenvalues of
/// `√ρ ρ̃ √ρ`, `ρ̃ = (Y⊗Y) ρ* (Y⊗Y)`.
///
/// The `λᵢ` are taken as singular values of `√ρ √ρ̃`, which avoids square
/// roots of eigenvalues that vanish only to round-off.
pub fn wootters_concurrence(rho: &PairState) -> Result<f64> {
    let m = hermitian_part(&rho.matrix);
    let eig = m.symmetric_eigen();
    let lowest = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if !lowest.is_finite() {
        return Err(Error::InvalidState("pair state has non-finite entries".into()));
    }
    if lowest < -POSITIVITY_TOL {
        return Err(Error::InvalidState(format!("pair state has eigenvalue {lowest:e}")));
    }
    let top = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    let floor = RANK_FLOOR * top.max(f64::MIN_POSITIVE);
    let roots = eig.eigenvalues.map(|x| C64::new(if x > floor { x.sqrt() } else { 0.0 }, 0.0));
    let v_adj = eig.eigenvectors.adjoint();
    let sqrt_rho = eig.eigenvectors * Matrix4::from_diagonal(&roots) * v_adj;
    let y = yy();
    let sqrt_tilde = y * sqrt_rho.conjugate() * y;
    let mut lambdas: Vec<f64> = (sqrt_rho * sqrt_tilde).singular_values().iter().copied().collect();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    let c = lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3];
    Ok(if c < CONCURRENCE_FLOOR { 0.0 } else { c.min(1.0) })
}

/// Concurrence of every unordered pair, keyed `(k, j)` with `k < j`
/// (0-based).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConcurrenceMap {
    pub entries: BTreeMap<(usize, usize), f64>,
}

impl ConcurrenceMap {
    pub fn get(&self, k: usize, j: usize) -> Option<f64> {
        self.entries.get(&(k.min(j), k.max(j))).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        self.entries.iter().map(|(&k, &v)| (k, v))
    }

    pub fn max(&self) -> f64 {
        self.entries.values().copied().fold(0.0, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.entries.values().copied().fold(f64::INFINITY, f64::min)
    }

    /// `max − min` over pairs; zero for an empty map.
    pub fn spread(&self) -> f64 {
        if self.entries.is_empty() {
            0.0
        } else {
            self.max() - self.min()
        }
    }
}

pub fn concurrence_map(rho: &DensityMatrix) -> Result<ConcurrenceMap> {
    let n = rho.basis().n();
    let mut entries = BTreeMap::new();
    for k in 0..n {
        for j in k + 1..n {
            let pair = rho.partial_trace_pair(k, j)?;
            entries.insert((k, j), wootters_concurrence(&pair)?);
        }
    }
    Ok(ConcurrenceMap { entries })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use nalgebra::Matrix2;
    use proptest::prelude::*;

    use super::*;
    use crate::darkstate::{aleph_state, predict_pair};
    use crate::hilbert::{build_basis, PureState};
    use crate::topology::{make_named_topology, NamedTopology, OmegaMode};

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn product(a: [C64; 2], b: [C64; 2]) -> PairState {
        PairState::pure([a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]])
    }

    #[test]
    fn reference_states() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let singlet = PairState::pure([c(0.0), c(h), c(-h), c(0.0)]);
        assert!((wootters_concurrence(&singlet).unwrap() - 1.0).abs() < 1e-12);
        let bell = PairState::pure([c(h), c(0.0), c(0.0), C64::new(0.0, h)]);
        assert!((wootters_concurrence(&bell).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(wootters_concurrence(&PairState::pure([c(1.0), c(0.0), c(0.0), c(0.0)])).unwrap(), 0.0);
        let plus = [c(h), c(h)];
        assert_eq!(wootters_concurrence(&product(plus, [c(0.6), C64::new(0.0, 0.8)])).unwrap(), 0.0);
        let mut m = Matrix4::zeros();
        m[(0, 0)] = c(1.5);
        m[(3, 3)] = c(-0.5);
        assert!(wootters_concurrence(&PairState { matrix: m }).is_err());
    }

    #[test]
    fn partially_entangled_pure_state() {
        // a|01⟩ + b|10⟩ has concurrence 2|ab|
        for t in [0.1f64, 0.4, 0.7, 1.2] {
            let s = PairState::pure([c(0.0), c(t.cos()), C64::new(0.0, t.sin()), c(0.0)]);
            let expect = (2.0 * t.cos() * t.sin()).abs();
            assert!((wootters_concurrence(&s).unwrap() - expect).abs() < 1e-10);
        }
    }

    #[test]
    fn x_state_on_grid() {
        let g = make_named_topology(NamedTopology::Chain, 3, 1.0, 1.0, OmegaMode::Degenerate).unwrap();
        for i in 0..=10 {
            let p = i as f64 / 10.0;
            for (k, j) in [(0, 1), (0, 2), (1, 2)] {
                let pred = predict_pair(p, &g, k, j).unwrap();
                let got = wootters_concurrence(&pred.pair_state).unwrap();
                assert!((got - 2.0 * p / 3.0).abs() < 1e-7, "p={p}: {got}");
            }
        }
    }

    #[test]
    fn maps() {
        let g = make_named_topology(NamedTopology::Chain, 3, 1.0, 1.0, OmegaMode::Degenerate).unwrap();
        let b = Arc::new(build_basis(3, 1).unwrap());
        let a = aleph_state(&g, &b).unwrap().to_density();
        let m = concurrence_map(&a).unwrap();
        assert_eq!(m.len(), 3);
        for (_, v) in m.iter() {
            assert!((v - 2.0 / 3.0).abs() < 1e-8);
        }
        assert_eq!(m.get(2, 0), m.get(0, 2));
        assert!(m.spread() < 1e-8);
        let vac = concurrence_map(&DensityMatrix::vacuum(b.clone())).unwrap();
        assert_eq!(vac.max(), 0.0);
        let one = concurrence_map(&PureState::single(b, 0).unwrap().to_density()).unwrap();
        assert_eq!(one.max(), 0.0);
    }

    fn unitary(a: f64, b: f64, c0: f64, d: f64) -> Matrix2<C64> {
        // e^{ia} [[e^{ib} cos d, e^{ic} sin d], [-e^{-ic} sin d, e^{-ib} cos d]]
        let e = |x: f64| C64::from_polar(1.0, x);
        Matrix2::new(
            e(b) * d.cos(),
            e(c0) * d.sin(),
            -e(-c0) * d.sin(),
            e(-b) * d.cos(),
        ) * e(a)
    }

    fn kron(u: &Matrix2<C64>, v: &Matrix2<C64>) -> Matrix4<C64> {
        Matrix4::from_fn(|i, j| u[(i / 2, j / 2)] * v[(i % 2, j % 2)])
    }

    proptest! {
        #[test]
        fn local_unitary_invariance(
            amps in proptest::collection::vec(-1.0f64..1.0, 8),
            mix in 0.0f64..1.0,
            angles in proptest::collection::vec(-3.2f64..3.2, 8),
        ) {
            let v: Vec<C64> = amps.chunks(2).map(|x| C64::new(x[0], x[1])).collect();
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            prop_assume!(norm > 1e-3);
            let psi = PairState::pure([v[0] / norm, v[1] / norm, v[2] / norm, v[3] / norm]);
            let noise = Matrix4::<C64>::identity() * c(0.25);
            let rho = PairState { matrix: psi.matrix * c(1.0 - mix) + noise * c(mix) };
            let u = kron(
                &unitary(angles[0], angles[1], angles[2], angles[3]),
                &unitary(angles[4], angles[5], angles[6], angles[7]),
            );
            let rotated = PairState { matrix: u * rho.matrix * u.adjoint() };
            let a = wootters_concurrence(&rho).unwrap();
            let b = wootters_concurrence(&rotated).unwrap();
            prop_assert!((a - b).abs() < 1e-10, "{} vs {}", a, b);
            prop_assert!((0.0..=1.0).contains(&a));
        }
    }
}
