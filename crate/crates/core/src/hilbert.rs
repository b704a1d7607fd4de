//! Excitation-truncated qubit bases, state containers and the two-site
//! partial trace.
//!
//! A basis state is an occupation pattern stored as a bitmask, bit `k` set
//! when qubit `k` is excited. Patterns are ordered by Hamming weight, then
//! lexicographically by their sorted list of occupied sites, so for three
//! qubits and one excitation the order is `000, 100, 010, 001` (site 1
//! written first).
//!
//! The XY Hamiltonian conserves the excitation number and every jump
//! operator lowers it, so the span of patterns with weight `<= N_max` is
//! invariant and dynamics can be simulated there exactly.

use std::collections::HashMap;
use std::sync::Arc;

use itertools::Itertools;
use nalgebra::{DMatrix, DVector, Matrix4};


use crate::error::{Error, Result};
use crate::{Ket, Operator, C64};

/// Largest qubit count addressable by the bitmask representation.
pub const MAX_QUBITS: usize = 24;

pub const NORM_TOL: f64 = 1e-12;
pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-10;
pub const POSITIVITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct ExcitationBasis {
    n: usize,
    max_excitations: usize,
    states: Vec<u32>,
    index: HashMap<u32, usize>,
}

impl PartialEq for ExcitationBasis {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.max_excitations == other.max_excitations
    }
}

/// Sector basis on `n` qubits with at most `max_excitations` excitations.
pub fn build_basis(n: usize, max_excitations: usize) -> Result<ExcitationBasis> {
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::InvalidArgument(format!("qubit count {n} outside 1..={MAX_QUBITS}")));
    }
    if max_excitations > n {
        return Err(Error::InvalidArgument(format!(
            "excitation cap {max_excitations} outside 0..={n}"
        )));
    }
    let mut states = Vec::new();
    for w in 0..=max_excitations {
        for sites in (0..n).combinations(w) {
            states.push(sites.iter().fold(0u32, |m, &s| m | (1 << s)));
        }
    }
    let index = states.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    Ok(ExcitationBasis { n, max_excitations, states, index })
}

impl ExcitationBasis {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn max_excitations(&self) -> usize {
        self.max_excitations
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[u32] {
        &self.states
    }

    pub fn state(&self, i: usize) -> u32 {
        self.states[i]
    }

    pub fn index_of(&self, pattern: u32) -> Option<usize> {
        self.index.get(&pattern).copied()
    }

    pub fn weight(&self, i: usize) -> usize {
        self.states[i].count_ones() as usize
    }

    /// Pattern as a bit string, site 1 first.
    pub fn label(&self, i: usize) -> String {
        (0..self.n)
            .map(|k| if self.states[i] >> k & 1 == 1 { '1' } else { '0' })
            .collect()
    }

    /// Index of the vacuum.
    pub fn vacuum(&self) -> usize {
        0
    }

    /// Index of the single excitation on site `k`.
    pub fn single(&self, k: usize) -> Option<usize> {
        if k < self.n {
            self.index_of(1 << k)
        } else {
            None
        }
    }

    /// Positions of this basis' states inside `larger`.
    pub fn embedding_into(&self, larger: &ExcitationBasis) -> Result<Vec<usize>> {
        if larger.n != self.n || larger.max_excitations < self.max_excitations {
            return Err(Error::InvalidArgument(format!(
                "cannot embed sector (n={}, N_max={}) into (n={}, N_max={})",
                self.n, self.max_excitations, larger.n, larger.max_excitations
            )));
        }
        Ok(self.states.iter().map(|s| larger.index[s]).collect())
    }

    fn check_site(&self, k: usize) -> Result<()> {
        if k >= self.n {
            return Err(Error::InvalidArgument(format!("site {} outside 1..={}", k + 1, self.n)));
        }
        Ok(())
    }

    fn check_same(&self, other: &ExcitationBasis) -> Result<()> {
        if self != other {
            return Err(Error::BasisMismatch {
                expected_n: self.n,
                expected_max: self.max_excitations,
                got_n: other.n,
                got_max: other.max_excitations,
            });
        }
        Ok(())
    }
}

/// Matrix of the lowering operator `σ_k` in the sector basis.
pub fn lowering_operator(basis: &ExcitationBasis, k: usize) -> Result<Operator> {
    basis.check_site(k)?;
    let d = basis.dim();
    let mut m = DMatrix::zeros(d, d);
    for (col, &s) in basis.states.iter().enumerate() {
        if s >> k & 1 == 1 {
            let row = basis.index[&(s & !(1 << k))];
            m[(row, col)] = C64::new(1.0, 0.0);
        }
    }
    Ok(m)
}

/// Matrix of `σ_k† σ_k`.
pub fn number_operator(basis: &ExcitationBasis, k: usize) -> Result<Operator> {
    basis.check_site(k)?;
    let diag = DVector::from_iterator(
        basis.dim(),
        basis.states.iter().map(|&s| C64::new(f64::from((s >> k & 1) as u8), 0.0)),
    );
    Ok(DMatrix::from_diagonal(&diag))
}

/// Total excitation number operator, diagonal in the pattern basis.
pub fn total_number_operator(basis: &ExcitationBasis) -> Operator {
    let diag = DVector::from_iterator(
        basis.dim(),
        basis.states.iter().map(|s| C64::new(f64::from(s.count_ones()), 0.0)),
    );
    DMatrix::from_diagonal(&diag)
}

/// Shared-bath jump operator `σ_k + σ_l`.
pub fn jump_operator(basis: &ExcitationBasis, k: usize, l: usize) -> Result<Operator> {
    if k == l {
        return Err(Error::InvalidArgument(format!("jump operator needs distinct sites, got {} twice", k + 1)));
    }
    Ok(lowering_operator(basis, k)? + lowering_operator(basis, l)?)
}

/// Normalized pure state over a sector basis.
#[derive(Debug, Clone)]
pub struct PureState {
    basis: Arc<ExcitationBasis>,
    amplitudes: Ket,
}

impl PureState {
    /// Wraps already-normalized amplitudes.
    pub fn new(basis: Arc<ExcitationBasis>, amplitudes: Ket) -> Result<Self> {
        if amplitudes.len() != basis.dim() {
            return Err(Error::InvalidState(format!(
                "{} amplitudes for a basis of dimension {}",
                amplitudes.len(),
                basis.dim()
            )));
        }
        let norm = amplitudes.norm_squared();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!("state norm² = {norm}, expected 1")));
        }
        Ok(Self { basis, amplitudes })
    }

    /// Normalizes a raw vector.
    pub fn normalized(basis: Arc<ExcitationBasis>, raw: Ket) -> Result<Self> {
        let norm = raw.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidState("cannot normalize a zero vector".into()));
        }
        Self::new(basis, raw / C64::new(norm, 0.0))
    }

    pub fn basis_state(basis: Arc<ExcitationBasis>, pattern: u32) -> Result<Self> {
        let i = basis
            .index_of(pattern)
            .ok_or_else(|| Error::InvalidState(format!("pattern {pattern:#b} not in basis")))?;
        let mut v = Ket::zeros(basis.dim());
        v[i] = C64::new(1.0, 0.0);
        Ok(Self { basis, amplitudes: v })
    }

    pub fn vacuum(basis: Arc<ExcitationBasis>) -> Self {
        Self::basis_state(basis, 0).expect("vacuum is always in the basis")
    }

    /// Single excitation on site `k`.
    pub fn single(basis: Arc<ExcitationBasis>, k: usize) -> Result<Self> {
        basis.check_site(k)?;
        Self::basis_state(basis, 1 << k)
    }

    pub fn basis(&self) -> &Arc<ExcitationBasis> {
        &self.basis
    }

    pub fn amplitudes(&self) -> &Ket {
        &self.amplitudes
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> Result<C64> {
        self.basis.check_same(&other.basis)?;
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix {
            basis: self.basis.clone(),
            matrix: &self.amplitudes * self.amplitudes.adjoint(),
        }
    }

    /// Same state in a larger sector of the same qubits.
    pub fn embed(&self, larger: &Arc<ExcitationBasis>) -> Result<PureState> {
        let map = self.basis.embedding_into(larger)?;
        let mut v = Ket::zeros(larger.dim());
        for (i, &j) in map.iter().enumerate() {
            v[j] = self.amplitudes[i];
        }
        Ok(PureState { basis: larger.clone(), amplitudes: v })
    }

    /// Largest excitation number carrying non-negligible weight.
    pub fn max_weight(&self, tol: f64) -> usize {
        (0..self.basis.dim())
            .filter(|&i| self.amplitudes[i].norm_sqr() > tol)
            .map(|i| self.basis.weight(i))
            .max()
            .unwrap_or(0)
    }
}

/// Density matrix over a sector basis.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    basis: Arc<ExcitationBasis>,
    matrix: Operator,
}

impl From<&PureState> for DensityMatrix {
    fn from(psi: &PureState) -> Self {
        psi.to_density()
    }
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(basis: Arc<ExcitationBasis>, matrix: Operator) -> Result<Self> {
        let d = basis.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::InvalidState(format!(
                "{}x{} matrix for a basis of dimension {d}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let rho = Self { basis, matrix };
        let herm = rho.hermiticity_error();
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (deviation {herm:e})")));
        }
        let tr = rho.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr}, expected 1")));
        }
        let min = rho.min_eigenvalue();
        if min < -POSITIVITY_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(rho)
    }

    /// Wraps a matrix without checks; callers keep it a valid state.
    pub fn from_matrix_unchecked(basis: Arc<ExcitationBasis>, matrix: Operator) -> Self {
        Self { basis, matrix }
    }

    pub fn vacuum(basis: Arc<ExcitationBasis>) -> Self {
        PureState::vacuum(basis).to_density()
    }

    pub fn basis(&self) -> &Arc<ExcitationBasis> {
        &self.basis
    }

    pub fn matrix(&self) -> &Operator {
        &self.matrix
    }

    pub fn into_matrix(self) -> Operator {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn purity(&self) -> f64 {
        // tr(ρ²) = Σ |ρ_ij|² for Hermitian ρ
        self.matrix.norm_squared()
    }

    pub fn excitation_number(&self) -> f64 {
        (0..self.basis.dim())
            .map(|i| self.matrix[(i, i)].re * self.basis.weight(i) as f64)
            .sum()
    }

    pub fn hermiticity_error(&self) -> f64 {
        let m = &self.matrix;
        let mut worst = 0.0f64;
        for i in 0..m.nrows() {
            for j in 0..=i {
                worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Replaces the matrix by its Hermitian part.
    pub fn hermitize(&mut self) {
        let adj = self.matrix.adjoint();
        self.matrix += adj;
        self.matrix *= C64::new(0.5, 0.0);
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.matrix)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().into_iter().fold(f64::INFINITY, f64::min)
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn expectation(&self, psi: &PureState) -> Result<f64> {
        self.basis.check_same(&psi.basis)?;
        let v = &psi.amplitudes;
        Ok(v.dotc(&(&self.matrix * v)).re)
    }

    /// Total population in patterns with more than `w` excitations.
    pub fn population_above(&self, w: usize) -> f64 {
        (0..self.basis.dim())
            .filter(|&i| self.basis.weight(i) > w)
            .map(|i| self.matrix[(i, i)].re)
            .sum()
    }

    /// Largest absolute matrix entry touching a pattern with more than `w`
    /// excitations.
    pub fn support_leak_above(&self, w: usize) -> f64 {
        let d = self.basis.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                if self.basis.weight(i) > w || self.basis.weight(j) > w {
                    worst = worst.max(self.matrix[(i, j)].norm());
                }
            }
        }
        worst
    }

    /// Smallest excitation cap whose sector holds this state.
    pub fn minimal_sector(&self, tol: f64) -> usize {
        (0..=self.basis.max_excitations)
            .find(|&w| self.support_leak_above(w) <= tol)
            .unwrap_or(self.basis.max_excitations)
    }

    /// Same state in a larger sector of the same qubits.
    pub fn embed(&self, larger: &Arc<ExcitationBasis>) -> Result<DensityMatrix> {
        let map = self.basis.embedding_into(larger)?;
        let mut m = DMatrix::zeros(larger.dim(), larger.dim());
        for (i, &a) in map.iter().enumerate() {
            for (j, &b) in map.iter().enumerate() {
                m[(a, b)] = self.matrix[(i, j)];
            }
        }
        Ok(DensityMatrix { basis: larger.clone(), matrix: m })
    }

    /// Restricts to a smaller sector; fails if weight would be discarded.
    pub fn restrict(&self, smaller: &Arc<ExcitationBasis>, tol: f64) -> Result<DensityMatrix> {
        let map = smaller.embedding_into(&self.basis)?;
        let leak = self.support_leak_above(smaller.max_excitations);
        if leak > tol {
            return Err(Error::InvalidState(format!(
                "state has weight above {} excitations (entry {leak:e})",
                smaller.max_excitations
            )));
        }
        let d = smaller.dim();
        let m = DMatrix::from_fn(d, d, |i, j| self.matrix[(map[i], map[j])]);
        Ok(DensityMatrix { basis: smaller.clone(), matrix: m })
    }

    /// `½‖ρ − σ‖₁`.
    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64> {
        self.basis.check_same(&other.basis)?;
        let diff = &self.matrix - &other.matrix;
        Ok(0.5 * hermitian_eigenvalues(&diff).iter().map(|x| x.abs()).sum::<f64>())
    }

    /// Reduced state of sites `k` and `j`, traced directly on the sector
    /// basis. The pair basis is `|a_k a_j⟩` in the order 00, 01, 10, 11.
    pub fn partial_trace_pair(&self, k: usize, j: usize) -> Result<PairState> {
        self.basis.check_site(k)?;
        self.basis.check_site(j)?;
        if k == j {
            return Err(Error::InvalidArgument(format!("pair needs distinct sites, got {} twice", k + 1)));
        }
        let keep = (1u32 << k) | (1u32 << j);
        let local = |s: u32| 2 * (s >> k & 1) as usize + (s >> j & 1) as usize;

        // group basis states by their configuration outside {k, j}
        let mut groups: HashMap<u32, Vec<(usize, usize)>> = HashMap::new();
        for (i, &s) in self.basis.states.iter().enumerate() {
            groups.entry(s & !keep).or_default().push((i, local(s)));
        }
        let mut out = Matrix4::<C64>::zeros();
        for members in groups.values() {
            for &(a, la) in members {
                for &(b, lb) in members {
                    out[(la, lb)] += self.matrix[(a, b)];
                }
            }
        }
        Ok(PairState { matrix: out })
    }
}

/// Two-qubit state in the ordered basis `|00⟩, |01⟩, |10⟩, |11⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairState {
    pub matrix: Matrix4<C64>,
}

impl PairState {
    pub fn new(matrix: Matrix4<C64>) -> Result<Self> {
        let s = Self { matrix };
        let herm = crate::max_abs((matrix - matrix.adjoint()).iter());
        if herm > 1e-10 {
            return Err(Error::InvalidState(format!("pair state not Hermitian ({herm:e})")));
        }
        let tr = s.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("pair state trace {tr}")));
        }
        if s.min_eigenvalue() < -POSITIVITY_TOL {
            return Err(Error::InvalidState("pair state not positive semidefinite".into()));
        }
        Ok(s)
    }

    /// Projector onto a normalized two-qubit ket.
    pub fn pure(amplitudes: [C64; 4]) -> Self {
        let v = nalgebra::Vector4::from(amplitudes);
        Self { matrix: v * v.adjoint() }
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let m = DMatrix::from_fn(4, 4, |i, j| self.matrix[(i, j)]);
        hermitian_eigenvalues(&m).into_iter().fold(f64::INFINITY, f64::min)
    }
}

/// Eigenvalues of the Hermitian part of `m`, ascending.
pub fn hermitian_eigenvalues(m: &Operator) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let mut v: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}
