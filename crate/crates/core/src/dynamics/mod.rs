//! Lindblad generator of the network and everything built on it.
//!
//! The generator is
//!
//! ```text
//! L(ρ) = −i[H, ρ] + Σ_e γ_e (2 L_e ρ L_e† − L_e†L_e ρ − ρ L_e†L_e)
//! ```
//!
//! with one term per unordered edge `e = {k, l}` and `L_e = σ_k + σ_l`.
//! Summing the per-pair dissipator `γ/2 (2LρL† − {L†L, ρ})` over both
//! orientations `(k, l)` and `(l, k)` of an edge gives exactly this, so a
//! configured `gamma` is the rate appearing in the ordered-pair sum.
//! Likewise `H = Σ_k ω_k σ_k†σ_k + Σ_e J_e (σ_k†σ_l + σ_l†σ_k)`.

mod integrate;
mod steady;
mod superop;

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::hilbert::{jump_operator, DensityMatrix, ExcitationBasis};
use crate::topology::{ensure_valid, NetworkGraph};
use crate::{Operator, C64};

pub use integrate::{default_dt, evolve, evolve_with, rate_bound, EvolveOptions, Trajectory};
pub use steady::{
    steady_state, steady_state_kernel, steady_state_long_time, LongTimeOptions, SteadyMethod,
    SteadyOptions,
};
pub use superop::{
    kernel_spectrum, liouvillian_matrix, null_space_basis, unvec, vec_operator, KernelProjector,
    SuperoperatorSpectrum, DEFAULT_KERNEL_REL_TOL, DEFAULT_SUPEROP_CAP,
};

/// Sparse real matrix with unit-scale entries, used for jump operators.
#[derive(Debug, Clone)]
struct SparseReal {
    entries: Vec<(usize, usize, f64)>,
}

impl SparseReal {
    fn from_dense(m: &Operator) -> Self {
        let mut entries = Vec::new();
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                let z = m[(i, j)];
                if z != C64::new(0.0, 0.0) {
                    debug_assert_eq!(z.im, 0.0);
                    entries.push((i, j, z.re));
                }
            }
        }
        Self { entries }
    }

    /// `out += scale · A ρ A†`.
    fn sandwich_into(&self, rho: &Operator, scale: f64, out: &mut Operator) {
        for &(a, i, x) in &self.entries {
            for &(b, j, y) in &self.entries {
                out[(a, b)] += rho[(i, j)] * (scale * x * y);
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct JumpTerm {
    /// Edge endpoints, 0-based, smaller first.
    pub edge: (usize, usize),
    pub rate: f64,
    pub op: Operator,
    sparse: SparseReal,
}

/// Hamiltonian, jump terms and cached pieces of the generator on a basis.
#[derive(Debug, Clone)]
pub struct LiouvillianSpec {
    graph: NetworkGraph,
    basis: Arc<ExcitationBasis>,
    hamiltonian: Operator,
    jumps: Vec<JumpTerm>,
    /// `H − i Σ_e γ_e L_e†L_e`
    effective: Operator,
}

fn check_size(g: &NetworkGraph, basis: &ExcitationBasis) -> Result<()> {
    if basis.n() != g.n() {
        return Err(Error::InvalidArgument(format!(
            "basis has {} qubits, graph has {} vertices",
            basis.n(),
            g.n()
        )));
    }
    Ok(())
}

pub fn build_hamiltonian(g: &NetworkGraph, basis: &ExcitationBasis) -> Result<Operator> {
    check_size(g, basis)?;
    let d = basis.dim();
    let mut h = DMatrix::zeros(d, d);
    for (i, &s) in basis.states().iter().enumerate() {
        let onsite: f64 = (0..g.n()).filter(|&k| s >> k & 1 == 1).map(|k| g.omega()[k]).sum();
        h[(i, i)] = C64::new(onsite, 0.0);
    }
    // hopping: σ_k†σ_l moves an excitation from l to k
    for e in g.edges() {
        for (i, &s) in basis.states().iter().enumerate() {
            let (ka, kb) = (s >> e.a & 1, s >> e.b & 1);
            if ka != kb {
                let t = s ^ (1 << e.a) ^ (1 << e.b);
                let j = basis.index_of(t).expect("hopping conserves weight");
                h[(j, i)] += C64::new(e.coupling, 0.0);
            }
        }
    }
    Ok(h)
}

pub fn build_liouvillian(g: &NetworkGraph, basis: Arc<ExcitationBasis>) -> Result<LiouvillianSpec> {
    check_size(g, &basis)?;
    ensure_valid(g)?;
    let hamiltonian = build_hamiltonian(g, &basis)?;
    let mut effective = hamiltonian.clone();
    let mut jumps = Vec::with_capacity(g.edges().len());
    for e in g.edges() {
        let op = jump_operator(&basis, e.a, e.b)?;
        effective -= (op.adjoint() * &op) * C64::new(0.0, e.gamma);
        let sparse = SparseReal::from_dense(&op);
        jumps.push(JumpTerm { edge: (e.a, e.b), rate: e.gamma, op, sparse });
    }
    Ok(LiouvillianSpec { graph: g.clone(), basis, hamiltonian, jumps, effective })
}

impl LiouvillianSpec {
    pub fn graph(&self) -> &NetworkGraph {
        &self.graph
    }

    pub fn basis(&self) -> &Arc<ExcitationBasis> {
        &self.basis
    }

    pub fn hamiltonian(&self) -> &Operator {
        &self.hamiltonian
    }

    pub fn jumps(&self) -> &[JumpTerm] {
        &self.jumps
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    /// `Σ_e γ_e L_e†L_e`.
    pub fn decay_operator(&self) -> Operator {
        (&self.hamiltonian - &self.effective) * C64::new(0.0, 1.0)
    }

    /// Generator applied to a raw matrix of the right size.
    pub fn apply_raw(&self, rho: &Operator) -> Operator {
        let minus_i = C64::new(0.0, -1.0);
        let mut out = (&self.effective * rho - rho * self.effective.adjoint()) * minus_i;
        for j in &self.jumps {
            j.sparse.sandwich_into(rho, 2.0 * j.rate, &mut out);
        }
        out
    }

    pub fn check_basis(&self, rho: &DensityMatrix) -> Result<()> {
        if **rho.basis() != *self.basis {
            return Err(Error::BasisMismatch {
                expected_n: self.basis.n(),
                expected_max: self.basis.max_excitations(),
                got_n: rho.basis().n(),
                got_max: rho.basis().max_excitations(),
            });
        }
        Ok(())
    }
}

/// `dρ/dt` for a density matrix on the spec's basis.
pub fn apply_liouvillian(spec: &LiouvillianSpec, rho: &DensityMatrix) -> Result<Operator> {
    spec.check_basis(rho)?;
    Ok(spec.apply_raw(rho.matrix()))
}
