//! Column-stacked superoperator, its spectrum and kernel.
//!
//! `vec(ρ)` stacks columns, so `ρ[i, j]` sits at `j·d + i` and
//! `vec(A X B) = (Bᵀ ⊗ A) vec(X)`.

use log::warn;
use nalgebra::linalg::{Schur, SVD};
use nalgebra::{DMatrix, DVector};

use super::LiouvillianSpec;
use crate::error::{Error, Result};
use crate::{Ket, Operator, C64};

/// Largest superoperator dimension `d²` assembled densely.
pub const DEFAULT_SUPEROP_CAP: usize = 4096;

/// Kernel threshold relative to `‖M‖_F`.
pub const DEFAULT_KERNEL_REL_TOL: f64 = 1e-9;

const EIGEN_EPS: f64 = 1e-15;
const EIGEN_MAX_ITER: usize = 100_000;

pub fn vec_operator(m: &Operator) -> Ket {
    DVector::from_column_slice(m.as_slice())
}

pub fn unvec(v: &Ket, d: usize) -> Operator {
    DMatrix::from_column_slice(d, d, v.as_slice())
}

fn check_cap(spec: &LiouvillianSpec, cap: usize) -> Result<usize> {
    let d2 = spec.dim() * spec.dim();
    if d2 > cap {
        return Err(Error::DimensionCap { dim: d2, cap });
    }
    Ok(d2)
}

/// Dense `M` with `vec(L(ρ)) = M vec(ρ)`.
pub fn liouvillian_matrix(spec: &LiouvillianSpec, cap: usize) -> Result<Operator> {
    check_cap(spec, cap)?;
    let d = spec.dim();
    let id = DMatrix::<C64>::identity(d, d);
    let heff = &spec.effective;
    let i = C64::new(0.0, 1.0);
    let mut m = id.kronecker(heff) * (-i) + heff.conjugate().kronecker(&id) * i;
    for j in spec.jumps() {
        m += j.op.conjugate().kronecker(&j.op) * C64::new(2.0 * j.rate, 0.0);
    }
    Ok(m)
}

#[derive(Debug, Clone)]
pub struct SuperoperatorSpectrum {
    pub eigenvalues: Vec<C64>,
    /// Eigenvalues with `|λ| <= tol`, counted with algebraic multiplicity.
    pub kernel_dim: usize,
    /// Orthonormal (Frobenius) basis of the numerical null space.
    pub kernel_basis: Vec<Operator>,
    pub tol: f64,
    pub frobenius_norm: f64,
}

impl SuperoperatorSpectrum {
    pub fn max_real_part(&self) -> f64 {
        self.eigenvalues.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Whether some eigenvalue lies within `tol` of `target`.
    pub fn contains(&self, target: C64, tol: f64) -> bool {
        self.eigenvalues.iter().any(|z| (z - target).norm() <= tol)
    }

    /// Null space dimension agrees with the algebraic multiplicity of zero.
    pub fn kernel_is_semisimple(&self) -> bool {
        self.kernel_basis.len() == self.kernel_dim
    }
}

fn svd(m: Operator) -> Result<SVD<C64, nalgebra::Dyn, nalgebra::Dyn>> {
    SVD::try_new(m, true, true, EIGEN_EPS, EIGEN_MAX_ITER)
        .ok_or_else(|| Error::Eigen("SVD of the Liouvillian did not converge".into()))
}

/// Right and left null vectors of `m` from a single SVD.
fn null_vectors(m: Operator, tol: f64) -> Result<(Vec<Ket>, Vec<Ket>)> {
    let svd = svd(m)?;
    let u = svd.u.as_ref().expect("requested U");
    let v_t = svd.v_t.as_ref().expect("requested V†");
    let mut right = Vec::new();
    let mut left = Vec::new();
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s <= tol {
            right.push(v_t.row(i).adjoint());
            left.push(u.column(i).into_owned());
        }
    }
    Ok((right, left))
}

fn default_tol(m: &Operator, tol: Option<f64>) -> (f64, f64) {
    let norm = m.norm();
    (norm, tol.unwrap_or(DEFAULT_KERNEL_REL_TOL * norm))
}

/// Full eigenvalue list of `M` and its numerical kernel. `tol` defaults to
/// `1e-9 · ‖M‖_F`.
pub fn kernel_spectrum(spec: &LiouvillianSpec, tol: Option<f64>, cap: usize) -> Result<SuperoperatorSpectrum> {
    let m = liouvillian_matrix(spec, cap)?;
    let (frobenius_norm, tol) = default_tol(&m, tol);
    let schur = Schur::try_new(m.clone(), EIGEN_EPS, EIGEN_MAX_ITER)
        .ok_or_else(|| Error::Eigen("Schur decomposition did not converge".into()))?;
    let (_, t) = schur.unpack();
    let eigenvalues: Vec<C64> = (0..t.nrows()).map(|i| t[(i, i)]).collect();
    let kernel_dim = eigenvalues.iter().filter(|z| z.norm() <= tol).count();
    let d = spec.dim();
    let (right, _) = null_vectors(m, tol)?;
    let kernel_basis: Vec<Operator> = right.iter().map(|v| unvec(v, d)).collect();
    if kernel_basis.len() != kernel_dim {
        warn!(
            "Liouvillian kernel not semisimple: null space dimension {} vs zero multiplicity {}",
            kernel_basis.len(),
            kernel_dim
        );
    }
    Ok(SuperoperatorSpectrum { eigenvalues, kernel_dim, kernel_basis, tol, frobenius_norm })
}

/// Orthonormal basis of the steady-state set (as operators, not
/// necessarily Hermitian).
pub fn null_space_basis(spec: &LiouvillianSpec, tol: Option<f64>, cap: usize) -> Result<Vec<Operator>> {
    let m = liouvillian_matrix(spec, cap)?;
    let (_, tol) = default_tol(&m, tol);
    let d = spec.dim();
    Ok(null_vectors(m, tol)?.0.iter().map(|v| unvec(v, d)).collect())
}

/// Spectral projector onto the zero eigenspace of `M`,
/// `P = R (Wᴴ R)⁻¹ Wᴴ` with `R` right and `W` left null vectors.
#[derive(Debug, Clone)]
pub struct KernelProjector {
    d: usize,
    right: Operator,
    dual: Operator,
    semisimple: bool,
}

impl KernelProjector {
    pub fn new(spec: &LiouvillianSpec, tol: Option<f64>, cap: usize) -> Result<Self> {
        let m = liouvillian_matrix(spec, cap)?;
        let (_, tol) = default_tol(&m, tol);
        let (right, left) = null_vectors(m, tol)?;
        if right.is_empty() {
            return Err(Error::Eigen("Liouvillian has an empty numerical kernel".into()));
        }
        let right = DMatrix::from_columns(&right);
        let left = DMatrix::from_columns(&left);
        let gram = left.adjoint() * &right;
        let k = gram.nrows();
        let smallest = gram
            .clone()
            .singular_values()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        let semisimple = smallest > 1e-8;
        let inv = if semisimple {
            gram.try_inverse()
                .ok_or_else(|| Error::Eigen("kernel Gram matrix is singular".into()))?
        } else {
            warn!("zero eigenvalue of the Liouvillian is defective; kernel projection uses a pseudo-inverse");
            gram.pseudo_inverse(1e-10).map_err(|e| Error::Eigen(e.to_string()))?
        };
        debug_assert_eq!(inv.nrows(), k);
        let dual = inv * left.adjoint();
        Ok(Self { d: spec.dim(), right, dual, semisimple })
    }

    pub fn kernel_dim(&self) -> usize {
        self.right.ncols()
    }

    pub fn is_semisimple(&self) -> bool {
        self.semisimple
    }

    /// Kernel coordinates of `rho`.
    pub fn coefficients(&self, rho: &Operator) -> Ket {
        &self.dual * vec_operator(rho)
    }

    pub fn project(&self, rho: &Operator) -> Operator {
        unvec(&(&self.right * self.coefficients(rho)), self.d)
    }
}
