use serde::{Deserialize, Serialize};

use super::integrate::{hermitize, resolve_dt, rk4_step};
use super::superop::{KernelProjector, DEFAULT_SUPEROP_CAP};
use super::LiouvillianSpec;
use crate::error::{Error, Result};
use crate::hilbert::DensityMatrix;
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SteadyMethod {
    /// Kernel projection when the superoperator fits the cap, otherwise
    /// long-time integration.
    #[default]
    Auto,
    KernelProjection,
    LongTime,
}

#[derive(Debug, Clone)]
pub struct LongTimeOptions {
    pub dt: Option<f64>,
    /// Give up after this time; `None` uses `5000 / min γ`.
    pub t_cap: Option<f64>,
    /// Stop once `‖L(ρ)‖_F` falls to this.
    pub residual_tol: f64,
}

impl Default for LongTimeOptions {
    fn default() -> Self {
        Self { dt: None, t_cap: None, residual_tol: 1e-10 }
    }
}

#[derive(Debug, Clone)]
pub struct SteadyOptions {
    pub method: SteadyMethod,
    /// Absolute kernel threshold; `None` means `1e-9 · ‖M‖_F`.
    pub kernel_tol: Option<f64>,
    pub cap: usize,
    pub long_time: LongTimeOptions,
}

impl Default for SteadyOptions {
    fn default() -> Self {
        Self {
            method: SteadyMethod::Auto,
            kernel_tol: None,
            cap: DEFAULT_SUPEROP_CAP,
            long_time: LongTimeOptions::default(),
        }
    }
}

impl SteadyOptions {
    pub fn with_method(method: SteadyMethod) -> Self {
        Self { method, ..Self::default() }
    }
}

/// Projects `rho0` onto the kernel, then re-Hermitizes and renormalizes.
pub fn steady_state_kernel(projector: &KernelProjector, rho0: &DensityMatrix) -> Result<DensityMatrix> {
    let mut m = projector.project(rho0.matrix());
    hermitize(&mut m);
    let tr = m.trace().re;
    if !(tr.abs() > 1e-300) {
        return Err(Error::Eigen("kernel projection has zero trace".into()));
    }
    m *= C64::new(1.0 / tr, 0.0);
    Ok(DensityMatrix::from_matrix_unchecked(rho0.basis().clone(), m))
}

/// Integrates until the generator residual drops below tolerance. Returns
/// the state and the time reached.
pub fn steady_state_long_time(
    spec: &LiouvillianSpec,
    rho0: &DensityMatrix,
    opts: &LongTimeOptions,
) -> Result<(DensityMatrix, f64)> {
    spec.check_basis(rho0)?;
    let dt = resolve_dt(spec, opts.dt)?;
    let t_cap = opts.t_cap.unwrap_or_else(|| {
        let gmin = spec.graph().edges().iter().map(|e| e.gamma).fold(f64::INFINITY, f64::min);
        5000.0 / gmin
    });
    let mut rho = rho0.matrix().clone();
    let mut t = 0.0;
    let mut residual = f64::INFINITY;
    while t <= t_cap {
        let (next, r) = rk4_step(spec, &rho, dt);
        residual = r;
        if residual <= opts.residual_tol {
            break;
        }
        if !residual.is_finite() {
            return Err(Error::Unstable(format!("generator residual became {residual} at t = {t}")));
        }
        rho = next;
        hermitize(&mut rho);
        t += dt;
    }
    if residual > opts.residual_tol {
        return Err(Error::NotConverged { t_cap, residual });
    }
    let tr = rho.trace().re;
    rho *= C64::new(1.0 / tr, 0.0);
    Ok((DensityMatrix::from_matrix_unchecked(rho0.basis().clone(), rho), t))
}

pub fn steady_state(spec: &LiouvillianSpec, rho0: &DensityMatrix, opts: &SteadyOptions) -> Result<DensityMatrix> {
    spec.check_basis(rho0)?;
    let use_kernel = match opts.method {
        SteadyMethod::KernelProjection => true,
        SteadyMethod::LongTime => false,
        SteadyMethod::Auto => spec.dim() * spec.dim() <= opts.cap,
    };
    if use_kernel {
        let p = KernelProjector::new(spec, opts.kernel_tol, opts.cap)?;
        steady_state_kernel(&p, rho0)
    } else {
        steady_state_long_time(spec, rho0, &opts.long_time).map(|(rho, _)| rho)
    }
}
