//! Fixed-step RK4 integration of the master equation.

use super::LiouvillianSpec;
use crate::error::{Error, Result};
use crate::hilbert::{hermitian_eigenvalues, DensityMatrix};
use crate::{Operator, C64};

/// Upper bound on `|λ|` over the generator's spectrum.
///
/// Uses the operator norm of the dual generator,
/// `2‖H‖ + 4‖Σ γ L†L‖`.
pub fn rate_bound(spec: &LiouvillianSpec) -> f64 {
    let spectral = |m: &Operator| {
        hermitian_eigenvalues(m).into_iter().map(f64::abs).fold(0.0, f64::max)
    };
    2.0 * spectral(spec.hamiltonian()) + 4.0 * spectral(&spec.decay_operator())
}

/// `min(0.01 / max(γ, |J|, |ω|), 0.1 / rate_bound)`.
pub fn default_dt(spec: &LiouvillianSpec) -> f64 {
    let g = spec.graph();
    let scale = g
        .edges()
        .iter()
        .flat_map(|e| [e.gamma.abs(), e.coupling.abs()])
        .chain(g.omega().iter().map(|w| w.abs()))
        .fold(0.0f64, f64::max);
    let by_scale = if scale > 0.0 { 0.01 / scale } else { f64::INFINITY };
    let bound = rate_bound(spec);
    let by_bound = if bound > 0.0 { 0.1 / bound } else { f64::INFINITY };
    let dt = by_scale.min(by_bound);
    if dt.is_finite() {
        dt
    } else {
        0.01
    }
}

#[derive(Debug, Clone)]
pub struct EvolveOptions {
    /// Step size; `None` picks [`default_dt`].
    pub dt: Option<f64>,
    /// Record every this many steps (the initial and final states are
    /// always recorded).
    pub record_every: usize,
    /// Abort when `|tr ρ(t) − tr ρ(0)|` exceeds this.
    pub trace_drift_tol: f64,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self { dt: None, record_every: 1, trace_drift_tol: 1e-6 }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<&DensityMatrix> {
        self.states.last()
    }
}

pub(crate) fn resolve_dt(spec: &LiouvillianSpec, dt: Option<f64>) -> Result<f64> {
    let bound = rate_bound(spec);
    match dt {
        None => Ok(default_dt(spec)),
        Some(dt) if !(dt > 0.0) || !dt.is_finite() => {
            Err(Error::InvalidArgument(format!("time step must be positive, got {dt}")))
        }
        Some(dt) if bound > 0.0 && dt > 0.1 / bound => Err(Error::InvalidArgument(format!(
            "time step {dt} exceeds the stability limit 0.1/{bound:.4} = {:.3e}",
            0.1 / bound
        ))),
        Some(dt) => Ok(dt),
    }
}

/// One RK4 step; also returns `‖L(ρ)‖_F` at the start of the step.
pub(crate) fn rk4_step(spec: &LiouvillianSpec, rho: &Operator, dt: f64) -> (Operator, f64) {
    let half = C64::new(0.5 * dt, 0.0);
    let full = C64::new(dt, 0.0);
    let k1 = spec.apply_raw(rho);
    let k2 = spec.apply_raw(&(rho + &k1 * half));
    let k3 = spec.apply_raw(&(rho + &k2 * half));
    let k4 = spec.apply_raw(&(rho + &k3 * full));
    let residual = k1.norm();
    let incr = (k1 + (k2 + k3) * C64::new(2.0, 0.0) + k4) * C64::new(dt / 6.0, 0.0);
    (rho + incr, residual)
}

pub(crate) fn hermitize(m: &mut Operator) {
    let adj = m.adjoint();
    *m += adj;
    *m *= C64::new(0.5, 0.0);
}

/// Integrates to `t_final`, calling `observe(t, ρ)` on recorded snapshots.
/// Returns the final state.
pub fn evolve_with<F>(
    spec: &LiouvillianSpec,
    rho0: &DensityMatrix,
    t_final: f64,
    opts: &EvolveOptions,
    mut observe: F,
) -> Result<DensityMatrix>
where
    F: FnMut(f64, &DensityMatrix),
{
    spec.check_basis(rho0)?;
    if !(t_final >= 0.0) || !t_final.is_finite() {
        return Err(Error::InvalidArgument(format!("t_final must be non-negative, got {t_final}")));
    }
    let dt = resolve_dt(spec, opts.dt)?;
    let steps = (t_final / dt).ceil() as usize;
    let dt = if steps > 0 { t_final / steps as f64 } else { dt };
    let every = opts.record_every.max(1);
    let basis = spec.basis().clone();
    let trace0 = rho0.trace();

    let mut rho = rho0.matrix().clone();
    observe(0.0, rho0);
    for step in 1..=steps {
        let (next, _) = rk4_step(spec, &rho, dt);
        rho = next;
        hermitize(&mut rho);
        let drift = (rho.trace().re - trace0).abs();
        let t = step as f64 * dt;
        if !drift.is_finite() || drift > opts.trace_drift_tol {
            return Err(Error::Unstable(format!(
                "trace drifted by {drift:e} at t = {t} (dt = {dt})"
            )));
        }
        if step % every == 0 || step == steps {
            observe(t, &DensityMatrix::from_matrix_unchecked(basis.clone(), rho.clone()));
        }
    }
    Ok(DensityMatrix::from_matrix_unchecked(basis, rho))
}

/// Integrates and stores the recorded snapshots.
pub fn evolve(
    spec: &LiouvillianSpec,
    rho0: &DensityMatrix,
    t_final: f64,
    opts: &EvolveOptions,
) -> Result<Trajectory> {
    let mut traj = Trajectory::default();
    evolve_with(spec, rho0, t_final, opts, |t, rho| {
        traj.times.push(t);
        traj.states.push(rho.clone());
    })?;
    Ok(traj)
}
