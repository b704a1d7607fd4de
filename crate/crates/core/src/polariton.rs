//! Cavity arrays coupled through fibers, reduced to an effective qubit
//! chain by eliminating the fiber modes.
//!
//! Each doped cavity on atom–cavity resonance contributes a lower polariton
//! `|1,−⟩` with energy `ω_k − f_k`, treated as a qubit. Fiber `k` joins
//! cavities `k` and `k+1`; eliminating it gives the exchange
//! `J'_k = −J_k²/ω_k^f` and shifts the adjoining qubit energies by
//! `−J_k²/ω_k^f` each.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::topology::NetworkGraph;

pub const DEFAULT_STRONG_COUPLING_RATIO: f64 = 100.0;

/// Attached to every result so downstream readers know how per-link
/// quantities were assigned to sites.
pub const INTERPRETATION_NOTE: &str = "site energy shift sums -J_l^2/omega_l^f over the fibers l adjoining the site; \
     environment shift is taken independent of the bath mode index";

fn default_ratio() -> f64 {
    DEFAULT_STRONG_COUPLING_RATIO
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CavityChainParams {
    pub n: usize,
    pub omega_c: Vec<f64>,
    pub omega_a: Vec<f64>,
    /// Atom–cavity coupling per site.
    pub f: Vec<f64>,
    /// Cavity–fiber coupling per link.
    #[serde(rename = "J_fiber")]
    pub j_fiber: Vec<f64>,
    /// Fiber frequency per link.
    pub omega_f: Vec<f64>,
    /// Reference environment frequency per link.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_e: Option<Vec<f64>>,
    pub kappa_a: f64,
    pub kappa_c: f64,
    /// Required `f_k / max(κ_a, κ_c)`.
    #[serde(default = "default_ratio")]
    pub strong_coupling_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectiveChainParams {
    pub omega_prime: Vec<f64>,
    #[serde(rename = "J_prime")]
    pub j_prime: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_e_prime: Option<Vec<f64>>,
    /// `J_k / ω_k^f`, the factor (up to sign) rescaling each fiber's bath
    /// couplings.
    pub eta_scale: Vec<f64>,
    /// Regime checks that failed. Empty means all passed.
    pub warnings: Vec<String>,
    pub interpretation: String,
}

impl EffectiveChainParams {
    pub fn regime_ok(&self) -> bool {
        self.warnings.is_empty()
    }
}

fn check_len(name: &str, v: &[f64], want: usize) -> Result<()> {
    if v.len() != want {
        return Err(Error::InvalidArgument(format!("{name} has {} entries, expected {want}", v.len())));
    }
    if let Some(x) = v.iter().find(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument(format!("{name} contains non-finite value {x}")));
    }
    Ok(())
}

impl CavityChainParams {
    /// Shape, finiteness and atom–cavity resonance.
    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        if n < 2 {
            return Err(Error::InvalidArgument(format!("need at least 2 cavities, got {n}")));
        }
        check_len("omega_c", &self.omega_c, n)?;
        check_len("omega_a", &self.omega_a, n)?;
        check_len("f", &self.f, n)?;
        check_len("J_fiber", &self.j_fiber, n - 1)?;
        check_len("omega_f", &self.omega_f, n - 1)?;
        if let Some(e) = &self.omega_e {
            check_len("omega_e", e, n - 1)?;
        }
        for (k, (c, a)) in self.omega_c.iter().zip(&self.omega_a).enumerate() {
            if c != a {
                return Err(Error::InvalidArgument(format!(
                    "cavity {} is not on atom resonance: omega_c = {c}, omega_a = {a}",
                    k + 1
                )));
            }
        }
        if let Some((k, w)) = self.omega_f.iter().enumerate().find(|(_, w)| **w == 0.0) {
            return Err(Error::InvalidArgument(format!("omega_f for link {} is {w}", k + 1)));
        }
        for (name, x) in [("kappa_a", self.kappa_a), ("kappa_c", self.kappa_c)] {
            if !(x >= 0.0) || !x.is_finite() {
                return Err(Error::InvalidArgument(format!("{name} must be non-negative, got {x}")));
            }
        }
        if !(self.strong_coupling_ratio > 0.0) {
            return Err(Error::InvalidArgument("strong_coupling_ratio must be positive".into()));
        }
        Ok(())
    }

    fn regime_warnings(&self) -> Vec<String> {
        let kappa = self.kappa_a.max(self.kappa_c);
        self.f
            .iter()
            .enumerate()
            .filter(|(_, f)| f.abs() < self.strong_coupling_ratio * kappa)
            .map(|(k, f)| {
                format!(
                    "cavity {}: f/kappa = {:.3} below strong-coupling ratio {}",
                    k + 1,
                    f.abs() / kappa,
                    self.strong_coupling_ratio
                )
            })
            .collect()
    }
}

pub fn effective_parameters(p: &CavityChainParams) -> Result<EffectiveChainParams> {
    p.validate()?;
    let shift: Vec<f64> = p.j_fiber.iter().zip(&p.omega_f).map(|(j, w)| j * j / w).collect();
    let omega_prime = (0..p.n)
        .map(|k| {
            let left = if k > 0 { shift[k - 1] } else { 0.0 };
            let right = if k + 1 < p.n { shift[k] } else { 0.0 };
            p.omega_c[k] - p.f[k] - left - right
        })
        .collect();
    let j_prime = shift.iter().map(|s| -s).collect();
    let omega_e_prime = p
        .omega_e
        .as_ref()
        .map(|e| e.iter().zip(&shift).map(|(w, s)| w - 2.0 * s).collect());
    let eta_scale = p.j_fiber.iter().zip(&p.omega_f).map(|(j, w)| j / w).collect();
    Ok(EffectiveChainParams {
        omega_prime,
        j_prime,
        omega_e_prime,
        eta_scale,
        warnings: p.regime_warnings(),
        interpretation: INTERPRETATION_NOTE.to_string(),
    })
}

/// Open chain with `ω = ω'`, `J = J'` and the given per-link decay rates.
pub fn to_network(p: &EffectiveChainParams, gamma: &[f64]) -> Result<NetworkGraph> {
    let n = p.omega_prime.len();
    if p.j_prime.len() + 1 != n || gamma.len() + 1 != n {
        return Err(Error::InvalidArgument(format!(
            "chain of {n} sites needs {} couplings and rates, got {} and {}",
            n.saturating_sub(1),
            p.j_prime.len(),
            gamma.len()
        )));
    }
    if let Some((k, g)) = gamma.iter().enumerate().find(|(_, g)| !(**g > 0.0)) {
        return Err(Error::InvalidArgument(format!("decay rate for link {} must be positive, got {g}", k + 1)));
    }
    let edges: Vec<_> = (0..n - 1).map(|k| (k, k + 1, p.j_prime[k], gamma[k])).collect();
    NetworkGraph::new(n, &edges, p.omega_prime.clone())
}
