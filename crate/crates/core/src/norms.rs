//! Weighted integrals and the fractional energy seminorm.

use crate::error::{reject, Result};
use crate::fraclap::SpectralOperator;
use crate::grid::Field;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedNorms {
    /// `∫ |f| ρ dx`.
    pub l1_rho: f64,
    pub sup_norm: f64,
    /// `‖(-Δ)^{s/4} f‖_{L^2}` on the torus.
    pub energy_seminorm: f64,
}

impl WeightedNorms {
    pub fn compute(f: &Field, rho: &Field, s: f64) -> Result<Self> {
        let abs = f.map(f64::abs);
        Ok(WeightedNorms {
            l1_rho: weighted_l1(&abs, rho)?,
            sup_norm: f.sup_norm(),
            energy_seminorm: energy_seminorm(f, s)?,
        })
    }
}

/// Trapezoid approximation of `∫ f ρ dx`.
pub fn weighted_l1(f: &Field, rho: &Field) -> Result<f64> {
    f.inner(rho)
}

/// `(Σ_k |ξ_k|^s |f̂_k|^2)^{1/2}`, normalized so that `s → 0` recovers the
/// `L^2` norm; this is `‖(-Δ)^{s/4} f‖_{L^2}`.
pub fn energy_seminorm(f: &Field, s: f64) -> Result<f64> {
    if !(s > 0.0 && s <= 2.0) {
        return reject(format!("seminorm order must lie in (0,2], got {s}"));
    }
    Ok(SpectralOperator::new(*f.grid(), s)?.quadratic_form(f)?.max(0.0).sqrt())
}
