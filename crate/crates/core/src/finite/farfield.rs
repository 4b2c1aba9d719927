//! Far-field bookkeeping for solved arrays.
//!
//! With dipoles in units of ε₀λ³E₀, the far-field amplitude along n̂ is
//! F(n̂) = Σ_j (I − n̂n̂ᵀ)·p_j·e^{−ik n̂·r_j}. Scattered power is
//! (k³/16π²)∫|F|²dΩ and extinguished power Im Σ_j E₀*(r_j)·p_j, both in the
//! same units, so their ratio is one for a lossless array.

use gauss_quad::GaussLegendre;
use num_complex::Complex64;
use std::num::NonZeroUsize;
use std::f64::consts::PI;

use super::DipoleSolution;
use crate::error::{Error, Result};
use crate::numerics::{complement_basis, complexify, CVec3, RVec3, I};

/// Polar nodes of the full-sphere rule.
pub const THETA_NODES: usize = 26;
/// Azimuthal nodes of the full-sphere rule.
pub const PHI_NODES: usize = 52;

pub fn far_field_amplitude(sol: &DipoleSolution, n: &RVec3) -> CVec3 {
    let n = n.normalize();
    let nc = complexify(&n);
    let mut f = CVec3::zeros();
    for (r, p) in sol.positions.iter().zip(&sol.dipoles) {
        let ph = (-I * sol.k * n.dot(r)).exp();
        f += (p - nc * nc.dot(p)) * ph;
    }
    f
}

/// ∫|F|² over cos ψ ∈ [lo, 1] about `z`, Gauss–Legendre in cos ψ and
/// midpoint in azimuth.
fn polar_integral(sol: &DipoleSolution, z: &RVec3, u: &RVec3, v: &RVec3, lo: f64) -> f64 {
    let rule = GaussLegendre::new(NonZeroUsize::new(THETA_NODES).expect("non-zero"));
    let dphi = 2.0 * PI / PHI_NODES as f64;
    rule.integrate(lo, 1.0, |c| {
        let s = (1.0 - c * c).max(0.0).sqrt();
        (0..PHI_NODES)
            .map(|j| {
                let phi = (j as f64 + 0.5) * dphi;
                let n = z * c + (u * phi.cos() + v * phi.sin()) * s;
                far_field_amplitude(sol, &n).norm_squared()
            })
            .sum::<f64>()
            * dphi
    })
}

fn power_weight(k: f64) -> f64 {
    k * k * k / (16.0 * PI * PI)
}

/// Total scattered power on the 26×52 product rule.
pub fn scattered_power(sol: &DipoleSolution) -> f64 {
    let z = RVec3::z();
    let (u, v) = (RVec3::x(), RVec3::y());
    power_weight(sol.k) * polar_integral(sol, &z, &u, &v, -1.0)
}

/// Im Σ E₀*·p over the sites.
pub fn extinguished_power(sol: &DipoleSolution) -> f64 {
    sol.incident_at_sites
        .iter()
        .zip(&sol.dipoles)
        .map(|(e, p)| e.iter().zip(p.iter()).map(|(a, b)| a.conj() * b).sum::<Complex64>().im)
        .sum()
}

/// Scattered power inside the cone of half-angle `half_angle` about `axis`.
pub fn cone_power(sol: &DipoleSolution, axis: &RVec3, half_angle: f64) -> Result<f64> {
    if !(half_angle > 0.0 && half_angle <= PI / 2.0) {
        return Err(Error::Domain(format!("cone half-angle {half_angle} outside (0, π/2]")));
    }
    let z = axis.normalize();
    let (u, v) = complement_basis(&z);
    Ok(power_weight(sol.k) * polar_integral(sol, &z, &u, &v, half_angle.cos()))
}
