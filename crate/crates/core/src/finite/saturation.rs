//! Beam power needed to saturate an array driven at cooperative resonance.
//!
//! At δ = Δ the array absorbs the whole beam, and site n takes the fraction
//! P_n = a²/((π/2)w₀²)·exp(−2a²(n_x² + n_y²)/w₀²) of it. Saturation sets in
//! once the central atom scatters (Γ+γ) photons per unit time, i.e. at a
//! total rate of N = 1/P₀ times that.

use std::f64::consts::PI;

use crate::cooperative::cooperative_response;
use crate::error::{Error, Result};
use crate::lattice::KParallel;
use crate::numerics::{GAMMA, K0};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Saturation {
    /// Power fraction absorbed by the central atom.
    pub p0: f64,
    /// Effective number of atoms sharing the beam, 1/P₀.
    pub n_atoms: f64,
    /// Γ + γ at normal incidence, units γ.
    pub linewidth: f64,
    /// Δ at normal incidence, units γ.
    pub delta: f64,
    /// Saturating power in units ħω_a γ.
    pub w_sat: f64,
    /// Σ_n P_n over the sites within six waists.
    pub fraction_sum: f64,
}

/// Saturation estimate for a normally incident beam of waist `w0` on a
/// lattice of constant `a` driven at δ = Δ (lossless emitters).
pub fn saturation_estimate(a: f64, w0: f64, tol: f64) -> Result<Saturation> {
    if !(w0 >= 0.5) {
        return Err(Error::Precondition(format!("waist {w0} below λ/2 breaks the paraxial form")));
    }
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::WrongRegime(format!(
            "a = {a}: normal-incidence estimate needs a single propagating order"
        )));
    }
    let coop = cooperative_response(a, K0, &KParallel::zero(), tol)?;
    let linewidth = coop.gamma[(0, 0)] + GAMMA;
    let p0 = a * a / (PI / 2.0 * w0 * w0);
    let reach = (6.0 * w0 / a).ceil() as i64;
    let mut fraction_sum = 0.0;
    for nx in -reach..=reach {
        for ny in -reach..=reach {
            let r2 = ((nx * nx + ny * ny) as f64) * a * a;
            fraction_sum += p0 * (-2.0 * r2 / (w0 * w0)).exp();
        }
    }
    let n_atoms = 1.0 / p0;
    Ok(Saturation {
        p0,
        n_atoms,
        linewidth,
        delta: coop.delta[(0, 0)],
        w_sat: n_atoms * linewidth,
        fraction_sum,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wide_beam_spreads_power() {
        let narrow = saturation_estimate(0.3, 1.0, 1e-4).unwrap();
        let wide = saturation_estimate(0.3, 20.0, 1e-4).unwrap();
        assert!(wide.p0 < narrow.p0 / 100.0);
        assert!((wide.fraction_sum - 1.0).abs() < 1e-10);
    }

    #[test]
    fn rejects_non_paraxial() {
        assert!(saturation_estimate(0.3, 0.3, 1e-4).is_err());
    }
}
