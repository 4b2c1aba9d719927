//! Free-space dyadic Green's function.
//!
//! G_ij(r) = e^{ikr}/(4πr) [ (1 + (ikr−1)/(kr)²) δ_ij + (−1 + (3−3ikr)/(kr)²) r̂_i r̂_j ]
//!
//! G carries units of inverse length; lattice sums use the dimensionless λ·G.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::numerics::{CTensor3, RVec3, I};

/// Separations below this (in λ) are rejected; the coincident point is
/// handled only through the self-term convention.
pub const MIN_SEPARATION: f64 = 1e-6;

/// Scalar coefficients (A, B) with G = A·δ + B·r̂r̂ᵀ, and the unit vector r̂.
#[inline]
pub fn green_coefficients(k: f64, r: &RVec3) -> (Complex64, Complex64, RVec3) {
    let d = r.norm();
    let kr = k * d;
    let inv2 = 1.0 / (kr * kr);
    let pref = Complex64::from_polar(1.0 / (4.0 * PI * d), kr);
    let a = pref * (1.0 + (I * kr - 1.0) * inv2);
    let b = pref * (-1.0 + (3.0 - 3.0 * I * kr) * inv2);
    (a, b, r / d)
}

#[inline]
pub(crate) fn assemble(a: Complex64, b: Complex64, n: &RVec3) -> CTensor3 {
    let mut g = CTensor3::zeros();
    for i in 0..3 {
        for j in 0..3 {
            g[(i, j)] = b * (n[i] * n[j]);
        }
        g[(i, i)] += a;
    }
    g
}

/// Dyadic Green's tensor for separation `r` at wavenumber `k`.
pub fn dyadic_green(k: f64, r: &RVec3) -> Result<CTensor3> {
    if !(k > 0.0) {
        return Err(Error::Domain(format!("wavenumber must be positive, got {k}")));
    }
    let d = r.norm();
    if !d.is_finite() || d < MIN_SEPARATION {
        return Err(Error::Domain(format!(
            "separation {d:.3e} below {MIN_SEPARATION:.0e}; use self_green_imag for the coincident limit"
        )));
    }
    let (a, b, n) = green_coefficients(k, r);
    Ok(assemble(a, b, &n))
}

/// Imaginary part of the coincident-point Green's tensor, (i/3λ)·δ_ij.
pub fn self_green_imag(k: f64) -> Result<CTensor3> {
    if !(k > 0.0) {
        return Err(Error::Domain(format!("wavenumber must be positive, got {k}")));
    }
    let lambda = 2.0 * PI / k;
    Ok(CTensor3::identity() * (I / (3.0 * lambda)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::K0;

    #[test]
    fn axis_separation_has_no_cross_terms() {
        let g = dyadic_green(K0, &RVec3::new(0.0, 0.0, 0.37)).unwrap();
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            assert_eq!(g[(i, j)], Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn self_term_at_unit_wavelength() {
        let s = self_green_imag(K0).unwrap();
        for i in 0..3 {
            assert!((s[(i, i)] - I / 3.0).norm() < 1e-15);
        }
        assert!(s.iter().all(|z| z.re == 0.0));
    }

    #[test]
    fn small_separation_limit_of_imaginary_part() {
        let g = dyadic_green(K0, &RVec3::new(1e-3, 0.0, 0.0)).unwrap();
        let s = self_green_imag(K0).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((g[(i, j)].im - s[(i, j)].im).abs() < 1e-4);
            }
        }
    }

    #[test]
    fn rejects_coincident_points() {
        assert!(dyadic_green(K0, &RVec3::new(1e-7, 0.0, 0.0)).is_err());
        assert!(dyadic_green(K0, &RVec3::zeros()).is_err());
        assert!(dyadic_green(0.0, &RVec3::x()).is_err());
    }
}
