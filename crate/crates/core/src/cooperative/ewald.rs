//! Ewald splitting of the quasi-periodic dyadic lattice sum.
//!
//! The scalar sum Φ = Σ_{n≠0} e^{ikR_n}/(4πR_n) e^{−ik∥·R_n} and its Hessian
//! at the origin are split with parameter E into a spectral part over
//! reciprocal vectors and a spatial part over lattice sites, both converging
//! like Gaussians. The removed n = 0 term is handled by subtracting the
//! r → 0 expansion of the spatial kernel minus the bare spherical wave.
//! The dyadic sum follows as g = Φ·δ + ∇∇Φ/k².

use errorfunctions::ComplexErrorFunctions;
use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::Result;
use crate::lattice::{check_thresholds, DiffractionOrder, KParallel, SquareLattice};
use crate::numerics::{c, CTensor3, I};

/// Largest k/(2E) allowed; bounds the e^{k²/4E²} growth of the spatial terms.
const MAX_SPLIT_RATIO: f64 = 3.0;
/// Gaussian decay exponent kept in both sums (e^{-42} ≈ 6e-19).
const DECAY: f64 = 6.5;

/// Default splitting parameter √π/a, capped so that k/(2E) ≤ 3.
pub fn default_split(a: f64, k: f64) -> f64 {
    (PI.sqrt() / a).max(k / (2.0 * MAX_SPLIT_RATIO))
}

/// λ·Σ_{n≠0} G(R_n) e^{−ik∥·R_n} with splitting parameter `e`.
pub fn ewald_sum(lat: &SquareLattice, k: f64, kpar: &KParallel, e: f64) -> Result<CTensor3> {
    check_thresholds(lat, k, kpar)?;
    let a = lat.a;
    let area = lat.cell_area();
    let mut phi = Complex64::new(0.0, 0.0);
    let mut hess = CTensor3::zeros();

    // spectral part
    let reach = 2.0 * e * DECAY + kpar.norm() + k;
    let m_max = (reach * a / (2.0 * PI)).ceil() as i64 + 1;
    for mx in -m_max..=m_max {
        for my in -m_max..=m_max {
            let o = DiffractionOrder::new(lat, k, kpar, mx, my);
            // γ = √(|β|²−k²), equal to −iκ for propagating orders
            let gam = -I * o.kappa;
            let x = gam / (2.0 * e);
            let erfc_x = x.erfc();
            let pre = 1.0 / (4.0 * area * gam);
            let h0 = 2.0 * erfc_x * pre;
            let h2 = (2.0 * gam * gam * erfc_x - 4.0 * gam * e / PI.sqrt() * (-x * x).exp()) * pre;
            let [bx, by] = o.beta;
            phi += h0;
            hess[(0, 0)] -= h0 * (bx * bx);
            hess[(1, 1)] -= h0 * (by * by);
            hess[(0, 1)] -= h0 * (bx * by);
            hess[(2, 2)] += h2;
        }
    }

    // spatial part
    let u = I * k / (2.0 * e);
    let shift = k * k / (4.0 * e * e);
    let n_max = (DECAY / (a * e)).ceil() as i64 + 1;
    for nx in -n_max..=n_max {
        for ny in -n_max..=n_max {
            if nx == 0 && ny == 0 {
                continue;
            }
            let rx = a * nx as f64;
            let ry = a * ny as f64;
            let d = rx.hypot(ry);
            let phase = Complex64::from_polar(1.0, -(kpar.kx * rx + kpar.ky * ry));
            let eikd = Complex64::from_polar(1.0, k * d);
            let ta = eikd * (c(d * e) + u).erfc();
            let tb = eikd.conj() * (c(d * e) - u).erfc();
            let s = ta + tb;
            let q = 2.0 * e / PI.sqrt() * (shift - d * d * e * e).exp();
            let s1 = I * k * (ta - tb) - 2.0 * q;
            let s2 = -k * k * s + 4.0 * d * e * e * q;
            let f0 = s / (8.0 * PI * d);
            let f1 = (s1 / d - s / (d * d)) / (8.0 * PI);
            let f2 = (s2 / d - 2.0 * s1 / (d * d) + 2.0 * s / (d * d * d)) / (8.0 * PI);
            let (ux, uy) = (rx / d, ry / d);
            let t = f1 / d;
            phi += phase * f0;
            hess[(0, 0)] += phase * (f2 * ux * ux + t * (1.0 - ux * ux));
            hess[(1, 1)] += phase * (f2 * uy * uy + t * (1.0 - uy * uy));
            hess[(0, 1)] += phase * ((f2 - t) * ux * uy);
            hess[(2, 2)] += phase * t;
        }
    }

    // n = 0 correction: spatial kernel minus e^{ikr}/4πr ≈ F0 + F1 r²
    let w = (I * k / (2.0 * e)).erfc();
    let gauss = shift.exp();
    let p32 = PI.powf(1.5);
    let p52 = PI.powf(2.5);
    let f0 = (-2.0 * PI * e * gauss + I * p32 * k * (w - 2.0)) / (4.0 * p52);
    let f1 = (2.0 * PI * e * (2.0 * e * e + k * k) * gauss + I * p32 * k.powi(3) * (2.0 - w)) / (24.0 * p52);
    phi += f0;
    for i in 0..3 {
        hess[(i, i)] += 2.0 * f1;
    }

    hess[(1, 0)] = hess[(0, 1)];
    let lambda = 2.0 * PI / k;
    let mut g = hess * c(1.0 / (k * k));
    for i in 0..3 {
        g[(i, i)] += phi;
    }
    Ok(g * c(lambda))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::K0;

    #[test]
    fn self_correction_constant() {
        // F0 at a = 0.2 with the default split, cross-checked against a
        // direct small-r fit of the kernel difference
        let e = default_split(0.2, K0);
        let u = I * K0 / (2.0 * e);
        let kernel = |r: f64| {
            let eikr = Complex64::from_polar(1.0, K0 * r);
            (eikr * (c(r * e) + u).erfc() + eikr.conj() * (c(r * e) - u).erfc()) / (8.0 * PI * r)
                - eikr / (4.0 * PI * r)
        };
        let (r1, r2) = (1e-3 / e, 2e-3 / e);
        let f1 = (kernel(r2) - kernel(r1)) / (r2 * r2 - r1 * r1);
        let f0 = kernel(r1) - f1 * r1 * r1;
        let w = u.erfc();
        let want = (-2.0 * PI * e * (K0 * K0 / (4.0 * e * e)).exp() + I * PI.powf(1.5) * K0 * (w - 2.0))
            / (4.0 * PI.powf(2.5));
        assert!((f0 - want).norm() < 1e-6);
        assert!((want.im + 0.5).abs() < 1e-12);
    }

    #[test]
    fn independent_of_split_parameter() {
        let lat = SquareLattice::new(0.37).unwrap();
        let kp = KParallel::new(1.3, -0.4);
        let e0 = default_split(lat.a, K0);
        let g1 = ewald_sum(&lat, K0, &kp, e0).unwrap();
        let g2 = ewald_sum(&lat, K0, &kp, 0.7 * e0).unwrap();
        assert!((g1 - g2).camax() < 1e-10);
    }
}
