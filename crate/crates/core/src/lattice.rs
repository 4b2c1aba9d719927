//! Square-lattice geometry, in-plane wavevectors and diffraction orders.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::numerics::RVec3;

/// Relative distance to a diffraction threshold treated as degenerate.
pub const THRESHOLD_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SquareLattice {
    pub a: f64,
}

impl SquareLattice {
    pub fn new(a: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::Domain(format!("lattice constant must be positive, got {a}")));
        }
        Ok(Self { a })
    }

    pub fn cell_area(&self) -> f64 {
        self.a * self.a
    }

    pub fn site(&self, nx: i64, ny: i64) -> RVec3 {
        RVec3::new(self.a * nx as f64, self.a * ny as f64, 0.0)
    }

    pub fn reciprocal(&self, mx: i64, my: i64) -> [f64; 2] {
        let b = 2.0 * PI / self.a;
        [b * mx as f64, b * my as f64]
    }
}

/// In-plane wavevector (k_x, k_y).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct KParallel {
    pub kx: f64,
    pub ky: f64,
}

impl KParallel {
    pub fn new(kx: f64, ky: f64) -> Self {
        Self { kx, ky }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    /// In-plane projection of a wavevector of length k at polar angle θ, azimuth φ.
    pub fn from_angles(k: f64, theta: f64, phi: f64) -> Self {
        let s = k * theta.sin();
        Self::new(s * phi.cos(), s * phi.sin())
    }

    pub fn norm(&self) -> f64 {
        self.kx.hypot(self.ky)
    }

    pub fn neg(&self) -> Self {
        Self::new(-self.kx, -self.ky)
    }

    pub fn is_propagating(&self, k: f64) -> bool {
        self.norm() < k
    }

    /// Real, positive k_z for propagating incidence.
    pub fn kz(&self, k: f64) -> Option<f64> {
        let q = k * k - self.kx * self.kx - self.ky * self.ky;
        (q > 0.0).then(|| q.sqrt())
    }

    /// Polar and azimuthal angles of the full wavevector.
    pub fn angles(&self, k: f64) -> Option<(f64, f64)> {
        let kz = self.kz(k)?;
        let theta = self.norm().atan2(kz);
        let phi = if self.norm() == 0.0 { 0.0 } else { self.ky.atan2(self.kx) };
        Some((theta, phi))
    }
}

/// Diffraction order m = (m_x, m_y) at a given k∥.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffractionOrder {
    pub mx: i64,
    pub my: i64,
    /// In-plane wavevector k∥ + q_m.
    pub beta: [f64; 2],
    /// Out-of-plane wavenumber; real positive when propagating, i·|κ| otherwise.
    pub kappa: Complex64,
}

impl DiffractionOrder {
    pub fn new(lat: &SquareLattice, k: f64, kpar: &KParallel, mx: i64, my: i64) -> Self {
        let q = lat.reciprocal(mx, my);
        let beta = [kpar.kx + q[0], kpar.ky + q[1]];
        let b2 = beta[0] * beta[0] + beta[1] * beta[1];
        let kappa = if b2 < k * k {
            Complex64::new((k * k - b2).sqrt(), 0.0)
        } else {
            Complex64::new(0.0, (b2 - k * k).sqrt())
        };
        Self { mx, my, beta, kappa }
    }

    pub fn beta_norm(&self) -> f64 {
        self.beta[0].hypot(self.beta[1])
    }

    pub fn is_propagating(&self) -> bool {
        self.kappa.im == 0.0 && self.kappa.re > 0.0
    }

    /// Relative distance | |k∥+q| − k | / k.
    pub fn threshold_offset(&self, k: f64) -> f64 {
        (self.beta_norm() - k).abs() / k
    }
}

/// Orders with |m_x|, |m_y| ≤ bound.
fn orders_in_box(lat: &SquareLattice, k: f64, kpar: &KParallel, bound: i64) -> Vec<DiffractionOrder> {
    let mut out = Vec::with_capacity(((2 * bound + 1) * (2 * bound + 1)) as usize);
    for mx in -bound..=bound {
        for my in -bound..=bound {
            out.push(DiffractionOrder::new(lat, k, kpar, mx, my));
        }
    }
    out
}

fn enumeration_bound(lat: &SquareLattice, k: f64, kpar: &KParallel) -> i64 {
    let reach = (k + kpar.norm()) * lat.a / (2.0 * PI);
    reach.ceil() as i64 + 1
}

/// Error if any order lies within the degeneracy tolerance of its threshold.
pub fn check_thresholds(lat: &SquareLattice, k: f64, kpar: &KParallel) -> Result<()> {
    let bound = enumeration_bound(lat, k, kpar);
    for o in orders_in_box(lat, k, kpar, bound) {
        let off = o.threshold_offset(k);
        if off < THRESHOLD_TOL {
            return Err(Error::ThresholdDegeneracy {
                mx: o.mx,
                my: o.my,
                offset: off,
            });
        }
    }
    Ok(())
}

/// All orders with |k∥ + q_m| < k, each carrying real κ_m.
pub fn propagating_orders(lat: &SquareLattice, k: f64, kpar: &KParallel) -> Result<Vec<DiffractionOrder>> {
    if !kpar.is_propagating(k) {
        return Err(Error::Domain(format!(
            "|k∥| = {:.6} is not below k = {k:.6}",
            kpar.norm()
        )));
    }
    check_thresholds(lat, k, kpar)?;
    let bound = enumeration_bound(lat, k, kpar);
    Ok(orders_in_box(lat, k, kpar, bound)
        .into_iter()
        .filter(|o| o.is_propagating())
        .collect())
}

/// Γ → X → M → Γ with `points_per_segment` samples per leg, shared corners kept once.
pub fn bz_path(a: f64, points_per_segment: usize) -> Result<Vec<KParallel>> {
    SquareLattice::new(a)?;
    if points_per_segment < 2 {
        return Err(Error::Domain("need at least 2 points per segment".into()));
    }
    let b = PI / a;
    let corners = [(0.0, 0.0), (b, 0.0), (b, b), (0.0, 0.0)];
    let n = points_per_segment;
    let mut path = vec![KParallel::zero()];
    for w in corners.windows(2) {
        let (x0, y0) = w[0];
        let (x1, y1) = w[1];
        for i in 1..n {
            let t = i as f64 / (n - 1) as f64;
            path.push(KParallel::new(x0 + t * (x1 - x0), y0 + t * (y1 - y0)));
        }
    }
    Ok(path)
}

/// Cumulative arc length along a k-path.
pub fn path_distance(path: &[KParallel]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(path.len());
    for (i, p) in path.iter().enumerate() {
        if i > 0 {
            acc += (p.kx - path[i - 1].kx).hypot(p.ky - path[i - 1].ky);
        }
        out.push(acc);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::K0;

    #[test]
    fn path_corners() {
        let p = bz_path(0.2, 2).unwrap();
        assert_eq!(p.len(), 4);
        assert!((p[1].kx - 5.0 * PI).abs() < 1e-12);
        assert!((p[2].ky - 5.0 * PI).abs() < 1e-12);
        assert_eq!(p[3], KParallel::zero());
        let p = bz_path(0.2, 3).unwrap();
        assert!((p[1].kx - 2.5 * PI).abs() < 1e-12 && p[1].ky == 0.0);
        assert!(p[2].norm() > K0);
    }

    #[test]
    fn single_order_below_half_wavelength() {
        let lat = SquareLattice::new(0.2).unwrap();
        for (t, f) in [(0.0, 0.0), (0.7, 0.3), (1.4, 2.0)] {
            let o = propagating_orders(&lat, K0, &KParallel::from_angles(K0, t, f)).unwrap();
            assert_eq!(o.len(), 1);
            assert_eq!((o[0].mx, o[0].my), (0, 0));
        }
    }

    #[test]
    fn oblique_incidence_opens_second_order() {
        let lat = SquareLattice::new(0.707).unwrap();
        let k = KParallel::from_angles(K0, PI / 6.0, 0.0);
        let mut o: Vec<_> = propagating_orders(&lat, K0, &k)
            .unwrap()
            .iter()
            .map(|o| (o.mx, o.my))
            .collect();
        o.sort();
        assert_eq!(o, vec![(-1, 0), (0, 0)]);
        let lat = SquareLattice::new(0.9).unwrap();
        assert_eq!(propagating_orders(&lat, K0, &KParallel::zero()).unwrap().len(), 1);
    }

    #[test]
    fn threshold_is_an_error() {
        let lat = SquareLattice::new(1.0).unwrap();
        let e = propagating_orders(&lat, K0, &KParallel::zero()).unwrap_err();
        assert!(matches!(e, Error::ThresholdDegeneracy { .. }));
    }
}
