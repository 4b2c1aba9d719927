//! Paraxial Gaussian beams and plane waves as incident fields.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::numerics::{complexify, CVec3, RVec3, I};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BeamPol {
    P,
    S,
    /// Normal incidence only.
    X,
    /// Normal incidence only.
    Y,
}

/// Gaussian beam focused at the origin, propagating along (sinθ, 0, cosθ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamSpec {
    pub w0: f64,
    pub theta: f64,
    pub pol: BeamPol,
    pub amplitude: f64,
}

impl BeamSpec {
    pub fn new(w0: f64, theta: f64, pol: BeamPol) -> Result<Self> {
        if !(w0 >= 0.5) {
            return Err(Error::Precondition(format!("waist {w0} below λ/2 breaks the paraxial form")));
        }
        if !(0.0..PI / 2.0).contains(&theta) {
            return Err(Error::Domain(format!("incidence angle {theta} outside [0, π/2)")));
        }
        if matches!(pol, BeamPol::X | BeamPol::Y) && theta != 0.0 {
            return Err(Error::Domain("x/y polarization labels apply at normal incidence only".into()));
        }
        Ok(Self {
            w0,
            theta,
            pol,
            amplitude: 1.0,
        })
    }

    pub fn rayleigh_range(&self) -> f64 {
        PI * self.w0 * self.w0
    }

    pub fn width(&self, z: f64) -> f64 {
        self.w0 * (1.0 + (z / self.rayleigh_range()).powi(2)).sqrt()
    }

    /// 1/R(z); zero at the focus.
    pub fn inverse_curvature(&self, z: f64) -> f64 {
        let zr = self.rayleigh_range();
        z / (z * z + zr * zr)
    }

    pub fn gouy(&self, z: f64) -> f64 {
        (z / self.rayleigh_range()).atan()
    }

    /// Beam power (π/2)w₀²|E₀|², in units of cε₀E₀²λ².
    pub fn power(&self) -> f64 {
        PI / 2.0 * self.w0 * self.w0 * self.amplitude * self.amplitude
    }

    pub fn polarization(&self) -> RVec3 {
        let (s, c) = self.theta.sin_cos();
        match self.pol {
            BeamPol::P | BeamPol::X => RVec3::new(c, 0.0, -s),
            BeamPol::S => RVec3::new(0.0, -1.0, 0.0),
            BeamPol::Y => RVec3::new(0.0, 1.0, 0.0),
        }
    }

    pub fn direction(&self) -> RVec3 {
        let (s, c) = self.theta.sin_cos();
        RVec3::new(s, 0.0, c)
    }

    /// w₀ ≤ 0.3·a·√N·cosθ, keeping edge diffraction small.
    pub fn waist_rule(&self, a: f64, n_sites: usize) -> bool {
        self.w0 <= 0.3 * a * (n_sites as f64).sqrt() * self.theta.cos() + 1e-12
    }
}

/// Paraxial Gaussian field at `r`.
pub fn gaussian_beam(beam: &BeamSpec, k: f64, r: &RVec3) -> CVec3 {
    let (s, c) = beam.theta.sin_cos();
    let xp = r.x * c - r.z * s;
    let yp = r.y;
    let zp = r.z * c + r.x * s;
    let w = beam.width(zp);
    let rho2 = xp * xp + yp * yp;
    let phase = k * zp - beam.gouy(zp) + k * rho2 * beam.inverse_curvature(zp) / 2.0;
    let amp = beam.amplitude * beam.w0 / w * (-rho2 / (w * w)).exp();
    complexify(&beam.polarization()) * Complex64::from_polar(amp, phase)
}

/// Incident field driving a finite array.
#[derive(Debug, Clone, PartialEq)]
pub enum Incident {
    PlaneWave { direction: RVec3, polarization: CVec3 },
    Beam(BeamSpec),
    Superposition(Vec<(Complex64, Incident)>),
}

impl Incident {
    pub fn plane_wave(direction: RVec3, polarization: CVec3) -> Result<Self> {
        let n = direction.norm();
        if !(n > 0.0) {
            return Err(Error::Domain("plane-wave direction must be non-zero".into()));
        }
        let d = direction / n;
        if complexify(&d).dot(&polarization).norm() > 1e-12 * polarization.norm().max(1.0) {
            return Err(Error::Domain("plane-wave polarization not transverse".into()));
        }
        Ok(Incident::PlaneWave {
            direction: d,
            polarization,
        })
    }

    pub fn field(&self, k: f64, r: &RVec3) -> CVec3 {
        match self {
            Incident::PlaneWave {
                direction,
                polarization,
            } => polarization * (I * k * direction.dot(r)).exp(),
            Incident::Beam(b) => gaussian_beam(b, k, r),
            Incident::Superposition(parts) => parts
                .iter()
                .fold(CVec3::zeros(), |acc, (w, inc)| acc + inc.field(k, r) * *w),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::K0;

    #[test]
    fn focus_and_waist() {
        let b = BeamSpec::new(1.5, 0.0, BeamPol::X).unwrap();
        let e = gaussian_beam(&b, K0, &RVec3::zeros());
        assert!((e.x - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        let e = gaussian_beam(&b, K0, &RVec3::new(1.5, 0.0, 0.0));
        assert!((e.x.norm() - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn tilted_axis() {
        let t = PI / 6.0;
        let b = BeamSpec::new(1.0, t, BeamPol::P).unwrap();
        let on = gaussian_beam(&b, K0, &(RVec3::new(t.sin(), 0.0, t.cos()) * 4.0)).norm();
        for off in [-0.2, 0.2] {
            let p = RVec3::new(t.sin(), 0.0, t.cos()) * 4.0 + RVec3::new(t.cos(), 0.0, -t.sin()) * off;
            assert!(gaussian_beam(&b, K0, &p).norm() < on);
        }
        assert!((b.polarization() - RVec3::new(t.cos(), 0.0, -t.sin())).norm() < 1e-15);
    }

    #[test]
    fn rejects_non_paraxial() {
        assert!(BeamSpec::new(0.4, 0.0, BeamPol::S).is_err());
        assert!(BeamSpec::new(1.0, 0.3, BeamPol::X).is_err());
    }
}
