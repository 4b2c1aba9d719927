//! Linear response of the infinite array: polarizabilities, p/s bases,
//! scattering matrices and the diffraction-order field expansion.
//!
//! Polarizabilities are in units of ε₀λ_a³, detunings and widths in γ.

use nalgebra::Matrix2;
use num_complex::Complex64;
use std::f64::consts::PI;

use crate::cooperative::CooperativeResponse;
use crate::error::{Error, Result};
use crate::lattice::{check_thresholds, propagating_orders, DiffractionOrder, KParallel, SquareLattice};
use crate::numerics::{c, complexify, CTensor3, CVec3, RVec3, I, K0};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmitterParams {
    pub gamma: f64,
    pub gamma_nr: f64,
    pub lambda_a: f64,
}

impl EmitterParams {
    pub fn new(gamma_nr: f64) -> Result<Self> {
        if !(gamma_nr >= 0.0 && gamma_nr.is_finite()) {
            return Err(Error::Domain(format!("gamma_nr must be non-negative, got {gamma_nr}")));
        }
        Ok(Self {
            gamma: 1.0,
            gamma_nr,
            lambda_a: 1.0,
        })
    }

    pub fn lossless() -> Self {
        Self {
            gamma: 1.0,
            gamma_nr: 0.0,
            lambda_a: 1.0,
        }
    }
}

/// α/(ε₀λ_a³) = −(3/4π²)·(γ/2)/(δ + i(γ+γ_nr)/2).
pub fn bare_polarizability(p: &EmitterParams, delta: f64) -> Complex64 {
    -3.0 / (4.0 * PI * PI) * (p.gamma / 2.0) / (delta + I * (p.gamma + p.gamma_nr) / 2.0)
}

/// α_e/(ε₀λ³) = −(3/4π²)(γ/2)·[δ − Δ + i(γ+γ_nr+Γ)/2]⁻¹, inverted block-wise.
pub fn effective_polarizability(coop: &CooperativeResponse, p: &EmitterParams, delta: f64) -> Result<CTensor3> {
    let mut m = CTensor3::zeros();
    for i in 0..3 {
        for j in 0..3 {
            m[(i, j)] = -c(coop.delta[(i, j)]) + I * coop.gamma[(i, j)] / 2.0;
        }
        m[(i, i)] += delta + I * (p.gamma + p.gamma_nr) / 2.0;
    }
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    let scale = m[(0, 0)].norm().max(m[(1, 1)].norm()).max(m[(0, 1)].norm());
    if det.norm() <= 1e-14 * scale * scale {
        return Err(Error::SingularResponse("in-plane block of the response bracket".into()));
    }
    if m[(2, 2)].norm() <= 1e-14 {
        return Err(Error::SingularResponse("zz entry of the response bracket".into()));
    }
    let pref = -3.0 / (4.0 * PI * PI) * p.gamma / 2.0;
    let mut inv = CTensor3::zeros();
    inv[(0, 0)] = m[(1, 1)] / det;
    inv[(1, 1)] = m[(0, 0)] / det;
    inv[(0, 1)] = -m[(0, 1)] / det;
    inv[(1, 0)] = -m[(1, 0)] / det;
    inv[(2, 2)] = 1.0 / m[(2, 2)];
    Ok(inv * c(pref))
}

/// Forward and backward polarization triplets for incidence (θ, φ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolBasis {
    pub theta: f64,
    pub phi: f64,
    pub k_fwd: RVec3,
    pub p_fwd: RVec3,
    pub s_fwd: RVec3,
    pub k_bwd: RVec3,
    pub p_bwd: RVec3,
    pub s_bwd: RVec3,
}

impl PolBasis {
    /// Unit vector for polarization index 0 = p, 1 = s.
    pub fn fwd(&self, mu: usize) -> RVec3 {
        [self.p_fwd, self.s_fwd][mu]
    }

    pub fn bwd(&self, mu: usize) -> RVec3 {
        [self.p_bwd, self.s_bwd][mu]
    }
}

pub fn pol_basis(theta: f64, phi: f64) -> Result<PolBasis> {
    if !(0.0..PI / 2.0).contains(&theta) || !phi.is_finite() {
        return Err(Error::Domain(format!("need 0 ≤ θ < π/2, got θ = {theta}")));
    }
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    let s = RVec3::new(sp, -cp, 0.0);
    Ok(PolBasis {
        theta,
        phi,
        k_fwd: RVec3::new(st * cp, st * sp, ct),
        p_fwd: RVec3::new(ct * cp, ct * sp, -st),
        s_fwd: s,
        k_bwd: RVec3::new(st * cp, st * sp, -ct),
        p_bwd: RVec3::new(-ct * cp, -ct * sp, -st),
        s_bwd: s,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    SingleOrder,
    MultiOrder,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScatterResult {
    pub kpar: KParallel,
    pub delta: f64,
    /// Indexed (μ, ν) with 0 = p, 1 = s; ν is the incident polarization.
    pub s_plus: Matrix2<Complex64>,
    pub s_minus: Matrix2<Complex64>,
    pub r: Matrix2<f64>,
    pub t: Matrix2<f64>,
    pub regime: Regime,
}

impl ScatterResult {
    /// Σ_μ (T_μν + R_μν) for incident polarization ν.
    pub fn energy_balance(&self, nu: usize) -> f64 {
        self.t.column(nu).sum() + self.r.column(nu).sum()
    }
}

/// 2×2 forward/backward scattering matrices in the p/s basis.
pub fn scattering_matrix(
    coop: &CooperativeResponse,
    p: &EmitterParams,
    delta: f64,
    theta: f64,
    phi: f64,
) -> Result<ScatterResult> {
    let k = K0;
    let basis = pol_basis(theta, phi)?;
    let kpar = KParallel::from_angles(k, theta, phi);
    if (kpar.kx - coop.kpar.kx).hypot(kpar.ky - coop.kpar.ky) > 1e-9 * k {
        return Err(Error::ContractViolation(
            "cooperative response was evaluated at a different k∥".into(),
        ));
    }
    let lat = SquareLattice::new(coop.a)?;
    let orders = propagating_orders(&lat, k, &kpar)?;
    if orders.len() != 1 {
        return Err(Error::WrongRegime(format!(
            "{} propagating orders; use scattered_field_orders",
            orders.len()
        )));
    }
    let alpha = effective_polarizability(coop, p, delta)?;
    let kz = kpar.kz(k).expect("propagating");
    let pref = I * PI / (coop.a * coop.a) * (k / kz);
    let mut s_plus = Matrix2::zeros();
    let mut s_minus = Matrix2::zeros();
    for nu in 0..2 {
        let a_e = alpha * complexify(&basis.fwd(nu));
        for mu in 0..2 {
            s_plus[(mu, nu)] = pref * complexify(&basis.fwd(mu)).dot(&a_e);
            s_minus[(mu, nu)] = pref * complexify(&basis.bwd(mu)).dot(&a_e);
        }
    }
    let mut t = Matrix2::zeros();
    let mut r = Matrix2::zeros();
    for mu in 0..2 {
        for nu in 0..2 {
            let d = if mu == nu { 1.0 } else { 0.0 };
            t[(mu, nu)] = (s_plus[(mu, nu)] + d).norm_sqr();
            r[(mu, nu)] = s_minus[(mu, nu)].norm_sqr();
        }
    }
    Ok(ScatterResult {
        kpar,
        delta,
        s_plus,
        s_minus,
        r,
        t,
        regime: Regime::SingleOrder,
    })
}

/// Scattering amplitude at δ = Δ, normal incidence: −(Γ+γ)/(Γ+γ+γ_nr).
pub fn lossy_resonance_amplitude(gamma_coop: f64, gamma: f64, gamma_nr: f64) -> Result<Complex64> {
    let w = gamma_coop + gamma;
    if !(w > 0.0) {
        return Err(Error::Precondition(format!("Γ+γ must be positive, got {w}")));
    }
    Ok(c(-w / (w + gamma_nr)))
}

/// Which diffraction orders enter the plane-wave expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderSelection {
    Propagating,
    /// All orders with |m_x|, |m_y| ≤ bound, evanescent ones included.
    WithEvanescent(i64),
}

/// Field amplitude vector carried by one order on one side of the array.
fn order_amplitude(
    o: &DiffractionOrder,
    k: f64,
    area: f64,
    polarization: &CVec3,
    below: bool,
) -> (CVec3, [Complex64; 3]) {
    let kz = if below { -o.kappa } else { o.kappa };
    let kv = [c(o.beta[0]), c(o.beta[1]), kz];
    let lambda = 2.0 * PI / k;
    let pref = 4.0 * PI * PI * I * lambda / (2.0 * area * o.kappa);
    let mut out = CVec3::zeros();
    for i in 0..3 {
        let mut s = Complex64::new(0.0, 0.0);
        for j in 0..3 {
            let d = if i == j { 1.0 } else { 0.0 };
            s += (d - kv[i] * kv[j] / (k * k)) * polarization[j];
        }
        out[i] = pref * s;
    }
    (out, kv)
}

/// Scattered field of the array at `r` for incident polarization `e0` (unit
/// amplitude plane wave with in-plane wavevector k∥).
pub fn scattered_field_orders(
    a: f64,
    k: f64,
    kpar: &KParallel,
    alpha_e: &CTensor3,
    e0: &CVec3,
    r: &RVec3,
    selection: OrderSelection,
) -> Result<CVec3> {
    let lat = SquareLattice::new(a)?;
    let orders = match selection {
        OrderSelection::Propagating => propagating_orders(&lat, k, kpar)?,
        OrderSelection::WithEvanescent(bound) => {
            if r.z == 0.0 {
                return Err(Error::Domain("evanescent expansion needs z ≠ 0".into()));
            }
            check_thresholds(&lat, k, kpar)?;
            let mut v = Vec::new();
            for mx in -bound..=bound {
                for my in -bound..=bound {
                    v.push(DiffractionOrder::new(&lat, k, kpar, mx, my));
                }
            }
            v
        }
    };
    let pol = alpha_e * e0;
    let below = r.z < 0.0;
    let mut field = CVec3::zeros();
    for o in &orders {
        let (amp, kv) = order_amplitude(o, k, lat.cell_area(), &pol, below);
        let phase = (I * (kv[0] * r.x + kv[1] * r.y + kv[2] * r.z)).exp();
        field += amp * phase;
    }
    Ok(field)
}

/// Power carried by one propagating order, as a fraction of incident power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderPower {
    pub mx: i64,
    pub my: i64,
    pub beta: [f64; 2],
    pub reflected: f64,
    pub transmitted: f64,
}

/// Reflected and transmitted power fractions of every propagating order.
pub fn diffraction_powers(
    a: f64,
    k: f64,
    kpar: &KParallel,
    alpha_e: &CTensor3,
    e0: &CVec3,
) -> Result<Vec<OrderPower>> {
    let lat = SquareLattice::new(a)?;
    let orders = propagating_orders(&lat, k, kpar)?;
    let kz_inc = kpar.kz(k).expect("propagating");
    let inc_int = e0.norm_squared();
    let pol = alpha_e * e0;
    Ok(orders
        .iter()
        .map(|o| {
            let (up, _) = order_amplitude(o, k, lat.cell_area(), &pol, false);
            let (down, _) = order_amplitude(o, k, lat.cell_area(), &pol, true);
            let up = if o.mx == 0 && o.my == 0 { up + e0 } else { up };
            let w = o.kappa.re / kz_inc / inc_int;
            OrderPower {
                mx: o.mx,
                my: o.my,
                beta: o.beta,
                reflected: down.norm_squared() * w,
                transmitted: up.norm_squared() * w,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bare_polarizability_limits() {
        let p = EmitterParams::lossless();
        let a0 = bare_polarizability(&p, 0.0);
        assert!(a0.re.abs() < 1e-16);
        assert!((a0.im - 3.0 / (4.0 * PI * PI)).abs() < 1e-15);
        assert!(bare_polarizability(&p, 1e9).norm() < 1e-9);
        let lossy = bare_polarizability(&EmitterParams::new(1.0).unwrap(), 0.0);
        assert!((lossy.norm() - 0.5 * a0.norm()).abs() < 1e-15);
    }

    #[test]
    fn basis_at_normal_incidence() {
        let b = pol_basis(0.0, 0.0).unwrap();
        assert_eq!(b.p_fwd, RVec3::new(1.0, 0.0, 0.0));
        assert!((b.s_fwd - RVec3::new(0.0, -1.0, 0.0)).norm() < 1e-16);
        assert_eq!(b.k_fwd, RVec3::new(0.0, 0.0, 1.0));
        let b = pol_basis(PI / 6.0, 0.0).unwrap();
        let want = RVec3::new(-(PI / 6.0).cos(), 0.0, -0.5);
        assert!((b.p_bwd - want).norm() < 1e-15);
        assert!(pol_basis(PI / 2.0, 0.0).is_err());
    }

    #[test]
    fn lossy_amplitude_values() {
        assert_eq!(lossy_resonance_amplitude(3.0, 1.0, 0.0).unwrap(), c(-1.0));
        assert!((lossy_resonance_amplitude(3.0, 1.0, 4.0).unwrap() - c(-0.5)).norm() < 1e-15);
        let g = 75.0 / (4.0 * PI) - 1.0;
        let s = lossy_resonance_amplitude(g, 1.0, 1.0).unwrap();
        assert!((s.re + 0.8565).abs() < 1e-4);
        assert!(lossy_resonance_amplitude(-1.0, 1.0, 0.0).is_err());
    }
}
