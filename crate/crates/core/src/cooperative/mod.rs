//! Cooperative shift and width tensors of an infinite square array.
//!
//! Δ(k∥) = −(3/2)·Re λg(k∥) and Γ(k∥) = 3·Im λg(k∥), where
//! λg = λ Σ_{n≠0} G(R_n) e^{−ik∥·R_n}. Both tensors are real, symmetric and
//! split into an in-plane 2×2 block and a decoupled zz entry.

mod bands;
pub mod damped;
pub mod ewald;
mod kk;

pub use bands::{band_structure, BandStructure, Continuity};
pub use kk::{
    kk_reconstruct_delta, kk_sample_grid, normal_incidence_thresholds, quasi_static_delta, sample_gamma,
    KkEstimate,
};

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::lattice::{propagating_orders, KParallel, SquareLattice};
use crate::numerics::{real_part, imag_part, sym_eigen3, CTensor3, RTensor3, SymEigen};

/// Default tolerance on tensor entries, in units of γ.
pub const DEFAULT_TOL: f64 = 1e-3;
/// Smallest accepted tolerance on λg.
pub const MIN_SUM_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SumMethod {
    /// Ewald splitting (default).
    Ewald,
    /// Damped real-space sum with Richardson extrapolation in the damping rate.
    DampedRichardson,
}

impl SumMethod {
    pub fn name(&self) -> &'static str {
        match self {
            SumMethod::Ewald => "ewald",
            SumMethod::DampedRichardson => "damped-richardson",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub method: SumMethod,
    /// Estimated absolute error on λg entries.
    pub achieved: f64,
    /// Splitting parameters (Ewald) or damping rates (damped route).
    pub damping: Vec<f64>,
    /// Diagnostic sequence: Re λg_xx per damping rate, or per split.
    pub sequence: Vec<f64>,
    /// max |Γ − Γ_closed-form| when the single-order closed form applies.
    pub analytic_discrepancy: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct LatticeSum {
    pub g: CTensor3,
    pub report: ConvergenceReport,
}

#[derive(Debug, Clone)]
pub struct CooperativeResponse {
    pub kpar: KParallel,
    pub a: f64,
    pub delta: RTensor3,
    pub gamma: RTensor3,
    pub report: ConvergenceReport,
}

impl CooperativeResponse {
    pub fn delta_eigen(&self) -> Result<SymEigen> {
        sym_eigen3(&self.delta)
    }

    pub fn gamma_eigen(&self) -> Result<SymEigen> {
        sym_eigen3(&self.gamma)
    }
}

/// λ·Σ_{n≠0} G(R_n) e^{−ik∥·R_n} by the default (Ewald) route.
pub fn lattice_sum_g(a: f64, k: f64, kpar: &KParallel, tol: f64) -> Result<LatticeSum> {
    lattice_sum_g_with(SumMethod::Ewald, a, k, kpar, tol)
}

pub fn lattice_sum_g_with(method: SumMethod, a: f64, k: f64, kpar: &KParallel, tol: f64) -> Result<LatticeSum> {
    let lat = SquareLattice::new(a)?;
    if !(k > 0.0) {
        return Err(Error::Domain(format!("wavenumber must be positive, got {k}")));
    }
    if !(tol >= MIN_SUM_TOL) {
        return Err(Error::Precondition(format!("tolerance {tol:e} below {MIN_SUM_TOL:e}")));
    }
    match method {
        SumMethod::Ewald => {
            let e1 = ewald::default_split(a, k);
            let e2 = 0.8 * e1;
            let g1 = ewald::ewald_sum(&lat, k, kpar, e1)?;
            let g2 = ewald::ewald_sum(&lat, k, kpar, e2)?;
            let achieved = (g1 - g2).camax();
            let report = ConvergenceReport {
                method,
                achieved,
                damping: vec![e1, e2],
                sequence: vec![g1[(0, 0)].re, g2[(0, 0)].re],
                analytic_discrepancy: None,
            };
            if achieved > tol {
                return Err(Error::ConvergenceFailure {
                    achieved,
                    requested: tol,
                    sequence: report.sequence,
                });
            }
            Ok(LatticeSum { g: g1, report })
        }
        SumMethod::DampedRichardson => {
            let d = damped::damped_sum(&lat, k, kpar, tol)?;
            Ok(LatticeSum {
                g: d.value,
                report: ConvergenceReport {
                    method,
                    achieved: d.achieved,
                    damping: damped::DAMPING_RATES.to_vec(),
                    sequence: d.sequence,
                    analytic_discrepancy: None,
                },
            })
        }
    }
}

/// Δ and Γ tensors at (a, k∥); `tol` in units of γ.
pub fn cooperative_response(a: f64, k: f64, kpar: &KParallel, tol: f64) -> Result<CooperativeResponse> {
    cooperative_response_with(SumMethod::Ewald, a, k, kpar, tol)
}

pub fn cooperative_response_with(
    method: SumMethod,
    a: f64,
    k: f64,
    kpar: &KParallel,
    tol: f64,
) -> Result<CooperativeResponse> {
    let sum = lattice_sum_g_with(method, a, k, kpar, (tol / 3.0).max(MIN_SUM_TOL))?;
    let mut report = sum.report;
    let mut delta = real_part(&sum.g) * -1.5;
    let mut gamma = imag_part(&sum.g) * 3.0;
    for (i, j) in [(0, 2), (1, 2)] {
        let off = delta[(i, j)].abs().max(gamma[(i, j)].abs());
        if off > tol {
            return Err(Error::ConsistencyFailure {
                discrepancy: off,
                limit: tol,
            });
        }
    }
    for m in [&mut delta, &mut gamma] {
        for (i, j) in [(0, 2), (1, 2), (2, 0), (2, 1)] {
            m[(i, j)] = 0.0;
        }
        let s = 0.5 * (m[(0, 1)] + m[(1, 0)]);
        m[(0, 1)] = s;
        m[(1, 0)] = s;
    }
    if kpar.is_propagating(k) {
        if let Ok(an) = gamma_analytic(a, k, kpar) {
            let disc = (gamma - an).amax();
            report.analytic_discrepancy = Some(disc);
            if disc > 10.0 * tol {
                return Err(Error::ConsistencyFailure {
                    discrepancy: disc,
                    limit: 10.0 * tol,
                });
            }
        }
    }
    Ok(CooperativeResponse {
        kpar: *kpar,
        a,
        delta,
        gamma,
        report,
    })
}

/// Closed-form Γ tensor in the single-order regime.
pub fn gamma_analytic(a: f64, k: f64, kpar: &KParallel) -> Result<RTensor3> {
    let lat = SquareLattice::new(a)?;
    let orders = propagating_orders(&lat, k, kpar)?;
    if orders.len() != 1 {
        return Err(Error::WrongRegime(format!(
            "{} propagating orders; the closed form needs exactly one",
            orders.len()
        )));
    }
    let kz = kpar.kz(k).expect("propagating incidence");
    let lambda = 2.0 * PI / k;
    let pref = 3.0 / (4.0 * PI) * (lambda / a).powi(2) * (k / kz);
    let (kx, ky) = (kpar.kx / k, kpar.ky / k);
    let mut g = RTensor3::zeros();
    g[(0, 0)] = pref * (1.0 - kx * kx) - 1.0;
    g[(1, 1)] = pref * (1.0 - ky * ky) - 1.0;
    g[(0, 1)] = -pref * kx * ky;
    g[(1, 0)] = g[(0, 1)];
    g[(2, 2)] = pref * (kx * kx + ky * ky) - 1.0;
    Ok(g)
}

/// Γ from the finite sum over propagating diffraction orders.
pub fn gamma_reciprocal(a: f64, k: f64, kpar: &KParallel) -> Result<RTensor3> {
    let lat = SquareLattice::new(a)?;
    let orders = propagating_orders(&lat, k, kpar)?;
    let lambda = 2.0 * PI / k;
    let pref = 3.0 * lambda / (2.0 * lat.cell_area());
    let mut g = -RTensor3::identity();
    for o in &orders {
        let w = pref / o.kappa.re;
        let [bx, by] = [o.beta[0] / k, o.beta[1] / k];
        g[(0, 0)] += w * (1.0 - bx * bx);
        g[(1, 1)] += w * (1.0 - by * by);
        g[(0, 1)] -= w * bx * by;
        g[(2, 2)] += w * (bx * bx + by * by);
    }
    g[(1, 0)] = g[(0, 1)];
    Ok(g)
}
