//! Observables extracted from finite-array solutions: R/T along the beam
//! axes, defect comparisons and per-order far-field power.

use std::f64::consts::PI;

use super::farfield::{cone_power, scattered_power};
use super::{solve_dipoles, BeamSpec, FiniteArray, Incident, LatticeSpec};
use crate::error::{Error, Result};
use crate::lattice::{propagating_orders, KParallel, SquareLattice};
use crate::numerics::RVec3;
use crate::scatter::EmitterParams;

/// Sample points per λ along each axis.
const AXIS_SAMPLES: usize = 16;
/// Distance of the extraction window from the array.
pub const EXTRACTION_DEPTH: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RtExtraction {
    pub t: f64,
    pub r: f64,
    /// w₀ ≤ 0.3·a·√N·cosθ; false means edge diffraction may bias R and T.
    pub waist_ok: bool,
    pub residual: f64,
}

/// Numerical T and R of a Gaussian beam on `array` at the array's detuning.
///
/// T is |E/E_inc|² averaged over one λ of the transmitted axis beyond
/// z = +6λ; R is |E_sc|² on the reflected axis beyond z = −6λ divided by
/// the incident intensity at the mirror point.
pub fn extract_rt(array: &FiniteArray, beam: &BeamSpec, k: f64) -> Result<RtExtraction> {
    let waist_ok = match array.provenance.lattice {
        Some(spec) => beam.waist_rule(spec.a, spec.sites()),
        None => false,
    };
    let inc = Incident::Beam(*beam);
    let sol = solve_dipoles(array, &inc, k)?;
    let (s, c) = beam.theta.sin_cos();
    let along = RVec3::new(s, 0.0, c);
    let mirror = RVec3::new(s, 0.0, -c);
    let (mut t, mut r) = (0.0, 0.0);
    for j in 0..AXIS_SAMPLES {
        let depth = (EXTRACTION_DEPTH + j as f64 / AXIS_SAMPLES as f64) / c;
        let pt = along * depth;
        let e_inc = inc.field(k, &pt).norm_squared();
        let e_tot = (inc.field(k, &pt) + sol.scattered_at(&pt)?).norm_squared();
        t += e_tot / e_inc;
        let pr = mirror * depth;
        r += sol.scattered_at(&pr)?.norm_squared() / e_inc;
    }
    Ok(RtExtraction {
        t: t / AXIS_SAMPLES as f64,
        r: r / AXIS_SAMPLES as f64,
        waist_ok,
        residual: sol.residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DefectDelta {
    pub intact: RtExtraction,
    pub defect: RtExtraction,
    pub dt: f64,
    pub dr: f64,
}

/// R/T change caused by removing `removed` sites from a perfect lattice.
pub fn defect_study(
    spec: LatticeSpec,
    params: EmitterParams,
    removed: &[usize],
    beam: &BeamSpec,
    delta: f64,
    k: f64,
) -> Result<DefectDelta> {
    let intact_array = FiniteArray::square(spec, params, delta)?;
    let intact = extract_rt(&intact_array, beam, k)?;
    let defect = if removed.is_empty() {
        intact
    } else {
        let holed = intact_array.without_sites(removed)?;
        let mut d = extract_rt(&holed, beam, k)?;
        d.waist_ok = intact.waist_ok;
        d
    };
    Ok(DefectDelta {
        intact,
        defect,
        dt: defect.t - intact.t,
        dr: defect.r - intact.r,
    })
}

/// Far-field power collected around one diffraction order's direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderPowers {
    pub mx: i64,
    pub my: i64,
    pub reflected_dir: RVec3,
    pub transmitted_dir: RVec3,
    /// Fractions of the total scattered power.
    pub reflected: f64,
    pub transmitted: f64,
}

/// Scattered power in cones around each propagating order for a Gaussian
/// beam on a perfect-lattice array. The cone half-angle is capped at half
/// the smallest angle between two order directions.
pub fn diffraction_order_powers(array: &FiniteArray, beam: &BeamSpec, k: f64, cap: f64) -> Result<Vec<OrderPowers>> {
    let spec = array
        .provenance
        .lattice
        .ok_or_else(|| Error::Precondition("order analysis needs a perfect-lattice array".into()))?;
    let lat = SquareLattice::new(spec.a)?;
    let kpar = KParallel::from_angles(k, beam.theta, 0.0);
    let orders = propagating_orders(&lat, k, &kpar)?;
    let dirs: Vec<(RVec3, RVec3)> = orders
        .iter()
        .map(|o| {
            let (bx, by, kz) = (o.beta[0] / k, o.beta[1] / k, o.kappa.re / k);
            (RVec3::new(bx, by, -kz), RVec3::new(bx, by, kz))
        })
        .collect();
    let mut half = cap.min(PI / 2.0);
    for (i, a) in dirs.iter().enumerate() {
        for b in &dirs[i + 1..] {
            half = half.min(a.0.angle(&b.0) / 2.0);
        }
        half = half.min(a.0.angle(&a.1) / 2.0);
    }
    let sol = solve_dipoles(array, &Incident::Beam(*beam), k)?;
    let total = scattered_power(&sol);
    orders
        .iter()
        .zip(&dirs)
        .map(|(o, (dr, dt))| {
            Ok(OrderPowers {
                mx: o.mx,
                my: o.my,
                reflected_dir: *dr,
                transmitted_dir: *dt,
                reflected: cone_power(&sol, dr, half)? / total,
                transmitted: cone_power(&sol, dt, half)? / total,
            })
        })
        .collect()
}
