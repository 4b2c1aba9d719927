//! Positional disorder: ensemble statistics of the cooperative shift.
//!
//! Each sample displaces every site of a perfect finite lattice and measures
//! the change of the collective resonance relative to the undisplaced array,
//! so finite-size offsets cancel. Two estimators are available:
//!
//! * `ResonanceFit` fits 1/χ(δ) linearly in δ, χ = Σ_n x̂·p_n under a normally
//!   incident x-polarized plane wave, and takes the real part of the root;
//! * `ModeEnergy` evaluates −(3/2)·(1/N)·Σ_n Σ_{m≠n} Re x̂·λG(r_n − r_m)·x̂,
//!   the shift of the uniform x-polarized mode to first order.

use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

use super::{lambda_green, solve_dipoles, DisplacementMode, FiniteArray, Incident, LatticeSpec};
use crate::cooperative::cooperative_response;
use crate::error::{Error, Result};
use crate::lattice::KParallel;
use crate::numerics::{CVec3, RVec3};
use crate::scatter::EmitterParams;

/// Largest rms displacement accepted, as a fraction of a.
pub const MAX_RMS_FRACTION: f64 = 0.05;
/// Detuning offsets (units Γ+γ) at which χ is sampled for the fit.
const FIT_OFFSETS: [f64; 5] = [-0.5, -0.25, 0.0, 0.25, 0.5];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ShiftEstimator {
    #[default]
    ResonanceFit,
    ModeEnergy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DisorderStats {
    /// Per-sample shift relative to the perfect array, units γ.
    pub samples: Vec<f64>,
    pub mean: f64,
    pub std_err: f64,
    /// 4π²(δr/λ)²Δ with Δ of the infinite lattice at normal incidence.
    pub predicted: f64,
    pub lattice_delta: f64,
    /// Resonance position (or mode energy) of the perfect array.
    pub reference: f64,
}

fn mode_energy(pos: &[RVec3], k: f64) -> f64 {
    let n = pos.len();
    let total: f64 = (0..n)
        .into_par_iter()
        .map(|i| {
            pos.iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, q)| lambda_green(k, &(pos[i] - q))[(0, 0)].re)
                .sum::<f64>()
        })
        .sum();
    -1.5 * total / n as f64
}

fn response(array: &FiniteArray, k: f64, delta: f64) -> Result<Complex64> {
    let inc = Incident::PlaneWave {
        direction: RVec3::z(),
        polarization: CVec3::x(),
    };
    let sol = solve_dipoles(&array.with_delta(delta), &inc, k)?;
    Ok(sol.dipoles.iter().map(|p| p.x).sum())
}

/// Root of the least-squares line through 1/χ(δ).
fn fitted_center(array: &FiniteArray, k: f64, center: f64, width: f64) -> Result<f64> {
    let mut pts = Vec::with_capacity(FIT_OFFSETS.len());
    for off in FIT_OFFSETS {
        let d = center + off * width;
        let chi = response(array, k, d)?;
        if chi.norm() == 0.0 {
            return Err(Error::SingularResponse("array response vanished".into()));
        }
        pts.push((d, 1.0 / chi));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<Complex64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: Complex64 = pts.iter().map(|p| (p.1 - my) * (p.0 - mx)).sum();
    let slope = sxy / sxx;
    if slope.norm() == 0.0 {
        return Err(Error::SingularResponse("flat inverse response".into()));
    }
    Ok((mx - my / slope).re)
}

/// Ensemble of `n_samples` displaced copies of `spec` with rms displacement
/// `rms` (units λ) per cartesian component.
#[allow(clippy::too_many_arguments)]
pub fn disorder_ensemble(
    spec: LatticeSpec,
    rms: f64,
    n_samples: usize,
    seed: u64,
    mode: DisplacementMode,
    estimator: ShiftEstimator,
    k: f64,
    tol: f64,
) -> Result<DisorderStats> {
    if !(rms >= 0.0 && rms <= MAX_RMS_FRACTION * spec.a * (1.0 + 1e-12)) {
        return Err(Error::Precondition(format!(
            "rms displacement {rms} outside [0, {MAX_RMS_FRACTION}·a]"
        )));
    }
    if n_samples < 2 {
        return Err(Error::Precondition("need at least two samples for a standard error".into()));
    }
    if spec.a >= 1.0 {
        return Err(Error::WrongRegime(format!("a = {}: normal incidence has several orders", spec.a)));
    }
    let coop = cooperative_response(spec.a, k, &KParallel::zero(), tol)?;
    let lattice_delta = coop.delta[(0, 0)];
    let width = coop.gamma[(0, 0)] + 1.0;
    let lambda = 2.0 * PI / k;
    let predicted = 4.0 * PI * PI * (rms / lambda).powi(2) * lattice_delta;

    let perfect = FiniteArray::square(spec, EmitterParams::lossless(), 0.0)?;
    let (reference, center) = match estimator {
        ShiftEstimator::ModeEnergy => (mode_energy(&perfect.positions, k), 0.0),
        ShiftEstimator::ResonanceFit => {
            let guess = fitted_center(&perfect, k, lattice_delta, width)?;
            (fitted_center(&perfect, k, guess, width)?, guess)
        }
    };

    let samples: Vec<f64> = (0..n_samples as u64)
        .into_par_iter()
        .map(|i| {
            if rms == 0.0 {
                return Ok(0.0);
            }
            let arr = perfect.displaced(rms, seed, i, mode)?;
            let v = match estimator {
                ShiftEstimator::ModeEnergy => mode_energy(&arr.positions, k),
                ShiftEstimator::ResonanceFit => fitted_center(&arr, k, center, width)?,
            };
            Ok(v - reference)
        })
        .collect::<Result<_>>()?;

    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(DisorderStats {
        mean,
        std_err: (var / n).sqrt(),
        predicted,
        lattice_delta,
        reference,
        samples,
    })
}
