//! Dispersion relation between Δ(a/λ) and Γ(a/λ) at normal incidence.
//!
//! The lattice sums depend on a and λ only through u = a/λ, and λg(u) is
//! analytic in the upper half of the complex-u plane apart from the pole
//! structure at u → 0. A plain dispersion integral over Γ diverges there, so
//! the reconstruction is split:
//!
//! * the quasi-static part, from the exact small-u expansion of the real
//!   lattice sum, Δ₀(u) = −(3/2)[−S₃/(2s³) + S₁/(4s)] with s = 2πu and the
//!   lattice constants S₃ = Σ'(1−3cos²)/|n|³ and the zeta-regularized
//!   S₁ = (3/2)·4ζ(1/2)β(1/2);
//! * the dispersive part, (1/2π)·PV∫ Γ_hi(u) [1/(x−u) + 1/(x+u)] du with
//!   Γ_hi = Γ − (3/(4πu²) − 1), the contribution of higher diffraction
//!   orders, which vanishes below the first threshold.
//!
//! Beyond the sampled range Γ_hi is replaced by its asymptote and the tail
//! is integrated in closed form.

use rayon::prelude::*;
use std::f64::consts::PI;

use super::gamma_reciprocal;
use crate::error::{Error, Result};
use crate::lattice::KParallel;
use crate::numerics::{pv_integral, trapezoid, K0};

/// Riemann zeta at 3/2.
const ZETA_3_2: f64 = 2.612_375_348_685_488;
/// Dirichlet beta at 3/2.
const BETA_3_2: f64 = 0.864_502_653_461_202;
/// Riemann zeta at 1/2.
const ZETA_1_2: f64 = -1.460_354_508_809_586_8;
/// Dirichlet beta at 1/2.
const BETA_1_2: f64 = 0.667_691_457_189_609_2;

/// Poles closer than this to a threshold are rejected.
const POLE_GUARD: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KkEstimate {
    pub value: f64,
    pub quasi_static: f64,
    pub dispersive: f64,
    pub tail: f64,
    pub truncation_error: f64,
}

/// Δ₀(x), the quasi-static part of the in-plane shift at normal incidence.
pub fn quasi_static_delta(x: f64) -> f64 {
    let s3 = -0.5 * 4.0 * ZETA_3_2 * BETA_3_2;
    let s1 = 1.5 * 4.0 * ZETA_1_2 * BETA_1_2;
    let s = 2.0 * PI * x;
    -1.5 * (-s3 / (2.0 * s * s * s) + s1 / (4.0 * s))
}

/// Distinct values √(m_x² + m_y²) ≤ u_max, m ≠ 0.
pub fn normal_incidence_thresholds(u_max: f64) -> Vec<f64> {
    let m = u_max.floor() as i64 + 1;
    let mut sq: Vec<i64> = (0..=m)
        .flat_map(|i| (0..=m).map(move |j| i * i + j * j))
        .filter(|&s| s > 0 && (s as f64).sqrt() <= u_max)
        .collect();
    sq.sort_unstable();
    sq.dedup();
    sq.into_iter().map(|s| (s as f64).sqrt()).collect()
}

/// Sampling grid on [u_min, u_max] with spacing `fine` within 0.05 of every
/// threshold (never on one) and `coarse` elsewhere.
pub fn kk_sample_grid(u_min: f64, u_max: f64, coarse: f64, fine: f64) -> Vec<f64> {
    let thr = normal_incidence_thresholds(u_max + 0.05);
    let near = |u: f64| thr.iter().any(|t| (u - t).abs() < 0.05);
    let mut g: Vec<f64> = Vec::new();
    let n = ((u_max - u_min) / coarse).floor() as usize;
    for i in 0..=n {
        let u = u_min + i as f64 * coarse;
        if !near(u) {
            g.push(u);
        }
    }
    for t in &thr {
        let steps = (0.05 / fine).round() as i64;
        for j in -steps..steps {
            g.push(t + (j as f64 + 0.5) * fine);
        }
    }
    g.retain(|&u| u >= u_min && u <= u_max);
    g.sort_by(|a, b| a.total_cmp(b));
    g.dedup_by(|a, b| (*a - *b).abs() < 0.25 * fine);
    g.retain(|u| thr.iter().all(|t| (u - t).abs() > 0.25 * fine));
    g
}

/// In-plane Γ at normal incidence for each u = a/λ (λ = 1).
pub fn sample_gamma(grid: &[f64]) -> Result<Vec<f64>> {
    grid.par_iter()
        .map(|&u| gamma_reciprocal(u, K0, &KParallel::zero()).map(|g| g[(0, 0)]))
        .collect()
}

/// Reconstruct Δ(x) from samples of the normal-incidence in-plane Γ(u).
pub fn kk_reconstruct_delta(grid: &[f64], gamma: &[f64], x: f64) -> Result<KkEstimate> {
    if grid.len() != gamma.len() || grid.len() < 8 {
        return Err(Error::Domain("need matching grid and samples, at least 8 points".into()));
    }
    let u_max = *grid.last().unwrap();
    if let Some(t) = normal_incidence_thresholds(u_max + 1.0)
        .into_iter()
        .find(|t| (x - t).abs() < POLE_GUARD)
    {
        return Err(Error::ThresholdDegeneracy {
            mx: t.round() as i64,
            my: 0,
            offset: (x - t).abs(),
        });
    }
    if u_max < x + 1.0 {
        return Err(Error::Domain(format!("grid must extend past x + 1 (u_max = {u_max})")));
    }

    let hi: Vec<f64> = grid
        .iter()
        .zip(gamma)
        .map(|(&u, &g)| g - (3.0 / (4.0 * PI * u * u) - 1.0))
        .collect();
    let disp = |idx: &[usize]| -> Result<f64> {
        let u: Vec<f64> = idx.iter().map(|&i| grid[i]).collect();
        let f: Vec<f64> = idx.iter().map(|&i| hi[i]).collect();
        let mirror: Vec<f64> = u.iter().zip(&f).map(|(&u, &f)| f / (x + u)).collect();
        Ok(pv_integral(&u, &f, x)? + trapezoid(&u, &mirror))
    };
    let all: Vec<usize> = (0..grid.len()).collect();
    let half: Vec<usize> = (0..grid.len()).step_by(2).chain(std::iter::once(grid.len() - 1)).collect();
    let mut half = half;
    half.dedup();
    let integral = disp(&all)?;
    let coarse = disp(&half)?;

    // asymptote of Γ_hi from the last unit interval
    let split = grid.partition_point(|&u| u < u_max - 1.0);
    let mid = grid.partition_point(|&u| u < u_max - 0.5);
    let mean = |lo: usize, hi_: usize| {
        let u = &grid[lo..hi_];
        let f = &hi[lo..hi_];
        trapezoid(u, f) / (u[u.len() - 1] - u[0])
    };
    let asym = mean(split, grid.len());
    let spread = (mean(split, mid + 1) - mean(mid, grid.len())).abs();
    let log_tail = ((u_max - x) / (u_max + x)).ln();
    let tail = asym * log_tail;

    let quasi_static = quasi_static_delta(x);
    let dispersive = (integral + tail) / (2.0 * PI);
    let truncation_error = (spread * log_tail.abs() + (integral - coarse).abs()) / (2.0 * PI);
    Ok(KkEstimate {
        value: quasi_static + dispersive,
        quasi_static,
        dispersive,
        tail: tail / (2.0 * PI),
        truncation_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thresholds_below_two() {
        let t = normal_incidence_thresholds(2.0);
        let want = [1.0, 2f64.sqrt(), 2.0];
        assert_eq!(t.len(), 3);
        for (a, b) in t.iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn grid_avoids_thresholds() {
        let g = kk_sample_grid(0.02, 3.99, 5e-3, 1e-3);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        for t in normal_incidence_thresholds(4.0) {
            assert!(g.iter().all(|u| (u - t).abs() > 2e-4));
            let close: Vec<_> = g.windows(2).filter(|w| (w[0] - t).abs() < 0.04).collect();
            assert!(close.iter().all(|w| w[1] - w[0] <= 1e-3 + 1e-12));
        }
    }

    #[test]
    fn pole_at_threshold_rejected() {
        let g = kk_sample_grid(0.02, 3.99, 5e-3, 1e-3);
        let f = vec![0.0; g.len()];
        assert!(matches!(
            kk_reconstruct_delta(&g, &f, 1.0005),
            Err(Error::ThresholdDegeneracy { .. })
        ));
    }
}
