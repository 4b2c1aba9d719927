//! Band structure of the collective surface modes along a k-path.

use rayon::prelude::*;

use super::{cooperative_response, CooperativeResponse};
use crate::error::Result;
use crate::lattice::{path_distance, KParallel};
use crate::numerics::{sym_eigen3, RVec3};

#[derive(Debug, Clone)]
pub struct BandStructure {
    pub path: Vec<KParallel>,
    pub distance: Vec<f64>,
    /// Eigenvalues of Δ(k∥), ordered by eigenvector continuity.
    pub bands: Vec<[f64; 3]>,
    pub polarizations: Vec<[RVec3; 3]>,
    /// Eigenvalues of Γ(k∥), ascending.
    pub gamma_eigs: Vec<[f64; 3]>,
    /// Decay rate of each band mode, vᵀΓv.
    pub widths: Vec<[f64; 3]>,
    /// true where |k∥| < k.
    pub light_cone: Vec<bool>,
    /// Track whose eigenvector is ẑ.
    pub z_band: usize,
    pub responses: Vec<CooperativeResponse>,
}

/// Worst adjacent-step jump relative to the median step in a sliding window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Continuity {
    pub worst_ratio: f64,
    pub band: usize,
    pub index: usize,
}

const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

pub fn band_structure(a: f64, k: f64, path: &[KParallel], tol: f64) -> Result<BandStructure> {
    let responses: Vec<CooperativeResponse> = path
        .par_iter()
        .map(|kp| cooperative_response(a, k, kp, tol))
        .collect::<Result<_>>()?;

    let mut bands = Vec::with_capacity(path.len());
    let mut pols: Vec<[RVec3; 3]> = Vec::with_capacity(path.len());
    let mut gamma_eigs = Vec::with_capacity(path.len());
    let mut widths = Vec::with_capacity(path.len());
    for r in &responses {
        let e = sym_eigen3(&r.delta)?;
        let order = match pols.last() {
            None => [0, 1, 2],
            Some(prev) => *PERMS
                .iter()
                .max_by(|p, q| {
                    let s = |p: &[usize; 3]| (0..3).map(|i| prev[i].dot(&e.vectors[p[i]]).abs()).sum::<f64>();
                    s(p).total_cmp(&s(q))
                })
                .unwrap(),
        };
        let mut vecs = [RVec3::zeros(); 3];
        let mut vals = [0.0; 3];
        for i in 0..3 {
            let mut v = e.vectors[order[i]];
            // keep a consistent sign along the track
            if let Some(prev) = pols.last() {
                if prev[i].dot(&v) < 0.0 {
                    v = -v;
                }
            }
            vecs[i] = v;
            vals[i] = e.values[order[i]];
        }
        let w = [0, 1, 2].map(|i| vecs[i].dot(&(r.gamma * vecs[i])));
        gamma_eigs.push(sym_eigen3(&r.gamma)?.values);
        widths.push(w);
        bands.push(vals);
        pols.push(vecs);
    }
    let z_band = (0..3)
        .max_by(|&i, &j| pols[0][i].z.abs().total_cmp(&pols[0][j].z.abs()))
        .unwrap_or(2);
    Ok(BandStructure {
        distance: path_distance(path),
        light_cone: path.iter().map(|p| p.is_propagating(k)).collect(),
        path: path.to_vec(),
        bands,
        polarizations: pols,
        gamma_eigs,
        widths,
        z_band,
        responses,
    })
}

impl BandStructure {
    /// The z band's polarization is exactly ẑ at every point.
    pub fn z_band_everywhere(&self) -> bool {
        self.polarizations
            .iter()
            .all(|p| p[self.z_band].x == 0.0 && p[self.z_band].y == 0.0 && p[self.z_band].z.abs() == 1.0)
    }

    /// Steps adjacent to a light-cone crossing are skipped: in-plane
    /// transverse and z bands diverge there as 1/√(|k∥|²−k²).
    pub fn continuity(&self, window: usize) -> Continuity {
        let n = self.bands.len();
        let mut worst = Continuity {
            worst_ratio: 0.0,
            band: 0,
            index: 0,
        };
        if n < 3 {
            return worst;
        }
        let near_cone = |i: usize| {
            let lo = i.saturating_sub(1);
            let hi = (i + 2).min(n - 1);
            (lo..hi).any(|j| self.light_cone[j] != self.light_cone[j + 1])
        };
        for b in 0..3 {
            let jumps: Vec<f64> = (0..n - 1)
                .map(|i| (self.bands[i + 1][b] - self.bands[i][b]).abs())
                .collect();
            for i in 0..jumps.len() {
                if near_cone(i) {
                    continue;
                }
                let lo = i.saturating_sub(window);
                let hi = (i + window + 1).min(jumps.len());
                let mut local: Vec<f64> = (lo..hi).filter(|&j| !near_cone(j)).map(|j| jumps[j]).collect();
                local.sort_by(|x, y| x.total_cmp(y));
                let median = local[local.len() / 2].max(1e-9);
                let ratio = jumps[i] / median;
                if ratio > worst.worst_ratio {
                    worst = Continuity {
                        worst_ratio: ratio,
                        band: b,
                        index: i,
                    };
                }
            }
        }
        worst
    }
}
