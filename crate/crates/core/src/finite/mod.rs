//! Direct solution of the coupled-dipole equations for finite arrays.
//!
//! The local fields obey E_n = E₀(r_n) + 4π²α̃ Σ_{m≠n} λG(r_n − r_m) E_m with
//! α̃ = α/(ε₀λ³). The 3N×3N system M = I − 4π²α̃ λ𝔾 is assembled densely and
//! factorized by partial-pivot LU.

mod beam;
mod disorder;
mod farfield;
mod saturation;
mod studies;

pub use beam::{gaussian_beam, BeamPol, BeamSpec, Incident};
pub use disorder::{disorder_ensemble, DisorderStats, ShiftEstimator, MAX_RMS_FRACTION};
pub use farfield::{cone_power, extinguished_power, far_field_amplitude, scattered_power};
pub use saturation::{saturation_estimate, Saturation};
pub use studies::{defect_study, diffraction_order_powers, extract_rt, DefectDelta, OrderPowers, RtExtraction, EXTRACTION_DEPTH};

use faer::prelude::*;
use faer::Mat;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::greens::{assemble, green_coefficients, MIN_SEPARATION};
use crate::numerics::{CTensor3, CVec3, RVec3};
use crate::scatter::{bare_polarizability, EmitterParams};

/// Dense-solver guard on the number of sites.
pub const MAX_SITES: usize = 5000;

/// N_x × N_y square lattice centred on the origin in the z = 0 plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeSpec {
    pub nx: usize,
    pub ny: usize,
    pub a: f64,
}

impl LatticeSpec {
    pub fn new(nx: usize, ny: usize, a: f64) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::Domain("array needs at least one site per side".into()));
        }
        if !(a >= MIN_SEPARATION && a.is_finite()) {
            return Err(Error::Domain(format!("lattice constant {a} too small")));
        }
        Ok(Self { nx, ny, a })
    }

    pub fn sites(&self) -> usize {
        self.nx * self.ny
    }

    pub fn positions(&self) -> Vec<RVec3> {
        let cx = (self.nx as f64 - 1.0) / 2.0;
        let cy = (self.ny as f64 - 1.0) / 2.0;
        let mut out = Vec::with_capacity(self.sites());
        for iy in 0..self.ny {
            for ix in 0..self.nx {
                out.push(RVec3::new(
                    (ix as f64 - cx) * self.a,
                    (iy as f64 - cy) * self.a,
                    0.0,
                ));
            }
        }
        out
    }

    /// Index of the site nearest the origin.
    pub fn central_site(&self) -> usize {
        (self.ny / 2) * self.nx + self.nx / 2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DisplacementMode {
    InPlane,
    ThreeD,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Displacement {
    pub rms: f64,
    pub seed: u64,
    pub stream: u64,
    pub mode: DisplacementMode,
}

/// How an array was built.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Provenance {
    pub lattice: Option<LatticeSpec>,
    pub displacement: Option<Displacement>,
    pub removed: Vec<usize>,
    pub added: Vec<RVec3>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FiniteArray {
    pub positions: Vec<RVec3>,
    pub provenance: Provenance,
    pub params: EmitterParams,
    pub delta: f64,
}

impl FiniteArray {
    pub fn square(spec: LatticeSpec, params: EmitterParams, delta: f64) -> Result<Self> {
        guard(spec.sites())?;
        Ok(Self {
            positions: spec.positions(),
            provenance: Provenance {
                lattice: Some(spec),
                ..Default::default()
            },
            params,
            delta,
        })
    }

    pub fn from_positions(positions: Vec<RVec3>, params: EmitterParams, delta: f64) -> Result<Self> {
        guard(positions.len())?;
        check_spacing(&positions)?;
        Ok(Self {
            positions,
            provenance: Provenance::default(),
            params,
            delta,
        })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn with_delta(&self, delta: f64) -> Self {
        Self {
            delta,
            ..self.clone()
        }
    }

    /// α/(ε₀λ³) of every site at the array's detuning.
    pub fn polarizability(&self) -> Complex64 {
        bare_polarizability(&self.params, self.delta)
    }

    pub fn without_sites(&self, removed: &[usize]) -> Result<Self> {
        if let Some(&bad) = removed.iter().find(|&&i| i >= self.len()) {
            return Err(Error::Domain(format!("site {bad} not in array of {}", self.len())));
        }
        let positions = self
            .positions
            .iter()
            .enumerate()
            .filter(|(i, _)| !removed.contains(i))
            .map(|(_, p)| *p)
            .collect();
        let mut provenance = self.provenance.clone();
        provenance.removed.extend_from_slice(removed);
        Ok(Self {
            positions,
            provenance,
            ..self.clone()
        })
    }

    pub fn with_added(&self, extra: &[RVec3]) -> Result<Self> {
        let mut positions = self.positions.clone();
        positions.extend_from_slice(extra);
        guard(positions.len())?;
        check_spacing(&positions)?;
        let mut provenance = self.provenance.clone();
        provenance.added.extend_from_slice(extra);
        Ok(Self {
            positions,
            provenance,
            ..self.clone()
        })
    }

    /// Independent zero-mean Gaussian displacement of every site with
    /// standard deviation `rms` per component. ChaCha8 seeded with `seed`
    /// on stream `stream`, so ensemble members are reproducible bit-for-bit.
    pub fn displaced(&self, rms: f64, seed: u64, stream: u64, mode: DisplacementMode) -> Result<Self> {
        if !(rms >= 0.0 && rms.is_finite()) {
            return Err(Error::Domain(format!("rms displacement must be non-negative, got {rms}")));
        }
        let mut positions = self.positions.clone();
        if rms > 0.0 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(stream);
            let normal = Normal::new(0.0, rms).expect("finite rms");
            for p in positions.iter_mut() {
                p.x += normal.sample(&mut rng);
                p.y += normal.sample(&mut rng);
                if mode == DisplacementMode::ThreeD {
                    p.z += normal.sample(&mut rng);
                }
            }
            check_spacing(&positions)?;
        }
        let mut provenance = self.provenance.clone();
        provenance.displacement = Some(Displacement {
            rms,
            seed,
            stream,
            mode,
        });
        Ok(Self {
            positions,
            provenance,
            ..self.clone()
        })
    }
}

fn guard(n: usize) -> Result<()> {
    if n > MAX_SITES {
        return Err(Error::SizeGuard {
            sites: n,
            limit: MAX_SITES,
        });
    }
    Ok(())
}

fn check_spacing(pos: &[RVec3]) -> Result<()> {
    let min2 = MIN_SEPARATION * MIN_SEPARATION;
    let clash = (0..pos.len()).into_par_iter().find_any(|&i| {
        pos[i + 1..]
            .iter()
            .any(|q| (pos[i] - q).norm_squared() < min2)
    });
    match clash {
        Some(i) => Err(Error::Domain(format!("site {i} closer than {MIN_SEPARATION:e} λ to another"))),
        None => Ok(()),
    }
}

/// λ·G between two distinct sites.
#[inline]
fn lambda_green(k: f64, r: &RVec3) -> CTensor3 {
    let (a, b, n) = green_coefficients(k, r);
    assemble(a, b, &n) * Complex64::new(2.0 * PI / k, 0.0)
}

fn fill_system(m: &mut Mat<c64>, pos: &[RVec3], k: f64, coupling: Complex64, identity: bool) {
    let n = pos.len();
    m.par_col_chunks_mut(3).enumerate().for_each(|(j, mut cols)| {
        for i in 0..n {
            if i == j {
                for a in 0..3 {
                    for b in 0..3 {
                        let v = if identity && a == b { 1.0 } else { 0.0 };
                        cols[(3 * i + a, b)] = c64::new(v, 0.0);
                    }
                }
                continue;
            }
            let g = lambda_green(k, &(pos[i] - pos[j]));
            for a in 0..3 {
                for b in 0..3 {
                    let v = g[(a, b)] * coupling;
                    cols[(3 * i + a, b)] = c64::new(v.re, v.im);
                }
            }
        }
    });
}

/// M = I − 4π²(α/ε₀λ³)·λ𝔾 with zero diagonal blocks.
pub fn build_system(array: &FiniteArray, k: f64) -> Result<Mat<c64>> {
    guard(array.len())?;
    let n3 = 3 * array.len();
    let mut m = Mat::<c64>::zeros(n3, n3);
    let coupling = -4.0 * PI * PI * array.polarizability();
    fill_system(&mut m, &array.positions, k, coupling, true);
    Ok(m)
}

/// The dimensionless coupling matrix λ𝔾 (zero diagonal blocks).
pub fn coupling_matrix(array: &FiniteArray, k: f64) -> Result<Mat<c64>> {
    guard(array.len())?;
    let n3 = 3 * array.len();
    let mut m = Mat::<c64>::zeros(n3, n3);
    fill_system(&mut m, &array.positions, k, Complex64::new(1.0, 0.0), false);
    Ok(m)
}

/// Collective eigenvalues ε = shift − i·width/2 (units γ) of the effective
/// non-Hermitian coupling −(3/2)λ𝔾 − (i/2)γ.
pub fn collective_modes(array: &FiniteArray, k: f64) -> Result<Vec<Complex64>> {
    let g = coupling_matrix(array, k)?;
    let n3 = g.nrows();
    let h = Mat::<c64>::from_fn(n3, n3, |i, j| {
        let v = g[(i, j)] * c64::new(-1.5, 0.0);
        if i == j {
            v - c64::new(0.0, 0.5 * array.params.gamma)
        } else {
            v
        }
    });
    let ev = h
        .eigenvalues()
        .map_err(|e| Error::Precondition(format!("eigenvalue solver failed: {e:?}")))?;
    Ok(ev.into_iter().map(|z| Complex64::new(z.re, z.im)).collect())
}

#[derive(Debug, Clone)]
pub struct DipoleSolution {
    /// Local field at each site.
    pub fields: Vec<CVec3>,
    /// Dipole moments α̃·E_n, units ε₀λ³E₀.
    pub dipoles: Vec<CVec3>,
    /// Incident field sampled at the sites.
    pub incident_at_sites: Vec<CVec3>,
    pub incident: Incident,
    pub positions: Vec<RVec3>,
    pub alpha: Complex64,
    pub k: f64,
    /// ‖M x − b‖ / ‖b‖.
    pub residual: f64,
}

/// Solve the coupled-dipole system for one incident field.
pub fn solve_dipoles(array: &FiniteArray, incident: &Incident, k: f64) -> Result<DipoleSolution> {
    let m = build_system(array, k)?;
    let n = array.len();
    let e0: Vec<CVec3> = array.positions.iter().map(|r| incident.field(k, r)).collect();
    let rhs = Mat::<c64>::from_fn(3 * n, 1, |i, _| {
        let z = e0[i / 3][i % 3];
        c64::new(z.re, z.im)
    });
    let lu = m.partial_piv_lu();
    let x = lu.solve(&rhs);
    let resid = &m * &x - &rhs;
    let rn = resid.norm_l2();
    let bn = rhs.norm_l2();
    let residual = if bn > 0.0 { rn / bn } else { rn };
    if !residual.is_finite() {
        return Err(Error::Precondition("factorization produced non-finite solution".into()));
    }
    let alpha = array.polarizability();
    let fields: Vec<CVec3> = (0..n)
        .map(|s| CVec3::new(x[(3 * s, 0)], x[(3 * s + 1, 0)], x[(3 * s + 2, 0)]))
        .collect();
    let dipoles = fields.iter().map(|e| e * alpha).collect();
    Ok(DipoleSolution {
        fields,
        dipoles,
        incident_at_sites: e0,
        incident: incident.clone(),
        positions: array.positions.clone(),
        alpha,
        k,
        residual,
    })
}

impl DipoleSolution {
    /// Field radiated by the dipoles at `r`.
    pub fn scattered_at(&self, r: &RVec3) -> Result<CVec3> {
        let min2 = MIN_SEPARATION * MIN_SEPARATION;
        if self.positions.iter().any(|p| (p - r).norm_squared() < min2) {
            return Err(Error::Domain("observation point coincides with a site".into()));
        }
        let pref = Complex64::new(4.0 * PI * PI, 0.0);
        Ok(self
            .positions
            .iter()
            .zip(&self.dipoles)
            .fold(CVec3::zeros(), |acc, (p, d)| acc + lambda_green(self.k, &(r - p)) * d)
            * pref)
    }
}

/// Total field E₀(r) + 4π² Σ_n λG(r, r_n)·p_n.
pub fn field_at(solution: &DipoleSolution, r: &RVec3) -> Result<CVec3> {
    Ok(solution.incident.field(solution.k, r) + solution.scattered_at(r)?)
}
