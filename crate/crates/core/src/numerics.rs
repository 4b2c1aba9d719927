//! Units, small fixed-size linear algebra and principal-value quadrature.
//!
//! Internal units: lengths in resonance wavelengths (λ_a = 1), rates and
//! detunings in single-emitter radiative widths (γ = 1), fields in units of
//! the incident peak amplitude E₀. Polarizabilities are in units of ε₀λ_a³.
//! The incident wavelength is taken equal to λ_a in every lattice sum.

use nalgebra::{Matrix2, Matrix3, Vector3};
use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Resonance wavelength in internal units.
pub const LAMBDA: f64 = 1.0;
/// Free-space wavenumber 2π/λ in internal units.
pub const K0: f64 = 2.0 * PI;
/// Single-emitter radiative width in internal units.
pub const GAMMA: f64 = 1.0;

pub type CVec3 = Vector3<Complex64>;
pub type CTensor3 = Matrix3<Complex64>;
pub type RVec3 = Vector3<f64>;
pub type RTensor3 = Matrix3<f64>;

pub const I: Complex64 = Complex64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn real_part(m: &CTensor3) -> RTensor3 {
    m.map(|z| z.re)
}

pub fn imag_part(m: &CTensor3) -> RTensor3 {
    m.map(|z| z.im)
}

pub fn complexify(v: &RVec3) -> CVec3 {
    v.map(c)
}

/// Eigen-decomposition of a real symmetric 3×3 tensor, ascending order.
#[derive(Debug, Clone, PartialEq)]
pub struct SymEigen {
    pub values: [f64; 3],
    pub vectors: [RVec3; 3],
}

impl SymEigen {
    pub fn reconstruct(&self) -> RTensor3 {
        let mut m = RTensor3::zeros();
        for (l, v) in self.values.iter().zip(self.vectors.iter()) {
            m += *l * v * v.transpose();
        }
        m
    }
}

const DEGENERATE_GAP: f64 = 1e-8;

/// Closed-form eigensystem of a real symmetric 3×3 tensor.
///
/// Eigenvalues come from the trigonometric solution of the characteristic
/// cubic. The eigenvalue farthest from the middle one is well separated and
/// its eigenvector is taken from cross products of rows of `m - λI`; the
/// remaining pair is resolved by a Jacobi rotation inside the orthogonal
/// complement, which stays accurate for nearly degenerate pairs. Eigenvalues
/// are finally recomputed as Rayleigh quotients.
pub fn sym_eigen3(m: &RTensor3) -> Result<SymEigen> {
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain("tensor has non-finite entries".into()));
    }
    let scale = m.amax();
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        let d = (m[(i, j)] - m[(j, i)]).abs();
        if d > 1e-10 * scale {
            return Err(Error::ContractViolation(format!(
                "tensor not symmetric: |m[{i}{j}] - m[{j}{i}]| = {d:.3e}"
            )));
        }
    }
    let axes = [RVec3::x(), RVec3::y(), RVec3::z()];
    if scale == 0.0 {
        return Ok(SymEigen {
            values: [0.0; 3],
            vectors: axes,
        });
    }
    let a = (m + m.transpose()) * (0.5 / scale);

    let p1 = a[(0, 1)].powi(2) + a[(0, 2)].powi(2) + a[(1, 2)].powi(2);
    let q = a.trace() / 3.0;
    let p2 = (a[(0, 0)] - q).powi(2) + (a[(1, 1)] - q).powi(2) + (a[(2, 2)] - q).powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();

    let vectors = if p < DEGENERATE_GAP {
        axes
    } else {
        let b = (a - RTensor3::identity() * q) / p;
        let r = (b.determinant() / 2.0).clamp(-1.0, 1.0);
        let phi = r.acos() / 3.0;
        let hi = q + 2.0 * p * phi.cos();
        let lo = q + 2.0 * p * (phi + 2.0 * PI / 3.0).cos();
        let mid = 3.0 * q - hi - lo;
        let sep = if hi - mid >= mid - lo { hi } else { lo };

        let v0 = null_vector(&(a - RTensor3::identity() * sep));
        let (u1, u2) = complement_basis(&v0);
        let c = Matrix2::new(
            u1.dot(&(a * u1)),
            u1.dot(&(a * u2)),
            u2.dot(&(a * u1)),
            u2.dot(&(a * u2)),
        );
        let off = 0.5 * (c[(0, 1)] + c[(1, 0)]);
        let theta = if off == 0.0 {
            0.0
        } else {
            0.5 * (2.0 * off).atan2(c[(0, 0)] - c[(1, 1)])
        };
        let (s, co) = theta.sin_cos();
        let w1 = u1 * co + u2 * s;
        let w2 = u2 * co - u1 * s;
        [v0, w1.normalize(), w2.normalize()]
    };

    let mut pairs: Vec<(f64, RVec3)> = vectors
        .iter()
        .map(|v| (v.dot(&(a * v)) * scale, *v))
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    Ok(SymEigen {
        values: [pairs[0].0, pairs[1].0, pairs[2].0],
        vectors: [pairs[0].1, pairs[1].1, pairs[2].1],
    })
}

fn null_vector(m: &RTensor3) -> RVec3 {
    let r0 = m.row(0).transpose();
    let r1 = m.row(1).transpose();
    let r2 = m.row(2).transpose();
    let cands = [r0.cross(&r1), r0.cross(&r2), r1.cross(&r2)];
    let best = cands
        .iter()
        .max_by(|x, y| x.norm_squared().total_cmp(&y.norm_squared()))
        .unwrap();
    let n = best.norm();
    if n == 0.0 {
        RVec3::z()
    } else {
        best / n
    }
}

/// Two unit vectors completing `v` to a right-handed orthonormal triad.
pub fn complement_basis(v: &RVec3) -> (RVec3, RVec3) {
    let helper = if v.x.abs() <= v.y.abs() && v.x.abs() <= v.z.abs() {
        RVec3::x()
    } else if v.y.abs() <= v.z.abs() {
        RVec3::y()
    } else {
        RVec3::z()
    };
    let u1 = v.cross(&helper).normalize();
    let u2 = v.cross(&u1);
    (u1, u2)
}

/// Principal value of ∫ f(u)/(x−u) du over the sampled range.
///
/// Pole subtraction: the regular integrand [f(u)−f(x)]/(x−u) is integrated
/// with the trapezoid rule and the singular part is added in closed form,
/// f(x)·ln|(x−u_min)/(x−u_max)|. f(x) and f'(x) come from four-point
/// Lagrange interpolation around the pole.
pub fn pv_integral(grid: &[f64], f: &[f64], pole: f64) -> Result<f64> {
    let n = grid.len();
    if n < 4 {
        return Err(Error::Domain(format!("grid has {n} points, need at least 4")));
    }
    if f.len() != n {
        return Err(Error::Domain("grid and samples differ in length".into()));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain("grid must be strictly increasing".into()));
    }
    if !(pole > grid[0] && pole < grid[n - 1]) {
        return Err(Error::Domain(format!(
            "pole {pole} outside ({}, {})",
            grid[0],
            grid[n - 1]
        )));
    }
    let j = grid.partition_point(|&u| u <= pole) - 1;
    let s = j.saturating_sub(1).min(n - 4);
    let (fx, dfx) = lagrange4(&grid[s..s + 4], &f[s..s + 4], pole);

    let span = grid[n - 1] - grid[0];
    let h: Vec<f64> = grid
        .iter()
        .zip(f)
        .map(|(&u, &fu)| {
            let d = pole - u;
            if d.abs() <= 1e-13 * span {
                -dfx
            } else {
                (fu - fx) / d
            }
        })
        .collect();
    let regular = trapezoid(grid, &h);
    let singular = fx * ((pole - grid[0]) / (grid[n - 1] - pole)).ln();
    Ok(regular + singular)
}

/// Value and derivative of the cubic through four nodes.
fn lagrange4(x: &[f64], y: &[f64], t: f64) -> (f64, f64) {
    let mut val = 0.0;
    let mut der = 0.0;
    for i in 0..4 {
        let mut li = 1.0;
        let mut dli = 0.0;
        for j in 0..4 {
            if j == i {
                continue;
            }
            let w = 1.0 / (x[i] - x[j]);
            dli = dli * (t - x[j]) * w + li * w;
            li *= (t - x[j]) * w;
        }
        val += y[i] * li;
        der += y[i] * dli;
    }
    (val, der)
}

/// Trapezoid rule on a (possibly non-uniform) grid.
pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1]))
        .sum()
}
