//! Independent oracles for the Green's tensor and the finite-array solver.

use coopscatter::finite::*;
use coopscatter::greens::dyadic_green;
use coopscatter::numerics::*;
use coopscatter::scatter::EmitterParams;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn scalar_green(k: f64, r: &RVec3) -> Complex64 {
    let d = r.norm();
    Complex64::from_polar(1.0 / (4.0 * PI * d), k * d)
}

/// G = (I + ∇∇/k²)·e^{ikr}/(4πr), the Hessian by central differences.
fn fd_green(k: f64, r: &RVec3) -> CTensor3 {
    let h = 1e-3 * r.norm().min(1.0 / k);
    let g0 = scalar_green(k, r);
    let mut out = CTensor3::identity() * g0;
    for i in 0..3 {
        for j in 0..3 {
            let (ei, ej) = (RVec3::ith(i, h), RVec3::ith(j, h));
            let d2 = if i == j {
                scalar_green(k, &(r + ei)) - 2.0 * g0 + scalar_green(k, &(r - ei))
            } else {
                (scalar_green(k, &(r + ei + ej)) - scalar_green(k, &(r + ei - ej)) - scalar_green(k, &(r - ei + ej))
                    + scalar_green(k, &(r - ei - ej)))
                    / 4.0
            };
            out[(i, j)] += d2 / (h * h * k * k);
        }
    }
    out
}

fn random_separation(rng: &mut ChaCha8Rng) -> RVec3 {
    let d = 10f64.powf(rng.random_range(-1.0..1.0));
    let cz: f64 = rng.random_range(-1.0..1.0);
    let ph = rng.random_range(0.0..2.0 * PI);
    let s = (1.0 - cz * cz).sqrt();
    RVec3::new(s * ph.cos(), s * ph.sin(), cz) * d
}

#[test]
fn green_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let r = random_separation(&mut rng);
        let g = dyadic_green(K0, &r).unwrap();
        let f = fd_green(K0, &r);
        worst = worst.max((g - f).camax() / g.camax());
    }
    assert!(worst < 1e-5, "worst relative deviation {worst:e}");
}

/// Two atoms: the eigenvalues of −(3/2)λ𝔾 − i/2 are −i/2 ∓ (3/2)λG_jj(d).
#[test]
fn two_atom_modes() {
    for d in [0.05, 0.1, 0.25, 0.4, 0.9] {
        let arr = FiniteArray::from_positions(
            vec![RVec3::zeros(), RVec3::new(d, 0.0, 0.0)],
            EmitterParams::lossless(),
            0.0,
        )
        .unwrap();
        let mut got = collective_modes(&arr, K0).unwrap();
        let g = dyadic_green(K0, &RVec3::new(d, 0.0, 0.0)).unwrap();
        let mut want = Vec::new();
        for j in 0..3 {
            for s in [-1.0, 1.0] {
                want.push(Complex64::new(0.0, -0.5) + s * 1.5 * g[(j, j)]);
            }
        }
        let key = |z: &Complex64| (z.re, z.im);
        got.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
        want.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).norm() < 1e-8, "d = {d}: {a} vs {b}");
        }
    }
}

#[test]
fn symmetric_pair_becomes_superradiant() {
    let d = 1e-3;
    let g = dyadic_green(K0, &RVec3::new(d, 0.0, 0.0)).unwrap();
    // symmetric mode: −i/2 − (3/2)λG; width = −2 Im
    let width = -2.0 * (Complex64::new(0.0, -0.5) - 1.5 * g[(1, 1)]).im;
    assert!((width - 2.0).abs() < 1e-4);
}

#[test]
fn optical_theorem_ten_by_ten() {
    for (a, delta) in [(0.2, 0.0), (0.3, 0.4), (0.45, -1.0)] {
        let spec = LatticeSpec::new(10, 10, a).unwrap();
        let arr = FiniteArray::square(spec, EmitterParams::lossless(), delta).unwrap();
        let inc = Incident::plane_wave(RVec3::z(), CVec3::x()).unwrap();
        let sol = solve_dipoles(&arr, &inc, K0).unwrap();
        let (e, s) = (extinguished_power(&sol), scattered_power(&sol));
        assert!((e - s).abs() < 0.01 * e, "a = {a}: extinction {e}, scattering {s}");
    }
}

#[test]
fn single_atom_is_bare() {
    let arr = FiniteArray::square(LatticeSpec::new(1, 1, 0.5).unwrap(), EmitterParams::lossless(), 0.0).unwrap();
    let inc = Incident::plane_wave(RVec3::z(), CVec3::x()).unwrap();
    let sol = solve_dipoles(&arr, &inc, K0).unwrap();
    let want = 3.0 / (4.0 * PI * PI);
    assert!((sol.dipoles[0].x - Complex64::new(0.0, want)).norm() < 1e-15);
}

#[test]
fn system_matrix_is_complex_symmetric() {
    let arr = FiniteArray::square(LatticeSpec::new(3, 2, 0.27).unwrap(), EmitterParams::lossless(), 0.2).unwrap();
    let arr = arr.displaced(0.01, 5, 0, DisplacementMode::ThreeD).unwrap();
    let m = build_system(&arr, K0).unwrap();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            assert!((m[(i, j)] - m[(j, i)]).norm() < 1e-14);
        }
    }
}

#[test]
fn two_site_block() {
    let d = 0.37;
    let arr = FiniteArray::from_positions(vec![RVec3::zeros(), RVec3::new(d, 0.0, 0.0)], EmitterParams::lossless(), 0.5)
        .unwrap();
    let m = build_system(&arr, K0).unwrap();
    let g = dyadic_green(K0, &RVec3::new(d, 0.0, 0.0)).unwrap();
    let coupling = -4.0 * PI * PI * arr.polarizability();
    for i in 0..3 {
        for j in 0..3 {
            let want = g[(i, j)] * coupling;
            let got = m[(i, 3 + j)];
            assert!((Complex64::new(got.re, got.im) - want).norm() < 1e-13);
        }
    }
}

#[test]
fn beam_superposition_is_linear() {
    let spec = LatticeSpec::new(6, 6, 0.3).unwrap();
    let arr = FiniteArray::square(spec, EmitterParams::lossless(), 0.1).unwrap();
    let b1 = Incident::Beam(BeamSpec::new(0.6, 0.0, BeamPol::X).unwrap());
    let b2 = Incident::Beam(BeamSpec::new(0.8, 0.3, BeamPol::S).unwrap());
    let w = Complex64::new(0.3, -1.2);
    let both = Incident::Superposition(vec![(Complex64::new(1.0, 0.0), b1.clone()), (w, b2.clone())]);
    let probe = RVec3::new(0.2, -0.1, 1.3);
    let s1 = solve_dipoles(&arr, &b1, K0).unwrap();
    let s2 = solve_dipoles(&arr, &b2, K0).unwrap();
    let s12 = solve_dipoles(&arr, &both, K0).unwrap();
    let lhs = field_at(&s12, &probe).unwrap();
    let rhs = field_at(&s1, &probe).unwrap() + field_at(&s2, &probe).unwrap() * w;
    assert!((lhs - rhs).norm() < 1e-12 * lhs.norm());
    assert!(s12.residual < 1e-10);
}

#[test]
fn on_site_evaluation_rejected() {
    let arr = FiniteArray::square(LatticeSpec::new(2, 2, 0.3).unwrap(), EmitterParams::lossless(), 0.0).unwrap();
    let inc = Incident::plane_wave(RVec3::z(), CVec3::x()).unwrap();
    let sol = solve_dipoles(&arr, &inc, K0).unwrap();
    assert!(field_at(&sol, &arr.positions[0]).is_err());
}
