//! Coupled-dipole scattering from two-dimensional square arrays of point
//! emitters: lattice sums of the dyadic Green's function, cooperative shift
//! and width tensors, infinite-array scattering matrices and a dense solver
//! for finite arrays.
//!
//! Units throughout: λ_a = 1, γ = 1, incident peak amplitude E₀ = 1.

pub mod cooperative;
pub mod error;
pub mod finite;
pub mod greens;
pub mod lattice;
pub mod numerics;
pub mod scatter;

pub use error::{Error, Result};
