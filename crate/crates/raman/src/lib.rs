//! Numerical operator algebra for a three-level trapped ion driven by a
//! far-detuned Raman lambda scheme.
//!
//! The crate builds the truncated composite Hilbert space (3 atomic levels
//! tensor per-axis Fock spaces), assembles the lab-frame and rotating-frame
//! Hamiltonians, computes the canonical transformation data {C_n, Z_n} order
//! by order, and verifies that the exact rotating-frame propagator factorizes
//! into a coarse-grained effective evolution times a small, fast fine
//! correction.
//!
//! Core math is generic over the real scalar type; `f64` aliases are exported
//! at the crate root.

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

pub mod analysis;
pub mod error;
pub mod hamiltonian;
pub mod hilbert;
pub mod linalg;
pub mod perturbation;
pub mod propagators;
pub mod scenario;

pub use error::{RamanError, Result};

/// Real scalar the whole crate is generic over: `f32` or `f64`.
pub trait Real: RealField + FromPrimitive + ToPrimitive + Copy {}
impl<T: RealField + FromPrimitive + ToPrimitive + Copy> Real for T {}

/// Convert an `f64` literal into the working scalar type.
pub(crate) fn rc<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 constant representable in scalar type")
}

pub type Complex<T> = nalgebra::Complex<T>;

pub type Op64 = hilbert::OperatorMatrix<f64>;
pub type Config64 = hamiltonian::RamanConfig<f64>;
pub type Decomposition64 = perturbation::PerturbativeDecomposition<f64>;
pub type Engine64 = propagators::PropagatorEngine<f64>;
