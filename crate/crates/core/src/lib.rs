//! Two-body product expansions of many-fermion wave functions.
//!
//! The crate builds minimal-basis hydrogen-chain Hamiltonians, solves them exactly
//! in a determinant sector, and reproduces those exact states with products of
//! general two-body operators acting on a single determinant. The expansion
//! parameters are found by driving the contracted Schrödinger equation residual
//! to zero; a contracted Dalgarno-Lewis solver shows why two-body operators suffice.

pub mod ansatz;
pub mod dl;
pub mod error;
pub mod fci;
pub mod fock;
pub mod integrals;
pub mod optim;
pub mod pipeline;
pub mod scf;
pub mod tensor;

pub use error::{Error, Result};
pub use fci::{fci_spectrum, Spectrum};
pub use fock::{Determinant, DeterminantBasis, StateVector, TwoBodyCoefficients};
pub use integrals::{build_integral_set, hydrogen_chain, Geometry, IntegralSet};
pub use scf::{rhf_solve, ScfResult, SpinOrbitalHamiltonian};
