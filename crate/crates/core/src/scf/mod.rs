//! Restricted Hartree-Fock, orthonormal orbital sets, the spin-orbital
//! Hamiltonian and second-order Møller-Plesset energies.

mod hamiltonian;
mod mp2;
mod rhf;

pub use hamiltonian::{mo_transform, SpinOrbitalHamiltonian};
pub use mp2::mp2_energy;
pub use rhf::{closed_shell_energy, core_hamiltonian_orbitals, orthonormal_orbitals_open_shell, rhf_solve, symmetric_orthogonalizer, ScfOptions, ScfResult};
