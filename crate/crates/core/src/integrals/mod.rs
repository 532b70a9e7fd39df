//! Geometry, minimal s-type Gaussian basis sets and the closed-form integral engine.

mod basis_set;
mod boys;
mod engine;
mod geometry;

pub use basis_set::{parse_basis_file, sto6g_hydrogen, ContractedShell, ShellTemplate, STO6G_BASIS_TEXT};
pub use boys::boys_f0;
pub use engine::{build_integral_set, IntegralSet};
pub use geometry::{hydrogen_chain, Geometry, ANGSTROM_TO_BOHR};
