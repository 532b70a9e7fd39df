//! Fixtures shared by the benchmarks.

use cse_core::ansatz::{initial_parameters, CseProblem, ExpansionForm};
use cse_core::fock::Rank;
use cse_core::integrals::sto6g_hydrogen;
use cse_core::pipeline::ChainSystem;
use cse_core::scf::ScfOptions;

pub fn chain(n_atoms: usize, r: f64) -> ChainSystem {
    ChainSystem::new(n_atoms, r, &sto6g_hydrogen(), &ScfOptions::default()).expect("valid chain")
}

/// CSE(M) problem from the aufbau determinant with the seeded starting point.
pub fn problem(sys: &ChainSystem, n_layers: usize) -> (CseProblem, Vec<f64>) {
    let p = CseProblem::new(&sys.hamiltonian, sys.aufbau(), ExpansionForm::Linear, n_layers, Rank::Two).expect("reference in sector");
    let x = initial_parameters(p.n_parameters(), 1);
    (p, x)
}
