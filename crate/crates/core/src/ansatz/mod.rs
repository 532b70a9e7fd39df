//! Products of two-body operators acting on a reference determinant, fitted by
//! minimizing the squared CSE residual.
//!
//! A layer F̂_k contributes either (1 + F̂_k) or e^{F̂_k}. The CSE(M) runs use the
//! linear form; the exponential form shares the objective and gradient code.
//! Solves follow a short Hamiltonian path from the determinant diagonal to Ĥ so
//! that each reference is carried to the eigenstate it connects to.

mod excited;
mod objective;
mod solve;

pub use excited::{
    excited_state_search, merged_candidates, Candidate, references_by_diagonal_energy, references_by_orbital_energy, ExcitedSearch, ExcitedStateResult, SearchSector,
    TargetState, ENERGY_MATCH, IDENTIFICATION_OVERLAP,
};
pub use objective::{build_state, cse_gradient, cse_objective, CseProblem};
pub use solve::{
    fit_convergence_exponent, initial_parameters, solve_cse, solve_cse_excited, solve_cse_in, CseOptions, CseSolveResult, StageSummary, TrajectoryPoint,
    INITIAL_AMPLITUDE,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{Determinant, Rank, TwoBodyCoefficients};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExpansionForm {
    Exponential,
    Linear,
}

/// Layer coefficients; layer 0 acts first on the reference.
#[derive(Debug, Clone)]
pub struct ExpansionParams {
    pub form: ExpansionForm,
    pub layers: Vec<TwoBodyCoefficients>,
    pub reference: Determinant,
}

impl ExpansionParams {
    pub fn new(form: ExpansionForm, layers: Vec<TwoBodyCoefficients>, reference: Determinant) -> Result<Self> {
        let Some(first) = layers.first() else {
            return Err(Error::Domain("an expansion needs at least one layer".into()));
        };
        for layer in &layers[1..] {
            if layer.n_so() != first.n_so() {
                return Err(Error::DimensionMismatch {
                    expected: first.n_so(),
                    found: layer.n_so(),
                });
            }
            if layer.rank() != first.rank() {
                return Err(Error::Domain("all layers must have the same rank".into()));
            }
        }
        if first.n_so() > 64 || (first.n_so() < 64 && reference.bits() >> first.n_so() != 0) {
            return Err(Error::Domain(format!("reference {reference:?} occupies orbitals beyond n_so = {}", first.n_so())));
        }
        Ok(Self { form, layers, reference })
    }

    pub fn zeros(form: ExpansionForm, rank: Rank, n_so: usize, n_layers: usize, reference: Determinant) -> Result<Self> {
        Self::new(form, vec![TwoBodyCoefficients::zeros(rank, n_so); n_layers], reference)
    }

    pub fn n_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn n_so(&self) -> usize {
        self.layers[0].n_so()
    }

    pub fn rank(&self) -> Rank {
        self.layers[0].rank()
    }
}
