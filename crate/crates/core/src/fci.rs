//! Dense full configuration interaction inside one determinant sector.

use std::sync::Arc;

use nalgebra::SymmetricEigen;

use crate::error::{Error, Result};
use crate::fock::{hamiltonian_matrix, multiplicity, s_squared_expectation, DeterminantBasis, StateVector};
use crate::scf::{ScfResult, SpinOrbitalHamiltonian};

/// Largest sector handled by the dense solver.
pub const MAX_DENSE_DIMENSION: usize = 10_000;

/// Lowest eigenpairs of Ĥ in a sector, energies including nuclear repulsion.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub energies: Vec<f64>,
    pub states: Vec<StateVector>,
    pub s_squared: Vec<f64>,
    pub multiplicities: Vec<u32>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn ground_energy(&self) -> f64 {
        self.energies[0]
    }

    pub fn ground_state(&self) -> &StateVector {
        &self.states[0]
    }

    /// Index and |overlap| of the eigenvector closest to `psi`.
    pub fn best_match(&self, psi: &StateVector) -> Result<(usize, f64)> {
        let psi = psi.normalized()?;
        let mut best = (0, -1.0);
        for (i, v) in self.states.iter().enumerate() {
            let o = psi.dot(v).abs();
            if o > best.1 {
                best = (i, o);
            }
        }
        Ok(best)
    }
}

/// The `n_states` lowest eigenpairs of the dense sector Hamiltonian.
pub fn fci_spectrum(ham: &SpinOrbitalHamiltonian, basis: Arc<DeterminantBasis>, n_states: usize) -> Result<Spectrum> {
    let dim = basis.len();
    if dim > MAX_DENSE_DIMENSION {
        return Err(Error::SizeLimit {
            dimension: dim,
            cap: MAX_DENSE_DIMENSION,
        });
    }
    let matrix = hamiltonian_matrix(ham, &basis)?;
    let eig = SymmetricEigen::new(matrix);
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    order.truncate(n_states.min(dim));

    let mut spectrum = Spectrum {
        energies: Vec::with_capacity(order.len()),
        states: Vec::with_capacity(order.len()),
        s_squared: Vec::with_capacity(order.len()),
        multiplicities: Vec::with_capacity(order.len()),
    };
    for idx in order {
        let mut v = eig.eigenvectors.column(idx).clone_owned();
        // fix the phase: largest-magnitude component positive
        let lead = v.iamax();
        if v[lead] < 0.0 {
            v.neg_mut();
        }
        let state = StateVector::new(basis.clone(), v)?;
        let s2 = s_squared_expectation(&state)?;
        spectrum.energies.push(eig.eigenvalues[idx]);
        spectrum.s_squared.push(s2);
        spectrum.multiplicities.push(multiplicity(s2));
        spectrum.states.push(state);
    }
    Ok(spectrum)
}

/// E_FCI − E_HF.
pub fn correlation_energy(spectrum: &Spectrum, scf: &ScfResult) -> Result<f64> {
    let e_hf = scf
        .e_hf
        .ok_or_else(|| Error::Domain("orbital set carries no Hartree-Fock energy".into()))?;
    if spectrum.is_empty() {
        return Err(Error::Domain("spectrum has no states".into()));
    }
    Ok(spectrum.ground_energy() - e_hf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{apply_hamiltonian, enumerate_basis, Determinant};
    use crate::tensor::Tensor4;
    use nalgebra::DMatrix;

    #[test]
    fn single_determinant_sector() {
        let h = DMatrix::from_row_slice(2, 2, &[-1.0, 0.1, 0.1, 0.4]);
        let mut eri = Tensor4::zeros(2);
        eri.set(0, 0, 0, 0, 0.6);
        let ham = SpinOrbitalHamiltonian::from_spatial(&h, &eri, 0.2).unwrap();
        // all four spin orbitals filled: one determinant
        let basis = Arc::new(enumerate_basis(4, 4, 0.0).unwrap());
        let spec = fci_spectrum(&ham, basis.clone(), 3).unwrap();
        assert_eq!(spec.len(), 1);
        let det = StateVector::from_determinant(basis, Determinant::from_bits(0b1111)).unwrap();
        let expect = det.dot(&apply_hamiltonian(&ham, &det).unwrap());
        assert!((spec.energies[0] - expect).abs() < 1e-12);
    }

    #[test]
    fn noninteracting_correlation_is_zero() {
        let h = DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 0.4]);
        let ham = SpinOrbitalHamiltonian::from_spatial(&h, &Tensor4::zeros(2), 0.0).unwrap();
        let basis = Arc::new(enumerate_basis(4, 2, 0.0).unwrap());
        let spec = fci_spectrum(&ham, basis, 1).unwrap();
        let scf = ScfResult {
            mo_coefficients: DMatrix::identity(2, 2),
            orbital_energies: vec![-1.0, 0.4],
            e_hf: Some(-2.0),
            converged: true,
            n_iterations: 1,
        };
        assert!(correlation_energy(&spec, &scf).unwrap().abs() < 1e-12);
    }
}
