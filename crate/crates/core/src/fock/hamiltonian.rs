use nalgebra::{DMatrix, DVector};

use super::{DeterminantBasis, StateVector};
use crate::error::{Error, Result};
use crate::scf::SpinOrbitalHamiltonian;

fn check_dims(ham: &SpinOrbitalHamiltonian, basis: &DeterminantBasis) -> Result<()> {
    if ham.n_so != basis.n_so() {
        return Err(Error::DimensionMismatch {
            expected: basis.n_so(),
            found: ham.n_so,
        });
    }
    Ok(())
}

/// Column `col` of Ĥ in the sector, accumulated into `out` with weight `c`.
fn accumulate_column(ham: &SpinOrbitalHamiltonian, basis: &DeterminantBasis, col: usize, c: f64, out: &mut DVector<f64>) {
    let n = ham.n_so;
    let det = basis.get(col);
    out[col] += ham.e_nuc * c;
    for q in det.occupied() {
        for p in 0..n {
            let h = ham.h[(p, q)];
            if h == 0.0 {
                continue;
            }
            if let Some((d, s)) = det.apply_excitation(p, q) {
                if let Some(row) = basis.index_of(d) {
                    out[row] += h * s * c;
                }
            }
        }
    }
    // ¼ Σ g_pqrs a†p a†q a_s a_r = Σ_{p<q, r<s} g_pqrs a†p a†q a_s a_r
    let occ: Vec<usize> = det.occupied().collect();
    for (a, &r) in occ.iter().enumerate() {
        for &s in &occ[a + 1..] {
            for p in 0..n {
                for q in p + 1..n {
                    let g = ham.g.get(p, q, r, s);
                    if g == 0.0 {
                        continue;
                    }
                    if let Some((d, sign)) = det.apply_pair_string(p, q, s, r) {
                        if let Some(row) = basis.index_of(d) {
                            out[row] += g * sign * c;
                        }
                    }
                }
            }
        }
    }
}

/// Ĥ|ψ⟩ including the constant term.
pub fn apply_hamiltonian(ham: &SpinOrbitalHamiltonian, psi: &StateVector) -> Result<StateVector> {
    let basis = psi.basis();
    check_dims(ham, basis)?;
    let mut out = DVector::zeros(basis.len());
    for (col, &c) in psi.coefficients().iter().enumerate() {
        if c != 0.0 {
            accumulate_column(ham, basis, col, c, &mut out);
        }
    }
    StateVector::new(basis.clone(), out)
}

/// Dense matrix of Ĥ over the sector.
pub fn hamiltonian_matrix(ham: &SpinOrbitalHamiltonian, basis: &DeterminantBasis) -> Result<DMatrix<f64>> {
    check_dims(ham, basis)?;
    let dim = basis.len();
    let mut m = DMatrix::zeros(dim, dim);
    let mut column = DVector::zeros(dim);
    for col in 0..dim {
        column.fill(0.0);
        accumulate_column(ham, basis, col, 1.0, &mut column);
        m.set_column(col, &column);
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::enumerate_basis;
    use crate::tensor::Tensor4;
    use std::sync::Arc;

    #[test]
    fn number_operator_hamiltonian() {
        let ham = SpinOrbitalHamiltonian::from_spatial(&DMatrix::identity(3, 3), &Tensor4::zeros(3), 0.0).unwrap();
        let basis = Arc::new(enumerate_basis(6, 3, 0.5).unwrap());
        let psi = StateVector::new(basis.clone(), DVector::from_fn(basis.len(), |i, _| i as f64 - 3.0)).unwrap();
        let out = apply_hamiltonian(&ham, &psi).unwrap();
        assert!((out.coefficients() - 3.0 * psi.coefficients()).amax() < 1e-14);
    }

    #[test]
    fn matrix_agrees_with_application() {
        let mut eri = Tensor4::zeros(2);
        for p in 0..2 {
            for q in 0..2 {
                for r in 0..2 {
                    for s in 0..2 {
                        eri.set(p, q, r, s, 0.1 * (1 + p + q + r + s) as f64);
                    }
                }
            }
        }
        let h = DMatrix::from_row_slice(2, 2, &[-1.0, 0.2, 0.2, -0.5]);
        let ham = SpinOrbitalHamiltonian::from_spatial(&h, &eri, 0.3).unwrap();
        let basis = Arc::new(enumerate_basis(4, 2, 0.0).unwrap());
        let m = hamiltonian_matrix(&ham, &basis).unwrap();
        assert!((&m - m.transpose()).amax() < 1e-14);
        let v = DVector::from_vec(vec![0.3, -0.1, 0.5, 0.2]);
        let psi = StateVector::new(basis.clone(), v.clone()).unwrap();
        let applied = apply_hamiltonian(&ham, &psi).unwrap();
        assert!((applied.coefficients() - &m * v).amax() < 1e-14);
    }
}
