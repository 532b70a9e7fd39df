use std::collections::HashMap;

use super::{Determinant, StateVector};
use crate::error::Result;

/// ⟨Ŝ²⟩ = ‖Ŝ₊ψ‖² + S_z(S_z + 1) for the normalized state.
pub fn s_squared_expectation(psi: &StateVector) -> Result<f64> {
    let psi = psi.normalized()?;
    let basis = psi.basis();
    let n_spatial = basis.n_so() / 2;
    let mut raised: HashMap<Determinant, f64> = HashMap::new();
    for (&det, &c) in basis.determinants().iter().zip(psi.coefficients().iter()) {
        if c == 0.0 {
            continue;
        }
        // Ŝ₊ = Σ_k a†_{kα} a_{kβ}
        for k in 0..n_spatial {
            if let Some((d, s)) = det.apply_excitation(2 * k, 2 * k + 1) {
                *raised.entry(d).or_insert(0.0) += s * c;
            }
        }
    }
    let sz = basis.sz();
    Ok(raised.values().map(|x| x * x).sum::<f64>() + sz * (sz + 1.0))
}

/// 2S + 1 from ⟨Ŝ²⟩ = S(S + 1).
pub fn multiplicity(s_squared: f64) -> u32 {
    (1.0 + 4.0 * s_squared.max(0.0)).sqrt().round() as u32
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::enumerate_basis;
    use nalgebra::DVector;
    use std::sync::Arc;

    #[test]
    fn closed_shell_is_singlet() {
        let basis = Arc::new(enumerate_basis(8, 4, 0.0).unwrap());
        let psi = StateVector::from_determinant(basis, Determinant::aufbau(2, 2)).unwrap();
        let s2 = s_squared_expectation(&psi).unwrap();
        assert!(s2.abs() < 1e-14);
        assert_eq!(multiplicity(s2), 1);
    }

    #[test]
    fn high_spin_pair_is_triplet() {
        let basis = Arc::new(enumerate_basis(4, 2, 1.0).unwrap());
        let psi = StateVector::from_determinant(basis, Determinant::from_orbitals(&[0, 2])).unwrap();
        let s2 = s_squared_expectation(&psi).unwrap();
        assert!((s2 - 2.0).abs() < 1e-14);
        assert_eq!(multiplicity(s2), 3);
    }

    #[test]
    fn open_shell_singlet_and_triplet_combinations() {
        // |0α 1β⟩ ± |0β 1α⟩ over spatial orbitals 0 and 1
        let basis = Arc::new(enumerate_basis(4, 2, 0.0).unwrap());
        let a = basis.index_of(Determinant::from_orbitals(&[0, 3])).unwrap();
        let b = basis.index_of(Determinant::from_orbitals(&[1, 2])).unwrap();
        let mut expectations = Vec::new();
        for sign in [1.0, -1.0] {
            let mut v = DVector::zeros(basis.len());
            v[a] = 1.0;
            v[b] = sign;
            let psi = StateVector::new(basis.clone(), v).unwrap();
            expectations.push(s_squared_expectation(&psi).unwrap());
        }
        expectations.sort_by(f64::total_cmp);
        assert!(expectations[0].abs() < 1e-14);
        assert!((expectations[1] - 2.0).abs() < 1e-14);
    }
}
