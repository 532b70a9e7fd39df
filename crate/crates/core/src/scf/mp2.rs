use crate::error::{Error, Result};
use crate::scf::{ScfResult, SpinOrbitalHamiltonian};

const MIN_DENOMINATOR: f64 = 1e-8;

/// Second-order Møller-Plesset correlation energy from canonical RHF orbitals,
/// E₂ = ¼ Σ |⟨ij||ab⟩|² / (ε_i + ε_j − ε_a − ε_b).
pub fn mp2_energy(ham: &SpinOrbitalHamiltonian, scf: &ScfResult, n_electrons: usize) -> Result<f64> {
    let n_so = ham.n_so;
    if scf.orbital_energies.len() * 2 != n_so {
        return Err(Error::DimensionMismatch {
            expected: n_so / 2,
            found: scf.orbital_energies.len(),
        });
    }
    if n_electrons > n_so {
        return Err(Error::Domain(format!("{n_electrons} electrons exceed {n_so} spin orbitals")));
    }
    let eps = |p: usize| scf.orbital_energies[p / 2];
    let mut e2 = 0.0;
    for i in 0..n_electrons {
        for j in 0..n_electrons {
            for a in n_electrons..n_so {
                for b in n_electrons..n_so {
                    let v = ham.g.get(i, j, a, b);
                    if v == 0.0 {
                        continue;
                    }
                    let denom = eps(i) + eps(j) - eps(a) - eps(b);
                    if denom.abs() < MIN_DENOMINATOR {
                        return Err(Error::Singularity { gap: denom });
                    }
                    e2 += v * v / denom;
                }
            }
        }
    }
    Ok(0.25 * e2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::Tensor4;
    use nalgebra::DMatrix;

    fn toy_scf(energies: Vec<f64>) -> ScfResult {
        let n = energies.len();
        ScfResult {
            mo_coefficients: DMatrix::identity(n, n),
            orbital_energies: energies,
            e_hf: Some(0.0),
            converged: true,
            n_iterations: 0,
        }
    }

    #[test]
    fn zero_coupling_gives_zero() {
        let h = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![-1.0, 0.5]));
        let ham = SpinOrbitalHamiltonian::from_spatial(&h, &Tensor4::zeros(2), 0.0).unwrap();
        let e = mp2_energy(&ham, &toy_scf(vec![-1.0, 0.5]), 2).unwrap();
        assert_eq!(e, 0.0);
    }

    #[test]
    fn degenerate_gap_is_singular() {
        let mut eri = Tensor4::zeros(2);
        for (p, q, r, s) in [(0, 1, 0, 1), (1, 0, 1, 0), (0, 1, 1, 0), (1, 0, 0, 1)] {
            eri.set(p, q, r, s, 0.2);
        }
        let h = DMatrix::zeros(2, 2);
        let ham = SpinOrbitalHamiltonian::from_spatial(&h, &eri, 0.0).unwrap();
        assert!(matches!(
            mp2_energy(&ham, &toy_scf(vec![0.3, 0.3]), 2),
            Err(Error::Singularity { .. })
        ));
    }
}
