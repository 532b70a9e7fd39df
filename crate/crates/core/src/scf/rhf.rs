use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrals::IntegralSet;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScfOptions {
    pub max_iterations: usize,
    pub energy_tolerance: f64,
    pub density_tolerance: f64,
    /// Fraction of the previous density kept during the damped start.
    pub damping: f64,
    pub damped_iterations: usize,
}

impl Default for ScfOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            energy_tolerance: 1e-10,
            density_tolerance: 1e-8,
            damping: 0.5,
            damped_iterations: 5,
        }
    }
}

/// Molecular orbitals as columns of `mo_coefficients`, ordered by `orbital_energies`.
#[derive(Debug, Clone)]
pub struct ScfResult {
    pub mo_coefficients: DMatrix<f64>,
    pub orbital_energies: Vec<f64>,
    /// Total energy including nuclear repulsion; `None` for orbital sets that
    /// do not come from an SCF.
    pub e_hf: Option<f64>,
    pub converged: bool,
    pub n_iterations: usize,
}

/// S^{-1/2}, failing when S is not safely positive definite.
pub fn symmetric_orthogonalizer(overlap: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = SymmetricEigen::new(overlap.clone());
    let smallest = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if smallest <= 1e-10 {
        return Err(Error::Conditioning {
            smallest_eigenvalue: smallest,
        });
    }
    let inv_sqrt = DVector::from_iterator(eig.eigenvalues.len(), eig.eigenvalues.iter().map(|&l| l.sqrt().recip()));
    Ok(&eig.eigenvectors * DMatrix::from_diagonal(&inv_sqrt) * eig.eigenvectors.transpose())
}

fn density(c: &DMatrix<f64>, n_occ: usize) -> DMatrix<f64> {
    let occ = c.columns(0, n_occ);
    2.0 * &occ * occ.transpose()
}

fn fock(ints: &IntegralSet, hcore: &DMatrix<f64>, p: &DMatrix<f64>) -> DMatrix<f64> {
    let n = ints.n_ao;
    let mut f = hcore.clone();
    for a in 0..n {
        for b in 0..n {
            let mut g = 0.0;
            for c in 0..n {
                for d in 0..n {
                    g += p[(c, d)] * (ints.eri.get(a, b, c, d) - 0.5 * ints.eri.get(a, c, b, d));
                }
            }
            f[(a, b)] += g;
        }
    }
    f
}

fn electronic_energy(hcore: &DMatrix<f64>, f: &DMatrix<f64>, p: &DMatrix<f64>) -> f64 {
    0.5 * p.component_mul(&(hcore + f)).sum()
}

/// Eigenvectors of XᵀFX back-transformed by X, sorted by eigenvalue.
fn diagonalize_in_orthogonal_basis(f: &DMatrix<f64>, x: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>) {
    let eig = SymmetricEigen::new(x.transpose() * f * x);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let c_prime = DMatrix::from_columns(&order.iter().map(|&i| eig.eigenvectors.column(i)).collect::<Vec<_>>());
    let energies = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    (x * c_prime, energies)
}

/// Total closed-shell energy of the determinant built from the first `n_occ` columns of `c`.
pub fn closed_shell_energy(ints: &IntegralSet, c: &DMatrix<f64>, n_occ: usize) -> f64 {
    let hcore = ints.core_hamiltonian();
    let p = density(c, n_occ);
    let f = fock(ints, &hcore, &p);
    electronic_energy(&hcore, &f, &p) + ints.e_nuc
}

/// Closed-shell Roothaan SCF from a core-Hamiltonian guess.
pub fn rhf_solve(ints: &IntegralSet, n_electrons: usize, opts: &ScfOptions) -> Result<ScfResult> {
    if n_electrons % 2 != 0 {
        return Err(Error::Domain(format!("RHF needs an even electron count, got {n_electrons}")));
    }
    if n_electrons > 2 * ints.n_ao {
        return Err(Error::Domain(format!(
            "{n_electrons} electrons do not fit in {} spatial orbitals",
            ints.n_ao
        )));
    }
    let n_occ = n_electrons / 2;
    let x = symmetric_orthogonalizer(&ints.overlap)?;
    let hcore = ints.core_hamiltonian();

    let (mut c, _) = diagonalize_in_orthogonal_basis(&hcore, &x);
    let mut eps;
    let mut p = density(&c, n_occ);
    let mut energy = f64::NAN;
    let mut last_delta = f64::INFINITY;
    let mut oscillating = false;

    for iteration in 1..=opts.max_iterations {
        let f = fock(ints, &hcore, &p);
        let new_energy = electronic_energy(&hcore, &f, &p) + ints.e_nuc;
        (c, eps) = diagonalize_in_orthogonal_basis(&f, &x);
        let mut p_new = density(&c, n_occ);
        if iteration <= opts.damped_iterations || oscillating {
            p_new = (1.0 - opts.damping) * p_new + opts.damping * &p;
        }
        let density_change = (&p_new - &p).amax();
        // an energy rise after the damped start means plain Roothaan is oscillating
        if iteration > opts.damped_iterations && new_energy > energy + opts.energy_tolerance {
            oscillating = true;
        }
        last_delta = (new_energy - energy).abs();
        energy = new_energy;
        p = p_new;

        if iteration > opts.damped_iterations
            && last_delta < opts.energy_tolerance
            && density_change < opts.density_tolerance
        {
            return Ok(ScfResult {
                e_hf: Some(closed_shell_energy(ints, &c, n_occ)),
                mo_coefficients: c,
                orbital_energies: eps,
                converged: true,
                n_iterations: iteration,
            });
        }
    }
    Err(Error::ScfNotConverged {
        iterations: opts.max_iterations,
        last_delta,
    })
}

/// Löwdin orbitals S^{-1/2}, ordered by their diagonal core-Hamiltonian energy.
///
/// Used for open-shell systems where only an orthonormal orbital set is needed.
pub fn orthonormal_orbitals_open_shell(ints: &IntegralSet) -> Result<ScfResult> {
    let x = symmetric_orthogonalizer(&ints.overlap)?;
    let h_orth = x.transpose() * ints.core_hamiltonian() * &x;
    let mut order: Vec<usize> = (0..ints.n_ao).collect();
    order.sort_by(|&i, &j| h_orth[(i, i)].total_cmp(&h_orth[(j, j)]).then(i.cmp(&j)));
    let c = DMatrix::from_columns(&order.iter().map(|&i| x.column(i)).collect::<Vec<_>>());
    Ok(ScfResult {
        mo_coefficients: c,
        orbital_energies: order.iter().map(|&i| h_orth[(i, i)]).collect(),
        e_hf: None,
        converged: true,
        n_iterations: 0,
    })
}

/// Eigenvectors of the core Hamiltonian inside the Löwdin space, ascending.
///
/// Delocalized orbitals whose aufbau determinant is a sensible open-shell
/// reference; no SCF is involved.
pub fn core_hamiltonian_orbitals(ints: &IntegralSet) -> Result<ScfResult> {
    let x = symmetric_orthogonalizer(&ints.overlap)?;
    let eig = SymmetricEigen::new(x.transpose() * ints.core_hamiltonian() * &x);
    let mut order: Vec<usize> = (0..ints.n_ao).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]).then(i.cmp(&j)));
    let u = DMatrix::from_columns(&order.iter().map(|&i| eig.eigenvectors.column(i)).collect::<Vec<_>>());
    Ok(ScfResult {
        mo_coefficients: x * u,
        orbital_energies: order.iter().map(|&i| eig.eigenvalues[i]).collect(),
        e_hf: None,
        converged: true,
        n_iterations: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrals::{build_integral_set, hydrogen_chain, sto6g_hydrogen, Geometry};

    fn chain(n: usize, r: f64) -> IntegralSet {
        let g = hydrogen_chain(n, r).unwrap();
        let shell = sto6g_hydrogen();
        let shells: Vec<_> = (0..n).map(|i| shell.place(i).unwrap()).collect();
        build_integral_set(&g, &shells).unwrap()
    }

    fn orthonormality_error(ints: &IntegralSet, c: &DMatrix<f64>) -> f64 {
        (c.transpose() * &ints.overlap * c - DMatrix::identity(c.ncols(), c.ncols())).amax()
    }

    #[test]
    fn h4_rhf_energies() {
        let opts = ScfOptions::default();
        for (r, expected) in [(1.0, -2.11246), (2.6, -1.40424)] {
            let res = rhf_solve(&chain(4, r), 4, &opts).unwrap();
            assert!(res.converged);
            let e = res.e_hf.unwrap();
            assert!((e - expected).abs() < 1e-4, "R={r}: {e}");
        }
    }

    #[test]
    fn h2_orbitals_orthonormal_and_sorted() {
        let ints = chain(2, 0.74);
        let res = rhf_solve(&ints, 2, &ScfOptions::default()).unwrap();
        assert!(orthonormality_error(&ints, &res.mo_coefficients) < 1e-10);
        assert!(res.orbital_energies.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn odd_electrons_rejected() {
        assert!(matches!(rhf_solve(&chain(3, 1.0), 3, &ScfOptions::default()), Err(Error::Domain(_))));
        assert!(rhf_solve(&chain(2, 1.0), 6, &ScfOptions::default()).is_err());
    }

    #[test]
    fn non_convergence_is_reported() {
        let opts = ScfOptions {
            max_iterations: 6,
            ..ScfOptions::default()
        };
        match rhf_solve(&chain(4, 2.6), 4, &opts) {
            Err(Error::ScfNotConverged { iterations, .. }) => assert_eq!(iterations, 6),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn energy_is_stationary_under_occupied_virtual_rotation() {
        let ints = chain(4, 1.4);
        let res = rhf_solve(&ints, 4, &ScfOptions::default()).unwrap();
        let e0 = res.e_hf.unwrap();
        let rotated_energy = |theta: f64| {
            // Givens rotations mixing occupied 0,1 with virtual 2,3
            let mut c = res.mo_coefficients.clone();
            for (i, a, w) in [(0usize, 2usize, 1.0), (1, 3, 0.6), (1, 2, -0.3)] {
                let (s, co) = (w * theta).sin_cos();
                let ci = c.column(i).clone_owned();
                let ca = c.column(a).clone_owned();
                c.set_column(i, &(co * &ci + s * &ca));
                c.set_column(a, &(-s * &ci + co * &ca));
            }
            closed_shell_energy(&ints, &c, 2)
        };
        let d1 = rotated_energy(1e-3) - e0;
        let d2 = rotated_energy(5e-4) - e0;
        assert!(d1 > 0.0 && d2 > 0.0);
        let ratio = d1 / d2;
        assert!((ratio - 4.0).abs() < 0.05, "ratio {ratio}");
    }

    #[test]
    fn lowdin_orbitals_orthonormal() {
        let ints = chain(5, 1.0);
        let orbs = orthonormal_orbitals_open_shell(&ints).unwrap();
        assert!(orthonormality_error(&ints, &orbs.mo_coefficients) < 1e-10);
        assert!(orbs.e_hf.is_none());
        assert!(orbs.orbital_energies.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn lowdin_single_atom_is_identity() {
        let g = Geometry::new(vec![[0.0; 3]], vec![1.0], "H").unwrap();
        let ints = build_integral_set(&g, &[sto6g_hydrogen().place(0).unwrap()]).unwrap();
        let orbs = orthonormal_orbitals_open_shell(&ints).unwrap();
        assert!((orbs.mo_coefficients[(0, 0)] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn core_orbitals_orthonormal_and_ascending() {
        let ints = chain(5, 1.4);
        let res = core_hamiltonian_orbitals(&ints).unwrap();
        assert!(orthonormality_error(&ints, &res.mo_coefficients) < 1e-12);
        assert!(res.orbital_energies.windows(2).all(|w| w[0] <= w[1]));
        let h = res.mo_coefficients.transpose() * ints.core_hamiltonian() * &res.mo_coefficients;
        assert!((h - DMatrix::from_diagonal(&DVector::from_vec(res.orbital_energies.clone()))).amax() < 1e-12);
    }
}
