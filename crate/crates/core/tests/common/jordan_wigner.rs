//! Dense Jordan-Wigner matrices on the full Fock space. Mode p is the p-th tensor
//! factor from the right, so basis index and occupation bitstring coincide and
//! a_p = I ⊗ … ⊗ σ ⊗ Z ⊗ … ⊗ Z.

use nalgebra::DMatrix;

use cse_core::scf::SpinOrbitalHamiltonian;

pub fn annihilator(n_so: usize, p: usize) -> DMatrix<f64> {
    let id = DMatrix::<f64>::identity(2, 2);
    let z = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
    let lower = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
    let mut m = DMatrix::<f64>::identity(1, 1);
    for mode in (0..n_so).rev() {
        let factor = match mode.cmp(&p) {
            std::cmp::Ordering::Greater => &id,
            std::cmp::Ordering::Equal => &lower,
            std::cmp::Ordering::Less => &z,
        };
        m = m.kronecker(factor);
    }
    m
}

pub fn ladder(n_so: usize) -> Vec<DMatrix<f64>> {
    (0..n_so).map(|p| annihilator(n_so, p)).collect()
}

pub fn dense_hamiltonian(ham: &SpinOrbitalHamiltonian) -> DMatrix<f64> {
    let n = ham.n_so;
    let a = ladder(n);
    let ad: Vec<_> = a.iter().map(|m| m.transpose()).collect();
    let dim = 1 << n;
    let mut h = DMatrix::<f64>::identity(dim, dim) * ham.e_nuc;
    for p in 0..n {
        for q in 0..n {
            if ham.h[(p, q)] != 0.0 {
                h += &ad[p] * &a[q] * ham.h[(p, q)];
            }
        }
    }
    let lowered: Vec<Vec<DMatrix<f64>>> = (0..n).map(|s| (0..n).map(|r| &a[s] * &a[r]).collect()).collect();
    for p in 0..n {
        for q in 0..n {
            let mut inner = DMatrix::zeros(dim, dim);
            for r in 0..n {
                for s in 0..n {
                    let g = ham.g.get(p, q, r, s);
                    if g != 0.0 {
                        inner += &lowered[s][r] * (0.25 * g);
                    }
                }
            }
            h += &ad[p] * &ad[q] * inner;
        }
    }
    h
}

pub fn pair_string(a: &[DMatrix<f64>], i: usize, j: usize, l: usize, k: usize) -> DMatrix<f64> {
    a[i].transpose() * a[j].transpose() * &a[l] * &a[k]
}
