use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::integrals::IntegralSet;
use crate::tensor::Tensor4;

/// Second-quantized Hamiltonian over spin orbitals
///
/// `Ĥ = Σ h_pq a†_p a_q + ¼ Σ ⟨pq||rs⟩ a†_p a†_q a_s a_r + e_nuc`.
///
/// Spin orbital `p` is spatial orbital `p / 2` with spin `p % 2` (0 = α, 1 = β).
#[derive(Debug, Clone)]
pub struct SpinOrbitalHamiltonian {
    pub n_so: usize,
    pub h: DMatrix<f64>,
    /// Antisymmetrized integrals ⟨pq||rs⟩ in physicist order.
    pub g: Tensor4,
    pub e_nuc: f64,
}

#[inline]
pub(crate) fn spin_of(p: usize) -> usize {
    p & 1
}

impl SpinOrbitalHamiltonian {
    /// Expands spatial one-body integrals and chemist-notation `(pq|rs)` repulsion
    /// integrals into spin orbitals.
    pub fn from_spatial(h_spatial: &DMatrix<f64>, eri_spatial: &Tensor4, e_nuc: f64) -> Result<Self> {
        let n = h_spatial.nrows();
        if h_spatial.ncols() != n || eri_spatial.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: eri_spatial.dim(),
            });
        }
        let n_so = 2 * n;
        let h = DMatrix::from_fn(n_so, n_so, |p, q| {
            if spin_of(p) == spin_of(q) {
                h_spatial[(p / 2, q / 2)]
            } else {
                0.0
            }
        });
        let mut g = Tensor4::zeros(n_so);
        for p in 0..n_so {
            for q in 0..n_so {
                for r in 0..n_so {
                    for s in 0..n_so {
                        let mut v = 0.0;
                        if spin_of(p) == spin_of(r) && spin_of(q) == spin_of(s) {
                            v += eri_spatial.get(p / 2, r / 2, q / 2, s / 2);
                        }
                        if spin_of(p) == spin_of(s) && spin_of(q) == spin_of(r) {
                            v -= eri_spatial.get(p / 2, s / 2, q / 2, r / 2);
                        }
                        g.set(p, q, r, s, v);
                    }
                }
            }
        }
        Ok(Self { n_so, h, g, e_nuc })
    }

    /// Σ_p ε_p a†_p a_p with one energy per spatial orbital.
    pub fn diagonal_one_body(spatial_energies: &[f64]) -> Self {
        let n_so = 2 * spatial_energies.len();
        let h = DMatrix::from_fn(n_so, n_so, |p, q| if p == q { spatial_energies[p / 2] } else { 0.0 });
        Self {
            n_so,
            h,
            g: Tensor4::zeros(n_so),
            e_nuc: 0.0,
        }
    }

    /// `self + factor · other`, including the constant terms.
    pub fn scaled_add(&self, factor: f64, other: &Self) -> Result<Self> {
        if other.n_so != self.n_so {
            return Err(Error::DimensionMismatch {
                expected: self.n_so,
                found: other.n_so,
            });
        }
        let mut g = self.g.clone();
        for p in 0..self.n_so {
            for q in 0..self.n_so {
                for r in 0..self.n_so {
                    for s in 0..self.n_so {
                        g.add(p, q, r, s, factor * other.g.get(p, q, r, s));
                    }
                }
            }
        }
        Ok(Self {
            n_so: self.n_so,
            h: &self.h + factor * &other.h,
            g,
            e_nuc: self.e_nuc + factor * other.e_nuc,
        })
    }

    /// Copy with `shift` added to the constant term.
    pub fn shifted(&self, shift: f64) -> Self {
        let mut out = self.clone();
        out.e_nuc += shift;
        out
    }
}

/// AO → MO transformation of the one- and two-electron integrals, expanded into
/// the spin-orbital Hamiltonian. The four-index transform runs one index at a time.
pub fn mo_transform(ints: &IntegralSet, orbitals: &DMatrix<f64>) -> Result<SpinOrbitalHamiltonian> {
    let n = ints.n_ao;
    if orbitals.nrows() != n || orbitals.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: if orbitals.nrows() != n { orbitals.nrows() } else { orbitals.ncols() },
        });
    }
    let c = orbitals;
    let h_mo = c.transpose() * ints.core_hamiltonian() * c;

    let mut eri_mo = ints.eri.clone();
    // Each pass contracts the last index and rotates it to the front.
    for _ in 0..4 {
        let mut next = Tensor4::zeros(n);
        for s_new in 0..n {
            for p in 0..n {
                for q in 0..n {
                    for r in 0..n {
                        let mut v = 0.0;
                        for s in 0..n {
                            v += eri_mo.get(p, q, r, s) * c[(s, s_new)];
                        }
                        next.set(s_new, p, q, r, v);
                    }
                }
            }
        }
        eri_mo = next;
    }
    SpinOrbitalHamiltonian::from_spatial(&h_mo, &eri_mo, ints.e_nuc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrals::{build_integral_set, hydrogen_chain, sto6g_hydrogen};
    use crate::scf::{rhf_solve, ScfOptions};

    fn h4(r: f64) -> IntegralSet {
        let g = hydrogen_chain(4, r).unwrap();
        let shell = sto6g_hydrogen();
        let shells: Vec<_> = (0..4).map(|i| shell.place(i).unwrap()).collect();
        build_integral_set(&g, &shells).unwrap()
    }

    #[test]
    fn antisymmetry_and_pair_symmetry() {
        let ints = h4(1.2);
        let scf = rhf_solve(&ints, 4, &ScfOptions::default()).unwrap();
        let ham = mo_transform(&ints, &scf.mo_coefficients).unwrap();
        let n = ham.n_so;
        assert!((&ham.h - ham.h.transpose()).amax() < 1e-12);
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        let v = ham.g.get(p, q, r, s);
                        assert!((v + ham.g.get(q, p, r, s)).abs() < 1e-12);
                        assert!((v + ham.g.get(p, q, s, r)).abs() < 1e-12);
                        assert!((v - ham.g.get(r, s, p, q)).abs() < 1e-12);
                        let conserving = spin_of(p) + spin_of(q) == spin_of(r) + spin_of(s);
                        if !conserving {
                            assert_eq!(v, 0.0);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn four_index_transform_matches_direct_contraction() {
        let ints = h4(0.9);
        let scf = rhf_solve(&ints, 4, &ScfOptions::default()).unwrap();
        let c = &scf.mo_coefficients;
        let ham = mo_transform(&ints, c).unwrap();
        // ⟨01|23⟩ spin-α/β block equals (02|13) in the spatial MOs
        let (p, q, r, s) = (0usize, 1usize, 2usize, 3usize);
        let mut direct = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                for cc in 0..4 {
                    for d in 0..4 {
                        direct += c[(a, p)] * c[(b, r)] * c[(cc, q)] * c[(d, s)] * ints.eri.get(a, b, cc, d);
                    }
                }
            }
        }
        // α on p,r and β on q,s
        let v = ham.g.get(2 * p, 2 * q + 1, 2 * r, 2 * s + 1);
        assert!((v - direct).abs() < 1e-12);
    }

    #[test]
    fn scaled_add_and_shift() {
        let a = SpinOrbitalHamiltonian::diagonal_one_body(&[1.0, 2.0]);
        let b = a.scaled_add(-1.0, &a).unwrap();
        assert!(b.h.amax() < 1e-15);
        assert_eq!(a.shifted(3.0).e_nuc, 3.0);
        let c = SpinOrbitalHamiltonian::diagonal_one_body(&[1.0]);
        assert!(a.scaled_add(1.0, &c).is_err());
    }
}
