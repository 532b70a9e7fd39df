use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};

use super::basis_set::ContractedShell;
use super::boys::boys_f0_unchecked;
use super::geometry::{distance_squared, Geometry};
use crate::error::{Error, Result};
use crate::tensor::Tensor4;

const OVERLAP_EIGENVALUE_FLOOR: f64 = 1e-10;

/// Atomic-orbital integrals over s-type contracted Gaussians.
///
/// `eri` is in chemist notation, `eri(p,q,r,s) = (pq|rs)`.
#[derive(Debug, Clone)]
pub struct IntegralSet {
    pub n_ao: usize,
    pub overlap: DMatrix<f64>,
    pub kinetic: DMatrix<f64>,
    pub nuclear: DMatrix<f64>,
    pub eri: Tensor4,
    pub e_nuc: f64,
}

impl IntegralSet {
    pub fn core_hamiltonian(&self) -> DMatrix<f64> {
        &self.kinetic + &self.nuclear
    }
}

struct PrimitivePair {
    exponent: f64,
    center: [f64; 3],
    // weight_a · weight_b · exp(−ab/p |AB|²)
    prefactor: f64,
    reduced: f64,
    ab_distance2: f64,
}

fn primitive_pairs(a: &ContractedShell, pa: &[f64; 3], b: &ContractedShell, pb: &[f64; 3]) -> Vec<PrimitivePair> {
    let ab2 = distance_squared(pa, pb);
    let mut out = Vec::with_capacity(a.exponents().len() * b.exponents().len());
    for (alpha, wa) in a.primitives() {
        for (beta, wb) in b.primitives() {
            let p = alpha + beta;
            let mu = alpha * beta / p;
            let center = [
                (alpha * pa[0] + beta * pb[0]) / p,
                (alpha * pa[1] + beta * pb[1]) / p,
                (alpha * pa[2] + beta * pb[2]) / p,
            ];
            out.push(PrimitivePair {
                exponent: p,
                center,
                prefactor: wa * wb * (-mu * ab2).exp(),
                reduced: mu,
                ab_distance2: ab2,
            });
        }
    }
    out
}

/// Closed-form overlap, kinetic, nuclear-attraction and repulsion integrals.
pub fn build_integral_set(geometry: &Geometry, shells: &[ContractedShell]) -> Result<IntegralSet> {
    let n = shells.len();
    for (i, sh) in shells.iter().enumerate() {
        if sh.center() >= geometry.len() {
            return Err(Error::Geometry(format!(
                "shell {i} references center {} but the geometry has {} centers",
                sh.center(),
                geometry.len()
            )));
        }
    }
    let pos = |sh: &ContractedShell| geometry.centers()[sh.center()];

    let mut pairs = Vec::with_capacity(n * n);
    for a in shells {
        for b in shells {
            pairs.push(primitive_pairs(a, &pos(a), b, &pos(b)));
        }
    }
    let pair = |p: usize, q: usize| &pairs[p * n + q];

    let mut overlap = DMatrix::zeros(n, n);
    let mut kinetic = DMatrix::zeros(n, n);
    let mut nuclear = DMatrix::zeros(n, n);
    for p in 0..n {
        for q in 0..=p {
            let (mut s, mut t, mut v) = (0.0, 0.0, 0.0);
            for pp in pair(p, q) {
                let sp = pp.prefactor * (PI / pp.exponent).powf(1.5);
                s += sp;
                t += pp.reduced * (3.0 - 2.0 * pp.reduced * pp.ab_distance2) * sp;
                for (c, &z) in geometry.centers().iter().zip(geometry.charges()) {
                    let x = pp.exponent * distance_squared(&pp.center, c);
                    v -= z * 2.0 * PI / pp.exponent * pp.prefactor * boys_f0_unchecked(x);
                }
            }
            overlap[(p, q)] = s;
            overlap[(q, p)] = s;
            kinetic[(p, q)] = t;
            kinetic[(q, p)] = t;
            nuclear[(p, q)] = v;
            nuclear[(q, p)] = v;
        }
    }

    let smallest = SymmetricEigen::new(overlap.clone())
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if smallest <= OVERLAP_EIGENVALUE_FLOOR {
        return Err(Error::Conditioning {
            smallest_eigenvalue: smallest,
        });
    }

    let mut eri = Tensor4::zeros(n);
    let coulomb_prefactor = 2.0 * PI.powf(2.5);
    for p in 0..n {
        for q in 0..=p {
            let pq = p * (p + 1) / 2 + q;
            for r in 0..n {
                for s in 0..=r {
                    let rs = r * (r + 1) / 2 + s;
                    if rs > pq {
                        continue;
                    }
                    let mut value = 0.0;
                    for bra in pair(p, q) {
                        for ket in pair(r, s) {
                            let sum = bra.exponent + ket.exponent;
                            let x = bra.exponent * ket.exponent / sum * distance_squared(&bra.center, &ket.center);
                            value += coulomb_prefactor / (bra.exponent * ket.exponent * sum.sqrt())
                                * bra.prefactor
                                * ket.prefactor
                                * boys_f0_unchecked(x);
                        }
                    }
                    for (a, b) in [(p, q), (q, p)] {
                        for (c, d) in [(r, s), (s, r)] {
                            eri.set(a, b, c, d, value);
                            eri.set(c, d, a, b, value);
                        }
                    }
                }
            }
        }
    }

    Ok(IntegralSet {
        n_ao: n,
        overlap,
        kinetic,
        nuclear,
        eri,
        e_nuc: geometry.nuclear_repulsion(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrals::{hydrogen_chain, sto6g_hydrogen};

    fn chain_integrals(n: usize, r: f64) -> IntegralSet {
        let g = hydrogen_chain(n, r).unwrap();
        let shell = sto6g_hydrogen();
        let shells: Vec<_> = (0..n).map(|i| shell.place(i).unwrap()).collect();
        build_integral_set(&g, &shells).unwrap()
    }

    #[test]
    fn single_atom_overlap_is_one() {
        let g = Geometry::new(vec![[0.0; 3]], vec![1.0], "H").unwrap();
        let ints = build_integral_set(&g, &[sto6g_hydrogen().place(0).unwrap()]).unwrap();
        assert!((ints.overlap[(0, 0)] - 1.0).abs() < 1e-10);
        assert_eq!(ints.e_nuc, 0.0);
    }

    #[test]
    fn eightfold_symmetry() {
        let ints = chain_integrals(4, 1.1);
        let n = ints.n_ao;
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        let v = ints.eri.get(p, q, r, s);
                        for w in [
                            ints.eri.get(q, p, r, s),
                            ints.eri.get(p, q, s, r),
                            ints.eri.get(r, s, p, q),
                            ints.eri.get(s, r, q, p),
                        ] {
                            assert!((v - w).abs() < 1e-12);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn one_electron_symmetry_and_normalization() {
        let ints = chain_integrals(5, 0.9);
        for m in [&ints.overlap, &ints.kinetic, &ints.nuclear] {
            assert!((m - m.transpose()).amax() < 1e-12);
        }
        for i in 0..5 {
            assert!((ints.overlap[(i, i)] - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn translation_invariance() {
        let g = hydrogen_chain(4, 1.3).unwrap();
        let shifted = g.translated([0.7, -1.9, 3.3]);
        let shell = sto6g_hydrogen();
        let shells: Vec<_> = (0..4).map(|i| shell.place(i).unwrap()).collect();
        let a = build_integral_set(&g, &shells).unwrap();
        let b = build_integral_set(&shifted, &shells).unwrap();
        assert!((&a.overlap - &b.overlap).amax() < 1e-12);
        assert!((&a.kinetic - &b.kinetic).amax() < 1e-12);
        assert!((&a.nuclear - &b.nuclear).amax() < 1e-12);
        let diff = a
            .eri
            .as_slice()
            .iter()
            .zip(b.eri.as_slice())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        assert!(diff < 1e-12);
        assert!((a.e_nuc - b.e_nuc).abs() < 1e-12);
    }

    #[test]
    fn swapping_shells_permutes_indices() {
        let g = hydrogen_chain(3, 1.0).unwrap();
        let shell = sto6g_hydrogen();
        let forward: Vec<_> = (0..3).map(|i| shell.place(i).unwrap()).collect();
        let mut swapped = forward.clone();
        swapped.swap(0, 2);
        let a = build_integral_set(&g, &forward).unwrap();
        let b = build_integral_set(&g, &swapped).unwrap();
        let perm = [2usize, 1, 0];
        for p in 0..3 {
            for q in 0..3 {
                assert!((a.overlap[(perm[p], perm[q])] - b.overlap[(p, q)]).abs() < 1e-15);
                assert!((a.nuclear[(perm[p], perm[q])] - b.nuclear[(p, q)]).abs() < 1e-15);
                for r in 0..3 {
                    for s in 0..3 {
                        assert!((a.eri.get(perm[p], perm[q], perm[r], perm[s]) - b.eri.get(p, q, r, s)).abs() < 1e-15);
                    }
                }
            }
        }
    }

    #[test]
    fn shell_with_bad_center_is_rejected() {
        let g = hydrogen_chain(2, 1.0).unwrap();
        let shells = vec![sto6g_hydrogen().place(5).unwrap()];
        assert!(matches!(build_integral_set(&g, &shells), Err(Error::Geometry(_))));
    }

    #[test]
    fn linear_dependence_is_a_conditioning_error() {
        let g = Geometry::new(vec![[0.0; 3], [0.0, 0.0, 1e-6]], vec![1.0, 1.0], "near").unwrap();
        let shell = sto6g_hydrogen();
        let shells = vec![shell.place(0).unwrap(), shell.place(1).unwrap()];
        assert!(matches!(
            build_integral_set(&g, &shells),
            Err(Error::Conditioning { .. })
        ));
    }
}
