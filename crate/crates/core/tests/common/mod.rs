#![allow(dead_code)]

pub mod jordan_wigner;
pub mod quadrature;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cse_core::integrals::sto6g_hydrogen;
use cse_core::pipeline::ChainSystem;
use cse_core::scf::{ScfOptions, SpinOrbitalHamiltonian};
use cse_core::tensor::Tensor4;

pub fn chain(n_atoms: usize, r: f64) -> ChainSystem {
    ChainSystem::new(n_atoms, r, &sto6g_hydrogen(), &ScfOptions::default()).unwrap()
}

/// Real spatial integrals with the eightfold permutational symmetry.
pub fn random_hamiltonian(n_spatial: usize, seed: u64) -> SpinOrbitalHamiltonian {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = n_spatial;
    let mut h = DMatrix::zeros(n, n);
    for p in 0..n {
        for q in 0..=p {
            let x = rng.gen_range(-1.0..1.0);
            h[(p, q)] = x;
            h[(q, p)] = x;
        }
    }
    let mut eri = Tensor4::zeros(n);
    let mut seen = vec![false; n * n * n * n];
    let idx = |p: usize, q: usize, r: usize, s: usize| ((p * n + q) * n + r) * n + s;
    for p in 0..n {
        for q in 0..n {
            for r in 0..n {
                for s in 0..n {
                    if seen[idx(p, q, r, s)] {
                        continue;
                    }
                    let x = rng.gen_range(-0.5..0.5);
                    for (a, b, c, d) in [(p, q, r, s), (q, p, r, s), (p, q, s, r), (q, p, s, r), (r, s, p, q), (s, r, p, q), (r, s, q, p), (s, r, q, p)] {
                        eri.set(a, b, c, d, x);
                        seen[idx(a, b, c, d)] = true;
                    }
                }
            }
        }
    }
    SpinOrbitalHamiltonian::from_spatial(&h, &eri, rng.gen_range(-1.0..1.0)).unwrap()
}

pub fn random_vector(n: usize, scale: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(-scale..scale)).collect()
}
