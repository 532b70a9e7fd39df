//! Contracted Schrödinger equation residuals and the contracted Dalgarno-Lewis
//! least-squares solve.
//!
//! Tensor norms run over every spin-orbital quadruple. Entries on ordered pairs
//! `i < j`, `k < l` appear four times in the full tensor, so the full Frobenius norm
//! is twice the norm over ordered pairs.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{apply_hamiltonian, hamiltonian_matrix, OperatorSpace, OperatorString, Rank, StateVector, TransitionTable, TwoBodyCoefficients};
use crate::scf::{ScfResult, SpinOrbitalHamiltonian};
use crate::tensor::Tensor4;

/// Weight of an ordered-pair entry in the full-quadruple Frobenius norm.
pub(crate) const ORDERED_PAIR_NORM_WEIGHT: f64 = 2.0;

const SVD_RELATIVE_CUTOFF: f64 = 1e-12;

/// R[i,j,k,l] = ⟨ψ| a†_i a†_j a_l a_k |φ⟩ over all quadruples.
#[derive(Debug, Clone)]
pub struct ResidualTensor {
    pub entries: Tensor4,
    pub frobenius_norm: f64,
}

impl ResidualTensor {
    /// Expands values on the S_z-conserving ordered strings of `space` into the full
    /// antisymmetric tensor.
    pub(crate) fn from_ordered(space: &OperatorSpace, values: &[f64]) -> Self {
        let mut entries = Tensor4::zeros(space.n_so());
        for (&t, &v) in space.terms().iter().zip(values) {
            if let OperatorString::TwoBody { i, j, k, l } = t {
                entries.set(i, j, k, l, v);
                entries.set(j, i, k, l, -v);
                entries.set(i, j, l, k, -v);
                entries.set(j, i, l, k, v);
            }
        }
        let frobenius_norm = entries.frobenius_norm();
        Self { entries, frobenius_norm }
    }
}

fn rayleigh(ham: &SpinOrbitalHamiltonian, psi: &StateVector) -> Result<(f64, f64, DVector<f64>)> {
    let norm2 = psi.dot(psi);
    if norm2 == 0.0 {
        return Err(Error::ZeroState);
    }
    let h_psi = apply_hamiltonian(ham, psi)?.into_coefficients();
    let e = psi.coefficients().dot(&h_psi) / norm2;
    Ok((e, norm2, h_psi))
}

/// Rayleigh quotient and the CSE residual with |φ⟩ = (Ĥ − E)|ψ⟩ / ⟨ψ|ψ⟩.
pub fn energy_and_residual(ham: &SpinOrbitalHamiltonian, psi: &StateVector) -> Result<(f64, ResidualTensor)> {
    let (e, norm2, h_psi) = rayleigh(ham, psi)?;
    let phi = (h_psi - e * psi.coefficients()) / norm2;
    let space = OperatorSpace::sz_conserving(Rank::Two, ham.n_so);
    let table = TransitionTable::new(&space, psi.basis());
    let values = table.contract(psi.coefficients(), &phi);
    Ok((e, ResidualTensor::from_ordered(&space, &values)))
}

/// ⟨(Ĥ − E)²⟩ with E the Rayleigh quotient.
pub fn dispersion(ham: &SpinOrbitalHamiltonian, psi: &StateVector) -> Result<f64> {
    let (e, norm2, h_psi) = rayleigh(ham, psi)?;
    let r = h_psi - e * psi.coefficients();
    Ok(r.norm_squared() / norm2)
}

/// Ĥ_λ = Ĥ₀ + λV̂
#[derive(Debug, Clone)]
pub struct PerturbationSplit {
    pub h0: SpinOrbitalHamiltonian,
    pub v: SpinOrbitalHamiltonian,
    pub lambda: f64,
}

impl PerturbationSplit {
    pub fn new(h0: SpinOrbitalHamiltonian, v: SpinOrbitalHamiltonian, lambda: f64) -> Result<Self> {
        if h0.n_so != v.n_so {
            return Err(Error::DimensionMismatch {
                expected: h0.n_so,
                found: v.n_so,
            });
        }
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::Domain(format!("λ = {lambda} is outside [0, 1]")));
        }
        Ok(Self { h0, v, lambda })
    }

    /// Ĥ₀ = Ĥ and V̂ = Ĥ − Σ_p ε_p a†_p a_p at λ = 0.
    pub fn hartree_fock_complement(ham: &SpinOrbitalHamiltonian, scf: &ScfResult) -> Result<Self> {
        let fock = SpinOrbitalHamiltonian::diagonal_one_body(&scf.orbital_energies);
        let v = ham.scaled_add(-1.0, &fock)?;
        Self::new(ham.clone(), v, 0.0)
    }

    pub fn hamiltonian(&self) -> Result<SpinOrbitalHamiltonian> {
        self.h0.scaled_add(self.lambda, &self.v)
    }

    /// Same split with V̂ + c·1.
    pub fn with_shifted_perturbation(&self, c: f64) -> Self {
        Self {
            h0: self.h0.clone(),
            v: self.v.shifted(c),
            lambda: self.lambda,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LsqConditioning {
    pub smallest_singular_value: f64,
    pub largest_singular_value: f64,
    pub numerical_rank: usize,
    pub n_parameters: usize,
}

#[derive(Debug, Clone)]
pub struct DlSolveReport {
    pub rank: Rank,
    pub coefficients: TwoBodyCoefficients,
    /// Full Frobenius norm of ⟨ψ| a†a†aa [(Ĥ_λ − E) F̂ + (V̂ − dE/dλ)] |ψ⟩.
    pub dl_cse_error: f64,
    /// ‖(Ĥ_λ − E) F̂|ψ⟩ + (V̂ − dE/dλ)|ψ⟩‖.
    pub dl_error: f64,
    pub energy: f64,
    pub energy_derivative: f64,
    pub lsq_conditioning: LsqConditioning,
}

/// Minimum-norm solution of min ‖A x + b‖ by SVD with a relative cutoff.
fn min_norm_lsq(a: &DMatrix<f64>, b: &DVector<f64>) -> (DVector<f64>, LsqConditioning) {
    let svd = a.clone().svd(true, true);
    let u = svd.u.as_ref().expect("U requested");
    let v_t = svd.v_t.as_ref().expect("Vᵀ requested");
    let sigma = &svd.singular_values;
    let largest = sigma.iter().copied().fold(0.0, f64::max);
    let smallest = sigma.iter().copied().fold(f64::INFINITY, f64::min);
    let cutoff = SVD_RELATIVE_CUTOFF * largest;
    let ut_b = u.transpose() * b;
    let mut scaled = DVector::zeros(sigma.len());
    let mut numerical_rank = 0;
    for (i, &s) in sigma.iter().enumerate() {
        if s > cutoff && s > 0.0 {
            scaled[i] = -ut_b[i] / s;
            numerical_rank += 1;
        }
    }
    let x = v_t.transpose() * scaled;
    (
        x,
        LsqConditioning {
            smallest_singular_value: if sigma.is_empty() { 0.0 } else { smallest },
            largest_singular_value: largest,
            numerical_rank,
            n_parameters: a.ncols(),
        },
    )
}

/// Least-squares solution of the differentiated CSE for a one- or two-body F̂.
///
/// ψ is taken to be an eigenstate of Ĥ_λ; its Rayleigh quotient supplies E and
/// dE/dλ = ⟨ψ|V̂|ψ⟩.
pub fn dl_cse_lsq(split: &PerturbationSplit, psi: &StateVector, rank: Rank) -> Result<DlSolveReport> {
    let psi = psi.normalized()?;
    let basis = psi.basis();
    let n_so = split.h0.n_so;
    if basis.n_so() != n_so {
        return Err(Error::DimensionMismatch {
            expected: n_so,
            found: basis.n_so(),
        });
    }
    let h = hamiltonian_matrix(&split.hamiltonian()?, basis)?;
    let v = hamiltonian_matrix(&split.v, basis)?;
    let c = psi.coefficients();
    let energy = c.dot(&(&h * c));
    let de = c.dot(&(&v * c));
    let dim = basis.len();
    let shifted_h = &h - DMatrix::identity(dim, dim) * energy;
    let source = &v * c - c * de;

    let residual_space = OperatorSpace::sz_conserving(Rank::Two, n_so);
    let residual_table = TransitionTable::new(&residual_space, basis);
    let operator_space = OperatorSpace::sz_conserving(rank, n_so);
    let operator_table = TransitionTable::new(&operator_space, basis);

    // A[Q,q] = w ⟨Γ_Q† ψ| (Ĥ − E) Γ_q ψ⟩,  b[Q] = w ⟨Γ_Q† ψ| (V̂ − dE) ψ⟩
    let projectors = residual_table.adjoint_images(c);
    let responses = &shifted_h * operator_table.images(c);
    let a = ORDERED_PAIR_NORM_WEIGHT * projectors.transpose() * &responses;
    let b = ORDERED_PAIR_NORM_WEIGHT * projectors.transpose() * &source;

    let (x, conditioning) = if operator_space.is_empty() {
        (DVector::zeros(0), min_norm_lsq(&a, &b).1)
    } else {
        min_norm_lsq(&a, &b)
    };
    let dl_cse_error = (&a * &x + &b).norm();
    let dl_error = (&responses * &x + &source).norm();
    let coefficients = operator_space.to_coefficients(x.as_slice())?;
    Ok(DlSolveReport {
        rank,
        coefficients,
        dl_cse_error,
        dl_error,
        energy,
        energy_derivative: de,
        lsq_conditioning: conditioning,
    })
}

/// DL-CSE reports for V̂ and V̂ + c·1; the residuals must agree.
pub fn shift_invariance_check(
    split: &PerturbationSplit,
    psi: &StateVector,
    rank: Rank,
    c: f64,
) -> Result<(DlSolveReport, DlSolveReport)> {
    let base = dl_cse_lsq(split, psi, rank)?;
    let shifted = dl_cse_lsq(&split.with_shifted_perturbation(c), psi, rank)?;
    Ok((base, shifted))
}
