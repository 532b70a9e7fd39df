use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::{ExpansionForm, ExpansionParams};
use crate::dl::ORDERED_PAIR_NORM_WEIGHT;
use crate::error::{Error, Result};
use crate::fock::{enumerate_basis, hamiltonian_matrix, Determinant, DeterminantBasis, OperatorSpace, Rank, StateVector, TransitionTable};
use crate::optim::{central_difference_gradient, GradientMode};
use crate::scf::SpinOrbitalHamiltonian;

const SERIES_RELATIVE_TOLERANCE: f64 = 1e-14;
const MAX_SERIES_TERMS: usize = 60;

/// Objective and adjoint gradient for one Hamiltonian, sector, form and depth.
///
/// Parameters are laid out layer by layer, one entry per S_z-conserving operator
/// string of the layer rank.
#[derive(Debug, Clone)]
pub struct CseProblem {
    basis: Arc<DeterminantBasis>,
    h: DMatrix<f64>,
    reference: Determinant,
    reference_index: usize,
    form: ExpansionForm,
    n_layers: usize,
    space: OperatorSpace,
    layer_table: TransitionTable,
    residual_table: TransitionTable,
}

fn sector_of(n_so: usize, reference: Determinant) -> Result<DeterminantBasis> {
    enumerate_basis(n_so, reference.n_electrons(), f64::from(reference.twice_sz()) / 2.0)
}

impl CseProblem {
    /// Works in the sector of `reference`.
    pub fn new(ham: &SpinOrbitalHamiltonian, reference: Determinant, form: ExpansionForm, n_layers: usize, rank: Rank) -> Result<Self> {
        let basis = Arc::new(sector_of(ham.n_so, reference)?);
        Self::with_basis(ham, basis, reference, form, n_layers, rank)
    }

    pub fn with_basis(
        ham: &SpinOrbitalHamiltonian,
        basis: Arc<DeterminantBasis>,
        reference: Determinant,
        form: ExpansionForm,
        n_layers: usize,
        rank: Rank,
    ) -> Result<Self> {
        if n_layers == 0 {
            return Err(Error::Domain("an expansion needs at least one layer".into()));
        }
        let reference_index = basis
            .index_of(reference)
            .ok_or_else(|| Error::Domain(format!("reference {reference:?} is not in the sector")))?;
        let h = hamiltonian_matrix(ham, &basis)?;
        let space = OperatorSpace::sz_conserving(rank, ham.n_so);
        let layer_table = TransitionTable::new(&space, &basis);
        let residual_table = if rank == Rank::Two {
            layer_table.clone()
        } else {
            TransitionTable::new(&OperatorSpace::sz_conserving(Rank::Two, ham.n_so), &basis)
        };
        Ok(Self {
            basis,
            h,
            reference,
            reference_index,
            form,
            n_layers,
            space,
            layer_table,
            residual_table,
        })
    }

    pub fn basis(&self) -> &Arc<DeterminantBasis> {
        &self.basis
    }

    pub fn reference(&self) -> Determinant {
        self.reference
    }

    pub fn form(&self) -> ExpansionForm {
        self.form
    }

    pub fn n_layers(&self) -> usize {
        self.n_layers
    }

    pub fn layer_len(&self) -> usize {
        self.space.len()
    }

    pub fn n_parameters(&self) -> usize {
        self.n_layers * self.space.len()
    }

    pub fn hamiltonian_matrix(&self) -> &DMatrix<f64> {
        &self.h
    }

    /// Same sector and operator tables with another symmetric sector matrix.
    pub fn with_hamiltonian_matrix(&self, h: DMatrix<f64>) -> Result<Self> {
        if h.nrows() != self.basis.len() || h.ncols() != self.basis.len() {
            return Err(Error::DimensionMismatch {
                expected: self.basis.len(),
                found: h.nrows(),
            });
        }
        Ok(Self { h, ..self.clone() })
    }

    pub fn parameters_of(&self, params: &ExpansionParams) -> Result<Vec<f64>> {
        if params.n_layers() != self.n_layers {
            return Err(Error::DimensionMismatch {
                expected: self.n_layers,
                found: params.n_layers(),
            });
        }
        let mut x = Vec::with_capacity(self.n_parameters());
        for layer in &params.layers {
            x.extend(self.space.parameters_of(layer)?);
        }
        Ok(x)
    }

    pub fn expansion(&self, x: &[f64]) -> Result<ExpansionParams> {
        self.check_len(x)?;
        let layers = x.chunks(self.space.len()).map(|c| self.space.to_coefficients(c)).collect::<Result<Vec<_>>>()?;
        ExpansionParams::new(self.form, layers, self.reference)
    }

    fn check_len(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n_parameters() {
            return Err(Error::DimensionMismatch {
                expected: self.n_parameters(),
                found: x.len(),
            });
        }
        Ok(())
    }

    fn layer<'a>(&self, x: &'a [f64], k: usize) -> &'a [f64] {
        let n = self.space.len();
        &x[k * n..(k + 1) * n]
    }

    fn reference_vector(&self) -> DVector<f64> {
        let mut v = DVector::zeros(self.basis.len());
        v[self.reference_index] = 1.0;
        v
    }

    /// Vectors F^n v / n! until the series converges.
    fn series_terms(&self, f: &[f64], v: &DVector<f64>, adjoint: bool) -> Result<Vec<DVector<f64>>> {
        let mut terms = vec![v.clone()];
        let mut sum = v.clone();
        for n in 1..MAX_SERIES_TERMS {
            let prev = &terms[n - 1];
            let mut next = if adjoint {
                self.layer_table.apply_adjoint(f, prev)
            } else {
                self.layer_table.apply(f, prev)
            };
            next /= n as f64;
            sum += &next;
            let small = next.norm() <= SERIES_RELATIVE_TOLERANCE * sum.norm();
            terms.push(next);
            if small {
                return Ok(terms);
            }
        }
        Err(Error::SeriesNotConverged { terms: MAX_SERIES_TERMS })
    }

    fn apply_layer(&self, f: &[f64], v: &DVector<f64>, adjoint: bool) -> Result<DVector<f64>> {
        match self.form {
            ExpansionForm::Linear => {
                let mut out = v.clone();
                if adjoint {
                    self.layer_table.apply_adjoint_into(f, v, &mut out);
                } else {
                    self.layer_table.apply_into(f, v, &mut out);
                }
                Ok(out)
            }
            ExpansionForm::Exponential => {
                let terms = self.series_terms(f, v, adjoint)?;
                Ok(terms.into_iter().fold(DVector::zeros(v.len()), |acc, t| acc + t))
            }
        }
    }

    /// Inputs to every layer followed by the final state.
    fn forward(&self, x: &[f64]) -> Result<Vec<DVector<f64>>> {
        self.check_len(x)?;
        let mut states = vec![self.reference_vector()];
        for k in 0..self.n_layers {
            let next = self.apply_layer(self.layer(x, k), &states[k], false)?;
            states.push(next);
        }
        Ok(states)
    }

    /// The unnormalized expansion state.
    pub fn state(&self, x: &[f64]) -> Result<StateVector> {
        let mut states = self.forward(x)?;
        StateVector::new(self.basis.clone(), states.pop().expect("final state"))
    }

    /// Rayleigh quotient and, on ordered strings, R_q = ⟨ψ|Γ_q(Ĥ − E)|ψ⟩ / ⟨ψ|ψ⟩.
    fn residual(&self, psi: &DVector<f64>) -> Result<Residual> {
        let norm2 = psi.norm_squared();
        if !(norm2 > 0.0) || !norm2.is_finite() {
            return Err(Error::ZeroState);
        }
        let h_psi = &self.h * psi;
        let energy = psi.dot(&h_psi) / norm2;
        let shifted = h_psi - energy * psi;
        let r = self.residual_table.contract(psi, &(&shifted / norm2));
        let value = ORDERED_PAIR_NORM_WEIGHT.powi(2) * r.iter().map(|v| v * v).sum::<f64>();
        Ok(Residual {
            norm2,
            energy,
            shifted,
            r,
            value,
        })
    }

    /// Squared full Frobenius norm of the CSE residual and the Rayleigh quotient.
    pub fn value(&self, x: &[f64]) -> Result<(f64, f64)> {
        let psi = self.forward(x)?.pop().expect("final state");
        let res = self.residual(&psi)?;
        Ok((res.value, res.energy))
    }

    pub fn value_and_gradient(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let states = self.forward(x)?;
        let psi = &states[self.n_layers];
        let res = self.residual(psi)?;
        let n = res.norm2;

        // ∂f/∂ψ with W = Σ_q w_q Γ_q and w_q = ∂f/∂R_q
        let w: Vec<f64> = res.r.iter().map(|v| 2.0 * ORDERED_PAIR_NORM_WEIGHT.powi(2) * v).collect();
        let w_shifted = self.residual_table.apply(&w, &res.shifted);
        let wt_psi = self.residual_table.apply_adjoint(&w, psi);
        let h_wt_psi = &self.h * &wt_psi - res.energy * &wt_psi;
        let psi_w_psi = wt_psi.dot(psi);
        let mut lambda = (w_shifted + h_wt_psi - (2.0 * psi_w_psi / n) * &res.shifted) / n;
        lambda -= (4.0 * res.value / n) * psi;

        let m = self.space.len();
        let mut grad = vec![0.0; self.n_parameters()];
        for k in (0..self.n_layers).rev() {
            let f = self.layer(x, k);
            let input = &states[k];
            let out = &mut grad[k * m..(k + 1) * m];
            match self.form {
                ExpansionForm::Linear => self.layer_table.contract_into(&lambda, input, out),
                ExpansionForm::Exponential => self.exponential_layer_gradient(f, &lambda, input, out)?,
            }
            if k > 0 {
                lambda = self.apply_layer(f, &lambda, true)?;
            }
        }
        Ok((res.value, grad))
    }

    /// ∂/∂x_t ⟨λ| e^F |v⟩ = Σ_{a,b} ⟨(Fᵀ)^a λ| Γ_t |F^b v⟩ / (a + b + 1)!
    fn exponential_layer_gradient(&self, f: &[f64], lambda: &DVector<f64>, v: &DVector<f64>, out: &mut [f64]) -> Result<()> {
        // the series terms already carry 1/a! and 1/b!
        let right = self.series_terms(f, v, false)?;
        let left = self.series_terms(f, lambda, true)?;
        let mut factorial = vec![1.0f64; left.len() + right.len() + 1];
        for k in 1..factorial.len() {
            factorial[k] = factorial[k - 1] * k as f64;
        }
        let scale = lambda.norm() * v.norm();
        let mut scratch = vec![0.0; out.len()];
        for (a, u) in left.iter().enumerate() {
            for (b, w) in right.iter().enumerate() {
                let weight = factorial[a] * factorial[b] / factorial[a + b + 1];
                if weight * u.norm() * w.norm() <= SERIES_RELATIVE_TOLERANCE * scale {
                    continue;
                }
                scratch.iter_mut().for_each(|s| *s = 0.0);
                self.layer_table.contract_into(u, w, &mut scratch);
                for (o, s) in out.iter_mut().zip(&scratch) {
                    *o += weight * s;
                }
            }
        }
        Ok(())
    }

    pub fn finite_difference_gradient(&self, x: &[f64], step: f64) -> Result<Vec<f64>> {
        central_difference_gradient(|y| self.value(y).map(|(v, _)| v), x, step)
    }

    pub fn gradient(&self, x: &[f64], mode: GradientMode, step: f64) -> Result<Vec<f64>> {
        match mode {
            GradientMode::AnalyticAdjoint => self.value_and_gradient(x).map(|(_, g)| g),
            GradientMode::FiniteDifference => self.finite_difference_gradient(x, step),
        }
    }
}

struct Residual {
    norm2: f64,
    energy: f64,
    /// (Ĥ − E)|ψ⟩, unnormalized.
    shifted: DVector<f64>,
    r: Vec<f64>,
    value: f64,
}

/// Π_k (1 + F̂_k)|Ψ₀⟩ or Π_k e^{F̂_k}|Ψ₀⟩ in the sector of the reference, unnormalized.
pub fn build_state(params: &ExpansionParams) -> Result<StateVector> {
    let basis = Arc::new(sector_of(params.n_so(), params.reference)?);
    let space = OperatorSpace::sz_conserving(params.rank(), params.n_so());
    let table = TransitionTable::new(&space, &basis);
    let index = basis
        .index_of(params.reference)
        .ok_or_else(|| Error::Domain("reference is not in its own sector".into()))?;
    let mut v = DVector::zeros(basis.len());
    v[index] = 1.0;
    for layer in &params.layers {
        let f = space.parameters_of(layer)?;
        v = match params.form {
            ExpansionForm::Linear => &v + table.apply(&f, &v),
            ExpansionForm::Exponential => {
                let mut term = v.clone();
                let mut sum = v.clone();
                let mut converged = false;
                for n in 1..MAX_SERIES_TERMS {
                    term = table.apply(&f, &term) / n as f64;
                    sum += &term;
                    if term.norm() <= SERIES_RELATIVE_TOLERANCE * sum.norm() {
                        converged = true;
                        break;
                    }
                }
                if !converged {
                    return Err(Error::SeriesNotConverged { terms: MAX_SERIES_TERMS });
                }
                sum
            }
        };
    }
    StateVector::new(basis, v)
}

/// Squared CSE residual norm of the normalized expansion state, and its energy.
pub fn cse_objective(ham: &SpinOrbitalHamiltonian, params: &ExpansionParams) -> Result<(f64, f64)> {
    let problem = CseProblem::new(ham, params.reference, params.form, params.n_layers(), params.rank())?;
    problem.value(&problem.parameters_of(params)?)
}

pub fn cse_gradient(ham: &SpinOrbitalHamiltonian, params: &ExpansionParams, mode: GradientMode) -> Result<Vec<f64>> {
    let problem = CseProblem::new(ham, params.reference, params.form, params.n_layers(), params.rank())?;
    problem.gradient(&problem.parameters_of(params)?, mode, 1e-5)
}
