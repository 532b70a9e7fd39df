use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{CseProblem, ExpansionForm, ExpansionParams};
use crate::error::Result;
use crate::fock::{Determinant, DeterminantBasis, Rank, StateVector};
use crate::optim::{lbfgs_minimize_observed, GradientMode, OptimizerOptions, Termination};
use crate::scf::SpinOrbitalHamiltonian;

/// Half-width of the uniform initialization interval.
pub const INITIAL_AMPLITUDE: f64 = 1e-3;

/// Optimizer settings plus the Hamiltonian path used to reach the target state.
///
/// With `homotopy_steps = n > 1` the residual is minimized in turn for
/// Ĥ_λ = D + λ(Ĥ − D) at λ = 1/n, 2/n, …, 1, each stage starting from the previous
/// parameters. D is the diagonal of Ĥ in the determinant basis, so the reference is
/// an exact eigenstate at λ = 0 and the run follows that eigenstate to Ĥ.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CseOptions {
    pub optimizer: OptimizerOptions,
    pub homotopy_steps: usize,
}

impl Default for CseOptions {
    fn default() -> Self {
        Self {
            optimizer: OptimizerOptions::default(),
            homotopy_steps: 5,
        }
    }
}

impl CseOptions {
    pub fn direct(optimizer: OptimizerOptions) -> Self {
        Self {
            optimizer,
            homotopy_steps: 1,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StageSummary {
    pub lambda: f64,
    pub iterations: usize,
    pub objective: f64,
    pub gradient_norm: f64,
    pub termination: Termination,
}

/// One accepted optimizer iterate.
#[derive(Debug, Clone, Serialize)]
pub struct TrajectoryPoint {
    pub iteration: usize,
    pub objective: f64,
    pub energy: f64,
    /// Normalized state.
    #[serde(skip)]
    pub state: Vec<f64>,
}

impl TrajectoryPoint {
    /// min ‖ψ ∓ target‖ over the sign of the target.
    pub fn state_error(&self, target: &StateVector) -> f64 {
        let t = target.coefficients();
        let (mut plus, mut minus) = (0.0, 0.0);
        for (a, b) in self.state.iter().zip(t.iter()) {
            plus += (a - b) * (a - b);
            minus += (a + b) * (a + b);
        }
        f64::min(plus, minus).sqrt()
    }
}

#[derive(Debug, Clone)]
pub struct CseSolveResult {
    /// Rayleigh quotient of the final state.
    pub energy: f64,
    /// Full Frobenius norm of the CSE residual.
    pub residual_norm: f64,
    pub objective: f64,
    pub parameters: ExpansionParams,
    pub iterations: usize,
    pub evaluations: usize,
    pub gradient_norm: f64,
    pub termination: Termination,
    pub seed: u64,
    /// Normalized.
    pub state: StateVector,
    /// Iterates of the final (λ = 1) stage.
    pub trajectory: Vec<TrajectoryPoint>,
    pub stages: Vec<StageSummary>,
}

impl CseSolveResult {
    pub fn converged(&self) -> bool {
        self.termination == Termination::GradientTolerance
    }
}

pub fn initial_parameters(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(-INITIAL_AMPLITUDE..=INITIAL_AMPLITUDE)).collect()
}

/// Minimizes the squared residual of an M-layer two-body expansion of `reference`.
pub fn solve_cse(
    ham: &SpinOrbitalHamiltonian,
    reference: Determinant,
    n_layers: usize,
    form: ExpansionForm,
    opts: &CseOptions,
    seed: u64,
) -> Result<CseSolveResult> {
    let problem = CseProblem::new(ham, reference, form, n_layers, Rank::Two)?;
    solve_problem(&problem, opts, seed)
}

/// [`solve_cse`] in a prebuilt sector basis.
pub fn solve_cse_in(
    ham: &SpinOrbitalHamiltonian,
    basis: Arc<DeterminantBasis>,
    reference: Determinant,
    n_layers: usize,
    form: ExpansionForm,
    opts: &CseOptions,
    seed: u64,
) -> Result<CseSolveResult> {
    let problem = CseProblem::with_basis(ham, basis, reference, form, n_layers, Rank::Two)?;
    solve_problem(&problem, opts, seed)
}

/// Same minimization from an excited reference, in the linear form.
pub fn solve_cse_excited(
    ham: &SpinOrbitalHamiltonian,
    reference: Determinant,
    n_layers: usize,
    opts: &CseOptions,
    seed: u64,
) -> Result<CseSolveResult> {
    solve_cse(ham, reference, n_layers, ExpansionForm::Linear, opts, seed)
}

pub(crate) fn solve_problem(problem: &CseProblem, opts: &CseOptions, seed: u64) -> Result<CseSolveResult> {
    opts.optimizer.validate()?;
    let steps = opts.homotopy_steps.max(1);
    let h = problem.hamiltonian_matrix();
    let d = DMatrix::from_diagonal(&h.diagonal());
    let mut x = initial_parameters(problem.n_parameters(), seed);
    let mut stages = Vec::with_capacity(steps);
    let mut trajectory = Vec::new();
    let mut last = None;
    for k in 1..=steps {
        let lambda = k as f64 / steps as f64;
        let stage = if k == steps {
            problem.clone()
        } else {
            problem.with_hamiltonian_matrix(&d + (h - &d) * lambda)?
        };
        let record = k == steps;
        let report = minimize_stage(&stage, &x, &opts.optimizer, record.then_some(&mut trajectory))?;
        stages.push(StageSummary {
            lambda,
            iterations: report.iterations,
            objective: report.value,
            gradient_norm: report.gradient_norm,
            termination: report.termination.clone(),
        });
        x = report.x.clone();
        last = Some(report);
    }
    let report = last.expect("at least one stage");
    let state = problem.state(&x)?.normalized()?;
    let (objective, energy) = problem.value(&x)?;
    Ok(CseSolveResult {
        energy,
        residual_norm: objective.sqrt(),
        objective,
        parameters: problem.expansion(&x)?,
        iterations: stages.iter().map(|s| s.iterations).sum(),
        evaluations: report.evaluations,
        gradient_norm: report.gradient_norm,
        termination: report.termination,
        seed,
        state,
        trajectory,
        stages,
    })
}

fn minimize_stage(
    problem: &CseProblem,
    x0: &[f64],
    opts: &OptimizerOptions,
    mut trajectory: Option<&mut Vec<TrajectoryPoint>>,
) -> Result<crate::optim::LbfgsReport> {
    let objective = |x: &[f64]| -> Result<(f64, Vec<f64>)> {
        match opts.gradient_mode {
            GradientMode::AnalyticAdjoint => problem.value_and_gradient(x),
            GradientMode::FiniteDifference => {
                let (value, _) = problem.value(x)?;
                Ok((value, problem.finite_difference_gradient(x, opts.finite_difference_step)?))
            }
        }
    };
    let mut observer_error = None;
    let report = lbfgs_minimize_observed(objective, x0, opts, |it| {
        let Some(points) = trajectory.as_deref_mut() else {
            return;
        };
        match problem.state(it.x).and_then(|s| s.normalized()) {
            Ok(psi) => {
                let v: &DVector<f64> = psi.coefficients();
                points.push(TrajectoryPoint {
                    iteration: it.iteration,
                    objective: it.value,
                    energy: v.dot(&(problem.hamiltonian_matrix() * v)),
                    state: v.as_slice().to_vec(),
                });
            }
            Err(e) => observer_error = Some(e),
        }
    })?;
    match observer_error {
        Some(e) => Err(e),
        None => Ok(report),
    }
}

/// Slope of log(energy error) against log(state error) by least squares.
///
/// Points outside `(state_floor, state_ceiling)` or with energy error below
/// `energy_floor` are dropped; `None` when fewer than three remain.
pub fn fit_convergence_exponent(
    trajectory: &[TrajectoryPoint],
    target: &StateVector,
    target_energy: f64,
    state_floor: f64,
    state_ceiling: f64,
    energy_floor: f64,
) -> Option<f64> {
    let points: Vec<(f64, f64)> = trajectory
        .iter()
        .filter_map(|p| {
            let ds = p.state_error(target);
            let de = (p.energy - target_energy).abs();
            (ds > state_floor && ds < state_ceiling && de > energy_floor).then(|| (ds.ln(), de.ln()))
        })
        .collect();
    if points.len() < 3 {
        return None;
    }
    let n = points.len() as f64;
    let (mx, my) = points.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x / n, b + y / n));
    let (sxy, sxx) = points.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + (x - mx) * (y - my), b + (x - mx) * (x - mx)));
    (sxx > 0.0).then(|| sxy / sxx)
}
