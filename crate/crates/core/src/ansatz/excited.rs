use std::sync::Arc;

use rayon::prelude::*;

use serde::Serialize;

use super::{solve_cse_in, CseOptions, CseSolveResult, ExpansionForm};
use crate::error::{Error, Result};
use crate::fci::{fci_spectrum, Spectrum};
use crate::fock::{hamiltonian_matrix, multiplicity, s_squared_expectation, Determinant, DeterminantBasis};
use crate::scf::SpinOrbitalHamiltonian;

/// Minimum |⟨ψ|Φ_k⟩| for a converged state to count as eigenvector k.
pub const IDENTIFICATION_OVERLAP: f64 = 1.0 - 1e-6;

/// Runs searched in parallel before checking which targets are covered.
const BATCH: usize = 8;

/// Sector determinants by ascending sum of occupied orbital energies; ties by bit pattern.
pub fn references_by_orbital_energy(basis: &DeterminantBasis, spatial_energies: &[f64]) -> Vec<Determinant> {
    let score = |d: &Determinant| d.occupied().map(|p| spatial_energies[p / 2]).sum::<f64>();
    sorted_by(basis.determinants().to_vec(), score)
}

/// Sector determinants by ascending ⟨D|Ĥ|D⟩; ties by bit pattern.
pub fn references_by_diagonal_energy(ham: &SpinOrbitalHamiltonian, basis: &DeterminantBasis) -> Result<Vec<Determinant>> {
    let h = hamiltonian_matrix(ham, basis)?;
    let score = |d: &Determinant| {
        let i = basis.index_of(*d).expect("determinant from basis");
        h[(i, i)]
    };
    Ok(sorted_by(basis.determinants().to_vec(), score))
}

fn sorted_by(dets: Vec<Determinant>, score: impl Fn(&Determinant) -> f64) -> Vec<Determinant> {
    let mut scored: Vec<(f64, Determinant)> = dets.into_iter().map(|d| (score(&d), d)).collect();
    // round so that degenerate promotions tie exactly and fall back to bit order
    scored.sort_by(|a, b| {
        let ra = (a.0 * 1e9).round();
        let rb = (b.0 * 1e9).round();
        ra.total_cmp(&rb).then(a.1.cmp(&b.1))
    });
    scored.into_iter().map(|(_, d)| d).collect()
}

/// Two eigenvalues closer than this are read as the same state.
pub const ENERGY_MATCH: f64 = 1e-7;

/// One M_S sector: its determinants, FCI eigenpairs and candidate references.
#[derive(Debug, Clone)]
pub struct SearchSector {
    pub basis: Arc<DeterminantBasis>,
    pub spectrum: Spectrum,
    pub references: Vec<Determinant>,
}

impl SearchSector {
    /// Full sector spectrum, references ordered by diagonal energy.
    pub fn new(ham: &SpinOrbitalHamiltonian, basis: Arc<DeterminantBasis>) -> Result<Self> {
        let spectrum = fci_spectrum(ham, basis.clone(), basis.len())?;
        let references = references_by_diagonal_energy(ham, &basis)?;
        Ok(Self { basis, spectrum, references })
    }
}

/// An eigenstate to be reached, by energy and spin multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TargetState {
    pub energy: f64,
    pub multiplicity: u32,
}

impl TargetState {
    pub fn from_spectrum(spectrum: &Spectrum, index: usize) -> Self {
        Self {
            energy: spectrum.energies[index],
            multiplicity: spectrum.multiplicities[index],
        }
    }

    fn matches(&self, energy: f64, multiplicity: u32) -> bool {
        (self.energy - energy).abs() <= ENERGY_MATCH && self.multiplicity == multiplicity
    }
}

#[derive(Debug, Clone)]
pub struct ExcitedStateResult {
    pub candidate: Candidate,
    /// 2M_S of the sector the run was done in.
    pub twice_sz: i32,
    pub solve: CseSolveResult,
    /// Closest eigenvector of the run's own sector.
    pub fci_index: usize,
    pub fci_energy: f64,
    pub overlap: f64,
    pub s_squared: f64,
    pub multiplicity: u32,
    /// E_CSE − E_FCI for the matched eigenvector.
    pub energy_error: f64,
    pub identified: bool,
}

impl ExcitedStateResult {
    pub fn identify(candidate: Candidate, solve: CseSolveResult, spectrum: &Spectrum) -> Result<Self> {
        let (fci_index, overlap) = spectrum.best_match(&solve.state)?;
        let s_squared = s_squared_expectation(&solve.state)?;
        let fci_energy = spectrum.energies[fci_index];
        Ok(Self {
            candidate,
            twice_sz: solve.state.basis().twice_sz(),
            fci_index,
            fci_energy,
            overlap,
            s_squared,
            multiplicity: multiplicity(s_squared),
            energy_error: solve.energy - fci_energy,
            identified: overlap >= IDENTIFICATION_OVERLAP && multiplicity(s_squared) == spectrum.multiplicities[fci_index],
            solve,
        })
    }
}

#[derive(Debug, Clone)]
pub struct ExcitedSearch {
    /// One slot per requested target, in request order.
    pub states: Vec<Option<ExcitedStateResult>>,
    /// Every run, in candidate order.
    pub attempts: Vec<ExcitedStateResult>,
}

impl ExcitedSearch {
    pub fn complete(&self) -> bool {
        self.states.iter().all(Option::is_some)
    }
}

/// One run of the search: a reference in one sector and the number of homotopy
/// stages used to reach Ĥ (1 is a direct minimization).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Candidate {
    pub sector: usize,
    pub reference: Determinant,
    pub homotopy_steps: usize,
}

/// References from all sectors merged by ascending diagonal energy (ties by sector
/// order, then bit pattern), once for each entry of `homotopy_steps` in turn.
pub fn merged_candidates(ham: &SpinOrbitalHamiltonian, sectors: &[SearchSector], homotopy_steps: &[usize]) -> Result<Vec<Candidate>> {
    let mut scored = Vec::new();
    for (k, sector) in sectors.iter().enumerate() {
        let h = hamiltonian_matrix(ham, &sector.basis)?;
        for &d in &sector.references {
            let i = sector.basis.index_of(d).ok_or_else(|| Error::Domain(format!("reference {d:?} is not in its sector")))?;
            scored.push(((h[(i, i)] * 1e9).round(), k, d));
        }
    }
    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    Ok(homotopy_steps
        .iter()
        .flat_map(|&steps| {
            scored.iter().map(move |&(_, sector, reference)| Candidate {
                sector,
                reference,
                homotopy_steps: steps,
            })
        })
        .collect())
}

/// CSE(M) runs over `candidates` in order until every target has been reached by an
/// identified run whose eigenvalue and multiplicity match it. Each run is identified
/// by overlap inside its own sector, so a triplet can be reached from an M_S = 1
/// reference. The first candidate to reach a target keeps it. Each candidate's
/// homotopy length overrides `opts.homotopy_steps`.
#[allow(clippy::too_many_arguments)]
pub fn excited_state_search(
    ham: &SpinOrbitalHamiltonian,
    sectors: &[SearchSector],
    candidates: &[Candidate],
    targets: &[TargetState],
    n_layers: usize,
    opts: &CseOptions,
    seed: u64,
) -> Result<ExcitedSearch> {
    if let Some(c) = candidates.iter().find(|c| c.sector >= sectors.len()) {
        return Err(Error::Domain(format!("candidate refers to sector {} of {}", c.sector, sectors.len())));
    }
    let mut states: Vec<Option<ExcitedStateResult>> = vec![None; targets.len()];
    let mut attempts = Vec::new();
    for chunk in candidates.chunks(BATCH) {
        if states.iter().all(Option::is_some) {
            break;
        }
        let runs: Vec<Result<ExcitedStateResult>> = chunk
            .par_iter()
            .map(|c| {
                let sector = &sectors[c.sector];
                let opts = CseOptions {
                    homotopy_steps: c.homotopy_steps,
                    ..opts.clone()
                };
                let solve = solve_cse_in(ham, sector.basis.clone(), c.reference, n_layers, ExpansionForm::Linear, &opts, seed)?;
                ExcitedStateResult::identify(*c, solve, &sector.spectrum)
            })
            .collect();
        for run in runs {
            let run = run?;
            if run.identified {
                let open = targets
                    .iter()
                    .zip(&states)
                    .position(|(t, slot)| slot.is_none() && t.matches(run.fci_energy, run.multiplicity));
                if let Some(slot) = open {
                    states[slot] = Some(run.clone());
                }
            }
            attempts.push(run);
        }
    }
    Ok(ExcitedSearch { states, attempts })
}
