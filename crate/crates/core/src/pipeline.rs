//! End-to-end runs behind the command-line tables: SCF/FCI, the Dalgarno-Lewis
//! contrast, CSE(M) scans and excited-state searches.
//!
//! Every scan evaluates its geometries in parallel and returns rows in input order.
//! A failing geometry becomes a [`RowError`] instead of aborting the scan.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::ansatz::{
    excited_state_search, merged_candidates, solve_cse_in, CseOptions, ExcitedStateResult, ExpansionForm, SearchSector, TargetState,
};
use crate::dl::{dl_cse_lsq, PerturbationSplit};
use crate::error::{Error, Result};
use crate::fci::{fci_spectrum, Spectrum};
use crate::fock::{enumerate_basis, Determinant, DeterminantBasis, Rank};
use crate::integrals::{build_integral_set, hydrogen_chain, IntegralSet, ShellTemplate};
use crate::optim::Termination;
use crate::scf::{core_hamiltonian_orbitals, mo_transform, mp2_energy, rhf_solve, ScfOptions, ScfResult, SpinOrbitalHamiltonian};

/// Integrals, orbitals and spin-orbital Hamiltonian of one hydrogen chain.
///
/// Even chains use RHF orbitals. Odd chains use core-Hamiltonian orbitals in the
/// Löwdin space and have no SCF energy.
#[derive(Debug, Clone)]
pub struct ChainSystem {
    pub n_atoms: usize,
    pub r: f64,
    pub integrals: IntegralSet,
    pub orbitals: ScfResult,
    pub hamiltonian: SpinOrbitalHamiltonian,
}

impl ChainSystem {
    pub fn new(n_atoms: usize, r: f64, shell: &ShellTemplate, scf: &ScfOptions) -> Result<Self> {
        let geometry = hydrogen_chain(n_atoms, r)?;
        let shells = (0..n_atoms).map(|i| shell.place(i)).collect::<Result<Vec<_>>>()?;
        let integrals = build_integral_set(&geometry, &shells)?;
        let orbitals = if n_atoms % 2 == 0 {
            rhf_solve(&integrals, n_atoms, scf)?
        } else {
            core_hamiltonian_orbitals(&integrals)?
        };
        let hamiltonian = mo_transform(&integrals, &orbitals.mo_coefficients)?;
        Ok(Self {
            n_atoms,
            r,
            integrals,
            orbitals,
            hamiltonian,
        })
    }

    pub fn n_so(&self) -> usize {
        2 * self.n_atoms
    }

    /// 2M_S of the lowest-spin sector.
    pub fn ground_twice_sz(&self) -> i32 {
        (self.n_atoms % 2) as i32
    }

    pub fn sector(&self, twice_sz: i32) -> Result<Arc<DeterminantBasis>> {
        Ok(Arc::new(enumerate_basis(self.n_so(), self.n_atoms, f64::from(twice_sz) / 2.0)?))
    }

    /// Lowest orbitals filled, α first on the odd electron.
    pub fn aufbau(&self) -> Determinant {
        let n_beta = self.n_atoms / 2;
        Determinant::aufbau(self.n_atoms - n_beta, n_beta)
    }

    /// Full spectrum of the lowest-spin sector.
    pub fn ground_spectrum(&self) -> Result<Spectrum> {
        let basis = self.sector(self.ground_twice_sz())?;
        fci_spectrum(&self.hamiltonian, basis.clone(), basis.len())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RowError {
    pub r: f64,
    pub message: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Scan<T> {
    pub rows: Vec<T>,
    pub errors: Vec<RowError>,
}

impl<T> Scan<T> {
    pub fn is_ok(&self) -> bool {
        self.errors.is_empty()
    }
}

/// Runs `f` on every R in parallel, keeping input order.
pub fn scan<T: Send>(rs: &[f64], f: impl Fn(f64) -> Result<T> + Sync) -> Scan<T> {
    let results: Vec<(f64, Result<T>)> = rs.par_iter().map(|&r| (r, f(r))).collect();
    let mut rows = Vec::new();
    let mut errors = Vec::new();
    for (r, res) in results {
        match res {
            Ok(row) => rows.push(row),
            Err(e) => errors.push(RowError { r, message: e.to_string() }),
        }
    }
    Scan { rows, errors }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScfFciRow {
    pub r: f64,
    pub e_hf: Option<f64>,
    pub e_fci: f64,
    pub e_corr: Option<f64>,
    /// Total MP2 energy.
    pub e_mp2: Option<f64>,
    /// E_MP2 − E_FCI.
    pub mp2_error: Option<f64>,
    pub scf_iterations: usize,
}

pub fn scf_fci_row(sys: &ChainSystem) -> Result<ScfFciRow> {
    let e_fci = ground_energy(sys)?;
    let e_hf = sys.orbitals.e_hf;
    let e_mp2 = mp2_total(sys)?;
    Ok(ScfFciRow {
        r: sys.r,
        e_hf,
        e_fci,
        e_corr: e_hf.map(|e| e_fci - e),
        e_mp2,
        mp2_error: e_mp2.map(|e| e - e_fci),
        scf_iterations: sys.orbitals.n_iterations,
    })
}

/// E_HF + E₂, for chains with SCF orbitals.
fn mp2_total(sys: &ChainSystem) -> Result<Option<f64>> {
    match sys.orbitals.e_hf {
        Some(e_hf) => Ok(Some(e_hf + mp2_energy(&sys.hamiltonian, &sys.orbitals, sys.n_atoms)?)),
        None => Ok(None),
    }
}

fn ground_energy(sys: &ChainSystem) -> Result<f64> {
    let basis = sys.sector(sys.ground_twice_sz())?;
    Ok(fci_spectrum(&sys.hamiltonian, basis, 1)?.ground_energy())
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DlErrors {
    pub dl_cse_error: f64,
    pub dl_error: f64,
    pub numerical_rank: usize,
    pub n_parameters: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct DlRow {
    pub r: f64,
    pub e_fci: f64,
    pub one_body: DlErrors,
    pub two_body: DlErrors,
}

/// Dalgarno-Lewis residuals at the FCI ground state with Ĥ₀ = Ĥ and V̂ = Ĥ − F̂_HF.
pub fn dl_row(sys: &ChainSystem) -> Result<DlRow> {
    if sys.orbitals.e_hf.is_none() {
        return Err(Error::Domain("the Dalgarno-Lewis split needs SCF orbital energies".into()));
    }
    let basis = sys.sector(sys.ground_twice_sz())?;
    let spectrum = fci_spectrum(&sys.hamiltonian, basis, 1)?;
    let split = PerturbationSplit::hartree_fock_complement(&sys.hamiltonian, &sys.orbitals)?;
    let errors = |rank| -> Result<DlErrors> {
        let rep = dl_cse_lsq(&split, spectrum.ground_state(), rank)?;
        Ok(DlErrors {
            dl_cse_error: rep.dl_cse_error,
            dl_error: rep.dl_error,
            numerical_rank: rep.lsq_conditioning.numerical_rank,
            n_parameters: rep.lsq_conditioning.n_parameters,
        })
    };
    Ok(DlRow {
        r: sys.r,
        e_fci: spectrum.ground_energy(),
        one_body: errors(Rank::One)?,
        two_body: errors(Rank::Two)?,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CseEntry {
    pub m: usize,
    pub energy: f64,
    /// E_CSE(M) − E_FCI.
    pub error: f64,
    pub residual_norm: f64,
    pub iterations: usize,
    pub gradient_norm: f64,
    pub termination: Termination,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CseRow {
    pub r: f64,
    pub e_fci: f64,
    pub e_hf: Option<f64>,
    pub e_mp2: Option<f64>,
    pub entries: Vec<CseEntry>,
}

impl CseRow {
    pub fn entry(&self, m: usize) -> Option<&CseEntry> {
        self.entries.iter().find(|e| e.m == m)
    }
}

/// CSE(M) from the aufbau determinant for each requested depth.
pub fn cse_row(sys: &ChainSystem, depths: &[usize], opts: &CseOptions, seed: u64) -> Result<CseRow> {
    let basis = sys.sector(sys.ground_twice_sz())?;
    let e_fci = fci_spectrum(&sys.hamiltonian, basis.clone(), 1)?.ground_energy();
    let e_mp2 = mp2_total(sys)?;
    let entries = depths
        .iter()
        .map(|&m| {
            let s = solve_cse_in(&sys.hamiltonian, basis.clone(), sys.aufbau(), m, ExpansionForm::Linear, opts, seed)?;
            Ok(CseEntry {
                m,
                energy: s.energy,
                error: s.energy - e_fci,
                residual_norm: s.residual_norm,
                iterations: s.iterations,
                gradient_norm: s.gradient_norm,
                termination: s.termination,
                seed,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CseRow {
        r: sys.r,
        e_fci,
        e_hf: sys.orbitals.e_hf,
        e_mp2,
        entries,
    })
}

/// One point of the potential energy curves.
#[derive(Debug, Clone, Serialize)]
pub struct CurvePoint {
    pub r: f64,
    pub hf: Option<f64>,
    pub mp2: Option<f64>,
    pub cse: Option<f64>,
    pub fci: f64,
}

/// Curves with the CSE column taken from depth `m`.
pub fn curve_points(rows: &[CseRow], m: usize) -> Vec<CurvePoint> {
    rows.iter()
        .map(|row| CurvePoint {
            r: row.r,
            hf: row.e_hf,
            mp2: row.e_mp2,
            cse: row.entry(m).map(|e| e.energy),
            fci: row.e_fci,
        })
        .collect()
}

/// Which states of the lowest-spin sector an excited-state run should reach.
#[derive(Debug, Clone, Serialize)]
pub struct TargetSelection {
    /// Spectrum indices below this are skipped (1 leaves out the ground state).
    pub first_index: usize,
    pub count: usize,
    /// Keep only states of this multiplicity.
    pub multiplicity: Option<u32>,
}

impl TargetSelection {
    pub fn indices(&self, spectrum: &Spectrum) -> Vec<usize> {
        (self.first_index..spectrum.len())
            .filter(|&i| self.multiplicity.is_none_or(|m| spectrum.multiplicities[i] == m))
            .take(self.count)
            .collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExcitedRow {
    /// Index in the lowest-spin spectrum, 0 being the ground state.
    pub state: usize,
    pub multiplicity: u32,
    pub fci_energy: f64,
    pub cse_energy: Option<f64>,
    /// E_CSE − E_FCI.
    pub error: Option<f64>,
    pub overlap: Option<f64>,
    pub s_squared: Option<f64>,
    pub residual_norm: Option<f64>,
    pub reference: Option<String>,
    pub twice_sz: Option<i32>,
    pub homotopy_steps: Option<usize>,
}

impl ExcitedRow {
    pub fn identified(&self) -> bool {
        self.cse_energy.is_some()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExcitedReport {
    pub r: f64,
    pub m: usize,
    pub rows: Vec<ExcitedRow>,
    pub attempts: usize,
    /// Converged runs that matched no eigenvector closely enough.
    pub unidentified: usize,
}

impl ExcitedReport {
    pub fn complete(&self) -> bool {
        self.rows.iter().all(ExcitedRow::identified)
    }
}

/// Searches the sectors `twice_sz` (first pass with the homotopy of `opts`, second
/// direct) for the selected states of the lowest-spin sector.
pub fn excited_states(
    sys: &ChainSystem,
    selection: &TargetSelection,
    twice_sz: &[i32],
    m: usize,
    opts: &CseOptions,
    seed: u64,
) -> Result<ExcitedReport> {
    let ground = sys.ground_twice_sz();
    let mut sectors = Vec::new();
    for &tz in twice_sz {
        if tz < ground || (tz - ground) % 2 != 0 {
            return Err(Error::Domain(format!("2M_S = {tz} is not reachable from {ground}")));
        }
        sectors.push(SearchSector::new(&sys.hamiltonian, sys.sector(tz)?)?);
    }
    let spectrum = if twice_sz.first() == Some(&ground) {
        sectors[0].spectrum.clone()
    } else {
        sys.ground_spectrum()?
    };
    let indices = selection.indices(&spectrum);
    let targets: Vec<TargetState> = indices.iter().map(|&i| TargetState::from_spectrum(&spectrum, i)).collect();
    let mut paths = vec![opts.homotopy_steps.max(1)];
    if paths[0] > 1 {
        paths.push(1);
    }
    let n_so = sys.n_so();
    let candidates = merged_candidates(&sys.hamiltonian, &sectors, &paths)?;
    let search = excited_state_search(&sys.hamiltonian, &sectors, &candidates, &targets, m, opts, seed)?;
    let rows = indices
        .iter()
        .zip(&search.states)
        .map(|(&i, found)| excited_row(i, &spectrum, found.as_ref(), n_so))
        .collect();
    Ok(ExcitedReport {
        r: sys.r,
        m,
        rows,
        attempts: search.attempts.len(),
        unidentified: search.attempts.iter().filter(|a| !a.identified).count(),
    })
}

fn excited_row(state: usize, spectrum: &Spectrum, found: Option<&ExcitedStateResult>, n_so: usize) -> ExcitedRow {
    let fci_energy = spectrum.energies[state];
    ExcitedRow {
        state,
        multiplicity: spectrum.multiplicities[state],
        fci_energy,
        cse_energy: found.map(|f| f.solve.energy),
        error: found.map(|f| f.solve.energy - fci_energy),
        overlap: found.map(|f| f.overlap),
        s_squared: found.map(|f| f.s_squared),
        residual_norm: found.map(|f| f.solve.residual_norm),
        reference: found.map(|f| f.candidate.reference.to_occupation_string(n_so)),
        twice_sz: found.map(|f| f.twice_sz),
        homotopy_steps: found.map(|f| f.candidate.homotopy_steps),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GeometryCandidate {
    pub r: f64,
    pub energies: Vec<f64>,
    pub max_deviation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GeometryMatch {
    pub scanned: Vec<GeometryCandidate>,
    /// R with the smallest deviation, if it is within the tolerance.
    pub best: Option<f64>,
}

/// FCI over `rs` to find the chain length R whose lowest states of `multiplicity`
/// reproduce `targets`.
pub fn match_geometry(
    n_atoms: usize,
    rs: &[f64],
    shell: &ShellTemplate,
    scf: &ScfOptions,
    targets: &[f64],
    multiplicity: u32,
    tolerance: f64,
) -> Result<GeometryMatch> {
    let scanned = rs
        .par_iter()
        .map(|&r| {
            let sys = ChainSystem::new(n_atoms, r, shell, scf)?;
            let spectrum = sys.ground_spectrum()?;
            let energies: Vec<f64> = (0..spectrum.len())
                .filter(|&i| spectrum.multiplicities[i] == multiplicity)
                .take(targets.len())
                .map(|i| spectrum.energies[i])
                .collect();
            let max_deviation = if energies.len() < targets.len() {
                f64::INFINITY
            } else {
                energies.iter().zip(targets).map(|(e, t)| (e - t).abs()).fold(0.0, f64::max)
            };
            Ok(GeometryCandidate { r, energies, max_deviation })
        })
        .collect::<Result<Vec<_>>>()?;
    let best = scanned
        .iter()
        .filter(|c| c.max_deviation <= tolerance)
        .min_by(|a, b| a.max_deviation.total_cmp(&b.max_deviation))
        .map(|c| c.r);
    Ok(GeometryMatch { scanned, best })
}
