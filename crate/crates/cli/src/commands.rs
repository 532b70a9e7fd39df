//! The four subcommands on top of `cse_core::pipeline`.

use anyhow::Result;
use cse_core::ansatz::CseOptions;
use cse_core::integrals::ShellTemplate;
use cse_core::optim::Termination;
use cse_core::pipeline::{
    curve_points, cse_row, dl_row, excited_states, scan, scf_fci_row, ChainSystem, CseRow, CurvePoint, ExcitedReport, RowError, Scan, TargetSelection,
};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::config::{RunConfig, EXCITED_DISTANCE, TABLE_DISTANCES};
use crate::report::{cell, opt_cell, Literature, Outcome, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    ScfFci,
    DlTable,
    CseScan,
    Excited,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::ScfFci => "scf-fci",
            Command::DlTable => "dl-table",
            Command::CseScan => "cse-scan",
            Command::Excited => "excited",
        }
    }

    fn default_distances(self) -> Vec<f64> {
        match self {
            Command::Excited => vec![EXCITED_DISTANCE],
            _ => TABLE_DISTANCES.to_vec(),
        }
    }

    pub fn run(self, cfg: &RunConfig, shell: &ShellTemplate) -> Result<Outcome> {
        let rs = cfg.geometry.r.clone().unwrap_or_else(|| self.default_distances());
        match self {
            Command::ScfFci => scf_fci(cfg, shell, &rs),
            Command::DlTable => dl_table(cfg, shell, &rs),
            Command::CseScan => cse_scan(cfg, shell, &rs),
            Command::Excited => excited(cfg, shell, &rs),
        }
    }
}

fn system(cfg: &RunConfig, shell: &ShellTemplate, r: f64) -> cse_core::Result<ChainSystem> {
    ChainSystem::new(cfg.chain(), r, shell, &cfg.scf)
}

fn to_rows<T: Serialize>(scan: &Scan<T>) -> Result<Value> {
    Ok(serde_json::to_value(&scan.rows)?)
}

/// Literature columns for the scanned H4 distances; empty for other chains.
fn literature_for(cfg: &RunConfig, rs: &[f64]) -> Option<Value> {
    if cfg.chain() != 4 {
        return None;
    }
    let lit = Literature::bundled();
    let rows: Vec<_> = rs.iter().filter_map(|&r| lit.h4_at(r)).collect();
    Some(json!({ "note": lit.note, "energy_errors": rows }))
}

fn literature_cells(cfg: &RunConfig, r: f64) -> [String; 2] {
    let lit = (cfg.chain() == 4).then(Literature::bundled);
    let row = lit.as_ref().and_then(|l| l.h4_at(r));
    [opt_cell(row.map(|x| x.ccsd)), opt_cell(row.map(|x| x.ccsd_t))]
}

fn with_literature(cfg: &RunConfig, rs: &[f64]) -> Map<String, Value> {
    let mut extra = Map::new();
    if let Some(lit) = literature_for(cfg, rs) {
        extra.insert("literature".into(), lit);
    }
    extra
}

fn scf_fci(cfg: &RunConfig, shell: &ShellTemplate, rs: &[f64]) -> Result<Outcome> {
    let res = scan(rs, |r| scf_fci_row(&system(cfg, shell, r)?));
    let mut table = Table::new(&[
        "r",
        "e_hf",
        "e_fci",
        "e_corr",
        "e_mp2",
        "mp2_error",
        "scf_iterations",
        "ccsd_error_literature",
        "ccsd_t_error_literature",
    ]);
    for row in &res.rows {
        let [ccsd, ccsd_t] = literature_cells(cfg, row.r);
        table.push(vec![
            cell(row.r),
            opt_cell(row.e_hf),
            cell(row.e_fci),
            opt_cell(row.e_corr),
            opt_cell(row.e_mp2),
            opt_cell(row.mp2_error),
            cell(row.scf_iterations),
            ccsd,
            ccsd_t,
        ]);
    }
    Ok(Outcome {
        rows: to_rows(&res)?,
        table,
        errors: res.errors,
        warnings: Vec::new(),
        extra: with_literature(cfg, rs),
        curves: None,
    })
}

fn dl_table(cfg: &RunConfig, shell: &ShellTemplate, rs: &[f64]) -> Result<Outcome> {
    let res = scan(rs, |r| dl_row(&system(cfg, shell, r)?));
    let mut table = Table::new(&["r", "e_fci", "one_body_dl_cse_error", "one_body_dl_error", "two_body_dl_cse_error", "two_body_dl_error"]);
    for row in &res.rows {
        table.push(vec![
            cell(row.r),
            cell(row.e_fci),
            cell(row.one_body.dl_cse_error),
            cell(row.one_body.dl_error),
            cell(row.two_body.dl_cse_error),
            cell(row.two_body.dl_error),
        ]);
    }
    Ok(Outcome {
        rows: to_rows(&res)?,
        table,
        errors: res.errors,
        warnings: Vec::new(),
        extra: Map::new(),
        curves: None,
    })
}

pub fn termination_label(t: &Termination) -> String {
    match t {
        Termination::GradientTolerance => "gradient-tolerance".into(),
        Termination::MaxIterations => "max-iterations".into(),
        Termination::LineSearchFailure(detail) => format!("line-search-failure: {detail}"),
    }
}

fn cse_options(cfg: &RunConfig) -> CseOptions {
    CseOptions {
        optimizer: cfg.optimizer.clone(),
        homotopy_steps: cfg.cse.homotopy_steps,
    }
}

/// Curves use the deepest expansion in the scan.
pub fn curves(rows: &[CseRow], depths: &[usize]) -> Vec<CurvePoint> {
    curve_points(rows, depths.iter().copied().max().unwrap_or(2))
}

fn cse_scan(cfg: &RunConfig, shell: &ShellTemplate, rs: &[f64]) -> Result<Outcome> {
    let opts = cse_options(cfg);
    let depths = &cfg.cse.depths;
    let res = scan(rs, |r| cse_row(&system(cfg, shell, r)?, depths, &opts, cfg.cse.seed));
    let mut table = Table::new(&[
        "r",
        "m",
        "e_fci",
        "energy",
        "error",
        "residual_norm",
        "iterations",
        "gradient_norm",
        "termination",
        "seed",
        "ccsd_error_literature",
        "ccsd_t_error_literature",
    ]);
    let mut warnings = Vec::new();
    for row in &res.rows {
        for e in &row.entries {
            if e.termination != Termination::GradientTolerance {
                warnings.push(format!("R = {}: CSE({}) stopped with {}", row.r, e.m, termination_label(&e.termination)));
            }
            let [ccsd, ccsd_t] = literature_cells(cfg, row.r);
            table.push(vec![
                cell(row.r),
                cell(e.m),
                cell(row.e_fci),
                cell(e.energy),
                cell(e.error),
                cell(e.residual_norm),
                cell(e.iterations),
                cell(e.gradient_norm),
                termination_label(&e.termination),
                cell(e.seed),
                ccsd,
                ccsd_t,
            ]);
        }
    }
    let points = curves(&res.rows, depths);
    let mut extra = with_literature(cfg, rs);
    extra.insert("curves".into(), serde_json::to_value(&points)?);
    Ok(Outcome {
        rows: to_rows(&res)?,
        table,
        errors: res.errors,
        warnings,
        extra,
        curves: Some(points),
    })
}

/// Parity defaults for the excited-state search.
pub fn excited_selection(cfg: &RunConfig) -> (TargetSelection, Vec<i32>) {
    let odd = cfg.chain() % 2 == 1;
    let selection = TargetSelection {
        first_index: cfg.excited.first_index.unwrap_or(if odd { 0 } else { 1 }),
        count: cfg.excited.count.unwrap_or(if odd { 2 } else { 6 }),
        multiplicity: cfg.excited.multiplicity.or(odd.then_some(2)),
    };
    let sectors = cfg.excited.sectors.clone().unwrap_or_else(|| if odd { vec![1] } else { vec![0, 2, 4] });
    (selection, sectors)
}

fn excited(cfg: &RunConfig, shell: &ShellTemplate, rs: &[f64]) -> Result<Outcome> {
    let opts = cse_options(cfg);
    let (selection, sectors) = excited_selection(cfg);
    let m = cfg.excited.depth.unwrap_or(2);
    let res = scan(rs, |r| excited_states(&system(cfg, shell, r)?, &selection, &sectors, m, &opts, cfg.cse.seed));
    let mut errors = res.errors.clone();
    let mut table = Table::new(&[
        "r",
        "state",
        "multiplicity",
        "fci_energy",
        "cse_energy",
        "error",
        "overlap",
        "s_squared",
        "residual_norm",
        "reference",
        "twice_sz",
        "homotopy_steps",
    ]);
    for report in &res.rows {
        push_excited(&mut table, report);
        let missing: Vec<String> = report.rows.iter().filter(|x| !x.identified()).map(|x| x.state.to_string()).collect();
        if !missing.is_empty() {
            errors.push(RowError {
                r: report.r,
                message: format!("no run identified state(s) {} after {} attempts", missing.join(", "), report.attempts),
            });
        }
    }
    let mut extra = Map::new();
    extra.insert("selection".into(), serde_json::to_value(&selection)?);
    Ok(Outcome {
        rows: to_rows(&res)?,
        table,
        errors,
        warnings: Vec::new(),
        extra,
        curves: None,
    })
}

fn push_excited(table: &mut Table, report: &ExcitedReport) {
    for row in &report.rows {
        table.push(vec![
            cell(report.r),
            cell(row.state),
            cell(row.multiplicity),
            cell(row.fci_energy),
            opt_cell(row.cse_energy),
            opt_cell(row.error),
            opt_cell(row.overlap),
            opt_cell(row.s_squared),
            opt_cell(row.residual_norm),
            row.reference.clone().unwrap_or_default(),
            opt_cell(row.twice_sz),
            opt_cell(row.homotopy_steps),
        ]);
    }
}
