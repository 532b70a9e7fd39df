//! `cse`: batch driver reproducing the hydrogen-chain SCF/FCI, Dalgarno-Lewis,
//! CSE(M) and excited-state tables.

mod commands;
mod config;
mod report;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use cse_core::integrals::{parse_basis_file, sto6g_hydrogen, ShellTemplate, STO6G_BASIS_TEXT};

use crate::commands::Command;
use crate::config::{parse_distances, Format, RunConfig};
use crate::report::{render, BasisInfo};

#[derive(Parser)]
#[command(name = "cse", version, about = "Two-body CSE expansions for hydrogen chains")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// RHF, FCI, correlation and MP2 energies per bond length.
    ScfFci(Common),
    /// One- and two-body Dalgarno-Lewis residuals at the FCI ground state.
    DlTable(Common),
    /// CSE(M) ground-state errors, plus potential energy curves.
    CseScan(Common),
    /// CSE(M) excited states identified against FCI.
    Excited(Common),
}

#[derive(Args)]
struct Common {
    /// TOML run configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated bond lengths in Å; "" for none.
    #[arg(long = "r", allow_hyphen_values = true)]
    r: Option<String>,
    /// Number of hydrogen atoms.
    #[arg(long)]
    chain: Option<usize>,
    /// Expansion depth (replaces the configured list).
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    m: Option<u8>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Report path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Basis file (one `exponent coefficient` pair per line).
    #[arg(long)]
    basis: Option<PathBuf>,
    /// cse-scan: write potential energy curves to this CSV file.
    #[arg(long)]
    plot: Option<PathBuf>,
}

impl Common {
    fn resolve(&self, command: Command) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(r) = &self.r {
            cfg.geometry.r = Some(parse_distances(r)?);
        }
        if let Some(n) = self.chain {
            cfg.geometry.chain = Some(n);
        }
        if let Some(m) = self.m {
            let m = usize::from(m);
            cfg.cse.depths = vec![m];
            if command == Command::Excited {
                cfg.excited.depth = Some(m);
            }
        }
        if let Some(seed) = self.seed {
            cfg.cse.seed = seed;
        }
        if let Some(format) = self.format {
            cfg.output.format = Some(format);
        }
        if let Some(out) = &self.out {
            cfg.output.path = Some(out.clone());
        }
        if let Some(basis) = &self.basis {
            cfg.geometry.basis = Some(basis.clone());
        }
        if let Some(plot) = &self.plot {
            cfg.output.plot = Some(plot.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn load_shell(cfg: &RunConfig) -> Result<(ShellTemplate, BasisInfo)> {
    match &cfg.geometry.basis {
        None => Ok((sto6g_hydrogen(), BasisInfo::new("bundled:sto-6g", STO6G_BASIS_TEXT.as_bytes()))),
        Some(path) => {
            let bytes = std::fs::read(path).with_context(|| format!("reading basis file {}", path.display()))?;
            let text = String::from_utf8(bytes.clone()).context("basis file is not UTF-8")?;
            let shell = parse_basis_file(&text)?
                .into_iter()
                .next()
                .with_context(|| format!("basis file {} has no shell", path.display()))?;
            Ok((shell, BasisInfo::new(path.display().to_string(), &bytes)))
        }
    }
}

fn run(command: Command, args: &Common) -> Result<bool> {
    let cfg = args.resolve(command)?;
    let (shell, basis) = load_shell(&cfg)?;
    let outcome = command.run(&cfg, &shell)?;
    match &cfg.output.path {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
            render(command.name(), &cfg, &basis, &outcome, &mut w)?;
            w.flush()?;
        }
        None => render(command.name(), &cfg, &basis, &outcome, std::io::stdout().lock())?,
    }
    if let (Command::CseScan, Some(path)) = (command, &cfg.output.plot) {
        write_curves(path, &outcome)?;
    }
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    if !outcome.errors.is_empty() {
        eprintln!("{} of the requested geometries failed:", outcome.errors.len());
        for e in &outcome.errors {
            eprintln!("  R = {}: {}", e.r, e.message);
        }
    }
    Ok(outcome.errors.is_empty())
}

fn write_curves(path: &std::path::Path, outcome: &report::Outcome) -> Result<()> {
    let mut table = report::Table::new(&["r", "hf", "mp2", "cse", "fci"]);
    for p in outcome.curves.iter().flatten() {
        table.push(vec![report::cell(p.r), report::opt_cell(p.hf), report::opt_cell(p.mp2), report::opt_cell(p.cse), report::cell(p.fci)]);
    }
    table.write(File::create(path).with_context(|| format!("creating {}", path.display()))?)
}

fn is_broken_pipe(e: &anyhow::Error) -> bool {
    use std::io::ErrorKind::BrokenPipe;
    e.chain().any(|c| match (c.downcast_ref::<std::io::Error>(), c.downcast_ref::<serde_json::Error>()) {
        (Some(io), _) => io.kind() == BrokenPipe,
        (_, Some(json)) => json.io_error_kind() == Some(BrokenPipe),
        _ => false,
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match &cli.command {
        Cmd::ScfFci(a) => (Command::ScfFci, a),
        Cmd::DlTable(a) => (Command::DlTable, a),
        Cmd::CseScan(a) => (Command::CseScan, a),
        Cmd::Excited(a) => (Command::Excited, a),
    };
    match run(command, args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
