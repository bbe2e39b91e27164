//! `vha-lab`: runs gradient-descent VQE suites and writes CSV for plotting.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;
use vha_core::experiment::{run_suite, ScenarioConfig, ScenarioKind};
use vha_core::{Error, DEFAULT_DENSITY_CAP};

const DENSITY_CAP_VAR: &str = "VHA_LAB_DENSITY_CAP";

/// Gradient-descent VQE runs with finite-difference or parameter-shift
/// gradients under shot and depolarizing noise.
///
/// Flags override the matching keys of the JSON config. Exit status is 0 when
/// every cell succeeds, 2 when some cells fail and 1 on configuration errors.
#[derive(Debug, Parser)]
#[command(name = "vha-lab", version)]
struct Cli {
    /// JSON document with any of the keys below.
    #[arg(long)]
    config: Option<PathBuf>,

    #[arg(long, value_parser = parse_kind)]
    scenario: Option<ScenarioKind>,

    /// Hubbard ring size (2, 4 or 6).
    #[arg(long)]
    sites: Option<usize>,

    /// Ansatz repetitions.
    #[arg(long)]
    reps: Option<usize>,

    /// Gradient method, `ps` or `fd:<eps>`; repeat for a grid.
    #[arg(long = "method")]
    methods: Vec<String>,

    /// Shots per Pauli term per energy evaluation.
    #[arg(long)]
    shots: Option<usize>,

    /// Depolarization rate; 0 means shot noise only. Repeat for a grid.
    #[arg(long = "gamma")]
    gammas: Vec<f64>,

    #[arg(long)]
    eta: Option<f64>,

    #[arg(long)]
    iterations: Option<usize>,

    /// Seeded runs per cell.
    #[arg(long)]
    runs: Option<usize>,

    /// Base seed.
    #[arg(long)]
    seed: Option<u64>,

    /// Initial parameters, comma separated; a single value is broadcast.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    theta0: Option<Vec<f64>>,

    /// Occupied single-particle levels per spin, comma separated.
    #[arg(long, value_delimiter = ',')]
    orbitals: Option<Vec<usize>>,

    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Suppress progress output.
    #[arg(long, short)]
    quiet: bool,
}

fn parse_kind(s: &str) -> Result<ScenarioKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

impl Cli {
    fn overrides(&self) -> ScenarioConfig {
        ScenarioConfig {
            scenario: self.scenario,
            sites: self.sites,
            reps: self.reps,
            method: (!self.methods.is_empty()).then(|| self.methods.clone()),
            shots: self.shots,
            gamma: (!self.gammas.is_empty()).then(|| self.gammas.clone()),
            eta: self.eta,
            iterations: self.iterations,
            runs: self.runs,
            seed: self.seed,
            theta0: self.theta0.clone(),
            out: self.out.clone(),
            orbitals: self.orbitals.clone(),
        }
    }
}

fn density_cap() -> anyhow::Result<usize> {
    match std::env::var(DENSITY_CAP_VAR) {
        Ok(v) => v
            .trim()
            .parse()
            .with_context(|| format!("{DENSITY_CAP_VAR}={v:?} is not a qubit count")),
        Err(std::env::VarError::NotPresent) => Ok(DEFAULT_DENSITY_CAP),
        Err(e) => Err(e).context(DENSITY_CAP_VAR),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let base = match &cli.config {
        Some(path) => match ScenarioConfig::from_json_file(path) {
            Ok(c) => c,
            Err(e) => return config_error(e.into()),
        },
        None => ScenarioConfig::default(),
    };
    let merged = base.merged(cli.overrides());
    let scenario = match merged.resolve() {
        Ok(s) => s,
        Err(e) => return config_error(e.into()),
    };
    let cap = match density_cap() {
        Ok(c) => c,
        Err(e) => return config_error(e),
    };
    let out = merged.out.unwrap_or_else(|| PathBuf::from("vha-lab-out"));
    let quiet = cli.quiet;
    let mut progress = |msg: &str| {
        if !quiet {
            eprintln!("[vha-lab] {msg}");
        }
    };
    match run_suite(&scenario, &out, cap, &mut progress) {
        Ok(report) => {
            for cell in report.cells.iter().filter(|c| !c.errors.is_empty()) {
                for err in &cell.errors {
                    eprintln!("[vha-lab] {}: {err}", cell.dir);
                }
            }
            println!(
                "{}: {} of {} cells complete, output in {}",
                report.scenario,
                report.cells.len() - report.failed_cells(),
                report.cells.len(),
                report.dir.display()
            );
            if report.is_complete() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(e) => config_error(e.into()),
    }
}

fn config_error(e: anyhow::Error) -> ExitCode {
    eprintln!("vha-lab: {e:#}");
    ExitCode::from(1)
}
