use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::{build_hubbard_scenario, build_simple_scenario, Problem, Scenario, ScenarioKind};
use crate::ansatz::parameter_labels;
use crate::descent::{run_descent, DescentConfig, RunRecord};
use crate::gradient::{EvaluatorConfig, GradientMethod};
use crate::sim::NoiseModel;
use crate::{Error, Result};

pub const CSV_HEADER: [&str; 13] = [
    "scenario",
    "method",
    "epsilon",
    "shots",
    "gamma",
    "seed",
    "iteration",
    "theta_json",
    "energy",
    "abs_dev",
    "rel_dev",
    "exact_energy_at_theta",
    "cum_circuit_evals",
];

const ENVELOPE_HEADER: [&str; 6] = [
    "iteration",
    "runs",
    "min_abs_dev",
    "max_abs_dev",
    "min_rel_dev",
    "max_rel_dev",
];

/// Seed of seeded run `run` in the (method, gamma) cell: the base seed plus a
/// SHA-256 derived offset, stable across platforms and releases.
pub fn run_seed(base: u64, method: &GradientMethod, gamma: f64, run: usize) -> u64 {
    let digest = Sha256::digest(format!("{method}|{gamma:e}|{run}").as_bytes());
    let mut head = [0u8; 8];
    head.copy_from_slice(&digest[..8]);
    base.wrapping_add(u64::from_le_bytes(head))
}

/// Pointwise spread of the deviations over the seeded runs of one cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvelopeReport {
    pub runs: usize,
    pub rows: Vec<EnvelopeRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvelopeRow {
    pub iteration: usize,
    pub min_abs_dev: f64,
    pub max_abs_dev: f64,
    pub min_rel_dev: Option<f64>,
    pub max_rel_dev: Option<f64>,
}

impl EnvelopeReport {
    pub fn from_runs(runs: &[RunRecord]) -> Result<Self> {
        let first = runs
            .first()
            .ok_or_else(|| Error::input("envelope needs at least one run"))?;
        let len = first.rows.len();
        if runs.iter().any(|r| r.rows.len() != len) {
            return Err(Error::input("runs in an envelope must have equal length"));
        }
        let rows = (0..len)
            .map(|t| {
                let abs = runs.iter().map(|r| r.rows[t].abs_dev);
                let rel: Option<Vec<f64>> = runs.iter().map(|r| r.rows[t].rel_dev).collect();
                EnvelopeRow {
                    iteration: first.rows[t].iteration,
                    min_abs_dev: abs.clone().fold(f64::INFINITY, f64::min),
                    max_abs_dev: abs.fold(f64::NEG_INFINITY, f64::max),
                    min_rel_dev: rel.as_ref().map(|v| v.iter().copied().fold(f64::INFINITY, f64::min)),
                    max_rel_dev: rel
                        .as_ref()
                        .map(|v| v.iter().copied().fold(f64::NEG_INFINITY, f64::max)),
                }
            })
            .collect();
        Ok(EnvelopeReport { runs: runs.len(), rows })
    }

    /// Mean of `max_abs_dev - min_abs_dev` over iterations `from..=to`.
    pub fn mean_width(&self, from: usize, to: usize) -> Option<f64> {
        let widths: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| (from..=to).contains(&r.iteration))
            .map(|r| r.max_abs_dev - r.min_abs_dev)
            .collect();
        (!widths.is_empty()).then(|| widths.iter().sum::<f64>() / widths.len() as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CellStatus {
    Ok,
    Failed,
}

#[derive(Debug, Clone, Serialize)]
pub struct CellOutcome {
    pub method: GradientMethod,
    pub gamma: f64,
    /// Directory relative to the scenario directory.
    pub dir: String,
    pub status: CellStatus,
    pub noiseless_completed: bool,
    pub seeds: Vec<u64>,
    pub runs_completed: usize,
    pub errors: Vec<String>,
    #[serde(skip)]
    pub envelope: Option<EnvelopeReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub scenario: String,
    pub dir: PathBuf,
    pub e_ref: f64,
    pub cells: Vec<CellOutcome>,
}

impl SuiteReport {
    pub fn failed_cells(&self) -> usize {
        self.cells.iter().filter(|c| c.status == CellStatus::Failed).count()
    }

    pub fn is_complete(&self) -> bool {
        self.failed_cells() == 0
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    scenario: String,
    config: &'a Scenario,
    n_qubits: usize,
    e_ref: f64,
    e_ref_source: super::ReferenceSource,
    exact_ground_energy: Option<f64>,
    counts: crate::ansatz::CountReport,
    parameters: Vec<String>,
    density_cap: usize,
    csv_columns: [&'static str; 13],
    cells: &'a [CellOutcome],
}

/// Cell directory name, e.g. `fd-0.02__gamma0` or `ps__gamma0.001`.
pub fn cell_dir_name(method: &GradientMethod, gamma: f64) -> String {
    let m = match method {
        GradientMethod::FiniteDifference { epsilon } => format!("fd-{epsilon}"),
        GradientMethod::ParameterShift => "ps".into(),
    };
    format!("{m}__gamma{gamma}")
}

/// Runs every (method, gamma) cell of `scenario` and writes
/// `<out>/<scenario>/<cell>/{runs,envelope}.csv`, `template.json` and
/// `manifest.json`. Configuration problems fail the whole suite before any
/// run; failures inside a cell are recorded and the suite moves on.
pub fn run_suite(
    scenario: &Scenario,
    out: &Path,
    density_cap: usize,
    progress: &mut dyn FnMut(&str),
) -> Result<SuiteReport> {
    let n_qubits = scenario.n_qubits();
    if scenario.gammas.iter().any(|&g| g > 0.0) && n_qubits > density_cap {
        return Err(Error::config(format!(
            "depolarizing runs on {n_qubits} qubits need a 2^{} entry density matrix, above the cap of {density_cap} \
             qubits (use gamma 0 or raise VHA_LAB_DENSITY_CAP)",
            2 * n_qubits
        )));
    }
    progress(&format!("building {}", scenario.name()));
    let problem = match scenario.kind {
        ScenarioKind::Simple => build_simple_scenario(),
        ScenarioKind::Hubbard => build_hubbard_scenario(
            scenario.sites.expect("resolved hubbard scenario has a size"),
            scenario.reps,
            scenario.orbitals.clone(),
        )?,
    };
    let dir = out.join(scenario.name());
    fs::create_dir_all(&dir)?;
    fs::write(
        dir.join("template.json"),
        serde_json::to_string_pretty(&problem.ansatz.export())?,
    )?;

    let mut cells = Vec::new();
    for method in &scenario.methods {
        for &gamma in &scenario.gammas {
            cells.push(run_cell(
                scenario,
                &problem,
                &dir,
                *method,
                gamma,
                density_cap,
                progress,
            ));
        }
    }

    let manifest = Manifest {
        scenario: scenario.name(),
        config: scenario,
        n_qubits,
        e_ref: problem.e_ref,
        e_ref_source: problem.e_ref_source,
        exact_ground_energy: problem.exact_ground,
        counts: problem.ansatz.count_report(),
        parameters: parameter_labels(&problem.ansatz),
        density_cap,
        csv_columns: CSV_HEADER,
        cells: &cells,
    };
    fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
    Ok(SuiteReport {
        scenario: scenario.name(),
        dir,
        e_ref: problem.e_ref,
        cells,
    })
}

fn run_cell(
    scenario: &Scenario,
    problem: &Problem,
    scenario_dir: &Path,
    method: GradientMethod,
    gamma: f64,
    density_cap: usize,
    progress: &mut dyn FnMut(&str),
) -> CellOutcome {
    let name = cell_dir_name(&method, gamma);
    let mut outcome = CellOutcome {
        method,
        gamma,
        dir: name.clone(),
        status: CellStatus::Failed,
        noiseless_completed: false,
        seeds: (0..scenario.runs)
            .map(|r| run_seed(scenario.seed, &method, gamma, r))
            .collect(),
        runs_completed: 0,
        errors: Vec::new(),
        envelope: None,
    };
    let descent = DescentConfig {
        eta: scenario.eta,
        iterations: scenario.iterations,
        method,
        theta0: scenario.theta0.clone(),
    };
    let noise = match NoiseModel::new(gamma) {
        Ok(n) => n,
        Err(e) => {
            outcome.errors.push(e.to_string());
            return outcome;
        }
    };

    let mut attempt = |config: EvaluatorConfig, label: &str, errors: &mut Vec<String>| -> Option<RunRecord> {
        progress(&format!("{} {name} {label}", scenario.name()));
        let result = problem
            .evaluator(EvaluatorConfig { density_cap, ..config })
            .and_then(|mut ev| run_descent(&mut ev, &descent, problem.e_ref));
        match result {
            Ok(record) => Some(record),
            Err(Error::Aborted {
                iteration,
                reason,
                record,
            }) => {
                errors.push(format!("{label}: aborted at iteration {iteration}: {reason}"));
                Some(*record)
            }
            Err(e) => {
                errors.push(format!("{label}: {e}"));
                None
            }
        }
    };

    let mut errors = Vec::new();
    let noiseless = attempt(EvaluatorConfig::exact(), "noiseless", &mut errors);
    let mut seeded = Vec::new();
    for (r, &seed) in outcome.seeds.iter().enumerate() {
        let config = if gamma > 0.0 {
            EvaluatorConfig::noisy(scenario.shots, noise, seed)
        } else {
            EvaluatorConfig::sampled(scenario.shots, seed)
        };
        if let Some(record) = attempt(config, &format!("run {r}"), &mut errors) {
            seeded.push(record);
        }
    }
    let complete = |r: &RunRecord| r.rows.len() == scenario.iterations + 1;
    outcome.noiseless_completed = noiseless.as_ref().is_some_and(complete);
    outcome.runs_completed = seeded.iter().filter(|r| complete(r)).count();

    let cell_dir = scenario_dir.join(&name);
    let write = || -> Result<Option<EnvelopeReport>> {
        fs::create_dir_all(&cell_dir)?;
        let mut w = csv::Writer::from_path(cell_dir.join("runs.csv"))?;
        w.write_record(CSV_HEADER)?;
        for record in noiseless.iter().chain(&seeded) {
            write_rows(&mut w, &scenario.name(), record)?;
        }
        w.flush()?;
        if seeded.len() != scenario.runs || !seeded.iter().all(complete) {
            return Ok(None);
        }
        let envelope = EnvelopeReport::from_runs(&seeded)?;
        let mut w = csv::Writer::from_path(cell_dir.join("envelope.csv"))?;
        w.write_record(ENVELOPE_HEADER)?;
        for row in &envelope.rows {
            w.write_record([
                row.iteration.to_string(),
                envelope.runs.to_string(),
                row.min_abs_dev.to_string(),
                row.max_abs_dev.to_string(),
                opt(row.min_rel_dev),
                opt(row.max_rel_dev),
            ])?;
        }
        w.flush()?;
        Ok(Some(envelope))
    };
    match write() {
        Ok(envelope) => outcome.envelope = envelope,
        Err(e) => errors.push(format!("writing {}: {e}", cell_dir.display())),
    }
    outcome.errors = errors;
    if outcome.errors.is_empty() && outcome.noiseless_completed && outcome.envelope.is_some() {
        outcome.status = CellStatus::Ok;
    }
    outcome
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn write_rows(w: &mut csv::Writer<fs::File>, scenario: &str, record: &RunRecord) -> Result<()> {
    let method = record.config.method;
    for row in &record.rows {
        w.write_record([
            scenario.to_string(),
            method.tag().to_string(),
            opt(method.epsilon()),
            record.backend.shots().map(|s| s.to_string()).unwrap_or_default(),
            opt(record.backend.gamma().or(record.backend.shots().map(|_| 0.0))),
            record.seed.map(|s| s.to_string()).unwrap_or_default(),
            row.iteration.to_string(),
            serde_json::to_string(&row.theta)?,
            row.energy.to_string(),
            row.abs_dev.to_string(),
            opt(row.rel_dev),
            opt(row.exact_energy),
            row.cum_circuit_evals.to_string(),
        ])?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::ScenarioConfig;

    fn small_suite(json: &str) -> Scenario {
        serde_json::from_str::<ScenarioConfig>(json).unwrap().resolve().unwrap()
    }

    #[test]
    fn seeds_are_stable_and_distinct() {
        let ps = GradientMethod::ParameterShift;
        let fd = GradientMethod::FiniteDifference { epsilon: 0.02 };
        assert_eq!(run_seed(7, &ps, 0.0, 3), run_seed(7, &ps, 0.0, 3));
        let mut all = vec![];
        for m in [ps, fd] {
            for g in [0.0, 1e-4, 1e-3] {
                for r in 0..5 {
                    all.push(run_seed(7, &m, g, r));
                }
            }
        }
        let n = all.len();
        all.sort();
        all.dedup();
        assert_eq!(all.len(), n);
        assert_eq!(run_seed(8, &ps, 0.0, 0), run_seed(7, &ps, 0.0, 0).wrapping_add(1));
    }

    #[test]
    fn suite_writes_layout_and_is_reproducible() {
        let s = small_suite(
            r#"{"method": ["fd:0.05", "ps"], "gamma": [0, 0.001], "iterations": 6, "runs": 3, "shots": 500, "seed": 11}"#,
        );
        let tmp = tempfile::tempdir().unwrap();
        let report = run_suite(&s, tmp.path(), 8, &mut |_| {}).unwrap();
        assert!(report.is_complete(), "{:?}", report.cells);
        assert_eq!(report.cells.len(), 4);
        let dir = tmp.path().join("simple");
        assert!(dir.join("manifest.json").exists());
        assert!(dir.join("template.json").exists());
        let runs = dir.join("ps__gamma0.001").join("runs.csv");
        let text = fs::read_to_string(&runs).unwrap();
        assert_eq!(text.lines().next().unwrap(), CSV_HEADER.join(","));
        assert_eq!(text.lines().count(), 1 + 4 * 7);
        let mut reader = csv::Reader::from_path(&runs).unwrap();
        for rec in reader.records() {
            let rec = rec.unwrap();
            let t: usize = rec[6].parse().unwrap();
            assert_eq!(rec[12].parse::<usize>().unwrap(), 3 * t);
            assert_eq!(&rec[2], "");
        }

        let tmp2 = tempfile::tempdir().unwrap();
        run_suite(&s, tmp2.path(), 8, &mut |_| {}).unwrap();
        for cell in &report.cells {
            for file in ["runs.csv", "envelope.csv"] {
                let a = fs::read(dir.join(&cell.dir).join(file)).unwrap();
                let b = fs::read(tmp2.path().join("simple").join(&cell.dir).join(file)).unwrap();
                assert_eq!(a, b, "{}/{file}", cell.dir);
            }
        }
    }

    #[test]
    fn envelope_contains_every_run() {
        let s = small_suite(r#"{"method": ["fd:0.02"], "iterations": 10, "runs": 5, "shots": 2000}"#);
        let problem = build_simple_scenario();
        let records: Vec<RunRecord> = (0..5)
            .map(|r| {
                let seed = run_seed(s.seed, &s.methods[0], 0.0, r);
                let mut ev = problem.evaluator(EvaluatorConfig::sampled(s.shots, seed)).unwrap();
                let cfg = DescentConfig {
                    eta: s.eta,
                    iterations: s.iterations,
                    method: s.methods[0],
                    theta0: s.theta0.clone(),
                };
                run_descent(&mut ev, &cfg, -1.0).unwrap()
            })
            .collect();
        let env = EnvelopeReport::from_runs(&records).unwrap();
        assert_eq!(env.runs, 5);
        for (t, row) in env.rows.iter().enumerate() {
            assert!(row.min_abs_dev <= row.max_abs_dev);
            for r in &records {
                assert!(row.min_abs_dev <= r.rows[t].abs_dev && r.rows[t].abs_dev <= row.max_abs_dev);
            }
        }
    }

    #[test]
    fn density_cap_fails_before_running() {
        let s = small_suite(r#"{"scenario": "hubbard", "gamma": [0.001]}"#);
        let tmp = tempfile::tempdir().unwrap();
        assert!(matches!(
            run_suite(&s, tmp.path(), 3, &mut |_| {}),
            Err(Error::Config(_))
        ));
        assert!(fs::read_dir(tmp.path()).unwrap().next().is_none());
    }

    #[test]
    fn aborted_runs_mark_the_cell_failed() {
        // A tiny reference energy trips the divergence guard on every run.
        let s = small_suite(r#"{"method": ["ps"], "iterations": 3, "runs": 2, "shots": 10}"#);
        let tmp = tempfile::tempdir().unwrap();
        let mut problem = build_simple_scenario();
        problem.e_ref = 1e-5;
        let cell = run_cell(&s, &problem, tmp.path(), s.methods[0], 0.0, 8, &mut |_| {});
        assert_eq!(cell.status, CellStatus::Failed);
        assert_eq!(cell.errors.len(), 3);
        assert!(cell.envelope.is_none());
        let text = fs::read_to_string(tmp.path().join(&cell.dir).join("runs.csv")).unwrap();
        assert_eq!(text.lines().count(), 1 + 3);
    }
}
