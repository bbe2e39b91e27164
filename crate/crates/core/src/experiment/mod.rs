//! Scenarios, seeded multi-run suites and their CSV/JSON output.
//!
//! A suite is a grid of cells, one per (gradient method, gamma). Each cell
//! holds one noiseless run on the exact backend plus `runs` seeded runs with
//! shot noise (and depolarization when gamma > 0).

mod config;
mod output;

use std::sync::Arc;

pub use config::{Scenario, ScenarioConfig, ScenarioKind};
pub use output::{run_seed, run_suite, CellOutcome, CellStatus, EnvelopeReport, EnvelopeRow, SuiteReport, CSV_HEADER};

use crate::ansatz::{compile, CompiledAnsatz, ParamBinding, VhaAnsatz};
use crate::gradient::{EnergyEvaluator, EvaluatorConfig};
use crate::hubbard::{build_hubbard, noninteracting_ground_state, HubbardSpec};
use crate::pauli::{PauliString, PauliSum};
use crate::sector::{ansatz_optimal_energy, exact_ground_energy, OptimumSearch, Sector};
use crate::sim::{Gate, StateVector};
use crate::{Error, Result};

/// Hubbard ring sizes the scenarios support.
pub const SUPPORTED_SITES: [usize; 3] = [2, 4, 6];

/// Where a problem's reference energy comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceSource {
    /// Known closed-form minimum.
    Analytic,
    ExactDiagonalization,
    /// Best energy the ansatz can reach.
    AnsatzOptimum,
}

/// Everything needed to build evaluators for one scenario.
#[derive(Debug, Clone)]
pub struct Problem {
    pub name: String,
    pub ansatz: Arc<CompiledAnsatz>,
    pub hamiltonian: PauliSum,
    pub initial: StateVector,
    pub e_ref: f64,
    pub e_ref_source: ReferenceSource,
    /// Exact ground energy in the initial state's particle-number sector.
    pub exact_ground: Option<f64>,
    pub hubbard: Option<HubbardSpec>,
}

impl Problem {
    pub fn evaluator(&self, config: EvaluatorConfig) -> Result<EnergyEvaluator> {
        EnergyEvaluator::new(
            self.ansatz.clone(),
            self.hamiltonian.clone(),
            self.initial.clone(),
            config,
        )
    }

    pub fn n_qubits(&self) -> usize {
        self.ansatz.n_qubits()
    }
}

/// One qubit, `H` then `RZ(theta)`, observable `X`: `E(theta) = cos(theta)`.
pub fn build_simple_scenario() -> Problem {
    let ansatz = CompiledAnsatz::from_gates(
        1,
        vec![Gate::H(0), Gate::Rz { qubit: 0, angle: 0.0 }],
        vec![ParamBinding {
            gate_index: 1,
            theta_index: 0,
            slope: 1.0,
        }],
        1,
        1,
    )
    .expect("valid one-gate template");
    Problem {
        name: "simple".into(),
        ansatz: Arc::new(ansatz),
        hamiltonian: PauliSum::new([PauliString::parse(1.0, "X0").expect("valid Pauli string")]),
        initial: StateVector::zero(1),
        e_ref: -1.0,
        e_ref_source: ReferenceSource::Analytic,
        exact_ground: Some(-1.0),
        hubbard: None,
    }
}

/// Half-filled periodic ring with `t = U = 1`. The reference energy is the
/// exact ground energy for two sites, where the ansatz is exact, and the best
/// ansatz energy otherwise. `orbitals` picks the occupied single-particle
/// levels when the Fermi level is degenerate.
pub fn build_hubbard_scenario(sites: usize, reps: usize, orbitals: Option<Vec<usize>>) -> Result<Problem> {
    if !SUPPORTED_SITES.contains(&sites) {
        return Err(Error::Unsupported(format!(
            "Hubbard scenarios support M in {SUPPORTED_SITES:?}, got {sites}"
        )));
    }
    let spec = HubbardSpec {
        orbitals,
        ..HubbardSpec::half_filled_ring(sites, 1.0, 1.0)
    };
    let decomp = build_hubbard(&spec)?;
    let ansatz = compile(&VhaAnsatz::new(decomp.clone(), reps)?)?;
    let initial = noninteracting_ground_state(&spec)?;
    let sector = Sector::of_state(sites, &initial)?;
    let exact = exact_ground_energy(&decomp, sector.particles())?;
    let (e_ref, source) = if sites == 2 {
        (exact, ReferenceSource::ExactDiagonalization)
    } else {
        let opt = ansatz_optimal_energy(&ansatz, &decomp, &initial, &OptimumSearch::default())?;
        (opt.energy, ReferenceSource::AnsatzOptimum)
    };
    Ok(Problem {
        name: format!("hubbard-m{sites}-r{reps}"),
        ansatz: Arc::new(ansatz),
        hamiltonian: decomp.full(),
        initial,
        e_ref,
        e_ref_source: source,
        exact_ground: Some(exact),
        hubbard: Some(spec),
    })
}
