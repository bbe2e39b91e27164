//! Fixed learning-rate steepest descent, `theta <- theta - eta grad E`.

use serde::{Deserialize, Serialize};

use crate::gradient::{gradient_with_energy, Backend, EnergyEvaluator, GradientMethod};
use crate::{Error, Result};

/// Runs up to this many qubits also log the noiseless energy at each iterate.
pub const EXACT_COLUMN_MAX_QUBITS: usize = 12;

/// Abort once `|E| > DIVERGENCE_FACTOR * |E_ref|`.
pub const DIVERGENCE_FACTOR: f64 = 1e3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescentConfig {
    pub eta: f64,
    pub iterations: usize,
    pub method: GradientMethod,
    pub theta0: Vec<f64>,
}

impl DescentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::input(format!("learning rate must be > 0, got {}", self.eta)));
        }
        if self.iterations == 0 {
            return Err(Error::input("iterations must be at least 1"));
        }
        if let GradientMethod::FiniteDifference { epsilon } = self.method {
            if !(epsilon > 0.0 && epsilon.is_finite()) {
                return Err(Error::input(format!(
                    "finite-difference step must be > 0, got {epsilon}"
                )));
            }
        }
        if self.theta0.iter().any(|t| !t.is_finite()) {
            return Err(Error::input("initial parameters must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRow {
    pub iteration: usize,
    pub theta: Vec<f64>,
    /// Energy at `theta` from the run's backend.
    pub energy: f64,
    pub abs_dev: f64,
    /// `None` when the reference energy is zero.
    pub rel_dev: Option<f64>,
    /// Noiseless energy at `theta`, for registers up to
    /// [`EXACT_COLUMN_MAX_QUBITS`].
    pub exact_energy: Option<f64>,
    /// Circuit evaluations spent on the gradient steps that led to `theta`.
    pub cum_circuit_evals: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    /// Master seed of the sampling backend; absent for exact runs.
    pub seed: Option<u64>,
    pub backend: Backend,
    pub config: DescentConfig,
    pub e_ref: f64,
    /// `iterations + 1` rows; row 0 is the starting point.
    pub rows: Vec<IterationRow>,
}

impl RunRecord {
    pub fn final_row(&self) -> Option<&IterationRow> {
        self.rows.last()
    }
}

/// Circuit evaluations of one descent step: `R P + 1` or `2 G + 1`.
pub fn evaluations_per_step(ev: &EnergyEvaluator, method: GradientMethod) -> usize {
    let counts = ev.ansatz().count_report();
    match method {
        GradientMethod::FiniteDifference { .. } => counts.n_fd(),
        GradientMethod::ParameterShift => counts.n_ps(),
    }
}

/// Iterates the update `config.iterations` times. The energy logged at step
/// `t` is the one the gradient pass evaluated at `theta_t`; the final iterate
/// gets one extra energy evaluation that is not part of any gradient step.
pub fn run_descent(ev: &mut EnergyEvaluator, config: &DescentConfig, e_ref: f64) -> Result<RunRecord> {
    config.validate()?;
    if config.theta0.len() != ev.n_params() {
        return Err(Error::input(format!(
            "theta0 has {} entries, the ansatz has {} parameters",
            config.theta0.len(),
            ev.n_params()
        )));
    }
    if !e_ref.is_finite() {
        return Err(Error::input("reference energy must be finite"));
    }
    let per_step = evaluations_per_step(ev, config.method);
    let log_exact = ev.n_qubits() <= EXACT_COLUMN_MAX_QUBITS;
    let mut record = RunRecord {
        seed: ev.seed(),
        backend: *ev.backend(),
        config: config.clone(),
        e_ref,
        rows: Vec::with_capacity(config.iterations + 1),
    };
    let mut theta = config.theta0.clone();
    for t in 0..=config.iterations {
        let (energy, gradient) = if t < config.iterations {
            let report = gradient_with_energy(ev, &theta, config.method)?;
            debug_assert_eq!(report.circuit_evaluations, per_step);
            (
                report.energy.expect("descent passes include the energy"),
                Some(report.gradient),
            )
        } else {
            (ev.evaluate_energy(&theta)?, None)
        };
        let abs_dev = (energy - e_ref).abs();
        record.rows.push(IterationRow {
            iteration: t,
            theta: theta.clone(),
            energy,
            abs_dev,
            rel_dev: (e_ref != 0.0).then(|| abs_dev / e_ref.abs()),
            exact_energy: if log_exact {
                Some(ev.exact_energy(&theta)?)
            } else {
                None
            },
            cum_circuit_evals: t * per_step,
        });
        let reason = if !energy.is_finite() {
            Some(format!("non-finite energy {energy}"))
        } else if gradient.as_ref().is_some_and(|g| g.iter().any(|x| !x.is_finite())) {
            Some("non-finite gradient".to_string())
        } else if energy.abs() > DIVERGENCE_FACTOR * e_ref.abs() {
            Some(format!(
                "|E| = {:.6e} exceeds {DIVERGENCE_FACTOR:e} x |E_ref| = {:.6e}",
                energy.abs(),
                e_ref.abs()
            ))
        } else {
            None
        };
        if let Some(reason) = reason {
            return Err(Error::Aborted {
                iteration: t,
                reason,
                record: Box::new(record),
            });
        }
        if let Some(g) = gradient {
            theta.iter_mut().zip(&g).for_each(|(th, gi)| *th -= config.eta * gi);
        }
    }
    Ok(record)
}
