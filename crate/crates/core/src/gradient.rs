//! Energy evaluation backends and gradient synthesis.
//!
//! "Circuit evaluations" count energy evaluations: one bound circuit whose
//! energy is estimated term by term. Shots are spent per non-identity Pauli
//! term, `shots` each.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ansatz::CompiledAnsatz;
use crate::pauli::PauliSum;
use crate::sim::{
    depolarize_all, expectation, measurement_basis_change, run_noisy, run_pure, sample_expectation, sample_parity,
    DensityMatrix, NoiseModel, StateVector,
};
use crate::{Error, Result, DEFAULT_DENSITY_CAP};

/// Step-width parameter of the shift rule for `exp(-i mu sigma / 2)` rotations.
pub const SHIFT_RATE: f64 = 0.5;

/// Gate-angle shift `pi / (4 r)`.
pub const SHIFT: f64 = PI / (4.0 * SHIFT_RATE);

/// Angular frequency of the energy in a single bound gate angle, `2 s` with
/// `s = 1/2` for half-angle rotations.
pub const ANGLE_FREQUENCY: f64 = 2.0 * 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Backend {
    /// Exact expectation values of the pure state.
    Exact,
    /// Shot estimates of the pure state.
    Sampled { shots: usize },
    /// Shot estimates of the density matrix under per-moment depolarization.
    Noisy { shots: usize, noise: NoiseModel },
}

impl Backend {
    pub fn shots(&self) -> Option<usize> {
        match *self {
            Backend::Exact => None,
            Backend::Sampled { shots } | Backend::Noisy { shots, .. } => Some(shots),
        }
    }

    pub fn gamma(&self) -> Option<f64> {
        match self {
            Backend::Noisy { noise, .. } => Some(noise.gamma()),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvaluatorConfig {
    pub backend: Backend,
    pub seed: u64,
    pub density_cap: usize,
}

impl EvaluatorConfig {
    pub fn exact() -> Self {
        EvaluatorConfig {
            backend: Backend::Exact,
            seed: 0,
            density_cap: DEFAULT_DENSITY_CAP,
        }
    }

    pub fn sampled(shots: usize, seed: u64) -> Self {
        EvaluatorConfig {
            backend: Backend::Sampled { shots },
            seed,
            density_cap: DEFAULT_DENSITY_CAP,
        }
    }

    pub fn noisy(shots: usize, noise: NoiseModel, seed: u64) -> Self {
        EvaluatorConfig {
            backend: Backend::Noisy { shots, noise },
            seed,
            density_cap: DEFAULT_DENSITY_CAP,
        }
    }
}

/// `E(theta) = <psi(theta)|H|psi(theta)>` on a chosen backend. Every energy
/// evaluation draws a fresh stream seed; term `j` of that evaluation samples
/// from stream `j` of it.
#[derive(Debug, Clone)]
pub struct EnergyEvaluator {
    ansatz: Arc<CompiledAnsatz>,
    hamiltonian: PauliSum,
    initial: StateVector,
    initial_rho: Option<DensityMatrix>,
    backend: Backend,
    seed: u64,
    rng: ChaCha8Rng,
    evaluations: usize,
}

impl EnergyEvaluator {
    pub fn new(
        ansatz: Arc<CompiledAnsatz>,
        hamiltonian: PauliSum,
        initial: StateVector,
        config: EvaluatorConfig,
    ) -> Result<Self> {
        let n = ansatz.n_qubits();
        if initial.n_qubits() != n {
            return Err(Error::input(format!(
                "initial state has {} qubits, ansatz has {n}",
                initial.n_qubits()
            )));
        }
        if hamiltonian.n_qubits_required() > n {
            return Err(Error::input("Hamiltonian acts outside the ansatz register"));
        }
        if config.backend.shots() == Some(0) {
            return Err(Error::input("shot count must be at least 1"));
        }
        let initial_rho = match config.backend {
            Backend::Noisy { .. } => {
                if n > config.density_cap {
                    return Err(Error::config(format!(
                        "the depolarizing backend needs a {n}-qubit density matrix, above the cap of {} qubits \
                         (raise it with VHA_LAB_DENSITY_CAP)",
                        config.density_cap
                    )));
                }
                Some(DensityMatrix::from_pure(&initial))
            }
            _ => None,
        };
        Ok(EnergyEvaluator {
            ansatz,
            hamiltonian,
            initial,
            initial_rho,
            backend: config.backend,
            seed: config.seed,
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            evaluations: 0,
        })
    }

    pub fn ansatz(&self) -> &CompiledAnsatz {
        &self.ansatz
    }

    pub fn hamiltonian(&self) -> &PauliSum {
        &self.hamiltonian
    }

    pub fn backend(&self) -> &Backend {
        &self.backend
    }

    /// Master seed of a sampling backend; `None` for the exact backend.
    pub fn seed(&self) -> Option<u64> {
        match self.backend {
            Backend::Exact => None,
            _ => Some(self.seed),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.ansatz.n_qubits()
    }

    pub fn n_params(&self) -> usize {
        self.ansatz.n_params()
    }

    /// Energy evaluations performed so far.
    pub fn evaluations(&self) -> usize {
        self.evaluations
    }

    pub fn evaluate_energy(&mut self, theta: &[f64]) -> Result<f64> {
        let angles = self.ansatz.angles(theta)?;
        self.energy_at_angles(&angles)
    }

    /// Energy with every bound gate angle given explicitly.
    pub fn energy_at_angles(&mut self, angles: &[f64]) -> Result<f64> {
        let circuit = self.ansatz.bind_angles(angles)?;
        self.evaluations += 1;
        match self.backend {
            Backend::Exact => expectation(&run_pure(&circuit, &self.initial)?, &self.hamiltonian),
            Backend::Sampled { shots } => {
                let psi = run_pure(&circuit, &self.initial)?;
                let stream_seed = self.rng.next_u64();
                let mut total = 0.0;
                for (j, term) in self.hamiltonian.terms().iter().enumerate() {
                    if term.is_identity() {
                        total += term.coefficient();
                        continue;
                    }
                    let mut rng = term_rng(stream_seed, j);
                    total += term.coefficient() * sample_expectation(&psi, term, shots, &mut rng)?;
                }
                Ok(total)
            }
            Backend::Noisy { shots, noise } => {
                let rho0 = self.initial_rho.as_ref().expect("density state for noisy backend");
                let rho = run_noisy(&circuit, rho0, &noise)?;
                let stream_seed = self.rng.next_u64();
                let mut total = 0.0;
                for (j, term) in self.hamiltonian.terms().iter().enumerate() {
                    if term.is_identity() {
                        total += term.coefficient();
                        continue;
                    }
                    // The basis change is one more moment and gets its own noise round.
                    let basis = measurement_basis_change(term);
                    let mut rotated = rho.clone();
                    for g in &basis {
                        rotated.apply_gate(g)?;
                    }
                    if !basis.is_empty() {
                        depolarize_all(&mut rotated, &noise);
                    }
                    let mask = term.support().fold(0usize, |m, q| m | (1 << q));
                    let mut rng = term_rng(stream_seed, j);
                    total += term.coefficient() * sample_parity(&rotated.probabilities(), mask, shots, &mut rng)?;
                }
                Ok(total)
            }
        }
    }

    /// Noiseless exact energy regardless of backend; not counted as a
    /// circuit evaluation.
    pub fn exact_energy(&self, theta: &[f64]) -> Result<f64> {
        let circuit = self.ansatz.bind(theta)?;
        expectation(&run_pure(&circuit, &self.initial)?, &self.hamiltonian)
    }
}

fn term_rng(stream_seed: u64, term: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(stream_seed);
    rng.set_stream(term as u64);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GradientMethod {
    /// Forward difference with step `epsilon`.
    FiniteDifference {
        epsilon: f64,
    },
    ParameterShift,
}

impl GradientMethod {
    pub fn epsilon(&self) -> Option<f64> {
        match *self {
            GradientMethod::FiniteDifference { epsilon } => Some(epsilon),
            GradientMethod::ParameterShift => None,
        }
    }

    /// Short tag used in file names and CSV: `fd` or `ps`.
    pub fn tag(&self) -> &'static str {
        match self {
            GradientMethod::FiniteDifference { .. } => "fd",
            GradientMethod::ParameterShift => "ps",
        }
    }
}

impl fmt::Display for GradientMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GradientMethod::FiniteDifference { epsilon } => write!(f, "fd:{epsilon}"),
            GradientMethod::ParameterShift => f.write_str("ps"),
        }
    }
}

impl FromStr for GradientMethod {
    type Err = Error;

    /// `ps` or `fd:<epsilon>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("ps") {
            return Ok(GradientMethod::ParameterShift);
        }
        let eps = s
            .strip_prefix("fd:")
            .ok_or_else(|| Error::input(format!("unknown gradient method {s:?} (expected ps or fd:<eps>)")))?;
        let epsilon: f64 = eps
            .parse()
            .map_err(|_| Error::input(format!("bad finite-difference step {eps:?}")))?;
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::input(format!(
                "finite-difference step must be > 0, got {epsilon}"
            )));
        }
        Ok(GradientMethod::FiniteDifference { epsilon })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradientReport {
    pub gradient: Vec<f64>,
    /// `E(theta)` when the pass evaluated it.
    pub energy: Option<f64>,
    pub circuit_evaluations: usize,
    pub method: GradientMethod,
}

/// Forward difference `[E(theta + eps e_i) - E(theta)] / eps`, reusing one
/// `E(theta)` for all components: `R P + 1` evaluations.
pub fn finite_difference_gradient(ev: &mut EnergyEvaluator, theta: &[f64], epsilon: f64) -> Result<GradientReport> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::input(format!(
            "finite-difference step must be > 0, got {epsilon}"
        )));
    }
    let start = ev.evaluations();
    let e0 = ev.evaluate_energy(theta)?;
    let mut gradient = Vec::with_capacity(theta.len());
    let mut shifted = theta.to_vec();
    for i in 0..theta.len() {
        shifted[i] = theta[i] + epsilon;
        gradient.push((ev.evaluate_energy(&shifted)? - e0) / epsilon);
        shifted[i] = theta[i];
    }
    Ok(GradientReport {
        gradient,
        energy: Some(e0),
        circuit_evaluations: ev.evaluations() - start,
        method: GradientMethod::FiniteDifference { epsilon },
    })
}

/// Parameter-shift rule on every bound gate, chained through the binding
/// slopes: `dE/dtheta_i = sum_{g -> i} m_g r [E(mu_g + s) - E(mu_g - s)]`.
/// Costs `2 G` evaluations, plus one if `with_energy`.
pub fn parameter_shift_gradient(ev: &mut EnergyEvaluator, theta: &[f64], with_energy: bool) -> Result<GradientReport> {
    let start = ev.evaluations();
    let mut angles = ev.ansatz().angles(theta)?;
    let bindings = ev.ansatz().bindings().to_vec();
    let energy = if with_energy {
        Some(ev.energy_at_angles(&angles)?)
    } else {
        None
    };
    let mut gradient = vec![0.0; theta.len()];
    for (g, b) in bindings.iter().enumerate() {
        let mu = angles[g];
        angles[g] = mu + SHIFT;
        let plus = ev.energy_at_angles(&angles)?;
        angles[g] = mu - SHIFT;
        let minus = ev.energy_at_angles(&angles)?;
        angles[g] = mu;
        gradient[b.theta_index] += b.slope * SHIFT_RATE * (plus - minus);
    }
    Ok(GradientReport {
        gradient,
        energy,
        circuit_evaluations: ev.evaluations() - start,
        method: GradientMethod::ParameterShift,
    })
}

/// Gradient plus `E(theta)`, as one descent step needs them.
pub fn gradient_with_energy(ev: &mut EnergyEvaluator, theta: &[f64], method: GradientMethod) -> Result<GradientReport> {
    match method {
        GradientMethod::FiniteDifference { epsilon } => finite_difference_gradient(ev, theta, epsilon),
        GradientMethod::ParameterShift => parameter_shift_gradient(ev, theta, true),
    }
}

/// Least-squares fit `A cos(w mu + phi) + C` of the energy along one bound gate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrigFit {
    pub amplitude: f64,
    pub phase: f64,
    pub offset: f64,
    /// Largest absolute deviation of a sample from the fit.
    pub residual: f64,
}

impl TrigFit {
    pub fn value(&self, mu: f64) -> f64 {
        self.amplitude * (ANGLE_FREQUENCY * mu + self.phase).cos() + self.offset
    }
}

/// Sweeps the angle of bound gate `binding` over `n_points` equally spaced
/// values in `[0, 2 pi)` with everything else fixed at `theta`, then fits the
/// sinusoid. Exact backend only.
pub fn trig_form_probe(ev: &mut EnergyEvaluator, theta: &[f64], binding: usize, n_points: usize) -> Result<TrigFit> {
    if *ev.backend() != Backend::Exact {
        return Err(Error::Unsupported(
            "trig-form probing needs the exact backend; shot noise swamps the residual".into(),
        ));
    }
    if n_points < 4 {
        return Err(Error::input(format!("need at least 4 sweep points, got {n_points}")));
    }
    let mut angles = ev.ansatz().angles(theta)?;
    if binding >= angles.len() {
        return Err(Error::input(format!(
            "binding {binding} out of range ({} parametrized gates)",
            angles.len()
        )));
    }
    let mut mus = Vec::with_capacity(n_points);
    let mut energies = Vec::with_capacity(n_points);
    for k in 0..n_points {
        let mu = 2.0 * PI * k as f64 / n_points as f64;
        angles[binding] = mu;
        mus.push(mu);
        energies.push(ev.energy_at_angles(&angles)?);
    }
    let design = DMatrix::from_fn(n_points, 3, |r, c| match c {
        0 => (ANGLE_FREQUENCY * mus[r]).cos(),
        1 => (ANGLE_FREQUENCY * mus[r]).sin(),
        _ => 1.0,
    });
    let rhs = DVector::from_vec(energies.clone());
    let coef = design
        .clone()
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .map_err(|e| Error::Internal(format!("least-squares fit failed: {e}")))?;
    let (a, b, offset) = (coef[0], coef[1], coef[2]);
    let fit = TrigFit {
        amplitude: a.hypot(b),
        phase: (-b).atan2(a),
        offset,
        residual: 0.0,
    };
    let residual = mus
        .iter()
        .zip(&energies)
        .map(|(&mu, &e)| (fit.value(mu) - e).abs())
        .fold(0.0, f64::max);
    Ok(TrigFit { residual, ..fit })
}
