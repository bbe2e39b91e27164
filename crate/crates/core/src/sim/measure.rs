use std::f64::consts::FRAC_PI_2;

use rand::Rng;

use super::density::DensityMatrix;
use super::gate::Gate;
use super::state::StateVector;
use crate::pauli::{Pauli, PauliString, PauliSum};
use crate::{Error, Result};

/// Common surface of the pure and mixed backends.
pub trait QuantumState: Clone {
    fn n_qubits(&self) -> usize;
    fn apply_gate(&mut self, gate: &Gate) -> Result<()>;
    fn probabilities(&self) -> Vec<f64>;
    fn pauli_expectation(&self, term: &PauliString) -> f64;
}

impl QuantumState for StateVector {
    fn n_qubits(&self) -> usize {
        StateVector::n_qubits(self)
    }
    fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        StateVector::apply_gate(self, gate)
    }
    fn probabilities(&self) -> Vec<f64> {
        StateVector::probabilities(self)
    }
    fn pauli_expectation(&self, term: &PauliString) -> f64 {
        term.expectation_pure(self)
    }
}

impl QuantumState for DensityMatrix {
    fn n_qubits(&self) -> usize {
        DensityMatrix::n_qubits(self)
    }
    fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        DensityMatrix::apply_gate(self, gate)
    }
    fn probabilities(&self) -> Vec<f64> {
        DensityMatrix::probabilities(self)
    }
    fn pauli_expectation(&self, term: &PauliString) -> f64 {
        term.expectation_mixed(self)
    }
}

/// Exact `<O>` for a weighted Pauli sum.
pub fn expectation<S: QuantumState>(state: &S, observable: &PauliSum) -> Result<f64> {
    let needed = observable.n_qubits_required();
    if needed > state.n_qubits() {
        return Err(Error::input(format!(
            "observable needs {needed} qubits, state has {}",
            state.n_qubits()
        )));
    }
    Ok(observable
        .terms()
        .iter()
        .map(|t| t.coefficient() * state.pauli_expectation(t))
        .sum())
}

/// Single-qubit rotations taking each factor's eigenbasis to the Z basis.
///
/// X is measured after H. Y is measured after `RX(pi/2)`, because
/// `RX(pi/2)^dagger Z RX(pi/2) = Y`.
pub fn measurement_basis_change(term: &PauliString) -> Vec<Gate> {
    term.factors()
        .iter()
        .filter_map(|(&q, &p)| match p {
            Pauli::X => Some(Gate::H(q)),
            Pauli::Y => Some(Gate::Rx {
                qubit: q,
                angle: FRAC_PI_2,
            }),
            Pauli::Z => None,
        })
        .collect()
}

/// Mean of `N` sampled parities `(-1)^popcount(index & mask)`, with indices
/// drawn by inverse CDF over `probabilities`.
pub fn sample_parity(probabilities: &[f64], mask: usize, shots: usize, rng: &mut impl Rng) -> Result<f64> {
    if shots == 0 {
        return Err(Error::input("shot count must be at least 1"));
    }
    let mut cdf = Vec::with_capacity(probabilities.len());
    let mut acc = 0.0;
    for p in probabilities {
        acc += p;
        cdf.push(acc);
    }
    let total = acc;
    let last = cdf.len() - 1;
    let mut sum: i64 = 0;
    for _ in 0..shots {
        let u = rng.gen::<f64>() * total;
        let idx = cdf.partition_point(|&c| c <= u).min(last);
        sum += if (idx & mask).count_ones().is_multiple_of(2) {
            1
        } else {
            -1
        };
    }
    Ok(sum as f64 / shots as f64)
}

/// Shot estimate of the unweighted expectation of `term`. The basis change is
/// applied without noise.
pub fn sample_expectation<S: QuantumState>(
    state: &S,
    term: &PauliString,
    shots: usize,
    rng: &mut impl Rng,
) -> Result<f64> {
    if term.is_identity() {
        return Err(Error::input("cannot sample the identity term"));
    }
    if shots == 0 {
        return Err(Error::input("shot count must be at least 1"));
    }
    let mut rotated = state.clone();
    for g in measurement_basis_change(term) {
        rotated.apply_gate(&g)?;
    }
    let mask = term.support().fold(0usize, |m, q| m | (1 << q));
    sample_parity(&rotated.probabilities(), mask, shots, rng)
}
