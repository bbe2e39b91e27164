use num_complex::Complex64;

use super::gate::Gate;
use super::kernels;
use crate::{Error, Result};

/// Pure state on `n_qubits`. Qubit 0 is the least significant bit of the
/// basis index.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// `|0...0>`.
    pub fn zero(n_qubits: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        StateVector { n_qubits, amplitudes }
    }

    /// Wraps raw amplitudes; the length must be a power of two and the norm 1
    /// within 1e-10.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::input(format!(
                "amplitude vector length {len} is not a power of two"
            )));
        }
        let state = StateVector {
            n_qubits: len.trailing_zeros() as usize,
            amplitudes,
        };
        let norm = state.norm_sqr();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::input(format!("state norm^2 is {norm}, expected 1")));
        }
        Ok(state)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.n_qubits)?;
        match *gate {
            Gate::Cnot { control, target } => kernels::apply_cnot(&mut self.amplitudes, control, target),
            Gate::Cz(a, b) => kernels::apply_cz(&mut self.amplitudes, a, b),
            _ => {
                let m = gate.matrix().expect("single-qubit gate");
                kernels::apply_1q(&mut self.amplitudes, gate.qubits()[0], &m);
            }
        }
        Ok(())
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }
}

/// Computational basis state from a bitstring written with qubit 0 LAST,
/// i.e. `"10"` on two qubits is basis index 2.
pub fn basis_state(n_qubits: usize, bits: &str) -> Result<StateVector> {
    if bits.chars().count() != n_qubits {
        return Err(Error::input(format!(
            "bitstring {bits:?} has {} characters, expected {n_qubits}",
            bits.chars().count()
        )));
    }
    let mut index = 0usize;
    for ch in bits.chars() {
        index <<= 1;
        match ch {
            '0' => {}
            '1' => index |= 1,
            other => return Err(Error::input(format!("invalid bit {other:?}"))),
        }
    }
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
    amplitudes[index] = Complex64::new(1.0, 0.0);
    Ok(StateVector { n_qubits, amplitudes })
}
