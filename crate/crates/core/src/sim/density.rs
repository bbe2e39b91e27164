use num_complex::Complex64;

use super::gate::{Gate, Mat2};
use super::kernels;
use super::state::StateVector;
use crate::Result;

/// Mixed state stored row-major: entry `(r, c)` sits at `(r << n) | c`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    entries: Vec<Complex64>,
}

impl DensityMatrix {
    pub fn from_pure(state: &StateVector) -> Self {
        let amps = state.amplitudes();
        let mut entries = Vec::with_capacity(amps.len() * amps.len());
        for a in amps {
            for b in amps {
                entries.push(a * b.conj());
            }
        }
        DensityMatrix {
            n_qubits: state.n_qubits(),
            entries,
        }
    }

    /// `I / 2^n`.
    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = Complex64::new(1.0 / dim as f64, 0.0);
        }
        DensityMatrix { n_qubits, entries }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim() + col]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }

    /// Largest elementwise deviation from Hermiticity.
    pub fn hermiticity_error(&self) -> f64 {
        let dim = self.dim();
        let mut worst = 0.0f64;
        for r in 0..dim {
            for c in r..dim {
                worst = worst.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        worst
    }

    /// `rho -> U rho U^dagger`.
    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.n_qubits)?;
        let n = self.n_qubits;
        match *gate {
            Gate::Cnot { control, target } => {
                kernels::apply_cnot(&mut self.entries, control + n, target + n);
                kernels::apply_cnot(&mut self.entries, control, target);
            }
            Gate::Cz(a, b) => {
                kernels::apply_cz(&mut self.entries, a + n, b + n);
                kernels::apply_cz(&mut self.entries, a, b);
            }
            _ => {
                let q = gate.qubits()[0];
                let m = gate.matrix().expect("single-qubit gate");
                kernels::apply_1q(&mut self.entries, q + n, &m);
                kernels::apply_1q(&mut self.entries, q, &kernels::conj(&m));
            }
        }
        Ok(())
    }

    /// `rho -> sum_k K_k rho K_k^dagger` with every `K_k` acting on `qubit`.
    pub(crate) fn apply_kraus(&mut self, qubit: usize, kraus: &[Mat2]) {
        let n = self.n_qubits;
        let dim = self.dim();
        let bit = 1usize << qubit;
        for r in (0..dim).filter(|r| r & bit == 0) {
            for c in (0..dim).filter(|c| c & bit == 0) {
                let idx = |dr: usize, dc: usize| ((r | (dr * bit)) << n) | (c | (dc * bit));
                let block = [
                    [self.entries[idx(0, 0)], self.entries[idx(0, 1)]],
                    [self.entries[idx(1, 0)], self.entries[idx(1, 1)]],
                ];
                let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
                for k in kraus {
                    // K B K^dagger
                    for i in 0..2 {
                        for j in 0..2 {
                            let mut acc = Complex64::new(0.0, 0.0);
                            for a in 0..2 {
                                for b in 0..2 {
                                    acc += k[i][a] * block[a][b] * k[j][b].conj();
                                }
                            }
                            out[i][j] += acc;
                        }
                    }
                }
                for (i, row) in out.iter().enumerate() {
                    for (j, v) in row.iter().enumerate() {
                        self.entries[idx(i, j)] = *v;
                    }
                }
            }
        }
    }

    pub fn probabilities(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.get(i, i).re.max(0.0)).collect()
    }
}
