use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Row-major 2x2 complex matrix.
pub type Mat2 = [[Complex64; 2]; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum GateKind {
    Rx,
    Ry,
    Rz,
    H,
    X,
    Cnot,
    Cz,
}

/// A single gate. Rotations follow `R_a(angle) = exp(-i angle sigma_a / 2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Gate {
    Rx { qubit: usize, angle: f64 },
    Ry { qubit: usize, angle: f64 },
    Rz { qubit: usize, angle: f64 },
    H(usize),
    X(usize),
    Cnot { control: usize, target: usize },
    Cz(usize, usize),
}

impl Gate {
    pub fn kind(&self) -> GateKind {
        match self {
            Gate::Rx { .. } => GateKind::Rx,
            Gate::Ry { .. } => GateKind::Ry,
            Gate::Rz { .. } => GateKind::Rz,
            Gate::H(_) => GateKind::H,
            Gate::X(_) => GateKind::X,
            Gate::Cnot { .. } => GateKind::Cnot,
            Gate::Cz(..) => GateKind::Cz,
        }
    }

    /// Qubits in gate order (control before target for CNOT).
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::Rx { qubit, .. } | Gate::Ry { qubit, .. } | Gate::Rz { qubit, .. } => {
                vec![qubit]
            }
            Gate::H(q) | Gate::X(q) => vec![q],
            Gate::Cnot { control, target } => vec![control, target],
            Gate::Cz(a, b) => vec![a, b],
        }
    }

    pub fn angle(&self) -> Option<f64> {
        match *self {
            Gate::Rx { angle, .. } | Gate::Ry { angle, .. } | Gate::Rz { angle, .. } => Some(angle),
            _ => None,
        }
    }

    pub fn is_rotation(&self) -> bool {
        self.angle().is_some()
    }

    /// Returns a copy with the rotation angle replaced; `None` for fixed gates.
    pub fn with_angle(&self, angle: f64) -> Option<Gate> {
        match *self {
            Gate::Rx { qubit, .. } => Some(Gate::Rx { qubit, angle }),
            Gate::Ry { qubit, .. } => Some(Gate::Ry { qubit, angle }),
            Gate::Rz { qubit, .. } => Some(Gate::Rz { qubit, angle }),
            _ => None,
        }
    }

    pub(crate) fn validate(&self, n_qubits: usize) -> crate::Result<()> {
        let qubits = self.qubits();
        if let Some(&q) = qubits.iter().find(|&&q| q >= n_qubits) {
            return Err(crate::Error::input(format!(
                "{:?} addresses qubit {q} of a {n_qubits}-qubit register",
                self.kind()
            )));
        }
        if qubits.len() == 2 && qubits[0] == qubits[1] {
            return Err(crate::Error::input(format!(
                "{:?} needs two distinct qubits, got {} twice",
                self.kind(),
                qubits[0]
            )));
        }
        Ok(())
    }

    /// 2x2 matrix of a single-qubit gate.
    pub fn matrix(&self) -> Option<Mat2> {
        let c = |re: f64, im: f64| Complex64::new(re, im);
        let m = match *self {
            Gate::Rx { angle, .. } => {
                let (s, co) = (angle / 2.0).sin_cos();
                [[c(co, 0.0), c(0.0, -s)], [c(0.0, -s), c(co, 0.0)]]
            }
            Gate::Ry { angle, .. } => {
                let (s, co) = (angle / 2.0).sin_cos();
                [[c(co, 0.0), c(-s, 0.0)], [c(s, 0.0), c(co, 0.0)]]
            }
            Gate::Rz { angle, .. } => {
                let (s, co) = (angle / 2.0).sin_cos();
                [[c(co, -s), c(0.0, 0.0)], [c(0.0, 0.0), c(co, s)]]
            }
            Gate::H(_) => {
                let h = FRAC_1_SQRT_2;
                [[c(h, 0.0), c(h, 0.0)], [c(h, 0.0), c(-h, 0.0)]]
            }
            Gate::X(_) => [[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]],
            Gate::Cnot { .. } | Gate::Cz(..) => return None,
        };
        Some(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unitary(m: &Mat2) -> bool {
        for i in 0..2 {
            for j in 0..2 {
                let dot: Complex64 = (0..2).map(|k| m[k][i].conj() * m[k][j]).sum();
                let expected = if i == j { 1.0 } else { 0.0 };
                if (dot - expected).norm() > 1e-14 {
                    return false;
                }
            }
        }
        true
    }

    #[test]
    fn single_qubit_matrices_are_unitary() {
        for g in [
            Gate::Rx { qubit: 0, angle: 0.3 },
            Gate::Ry { qubit: 0, angle: -1.7 },
            Gate::Rz { qubit: 0, angle: 2.9 },
            Gate::H(0),
            Gate::X(0),
        ] {
            assert!(unitary(&g.matrix().unwrap()), "{g:?}");
        }
    }

    #[test]
    fn rz_is_exp_of_minus_half_angle_z() {
        let m = Gate::Rz { qubit: 0, angle: 0.8 }.matrix().unwrap();
        assert!((m[0][0] - Complex64::from_polar(1.0, -0.4)).norm() < 1e-15);
        assert!((m[1][1] - Complex64::from_polar(1.0, 0.4)).norm() < 1e-15);
    }

    #[test]
    fn rejects_bad_qubits() {
        assert!(Gate::H(3).validate(3).is_err());
        assert!(Gate::Cz(1, 1).validate(3).is_err());
        assert!(Gate::Cnot { control: 0, target: 2 }.validate(3).is_ok());
    }
}
