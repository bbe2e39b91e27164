//! Gate-level execution on pure states and density matrices.

mod circuit;
mod density;
mod gate;
mod kernels;
mod measure;
mod noise;
mod state;

pub use circuit::{schedule, schedule_with_slots, Circuit, Moment};
pub use density::DensityMatrix;
pub use gate::{Gate, GateKind, Mat2};
pub use measure::{expectation, measurement_basis_change, sample_expectation, sample_parity, QuantumState};
pub use noise::{depolarize_all, DepolarizingChannel, NoiseModel};
pub use state::{basis_state, StateVector};

/// Applies every moment of `circuit` to a pure state.
pub fn run_pure(circuit: &Circuit, init: &StateVector) -> crate::Result<StateVector> {
    check_width(circuit, init.n_qubits())?;
    let mut state = init.clone();
    for moment in circuit.moments() {
        for gate in moment.gates() {
            state.apply_gate(gate)?;
        }
    }
    Ok(state)
}

/// Applies every moment as a unitary conjugation followed by one round of
/// depolarizing noise on all qubits.
pub fn run_noisy(circuit: &Circuit, init: &DensityMatrix, noise: &NoiseModel) -> crate::Result<DensityMatrix> {
    check_width(circuit, init.n_qubits())?;
    let mut rho = init.clone();
    for moment in circuit.moments() {
        for gate in moment.gates() {
            rho.apply_gate(gate)?;
        }
        depolarize_all(&mut rho, noise);
    }
    Ok(rho)
}

fn check_width(circuit: &Circuit, n_qubits: usize) -> crate::Result<()> {
    if circuit.n_qubits() != n_qubits {
        return Err(crate::Error::input(format!(
            "circuit acts on {} qubits but state has {}",
            circuit.n_qubits(),
            n_qubits
        )));
    }
    Ok(())
}
