use serde::Serialize;

use super::gate::Gate;
use crate::{Error, Result};

/// Gates on pairwise-disjoint qubits, executed in parallel.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Moment {
    gates: Vec<Gate>,
}

impl Moment {
    pub fn new(gates: Vec<Gate>) -> Result<Self> {
        let mut seen = Vec::new();
        for g in &gates {
            for q in g.qubits() {
                if seen.contains(&q) {
                    return Err(Error::input(format!("qubit {q} used twice in one moment")));
                }
                seen.push(q);
            }
        }
        Ok(Moment { gates })
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub(crate) fn gate_mut(&mut self, pos: usize) -> &mut Gate {
        &mut self.gates[pos]
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Circuit {
    n_qubits: usize,
    moments: Vec<Moment>,
}

impl Circuit {
    pub fn new(n_qubits: usize, moments: Vec<Moment>) -> Result<Self> {
        for m in &moments {
            for g in m.gates() {
                g.validate(n_qubits)?;
            }
        }
        Ok(Circuit { n_qubits, moments })
    }

    pub fn empty(n_qubits: usize) -> Self {
        Circuit {
            n_qubits,
            moments: Vec::new(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn moments(&self) -> &[Moment] {
        &self.moments
    }

    pub(crate) fn moments_mut(&mut self) -> &mut [Moment] {
        &mut self.moments
    }

    pub fn depth(&self) -> usize {
        self.moments.len()
    }

    pub fn gate_count(&self) -> usize {
        self.moments.iter().map(|m| m.gates.len()).sum()
    }
}

/// Greedy left alignment: every gate lands in the earliest moment after the
/// last moment touching any of its qubits. Returns the circuit together with
/// the `(moment, position)` slot of each input gate.
pub fn schedule_with_slots(n_qubits: usize, gates: &[Gate]) -> Result<(Circuit, Vec<(usize, usize)>)> {
    let mut frontier = vec![0usize; n_qubits];
    let mut moments: Vec<Moment> = Vec::new();
    let mut slots = Vec::with_capacity(gates.len());
    for g in gates {
        g.validate(n_qubits)?;
        let qubits = g.qubits();
        let layer = qubits.iter().map(|&q| frontier[q]).max().unwrap_or(0);
        if layer == moments.len() {
            moments.push(Moment::default());
        }
        slots.push((layer, moments[layer].gates.len()));
        moments[layer].gates.push(*g);
        for q in qubits {
            frontier[q] = layer + 1;
        }
    }
    Ok((Circuit { n_qubits, moments }, slots))
}

pub fn schedule(n_qubits: usize, gates: &[Gate]) -> Result<Circuit> {
    schedule_with_slots(n_qubits, gates).map(|(c, _)| c)
}
