//! Compilation of the VHA product into Pauli-gadget circuits.
//!
//! Each term `c P` of a part becomes one gadget: basis changes mapping X/Y to
//! Z, a CNOT ladder folding the parity onto the highest qubit of the support,
//! a single `RZ(-2 c theta)`, and the mirror image. The RZ is the only
//! parametrized gate of the gadget and is bound to `theta` with slope `-2c`.

use std::f64::consts::FRAC_PI_2;

use serde::Serialize;

use crate::hubbard::HamiltonianDecomposition;
use crate::pauli::{Pauli, PauliString};
use crate::sim::{schedule_with_slots, Circuit, Gate, GateKind};
use crate::{Error, Result};

/// Gate angle `mu = slope * theta[theta_index]` for the gate at `gate_index`
/// (program order).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParamBinding {
    pub gate_index: usize,
    pub theta_index: usize,
    pub slope: f64,
}

#[derive(Debug, Clone)]
pub struct VhaAnsatz {
    pub decomposition: HamiltonianDecomposition,
    pub reps: usize,
}

impl VhaAnsatz {
    pub fn new(decomposition: HamiltonianDecomposition, reps: usize) -> Result<Self> {
        if reps == 0 {
            return Err(Error::input("VHA needs at least one repetition"));
        }
        Ok(VhaAnsatz { decomposition, reps })
    }
}

/// Gate template plus the linear map from parameters to gate angles.
#[derive(Debug, Clone)]
pub struct CompiledAnsatz {
    gates: Vec<Gate>,
    template: Circuit,
    slots: Vec<(usize, usize)>,
    bindings: Vec<ParamBinding>,
    params_per_rep: usize,
    reps: usize,
    part_labels: Vec<String>,
}

impl CompiledAnsatz {
    /// Assembles a template from gates in program order. Every binding must
    /// target a rotation, every RZ must be bound, and the bound parameters
    /// must cover `0..params_per_rep * reps`.
    pub fn from_gates(
        n_qubits: usize,
        gates: Vec<Gate>,
        bindings: Vec<ParamBinding>,
        params_per_rep: usize,
        reps: usize,
    ) -> Result<Self> {
        let n_params = params_per_rep * reps;
        if n_params == 0 {
            return Err(Error::input("ansatz needs at least one parameter"));
        }
        let mut bound = vec![false; gates.len()];
        let mut covered = vec![false; n_params];
        for b in &bindings {
            let gate = gates
                .get(b.gate_index)
                .ok_or_else(|| Error::input(format!("binding targets missing gate {}", b.gate_index)))?;
            if !gate.is_rotation() {
                return Err(Error::input(format!("gate {} is not a rotation", b.gate_index)));
            }
            if std::mem::replace(&mut bound[b.gate_index], true) {
                return Err(Error::input(format!("gate {} bound twice", b.gate_index)));
            }
            if !b.slope.is_finite() || b.slope == 0.0 {
                return Err(Error::input(format!(
                    "binding slope {} must be finite and nonzero",
                    b.slope
                )));
            }
            *covered
                .get_mut(b.theta_index)
                .ok_or_else(|| Error::input(format!("theta index {} out of range", b.theta_index)))? = true;
        }
        if let Some(i) = gates
            .iter()
            .enumerate()
            .position(|(i, g)| g.kind() == GateKind::Rz && !bound[i])
        {
            return Err(Error::Internal(format!("RZ gate {i} has no binding")));
        }
        if let Some(k) = covered.iter().position(|c| !c) {
            return Err(Error::input(format!("parameter {k} drives no gate")));
        }
        let (template, slots) = schedule_with_slots(n_qubits, &gates)?;
        Ok(CompiledAnsatz {
            gates,
            template,
            slots,
            bindings,
            params_per_rep,
            reps,
            part_labels: Vec::new(),
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.template.n_qubits()
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn template(&self) -> &Circuit {
        &self.template
    }

    pub fn bindings(&self) -> &[ParamBinding] {
        &self.bindings
    }

    pub fn params_per_rep(&self) -> usize {
        self.params_per_rep
    }

    pub fn reps(&self) -> usize {
        self.reps
    }

    pub fn n_params(&self) -> usize {
        self.params_per_rep * self.reps
    }

    /// Number of parametrized gates.
    pub fn n_param_gates(&self) -> usize {
        self.bindings.len()
    }

    pub fn part_labels(&self) -> &[String] {
        &self.part_labels
    }

    fn check_theta(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.n_params() {
            return Err(Error::input(format!(
                "expected {} parameters, got {}",
                self.n_params(),
                theta.len()
            )));
        }
        Ok(())
    }

    /// Gate angles `mu_g = m_g theta_{i(g)}`, one per binding.
    pub fn angles(&self, theta: &[f64]) -> Result<Vec<f64>> {
        self.check_theta(theta)?;
        Ok(self.bindings.iter().map(|b| b.slope * theta[b.theta_index]).collect())
    }

    /// Template with the bound gates set to `angles` (one per binding).
    pub fn bind_angles(&self, angles: &[f64]) -> Result<Circuit> {
        if angles.len() != self.bindings.len() {
            return Err(Error::input(format!(
                "expected {} gate angles, got {}",
                self.bindings.len(),
                angles.len()
            )));
        }
        let mut circuit = self.template.clone();
        for (b, &mu) in self.bindings.iter().zip(angles) {
            let (moment, pos) = self.slots[b.gate_index];
            let gate = circuit.moments_mut()[moment].gate_mut(pos);
            *gate = gate.with_angle(mu).expect("bindings target rotations");
        }
        Ok(circuit)
    }

    pub fn bind(&self, theta: &[f64]) -> Result<Circuit> {
        self.bind_angles(&self.angles(theta)?)
    }

    pub fn count_report(&self) -> CountReport {
        CountReport {
            params_per_rep: self.params_per_rep,
            reps: self.reps,
            param_gates: self.bindings.len(),
        }
    }

    /// JSON-friendly view of the template.
    pub fn export(&self) -> TemplateExport {
        let binding_of = |i: usize| self.bindings.iter().position(|b| b.gate_index == i);
        TemplateExport {
            n_qubits: self.n_qubits(),
            params_per_rep: self.params_per_rep,
            reps: self.reps,
            parts: self.part_labels.clone(),
            depth: self.template.depth(),
            gates: self
                .gates
                .iter()
                .enumerate()
                .map(|(i, g)| {
                    let binding = binding_of(i);
                    GateExport {
                        index: i,
                        moment: self.slots[i].0,
                        kind: g.kind(),
                        qubits: g.qubits(),
                        angle: if binding.is_some() { None } else { g.angle() },
                        binding,
                        theta_index: binding.map(|k| self.bindings[k].theta_index),
                        slope: binding.map(|k| self.bindings[k].slope),
                    }
                })
                .collect(),
        }
    }
}

/// Template export schema: one entry per gate in program order. Bound
/// rotations carry `binding`, `theta_index` and `slope` and no fixed `angle`.
#[derive(Debug, Clone, Serialize)]
pub struct TemplateExport {
    pub n_qubits: usize,
    pub params_per_rep: usize,
    pub reps: usize,
    pub parts: Vec<String>,
    pub depth: usize,
    pub gates: Vec<GateExport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GateExport {
    pub index: usize,
    pub moment: usize,
    pub kind: GateKind,
    pub qubits: Vec<usize>,
    pub angle: Option<f64>,
    pub binding: Option<usize>,
    pub theta_index: Option<usize>,
    pub slope: Option<f64>,
}

/// Circuit-evaluation accounting for one gradient-plus-energy pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CountReport {
    pub params_per_rep: usize,
    pub reps: usize,
    pub param_gates: usize,
}

impl CountReport {
    /// `R P + 1`
    pub fn n_fd(&self) -> usize {
        self.reps * self.params_per_rep + 1
    }

    /// `2 G + 1`
    pub fn n_ps(&self) -> usize {
        2 * self.param_gates + 1
    }
}

impl Serialize for CountReport {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("CountReport", 5)?;
        st.serialize_field("P", &self.params_per_rep)?;
        st.serialize_field("R", &self.reps)?;
        st.serialize_field("G", &self.param_gates)?;
        st.serialize_field("N_fd", &self.n_fd())?;
        st.serialize_field("N_ps", &self.n_ps())?;
        st.end()
    }
}

/// Gadget for `exp(i theta c P)`. Gates are numbered from `first_gate`; the
/// binding is `None` for identity terms, which only contribute a global phase.
pub fn exp_pauli_rotation(
    term: &PauliString,
    theta_index: usize,
    first_gate: usize,
) -> (Vec<Gate>, Option<ParamBinding>) {
    if term.is_identity() {
        return (Vec::new(), None);
    }
    let support: Vec<(usize, Pauli)> = term.factors().iter().map(|(&q, &p)| (q, p)).collect();
    let into_z = |&(q, p): &(usize, Pauli)| match p {
        Pauli::X => Some(Gate::H(q)),
        Pauli::Y => Some(Gate::Rx {
            qubit: q,
            angle: FRAC_PI_2,
        }),
        Pauli::Z => None,
    };
    let out_of_z = |&(q, p): &(usize, Pauli)| match p {
        Pauli::X => Some(Gate::H(q)),
        Pauli::Y => Some(Gate::Rx {
            qubit: q,
            angle: -FRAC_PI_2,
        }),
        Pauli::Z => None,
    };
    let ladder: Vec<Gate> = support
        .windows(2)
        .map(|w| Gate::Cnot {
            control: w[0].0,
            target: w[1].0,
        })
        .collect();
    let last = support.last().expect("non-identity").0;

    let mut gates: Vec<Gate> = support.iter().filter_map(into_z).collect();
    gates.extend(ladder.iter().copied());
    let rz_index = first_gate + gates.len();
    gates.push(Gate::Rz {
        qubit: last,
        angle: 0.0,
    });
    gates.extend(ladder.iter().rev().copied());
    gates.extend(support.iter().filter_map(out_of_z));

    let binding = ParamBinding {
        gate_index: rz_index,
        theta_index,
        slope: -2.0 * term.coefficient(),
    };
    (gates, Some(binding))
}

/// Compiles `prod_k prod_alpha exp(i theta_{k,alpha} H_alpha) |psi_0>`, with
/// parameter `theta[k * P + alpha]` and the first factor applied first.
pub fn compile(ansatz: &VhaAnsatz) -> Result<CompiledAnsatz> {
    let decomp = &ansatz.decomposition;
    let p = decomp.parts.len();
    for part in &decomp.parts {
        if !part.terms.all_commute() {
            return Err(Error::Internal(format!("part {} has non-commuting terms", part.label)));
        }
        if part.terms.terms().iter().all(|t| t.is_identity()) {
            return Err(Error::input(format!(
                "part {} has no non-identity generator",
                part.label
            )));
        }
    }
    let mut gates = Vec::new();
    let mut bindings = Vec::new();
    for k in 0..ansatz.reps {
        for (alpha, part) in decomp.parts.iter().enumerate() {
            for term in part.terms.terms() {
                let (g, b) = exp_pauli_rotation(term, k * p + alpha, gates.len());
                gates.extend(g);
                bindings.extend(b);
            }
        }
    }
    let mut compiled = CompiledAnsatz::from_gates(decomp.n_qubits, gates, bindings, p, ansatz.reps)?;
    compiled.part_labels = decomp.parts.iter().map(|p| p.label.to_string()).collect();
    Ok(compiled)
}

/// Labels of each parameter in order, e.g. `W#1`, `T_e#1`, ..., `T_o#2`.
pub fn parameter_labels(compiled: &CompiledAnsatz) -> Vec<String> {
    (0..compiled.reps)
        .flat_map(|k| compiled.part_labels.iter().map(move |l| format!("{l}#{}", k + 1)))
        .collect()
}
