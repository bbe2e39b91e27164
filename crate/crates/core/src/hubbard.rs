//! One-dimensional Hubbard ring under the Jordan-Wigner mapping.
//!
//! Qubits are block ordered: spin-up site `i` is qubit `i`, spin-down site `i`
//! is qubit `i + M`. Occupied means bit 1, so `n = (1 - Z) / 2`.

use std::fmt;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::pauli::{Pauli, PauliString, PauliSum};
use crate::sim::StateVector;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Periodic,
    Open,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HubbardSpec {
    pub sites: usize,
    pub hopping: f64,
    pub interaction: f64,
    pub boundary: Boundary,
    /// Electrons per spin species.
    pub filling: usize,
    /// Explicit single-particle orbitals (indices into the ascending spectrum)
    /// to occupy per spin; needed when the Fermi level is degenerate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orbitals: Option<Vec<usize>>,
}

impl HubbardSpec {
    /// Periodic ring at half filling with the given couplings.
    pub fn half_filled_ring(sites: usize, hopping: f64, interaction: f64) -> Self {
        HubbardSpec {
            sites,
            hopping,
            interaction,
            boundary: Boundary::Periodic,
            filling: sites / 2,
            orbitals: None,
        }
    }

    pub fn n_qubits(&self) -> usize {
        2 * self.sites
    }

    pub fn validate(&self) -> Result<()> {
        if self.sites < 2 || !self.sites.is_multiple_of(2) {
            return Err(Error::Unsupported(format!(
                "Hubbard ring needs an even number of sites >= 2, got {}",
                self.sites
            )));
        }
        if self.filling > self.sites {
            return Err(Error::input(format!(
                "filling {} per spin exceeds {} sites",
                self.filling, self.sites
            )));
        }
        if self.n_qubits() > usize::BITS as usize - 2 {
            return Err(Error::input("too many sites"));
        }
        Ok(())
    }

    /// Nearest-neighbour bonds `(i, j)` in ascending order of `i`. Two sites
    /// share a single bond even on a ring.
    pub fn bonds(&self) -> Vec<(usize, usize)> {
        let m = self.sites;
        let mut bonds: Vec<(usize, usize)> = (0..m - 1).map(|i| (i, i + 1)).collect();
        if self.boundary == Boundary::Periodic && m > 2 {
            bonds.push((m - 1, 0));
        }
        bonds
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PartLabel {
    /// On-site interaction.
    W,
    /// Full hopping (two-site rings).
    T,
    /// Bonds starting on an even site.
    Te,
    /// Bonds starting on an odd site, including the wrap bond.
    To,
}

impl fmt::Display for PartLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PartLabel::W => "W",
            PartLabel::T => "T",
            PartLabel::Te => "T_e",
            PartLabel::To => "T_o",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HamiltonianPart {
    pub label: PartLabel,
    pub terms: PauliSum,
}

/// Hamiltonian split into internally commuting parts, in ansatz order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HamiltonianDecomposition {
    pub sites: usize,
    pub n_qubits: usize,
    pub parts: Vec<HamiltonianPart>,
}

impl HamiltonianDecomposition {
    pub fn full(&self) -> PauliSum {
        PauliSum::new(self.parts.iter().flat_map(|p| p.terms.terms().iter().cloned()))
    }

    pub fn part(&self, label: PartLabel) -> Option<&PauliSum> {
        self.parts.iter().find(|p| p.label == label).map(|p| &p.terms)
    }
}

fn interaction_terms(spec: &HubbardSpec) -> Vec<PauliString> {
    let m = spec.sites;
    (0..m)
        .map(|i| PauliString::new(spec.interaction / 4.0, [(i, Pauli::Z), (i + m, Pauli::Z)]))
        .collect()
}

/// `-t (c_i^dag c_j + h.c.)` for both spins: XX and YY strings with a Z
/// string on the qubits strictly between the pair.
fn hopping_terms(spec: &HubbardSpec, (i, j): (usize, usize)) -> Vec<PauliString> {
    let coeff = -spec.hopping / 2.0;
    let mut out = Vec::with_capacity(4);
    for offset in [0, spec.sites] {
        let (a, b) = (i.min(j) + offset, i.max(j) + offset);
        for p in [Pauli::X, Pauli::Y] {
            let factors = std::iter::once((a, p))
                .chain((a + 1..b).map(|q| (q, Pauli::Z)))
                .chain(std::iter::once((b, p)));
            out.push(PauliString::new(coeff, factors));
        }
    }
    out
}

/// Full Hamiltonian assembled bond by bond, without the even/odd split.
pub fn hubbard_hamiltonian(spec: &HubbardSpec) -> Result<PauliSum> {
    spec.validate()?;
    let mut terms: Vec<PauliString> = spec.bonds().into_iter().flat_map(|b| hopping_terms(spec, b)).collect();
    terms.extend(interaction_terms(spec));
    Ok(PauliSum::new(terms))
}

/// Parts ordered W, then T (two sites) or T_e, T_o (four or more sites).
pub fn build_hubbard(spec: &HubbardSpec) -> Result<HamiltonianDecomposition> {
    spec.validate()?;
    let mut parts = vec![HamiltonianPart {
        label: PartLabel::W,
        terms: PauliSum::new(interaction_terms(spec)),
    }];
    let bonds = spec.bonds();
    if spec.sites == 2 {
        parts.push(HamiltonianPart {
            label: PartLabel::T,
            terms: PauliSum::new(bonds.iter().flat_map(|&b| hopping_terms(spec, b))),
        });
    } else {
        for (label, parity) in [(PartLabel::Te, 0), (PartLabel::To, 1)] {
            let terms = bonds
                .iter()
                .filter(|(i, _)| i % 2 == parity)
                .flat_map(|&b| hopping_terms(spec, b));
            parts.push(HamiltonianPart {
                label,
                terms: PauliSum::new(terms),
            });
        }
    }
    for p in &parts {
        if !p.terms.all_commute() {
            return Err(Error::Internal(format!("part {} is not internally commuting", p.label)));
        }
    }
    Ok(HamiltonianDecomposition {
        sites: spec.sites,
        n_qubits: spec.n_qubits(),
        parts,
    })
}

/// Single-particle hopping matrix, one spin species.
pub fn hopping_matrix(spec: &HubbardSpec) -> DMatrix<f64> {
    let m = spec.sites;
    let mut h = DMatrix::zeros(m, m);
    for (i, j) in spec.bonds() {
        h[(i, j)] -= spec.hopping;
        h[(j, i)] -= spec.hopping;
    }
    h
}

/// Orbitals sorted by energy: (energies, columns = orbitals).
fn sorted_orbitals(spec: &HubbardSpec) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(hopping_matrix(spec));
    let mut order: Vec<usize> = (0..spec.sites).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let energies = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(spec.sites, spec.sites, |r, c| eig.eigenvectors[(r, order[c])]);
    (energies, vectors)
}

/// Single-particle levels in ascending order.
pub fn single_particle_levels(spec: &HubbardSpec) -> Vec<f64> {
    sorted_orbitals(spec).0
}

/// Slater determinant of the lowest `filling` orbitals per spin.
///
/// The amplitude of an occupation pattern is `det(up) * det(down)`, where each
/// determinant is taken over the occupied-site rows of the occupied orbitals.
/// With ascending creation order and block spin ordering every Jordan-Wigner
/// sign is +1.
pub fn noninteracting_ground_state(spec: &HubbardSpec) -> Result<StateVector> {
    spec.validate()?;
    let m = spec.sites;
    let n = spec.filling;
    let (energies, orbitals) = sorted_orbitals(spec);
    let occupied: Vec<usize> = match &spec.orbitals {
        Some(sel) => {
            let mut sel = sel.clone();
            sel.sort_unstable();
            sel.dedup();
            if sel.len() != n || sel.iter().any(|&k| k >= m) {
                return Err(Error::input(format!(
                    "orbital selection {:?} must name {n} distinct orbitals below {m}",
                    spec.orbitals
                )));
            }
            sel
        }
        None => {
            if n > 0 && n < m && (energies[n] - energies[n - 1]).abs() < 1e-9 {
                return Err(Error::Degenerate(format!(
                    "levels {} and {} coincide at {:.6}; select the occupied orbitals explicitly \
                     (HubbardSpec::orbitals, CLI --orbitals)",
                    n - 1,
                    n,
                    energies[n]
                )));
            }
            (0..n).collect()
        }
    };

    // Amplitude per single-spin occupation mask.
    let spin_amplitudes: Vec<f64> = (0..1usize << m)
        .map(|mask| {
            if mask.count_ones() as usize != n {
                return 0.0;
            }
            let sites: Vec<usize> = (0..m).filter(|s| mask >> s & 1 == 1).collect();
            let sub = DMatrix::from_fn(n, n, |r, c| orbitals[(sites[r], occupied[c])]);
            sub.determinant()
        })
        .collect();

    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << (2 * m)];
    for (up, &a) in spin_amplitudes.iter().enumerate().filter(|(_, a)| **a != 0.0) {
        for (down, &b) in spin_amplitudes.iter().enumerate().filter(|(_, b)| **b != 0.0) {
            amps[up | (down << m)] = Complex64::new(a * b, 0.0);
        }
    }
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    amps.iter_mut().for_each(|a| *a /= norm);
    StateVector::from_amplitudes(amps)
}
