//! Pauli strings and real-weighted sums of them.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::sim::{DensityMatrix, StateVector};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    /// `self * other = phase * result`, with `result = None` for the identity.
    fn mul(self, other: Pauli) -> (Complex64, Option<Pauli>) {
        use Pauli::*;
        let i = Complex64::new(0.0, 1.0);
        match (self, other) {
            (a, b) if a == b => (Complex64::new(1.0, 0.0), None),
            (X, Y) => (i, Some(Z)),
            (Y, X) => (-i, Some(Z)),
            (Y, Z) => (i, Some(X)),
            (Z, Y) => (-i, Some(X)),
            (Z, X) => (i, Some(Y)),
            (X, Z) => (-i, Some(Y)),
            _ => unreachable!(),
        }
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        };
        write!(f, "{c}")
    }
}

/// `coefficient * prod_q factor_q`. Identity factors are never stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliString {
    coefficient: f64,
    factors: BTreeMap<usize, Pauli>,
}

/// Bit-mask form of a Pauli string: `P|i> = i^y_count (-1)^popcount(i & z) |i ^ x>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliMasks {
    pub x: usize,
    pub z: usize,
    pub y_count: u32,
}

impl PauliMasks {
    #[inline]
    pub fn phase(&self, index: usize) -> Complex64 {
        let sign = if (index & self.z).count_ones().is_multiple_of(2) {
            1.0
        } else {
            -1.0
        };
        match self.y_count % 4 {
            0 => Complex64::new(sign, 0.0),
            1 => Complex64::new(0.0, sign),
            2 => Complex64::new(-sign, 0.0),
            _ => Complex64::new(0.0, -sign),
        }
    }
}

impl PauliString {
    pub fn new(coefficient: f64, factors: impl IntoIterator<Item = (usize, Pauli)>) -> Self {
        PauliString {
            coefficient,
            factors: factors.into_iter().collect(),
        }
    }

    pub fn identity(coefficient: f64) -> Self {
        Self::new(coefficient, [])
    }

    /// Parses `"X0 Z1 Y3"`-style factor lists.
    pub fn parse(coefficient: f64, spec: &str) -> Result<Self> {
        let mut factors = BTreeMap::new();
        for tok in spec.split_whitespace() {
            let (p, q) = tok.split_at(1);
            let pauli = match p {
                "X" => Pauli::X,
                "Y" => Pauli::Y,
                "Z" => Pauli::Z,
                _ => return Err(Error::input(format!("bad Pauli token {tok:?}"))),
            };
            let qubit: usize = q
                .parse()
                .map_err(|_| Error::input(format!("bad qubit in token {tok:?}")))?;
            if factors.insert(qubit, pauli).is_some() {
                return Err(Error::input(format!("qubit {qubit} repeated in {spec:?}")));
            }
        }
        Ok(PauliString { coefficient, factors })
    }

    pub fn coefficient(&self) -> f64 {
        self.coefficient
    }

    pub fn factors(&self) -> &BTreeMap<usize, Pauli> {
        &self.factors
    }

    pub fn is_identity(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.factors.keys().copied()
    }

    pub fn max_qubit(&self) -> Option<usize> {
        self.factors.keys().next_back().copied()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        PauliString {
            coefficient: self.coefficient * factor,
            factors: self.factors.clone(),
        }
    }

    pub fn masks(&self) -> PauliMasks {
        let mut m = PauliMasks { x: 0, z: 0, y_count: 0 };
        for (&q, &p) in &self.factors {
            let bit = 1usize << q;
            match p {
                Pauli::X => m.x |= bit,
                Pauli::Z => m.z |= bit,
                Pauli::Y => {
                    m.x |= bit;
                    m.z |= bit;
                    m.y_count += 1;
                }
            }
        }
        m
    }

    /// Symplectic test: the strings commute iff they anticommute on an even
    /// number of qubits.
    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let clashes = self
            .factors
            .iter()
            .filter(|(q, p)| other.factors.get(q).is_some_and(|o| o != *p))
            .count();
        clashes % 2 == 0
    }

    /// Operator product including coefficients.
    pub fn product(&self, other: &PauliString) -> (Complex64, BTreeMap<usize, Pauli>) {
        let mut phase = Complex64::new(self.coefficient * other.coefficient, 0.0);
        let mut factors = self.factors.clone();
        for (&q, &p) in &other.factors {
            match factors.get(&q) {
                None => {
                    factors.insert(q, p);
                }
                Some(&mine) => {
                    let (ph, res) = mine.mul(p);
                    phase *= ph;
                    match res {
                        Some(r) => factors.insert(q, r),
                        None => factors.remove(&q),
                    };
                }
            }
        }
        (phase, factors)
    }

    /// Unweighted `<psi|P|psi>`.
    pub fn expectation_pure(&self, state: &StateVector) -> f64 {
        let m = self.masks();
        let amps = state.amplitudes();
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, a) in amps.iter().enumerate() {
            acc += amps[i ^ m.x].conj() * m.phase(i) * a;
        }
        acc.re
    }

    /// Unweighted `tr(rho P)`.
    pub fn expectation_mixed(&self, rho: &DensityMatrix) -> f64 {
        let m = self.masks();
        (0..rho.dim())
            .map(|i| m.phase(i) * rho.get(i, i ^ m.x))
            .sum::<Complex64>()
            .re
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.coefficient)?;
        if self.factors.is_empty() {
            return write!(f, " I");
        }
        for (q, p) in &self.factors {
            write!(f, " {p}{q}")?;
        }
        Ok(())
    }
}

/// Sum of Pauli strings with distinct factor maps. Construction merges
/// duplicates and drops terms whose merged coefficient is exactly zero.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PauliSum {
    terms: Vec<PauliString>,
}

impl PauliSum {
    pub fn new(terms: impl IntoIterator<Item = PauliString>) -> Self {
        let mut merged: Vec<PauliString> = Vec::new();
        for t in terms {
            match merged.iter_mut().find(|m| m.factors == t.factors) {
                Some(m) => m.coefficient += t.coefficient,
                None => merged.push(t),
            }
        }
        merged.retain(|t| t.coefficient != 0.0);
        PauliSum { terms: merged }
    }

    pub fn terms(&self) -> &[PauliString] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn n_qubits_required(&self) -> usize {
        self.terms
            .iter()
            .filter_map(|t| t.max_qubit())
            .max()
            .map_or(0, |q| q + 1)
    }

    pub fn add(&self, other: &PauliSum) -> PauliSum {
        PauliSum::new(self.terms.iter().chain(&other.terms).cloned())
    }

    pub fn all_commute(&self) -> bool {
        self.terms
            .iter()
            .enumerate()
            .all(|(i, a)| self.terms[i + 1..].iter().all(|b| a.commutes_with(b)))
    }

    /// `[self, other]` as a map from factor maps to complex coefficients, with
    /// cancelled entries removed (|c| <= tol).
    pub fn commutator(&self, other: &PauliSum, tol: f64) -> BTreeMap<Vec<(usize, Pauli)>, Complex64> {
        let mut acc: BTreeMap<Vec<(usize, Pauli)>, Complex64> = BTreeMap::new();
        for a in &self.terms {
            for b in &other.terms {
                if a.commutes_with(b) {
                    continue;
                }
                let (ab, fab) = a.product(b);
                let (ba, fba) = b.product(a);
                *acc.entry(fab.into_iter().collect()).or_default() += ab;
                *acc.entry(fba.into_iter().collect()).or_default() -= ba;
            }
        }
        acc.retain(|_, c| c.norm() > tol);
        acc
    }

    pub fn expectation_pure(&self, state: &StateVector) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coefficient * t.expectation_pure(state))
            .sum()
    }

    pub fn expectation_mixed(&self, rho: &DensityMatrix) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coefficient * t.expectation_mixed(rho))
            .sum()
    }

    /// `H |psi>` as raw amplitudes.
    pub fn apply(&self, amps: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); amps.len()];
        for t in &self.terms {
            let m = t.masks();
            for (i, a) in amps.iter().enumerate() {
                out[i ^ m.x] += t.coefficient * m.phase(i) * a;
            }
        }
        out
    }
}

impl FromIterator<PauliString> for PauliSum {
    fn from_iter<I: IntoIterator<Item = PauliString>>(iter: I) -> Self {
        PauliSum::new(iter)
    }
}
