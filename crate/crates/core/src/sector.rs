//! Fixed particle-number subspaces of the block-ordered Hubbard register.
//!
//! Every VHA generator conserves the number of electrons per spin, so the
//! reference energies work in the `C(M, n_up) * C(M, n_down)` dimensional
//! sector instead of the full `4^M` space. The ansatz is applied here as exact
//! exponentials of the Hamiltonian parts, independent of any gate compilation.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::ansatz::CompiledAnsatz;
use crate::hubbard::HamiltonianDecomposition;
use crate::pauli::PauliSum;
use crate::sim::StateVector;
use crate::{Error, Result};

const NOT_IN_SECTOR: u32 = u32::MAX;

#[derive(Debug, Clone)]
pub struct Sector {
    sites: usize,
    n_up: usize,
    n_down: usize,
    states: Vec<usize>,
    lookup: Vec<u32>,
}

impl Sector {
    pub fn new(sites: usize, n_up: usize, n_down: usize) -> Result<Self> {
        if n_up > sites || n_down > sites {
            return Err(Error::input(format!(
                "sector ({n_up}, {n_down}) is empty for {sites} sites"
            )));
        }
        let full = 1usize << (2 * sites);
        let low = (1usize << sites) - 1;
        let mut lookup = vec![NOT_IN_SECTOR; full];
        let mut states = Vec::new();
        for (i, slot) in lookup.iter_mut().enumerate() {
            if (i & low).count_ones() as usize == n_up && (i >> sites).count_ones() as usize == n_down {
                *slot = states.len() as u32;
                states.push(i);
            }
        }
        Ok(Sector {
            sites,
            n_up,
            n_down,
            states,
            lookup,
        })
    }

    /// Sector containing all the weight of `state`.
    pub fn of_state(sites: usize, state: &StateVector) -> Result<Self> {
        let low = (1usize << sites) - 1;
        let (mut up, mut down) = (None, None);
        for (i, a) in state.amplitudes().iter().enumerate() {
            if a.norm_sqr() < 1e-20 {
                continue;
            }
            let (u, d) = ((i & low).count_ones() as usize, (i >> sites).count_ones() as usize);
            if *up.get_or_insert(u) != u || *down.get_or_insert(d) != d {
                return Err(Error::input("state mixes particle-number sectors"));
            }
        }
        Sector::new(sites, up.unwrap_or(0), down.unwrap_or(0))
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn particles(&self) -> (usize, usize) {
        (self.n_up, self.n_down)
    }

    fn index_of(&self, full_index: usize) -> Option<usize> {
        match self.lookup[full_index] {
            NOT_IN_SECTOR => None,
            k => Some(k as usize),
        }
    }

    pub fn project(&self, state: &StateVector) -> Result<Vec<Complex64>> {
        if state.dim() != self.lookup.len() {
            return Err(Error::input("state width does not match the sector's register"));
        }
        let inside: f64 = self.states.iter().map(|&i| state.amplitudes()[i].norm_sqr()).sum();
        if (inside - state.norm_sqr()).abs() > 1e-10 {
            return Err(Error::input("state has weight outside the sector"));
        }
        Ok(self.states.iter().map(|&i| state.amplitudes()[i]).collect())
    }

    pub fn embed(&self, v: &[Complex64]) -> Result<StateVector> {
        let mut amps = vec![Complex64::new(0.0, 0.0); self.lookup.len()];
        for (k, &i) in self.states.iter().enumerate() {
            amps[i] = v[k];
        }
        StateVector::from_amplitudes(amps)
    }
}

/// Terms sharing an X mask act on the same pairs of basis states.
#[derive(Debug, Clone)]
struct MaskGroup {
    diagonal: bool,
    /// `(from, to, <to|G|from>)`, sector indices.
    entries: Vec<(u32, u32, Complex64)>,
}

/// A sector-preserving Pauli sum restricted to a sector.
#[derive(Debug, Clone)]
pub struct SectorOperator {
    dim: usize,
    groups: Vec<MaskGroup>,
}

impl SectorOperator {
    pub fn new(sector: &Sector, op: &PauliSum) -> Result<Self> {
        let mut by_mask: Vec<(usize, Vec<(f64, crate::pauli::PauliMasks)>)> = Vec::new();
        for t in op.terms() {
            let m = t.masks();
            match by_mask.iter_mut().find(|(x, _)| *x == m.x) {
                Some((_, v)) => v.push((t.coefficient(), m)),
                None => by_mask.push((m.x, vec![(t.coefficient(), m)])),
            }
        }
        let mut groups = Vec::with_capacity(by_mask.len());
        for (x, terms) in by_mask {
            let mut entries = Vec::new();
            for (k, &i) in sector.states.iter().enumerate() {
                let amp: Complex64 = terms.iter().map(|(c, m)| *c * m.phase(i)).sum();
                if amp.norm() < 1e-14 {
                    continue;
                }
                let to = sector
                    .index_of(i ^ x)
                    .ok_or_else(|| Error::input("operator does not conserve the particle sector"))?;
                entries.push((k as u32, to as u32, amp));
            }
            groups.push(MaskGroup {
                diagonal: x == 0,
                entries,
            });
        }
        Ok(SectorOperator {
            dim: sector.dim(),
            groups,
        })
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim];
        for g in &self.groups {
            for &(from, to, a) in &g.entries {
                out[to as usize] += a * v[from as usize];
            }
        }
        out
    }

    pub fn expectation(&self, v: &[Complex64]) -> f64 {
        inner(v, &self.apply(v)).re
    }

    pub fn dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for g in &self.groups {
            for &(from, to, a) in &g.entries {
                m[(to as usize, from as usize)] += a;
            }
        }
        m
    }

    /// `v <- exp(i theta G) v`. Exact only when all terms of the operator
    /// commute, which holds for every VHA part.
    pub fn exp_apply(&self, theta: f64, v: &mut [Complex64]) {
        let i = Complex64::new(0.0, 1.0);
        for g in &self.groups {
            if g.diagonal {
                for &(from, _, a) in &g.entries {
                    v[from as usize] *= Complex64::from_polar(1.0, theta * a.re);
                }
                continue;
            }
            for &(from, to, a) in g.entries.iter().filter(|(f, t, _)| f < t) {
                let (f, t) = (from as usize, to as usize);
                let r = a.norm();
                let (s, c) = (theta * r).sin_cos();
                let (vf, vt) = (v[f], v[t]);
                v[f] = c * vf + i * s * (a.conj() / r) * vt;
                v[t] = c * vt + i * s * (a / r) * vf;
            }
        }
    }
}

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Lowest eigenvalue of the full Hamiltonian in the `(n_up, n_down)` sector,
/// by dense diagonalization.
pub fn exact_ground_energy(decomp: &HamiltonianDecomposition, sector: (usize, usize)) -> Result<f64> {
    if decomp.n_qubits > 14 {
        return Err(Error::input(format!(
            "dense diagonalization is limited to 14 qubits, got {}",
            decomp.n_qubits
        )));
    }
    let sector = Sector::new(decomp.sites, sector.0, sector.1)?;
    let h = SectorOperator::new(&sector, &decomp.full())?;
    let eig = SymmetricEigen::new(h.dense());
    Ok(eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min))
}

/// The VHA product `prod_k prod_alpha exp(i theta_{k,alpha} H_alpha) |psi_0>`
/// evaluated with exact part exponentials inside a particle sector.
#[derive(Debug, Clone)]
pub struct SectorAnsatz {
    sector: Sector,
    parts: Vec<SectorOperator>,
    hamiltonian: SectorOperator,
    initial: Vec<Complex64>,
    reps: usize,
}

impl SectorAnsatz {
    pub fn new(decomp: &HamiltonianDecomposition, reps: usize, initial: &StateVector) -> Result<Self> {
        if reps == 0 {
            return Err(Error::input("at least one repetition required"));
        }
        let sector = Sector::of_state(decomp.sites, initial)?;
        let parts = decomp
            .parts
            .iter()
            .map(|p| SectorOperator::new(&sector, &p.terms))
            .collect::<Result<Vec<_>>>()?;
        let hamiltonian = SectorOperator::new(&sector, &decomp.full())?;
        let initial = sector.project(initial)?;
        Ok(SectorAnsatz {
            sector,
            parts,
            hamiltonian,
            initial,
            reps,
        })
    }

    pub fn n_params(&self) -> usize {
        self.parts.len() * self.reps
    }

    pub fn sector(&self) -> &Sector {
        &self.sector
    }

    fn check_len(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.n_params() {
            return Err(Error::input(format!(
                "expected {} parameters, got {}",
                self.n_params(),
                theta.len()
            )));
        }
        Ok(())
    }

    fn evolve(&self, theta: &[f64]) -> Vec<Complex64> {
        let mut v = self.initial.clone();
        for (j, &t) in theta.iter().enumerate() {
            self.parts[j % self.parts.len()].exp_apply(t, &mut v);
        }
        v
    }

    pub fn state(&self, theta: &[f64]) -> Result<StateVector> {
        self.check_len(theta)?;
        self.sector.embed(&self.evolve(theta))
    }

    pub fn energy(&self, theta: &[f64]) -> Result<f64> {
        self.check_len(theta)?;
        Ok(self.hamiltonian.expectation(&self.evolve(theta)))
    }

    /// Energy and exact gradient by a reverse sweep over the factors.
    pub fn energy_and_gradient(&self, theta: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.check_len(theta)?;
        let mut psi = self.evolve(theta);
        let mut lambda = self.hamiltonian.apply(&psi);
        let energy = inner(&psi, &lambda).re;
        let mut grad = vec![0.0; theta.len()];
        for j in (0..theta.len()).rev() {
            let part = &self.parts[j % self.parts.len()];
            // d/dtheta_j = 2 Re <lambda| i H_j psi> = -2 Im <lambda|H_j psi>
            grad[j] = -2.0 * inner(&lambda, &part.apply(&psi)).im;
            part.exp_apply(-theta[j], &mut psi);
            part.exp_apply(-theta[j], &mut lambda);
        }
        Ok((energy, grad))
    }
}

/// Settings of the multi-start noiseless steepest descent behind
/// [`ansatz_optimal_energy`].
#[derive(Debug, Clone, Serialize)]
pub struct OptimumSearch {
    pub starts: usize,
    pub iterations: usize,
    pub eta: f64,
    /// Random starts are uniform in `[-spread, spread]` per component.
    pub spread: f64,
    pub seed: u64,
}

impl Default for OptimumSearch {
    fn default() -> Self {
        OptimumSearch {
            starts: 20,
            iterations: 5000,
            eta: 0.05,
            spread: 1.6,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AnsatzOptimum {
    pub energy: f64,
    pub theta: Vec<f64>,
    /// Final energy of each start.
    pub start_energies: Vec<f64>,
}

/// Best energy reachable with the compiled ansatz's parameter layout, found by
/// multi-start steepest descent on the exact part exponentials.
pub fn ansatz_optimal_energy(
    compiled: &CompiledAnsatz,
    decomp: &HamiltonianDecomposition,
    initial: &StateVector,
    search: &OptimumSearch,
) -> Result<AnsatzOptimum> {
    if compiled.params_per_rep() != decomp.parts.len() {
        return Err(Error::input(format!(
            "compiled ansatz has {} parameters per repetition, decomposition has {} parts",
            compiled.params_per_rep(),
            decomp.parts.len()
        )));
    }
    if search.starts == 0 || search.iterations == 0 || search.eta.is_nan() || search.eta <= 0.0 {
        return Err(Error::input("search needs starts >= 1, iterations >= 1 and eta > 0"));
    }
    let model = SectorAnsatz::new(decomp, compiled.reps(), initial)?;
    let mut rng = ChaCha8Rng::seed_from_u64(search.seed);
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut start_energies = Vec::with_capacity(search.starts);
    for _ in 0..search.starts {
        let mut theta: Vec<f64> = (0..model.n_params())
            .map(|_| rng.gen_range(-search.spread..=search.spread))
            .collect();
        for _ in 0..search.iterations {
            let (_, grad) = model.energy_and_gradient(&theta)?;
            theta.iter_mut().zip(&grad).for_each(|(t, g)| *t -= search.eta * g);
        }
        let e = model.energy(&theta)?;
        start_energies.push(e);
        if best.as_ref().is_none_or(|(b, _)| e < *b) {
            best = Some((e, theta));
        }
    }
    let (energy, theta) = best.expect("at least one start");
    Ok(AnsatzOptimum {
        energy,
        theta,
        start_energies,
    })
}
