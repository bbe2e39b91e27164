use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::density::DensityMatrix;
use super::gate::Mat2;
use crate::{Error, Result};

/// Depolarization strength. `gamma` is the ratio of gate time to coherence
/// time; the channel uses the damping `1 - exp(-gamma)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    gamma: f64,
    damping: f64,
}

impl NoiseModel {
    pub fn new(gamma: f64) -> Result<Self> {
        if !gamma.is_finite() || gamma < 0.0 {
            return Err(Error::input(format!(
                "noise rate gamma = {gamma} must be finite and >= 0"
            )));
        }
        Ok(NoiseModel {
            gamma,
            damping: 1.0 - (-gamma).exp(),
        })
    }

    /// Builds the model from the damping directly; requires `0 <= damping < 1`.
    pub fn from_damping(damping: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&damping) {
            return Err(Error::input(format!("damping {damping} outside [0, 1)")));
        }
        Ok(NoiseModel {
            gamma: -(1.0 - damping).ln(),
            damping,
        })
    }

    pub fn noiseless() -> Self {
        NoiseModel {
            gamma: 0.0,
            damping: 0.0,
        }
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn damping(&self) -> f64 {
        self.damping
    }

    pub fn channel(&self) -> DepolarizingChannel {
        DepolarizingChannel::new(self.damping).expect("damping of a valid model is in [0, 1)")
    }
}

/// Single-qubit depolarizing channel with Kraus operators
/// `sqrt(1 - 3D/4) I` and `sqrt(D)/2 sigma_i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepolarizingChannel {
    kraus: [Mat2; 4],
}

impl DepolarizingChannel {
    /// Accepts the closed interval `[0, 1]`; `1` is the fully depolarizing limit.
    pub fn new(damping: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&damping) {
            return Err(Error::input(format!("damping {damping} outside [0, 1]")));
        }
        let z = Complex64::new(0.0, 0.0);
        let k0 = (1.0 - 0.75 * damping).sqrt();
        let ki = damping.sqrt() / 2.0;
        let re = |v: f64| Complex64::new(v, 0.0);
        let im = |v: f64| Complex64::new(0.0, v);
        Ok(DepolarizingChannel {
            kraus: [
                [[re(k0), z], [z, re(k0)]],
                [[z, re(ki)], [re(ki), z]],
                [[z, im(-ki)], [im(ki), z]],
                [[re(ki), z], [z, re(-ki)]],
            ],
        })
    }

    pub fn kraus(&self) -> &[Mat2; 4] {
        &self.kraus
    }

    /// `sum_k K_k^dagger K_k`, which is the identity for a trace-preserving channel.
    pub fn completeness(&self) -> Mat2 {
        let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
        for k in &self.kraus {
            for (i, row) in out.iter_mut().enumerate() {
                for (j, v) in row.iter_mut().enumerate() {
                    *v += (0..2).map(|a| k[a][i].conj() * k[a][j]).sum::<Complex64>();
                }
            }
        }
        out
    }

    pub fn apply(&self, rho: &mut DensityMatrix, qubit: usize) {
        rho.apply_kraus(qubit, &self.kraus);
    }
}

/// Applies the channel independently to every qubit.
pub fn depolarize_all(rho: &mut DensityMatrix, noise: &NoiseModel) {
    if noise.damping == 0.0 {
        return;
    }
    let channel = noise.channel();
    for q in 0..rho.n_qubits() {
        channel.apply(rho, q);
    }
}
