use num_complex::Complex64;
use rand::Rng;

use crate::sim::{Gate, StateVector};

pub(crate) fn random_state(n: usize, rng: &mut impl Rng) -> StateVector {
    let mut amps: Vec<Complex64> = (0..1 << n)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    amps.iter_mut().for_each(|a| *a /= norm);
    StateVector::from_amplitudes(amps).unwrap()
}

pub(crate) fn random_gates(n: usize, count: usize, rng: &mut impl Rng) -> Vec<Gate> {
    (0..count)
        .map(|_| {
            let q = rng.gen_range(0..n);
            let other = (q + rng.gen_range(1..n)) % n;
            let angle = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
            match rng.gen_range(0..7) {
                0 => Gate::Rx { qubit: q, angle },
                1 => Gate::Ry { qubit: q, angle },
                2 => Gate::Rz { qubit: q, angle },
                3 => Gate::H(q),
                4 => Gate::X(q),
                5 => Gate::Cnot {
                    control: q,
                    target: other,
                },
                _ => Gate::Cz(q, other),
            }
        })
        .collect()
}
