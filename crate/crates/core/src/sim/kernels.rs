//! In-place amplitude kernels addressed by bit position.
//!
//! Density matrices reuse these by treating `rho[(r << n) | c]` as a
//! 2n-qubit vector: row qubit `q` lives at bit `q + n`, column qubit `q` at bit `q`.

use num_complex::Complex64;

use super::gate::Mat2;

pub(crate) fn apply_1q(amps: &mut [Complex64], bit: usize, m: &Mat2) {
    let stride = 1usize << bit;
    let len = amps.len();
    let mut base = 0;
    while base < len {
        for i in base..base + stride {
            let j = i + stride;
            let a = amps[i];
            let b = amps[j];
            amps[i] = m[0][0] * a + m[0][1] * b;
            amps[j] = m[1][0] * a + m[1][1] * b;
        }
        base += stride << 1;
    }
}

pub(crate) fn apply_cnot(amps: &mut [Complex64], control: usize, target: usize) {
    let cmask = 1usize << control;
    let tmask = 1usize << target;
    for i in 0..amps.len() {
        if i & cmask != 0 && i & tmask == 0 {
            amps.swap(i, i | tmask);
        }
    }
}

pub(crate) fn apply_cz(amps: &mut [Complex64], a: usize, b: usize) {
    let mask = (1usize << a) | (1usize << b);
    for (i, amp) in amps.iter_mut().enumerate() {
        if i & mask == mask {
            *amp = -*amp;
        }
    }
}

pub(crate) fn conj(m: &Mat2) -> Mat2 {
    [[m[0][0].conj(), m[0][1].conj()], [m[1][0].conj(), m[1][1].conj()]]
}
