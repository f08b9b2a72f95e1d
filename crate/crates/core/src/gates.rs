//! Named single-qubit operators and the standard gate targets.

use num_complex::Complex64;
use std::f64::consts::FRAC_1_SQRT_2;

use crate::linalg::{CMatrix, Hermitian, Unitary};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn pauli_x() -> Hermitian {
    Hermitian::from_combination(CMatrix::from_row_slice(
        2,
        2,
        &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
    ))
}

pub fn pauli_y() -> Hermitian {
    Hermitian::from_combination(CMatrix::from_row_slice(
        2,
        2,
        &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)],
    ))
}

pub fn pauli_z() -> Hermitian {
    Hermitian::from_combination(CMatrix::from_row_slice(
        2,
        2,
        &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)],
    ))
}

pub fn hadamard() -> Unitary {
    let s = FRAC_1_SQRT_2;
    Unitary::from_trusted(CMatrix::from_row_slice(
        2,
        2,
        &[c(s, 0.0), c(s, 0.0), c(s, 0.0), c(-s, 0.0)],
    ))
}

/// The Pauli X gate as a unitary.
pub fn x_gate() -> Unitary {
    Unitary::from_trusted(pauli_x().into_matrix())
}
