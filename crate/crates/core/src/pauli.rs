//! The generalized Pauli basis of `su(2^n)`.
//!
//! Elements are the `4^n - 1` non-identity tensor products of
//! `{1, x, y, z}`, ordered weight-major and then lexicographically in their
//! factors (`1 < x < y < z`, first tensor factor most significant). Penalty
//! matrices index by position in this order, so the order is part of the
//! public contract.
//!
//! Dense matrices are built lazily and cached; expansion coefficients are
//! computed directly from the sparse (monomial) structure of each string.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::linalg::{validate_matrix, CMatrix, Hermitian};

pub const MAX_QUBITS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PauliFactor {
    I,
    X,
    Y,
    Z,
}

impl PauliFactor {
    pub fn symbol(self) -> char {
        match self {
            PauliFactor::I => '1',
            PauliFactor::X => 'x',
            PauliFactor::Y => 'y',
            PauliFactor::Z => 'z',
        }
    }

    pub fn from_symbol(c: char) -> Option<Self> {
        match c {
            '1' | 'i' | 'I' => Some(PauliFactor::I),
            'x' | 'X' => Some(PauliFactor::X),
            'y' | 'Y' => Some(PauliFactor::Y),
            'z' | 'Z' => Some(PauliFactor::Z),
            _ => None,
        }
    }

    fn from_digit(d: usize) -> Self {
        [PauliFactor::I, PauliFactor::X, PauliFactor::Y, PauliFactor::Z][d]
    }

    fn flips(self) -> bool {
        matches!(self, PauliFactor::X | PauliFactor::Y)
    }

    /// Entry `p[row_bit, row_bit ^ flip]`.
    fn value(self, row_bit: usize) -> Complex64 {
        match (self, row_bit) {
            (PauliFactor::I, _) | (PauliFactor::X, _) | (PauliFactor::Z, 0) => Complex64::new(1.0, 0.0),
            (PauliFactor::Z, _) => Complex64::new(-1.0, 0.0),
            (PauliFactor::Y, 0) => Complex64::new(0.0, -1.0),
            (PauliFactor::Y, _) => Complex64::new(0.0, 1.0),
        }
    }
}

/// One generalized Pauli matrix `sigma_I`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    factors: Vec<PauliFactor>,
    index: usize,
    weight: usize,
    flip_mask: usize,
}

impl PauliString {
    /// Parses a label such as `"x1z"`. The index is the label's position in
    /// the basis order and is only meaningful for elements obtained from a
    /// [`PauliBasis`]; parsed strings carry index 0.
    pub fn parse(label: &str) -> Result<Self> {
        let factors: Option<Vec<_>> = label.chars().map(PauliFactor::from_symbol).collect();
        let factors = factors.ok_or_else(|| Error::InvalidParameter(format!("bad Pauli label {label:?}")))?;
        if factors.is_empty() || factors.len() > MAX_QUBITS {
            return Err(Error::QubitCount(factors.len()));
        }
        Self::from_factors(factors, 0)
    }

    fn from_factors(factors: Vec<PauliFactor>, index: usize) -> Result<Self> {
        let weight = factors.iter().filter(|f| **f != PauliFactor::I).count();
        if weight == 0 {
            return Err(Error::InvalidParameter("identity is not a basis element".into()));
        }
        let n = factors.len();
        let flip_mask = factors
            .iter()
            .enumerate()
            .filter(|(_, f)| f.flips())
            .fold(0, |m, (q, _)| m | 1 << (n - 1 - q));
        Ok(Self {
            factors,
            index,
            weight,
            flip_mask,
        })
    }

    pub fn factors(&self) -> &[PauliFactor] {
        &self.factors
    }

    /// 1-based position in the basis order.
    pub fn index(&self) -> usize {
        self.index
    }

    pub fn weight(&self) -> usize {
        self.weight
    }

    pub fn qubits(&self) -> usize {
        self.factors.len()
    }

    pub fn label(&self) -> String {
        self.factors.iter().map(|f| f.symbol()).collect()
    }

    /// The single nonzero entry of row `row`: `(col, sigma[row, col])`.
    pub fn entry(&self, row: usize) -> (usize, Complex64) {
        let n = self.factors.len();
        let value = self
            .factors
            .iter()
            .enumerate()
            .fold(Complex64::new(1.0, 0.0), |acc, (q, f)| {
                acc * f.value((row >> (n - 1 - q)) & 1)
            });
        (row ^ self.flip_mask, value)
    }

    pub fn to_matrix(&self) -> CMatrix {
        let d = 1 << self.factors.len();
        let mut m = CMatrix::zeros(d, d);
        for row in 0..d {
            let (col, v) = self.entry(row);
            m[(row, col)] = v;
        }
        m
    }

    /// `normalized_trace(A sigma)`, computed in `O(d)`.
    pub fn overlap(&self, a: &CMatrix) -> Complex64 {
        let d = a.nrows();
        let mut acc = Complex64::new(0.0, 0.0);
        for r in 0..d {
            let c = r ^ self.flip_mask;
            // sigma[c, r] is the nonzero of row c
            let (_, v) = self.entry(c);
            acc += a[(r, c)] * v;
        }
        acc / d as f64
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Ordered generalized Pauli basis for `n` qubits.
#[derive(Debug)]
pub struct PauliBasis {
    n: usize,
    elements: Vec<PauliString>,
    cache: Vec<OnceLock<CMatrix>>,
}

impl Clone for PauliBasis {
    fn clone(&self) -> Self {
        Self {
            n: self.n,
            elements: self.elements.clone(),
            cache: self.cache.clone(),
        }
    }
}

impl PartialEq for PauliBasis {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
    }
}

/// All `4^n - 1` non-identity Pauli strings in weight-major order.
pub fn generate_basis(n: usize) -> Result<PauliBasis> {
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::QubitCount(n));
    }
    let total = 1usize << (2 * n);
    let mut codes: Vec<(usize, usize)> = (1..total)
        .map(|code| {
            let w = (0..n).filter(|q| (code >> (2 * q)) & 3 != 0).count();
            (w, code)
        })
        .collect();
    codes.sort_unstable();
    let elements = codes
        .into_iter()
        .enumerate()
        .map(|(pos, (_, code))| {
            let factors = (0..n)
                .map(|q| PauliFactor::from_digit((code >> (2 * (n - 1 - q))) & 3))
                .collect();
            PauliString::from_factors(factors, pos + 1).expect("non-identity code")
        })
        .collect::<Vec<_>>();
    let cache = (0..elements.len()).map(|_| OnceLock::new()).collect();
    Ok(PauliBasis { n, elements, cache })
}

/// Number of basis elements of weight `k`: `C(n, k) 3^k`.
pub fn count_weight(n: usize, k: usize) -> Result<usize> {
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::QubitCount(n));
    }
    if k == 0 || k > n {
        return Err(Error::WeightOutOfRange { weight: k, n });
    }
    Ok(binomial(n, k) * 3usize.pow(k as u32))
}

pub(crate) fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

impl PauliBasis {
    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[PauliString] {
        &self.elements
    }

    pub fn element(&self, pos: usize) -> &PauliString {
        &self.elements[pos]
    }

    /// Dense matrix of the element at position `pos` (0-based), cached.
    pub fn matrix(&self, pos: usize) -> &CMatrix {
        self.cache[pos].get_or_init(|| self.elements[pos].to_matrix())
    }

    /// Position of the element with the given label.
    pub fn position(&self, label: &str) -> Option<usize> {
        let p = PauliString::parse(label).ok()?;
        self.elements.iter().position(|e| e.factors == p.factors)
    }

    fn check_dim(&self, a: &CMatrix) -> Result<()> {
        validate_matrix(a)?;
        if a.nrows() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: a.nrows(),
            });
        }
        Ok(())
    }

    /// `sum_I h_I sigma_I`.
    pub fn reconstruct(&self, coeffs: &[f64]) -> Result<Hermitian> {
        if coeffs.len() != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                actual: coeffs.len(),
            });
        }
        let d = self.dim();
        let mut m = CMatrix::zeros(d, d);
        for (e, &h) in self.elements.iter().zip(coeffs) {
            if h == 0.0 {
                continue;
            }
            for row in 0..d {
                let (col, v) = e.entry(row);
                m[(row, col)] += v * h;
            }
        }
        Ok(Hermitian::from_combination(m))
    }
}

/// Coefficients of a Hermitian operator in the Pauli basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Expansion {
    pub coeffs: Vec<f64>,
    /// Normalized trace of the input; the identity component, which is not
    /// part of the basis and is excluded from `coeffs`.
    pub trace_part: f64,
}

impl Expansion {
    /// Number of coefficients with `|h_I| > tol`.
    pub fn support(&self, tol: f64) -> usize {
        self.coeffs.iter().filter(|h| h.abs() > tol).count()
    }
}

/// `h_I = normalized_trace(H sigma_I)` for every basis element.
pub fn expand(h: &Hermitian, basis: &PauliBasis) -> Result<Expansion> {
    basis.check_dim(h.matrix())?;
    Ok(expand_raw(h.matrix(), basis))
}

pub(crate) fn expand_raw(h: &CMatrix, basis: &PauliBasis) -> Expansion {
    let coeffs = basis.elements.iter().map(|e| e.overlap(h).re).collect();
    Expansion {
        coeffs,
        trace_part: crate::linalg::normalized_trace(h).re,
    }
}

/// Column `J` holds the expansion of the `J`-th operator: `H_J = sum_I M_IJ sigma_I`.
pub fn expansion_matrix(noisy_set: &[Hermitian], basis: &PauliBasis) -> Result<DMatrix<f64>> {
    let mut m = DMatrix::zeros(basis.len(), noisy_set.len());
    for (j, h) in noisy_set.iter().enumerate() {
        let e = expand(h, basis)?;
        m.column_mut(j).copy_from_slice(&e.coeffs);
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates;
    use crate::linalg::{frobenius_norm, max_abs, normalized_trace};
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn basis_sizes() {
        assert_eq!(generate_basis(1).unwrap().len(), 3);
        assert_eq!(generate_basis(2).unwrap().len(), 15);
        assert_eq!(generate_basis(3).unwrap().len(), 63);
        assert!(generate_basis(0).is_err());
        assert!(generate_basis(7).is_err());
    }

    #[test]
    fn single_qubit_basis_is_xyz() {
        let b = generate_basis(1).unwrap();
        let labels: Vec<_> = b.elements().iter().map(|e| e.label()).collect();
        assert_eq!(labels, ["x", "y", "z"]);
        assert_eq!(b.matrix(0), gates::pauli_x().matrix());
        assert_eq!(b.matrix(1), gates::pauli_y().matrix());
        assert_eq!(b.matrix(2), gates::pauli_z().matrix());
    }

    #[test]
    fn two_qubit_ordering_is_weight_major() {
        let b = generate_basis(2).unwrap();
        let labels: Vec<_> = b.elements().iter().map(|e| e.label()).collect();
        assert_eq!(
            labels,
            ["1x", "1y", "1z", "x1", "y1", "z1", "xx", "xy", "xz", "yx", "yy", "yz", "zx", "zy", "zz"]
        );
        assert!(b.elements().iter().enumerate().all(|(p, e)| e.index() == p + 1));
    }

    #[test]
    fn tensor_order_first_factor_most_significant() {
        let b = generate_basis(2).unwrap();
        let xz = b.matrix(b.position("xz").unwrap());
        let kron = gates::pauli_x().matrix().kronecker(gates::pauli_z().matrix());
        assert_eq!(*xz, kron);
    }

    #[test]
    fn weight_counts() {
        assert_eq!(count_weight(2, 1).unwrap(), 6);
        assert_eq!(count_weight(2, 2).unwrap(), 9);
        assert_eq!(count_weight(1, 1).unwrap(), 3);
        assert!(count_weight(2, 0).is_err());
        assert!(count_weight(2, 3).is_err());
        for n in 1..=6 {
            let total: usize = (1..=n).map(|k| count_weight(n, k).unwrap()).sum();
            assert_eq!(total, 4usize.pow(n as u32) - 1);
        }
    }

    #[test]
    fn weight_histogram_matches_count() {
        for n in 1..=4 {
            let b = generate_basis(n).unwrap();
            for k in 1..=n {
                let got = b.elements().iter().filter(|e| e.weight() == k).count();
                assert_eq!(got, count_weight(n, k).unwrap(), "n={n} k={k}");
            }
        }
    }

    #[test]
    fn orthonormal_exhaustive_up_to_three_qubits() {
        for n in 1..=3 {
            let b = generate_basis(n).unwrap();
            for i in 0..b.len() {
                for j in 0..b.len() {
                    let t = normalized_trace(&(b.matrix(i) * b.matrix(j)));
                    let expected = if i == j { 1.0 } else { 0.0 };
                    assert!((t.re - expected).abs() < 1e-12 && t.im.abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn overlap_agrees_with_dense_trace() {
        let b = generate_basis(2).unwrap();
        let a = b.matrix(4) * b.matrix(9) + b.matrix(13);
        for i in 0..b.len() {
            let dense = normalized_trace(&(&a * b.matrix(i)));
            assert!((dense - b.element(i).overlap(&a)).norm() < 1e-14);
        }
    }

    #[test]
    fn ordering_golden_hash() {
        // FNV-1a over the concatenated labels of n = 3
        let b = generate_basis(3).unwrap();
        let mut hash: u64 = 0xcbf29ce484222325;
        for e in b.elements() {
            for byte in e.label().bytes().chain(std::iter::once(b',')) {
                hash ^= byte as u64;
                hash = hash.wrapping_mul(0x100000001b3);
            }
        }
        let again = generate_basis(3).unwrap();
        assert_eq!(b.elements(), again.elements());
        assert_eq!(hash, GOLDEN_N3);
    }

    const GOLDEN_N3: u64 = 0xcc0e_4cbf_332d_4d76;

    #[test]
    fn expand_examples() {
        let b = generate_basis(1).unwrap();
        assert_eq!(expand(&gates::pauli_x(), &b).unwrap().coeffs, vec![1.0, 0.0, 0.0]);
        let h = Hermitian::new(
            (gates::pauli_x().matrix() + gates::pauli_z().matrix()) * Complex64::new(FRAC_1_SQRT_2, 0.0),
        )
        .unwrap();
        let e = expand(&h, &b).unwrap();
        assert!((e.coeffs[0] - FRAC_1_SQRT_2).abs() < 1e-15);
        assert_eq!(e.coeffs[1], 0.0);
        assert!((e.coeffs[2] - FRAC_1_SQRT_2).abs() < 1e-15);
        assert_eq!(e.trace_part, 0.0);
    }

    #[test]
    fn expand_reports_trace_part() {
        let b = generate_basis(1).unwrap();
        let h =
            Hermitian::new(crate::linalg::identity(2) * Complex64::new(0.5, 0.0) + gates::pauli_y().matrix()).unwrap();
        let e = expand(&h, &b).unwrap();
        assert_eq!(e.trace_part, 0.5);
        assert_eq!(e.coeffs, vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn expand_dimension_mismatch() {
        let b = generate_basis(2).unwrap();
        assert!(matches!(
            expand(&gates::pauli_x(), &b),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn expansion_matrix_examples() {
        let b = generate_basis(1).unwrap();
        let ident = expansion_matrix(&[gates::pauli_x(), gates::pauli_y(), gates::pauli_z()], &b).unwrap();
        assert_eq!(ident, DMatrix::identity(3, 3));
        let fig2 = expansion_matrix(&[gates::pauli_x(), gates::pauli_x()], &b).unwrap();
        assert_eq!(fig2, DMatrix::from_column_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0]));
    }

    #[test]
    fn reconstruct_inverts_expand() {
        let b = generate_basis(2).unwrap();
        let coeffs: Vec<f64> = (0..15).map(|i| ((i * 7 % 11) as f64 - 5.0) / 3.0).collect();
        let h = b.reconstruct(&coeffs).unwrap();
        let back = expand(&h, &b).unwrap();
        for (a, c) in back.coeffs.iter().zip(&coeffs) {
            assert!((a - c).abs() < 1e-14);
        }
        let h2 = b.reconstruct(&back.coeffs).unwrap();
        assert!(max_abs(&(h.matrix() - h2.matrix())) < 1e-14);
        // Parseval
        let sum_sq: f64 = coeffs.iter().map(|c| c * c).sum();
        assert!((frobenius_norm(h.matrix()).powi(2) - sum_sq).abs() < 1e-12);
    }

    #[test]
    fn parse_labels() {
        let p = PauliString::parse("x1z").unwrap();
        assert_eq!(p.weight(), 2);
        assert_eq!(p.qubits(), 3);
        assert!(PauliString::parse("11").is_err());
        assert!(PauliString::parse("xq").is_err());
    }
}
