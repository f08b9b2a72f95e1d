//! Dense complex matrix algebra for `d = 2^n` dimensional operators.
//!
//! Matrices are stored as [`CMatrix`] (an `nalgebra` dynamic matrix of
//! `Complex64`). Two validated wrappers carry the invariants the rest of the
//! crate relies on: [`Hermitian`] for generators and [`Unitary`] for
//! propagators.
//!
//! Traces and Frobenius norms are normalized so that the identity has unit
//! trace and unit norm, whatever the dimension.

use nalgebra::linalg::{Schur, SymmetricEigen};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Relative Hermiticity tolerance on the max-entry norm.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Max-entry tolerance on `U^dagger U - I`.
pub const UNITARY_TOL: f64 = 1e-9;

const MAX_QUBITS: usize = 6;
const PHASE_TOL: f64 = 1e-10;
const BRANCH_TOL: f64 = 1e-9;

/// Number of qubits for a `dim x dim` operator, or an error if `dim` is not
/// a power of two in range.
pub fn qubits_for_dim(dim: usize) -> Result<usize> {
    if dim < 2 || !dim.is_power_of_two() {
        return Err(Error::InvalidDimension(dim));
    }
    let n = dim.trailing_zeros() as usize;
    if n > MAX_QUBITS {
        return Err(Error::InvalidDimension(dim));
    }
    Ok(n)
}

/// Checks the general matrix invariants and returns the qubit count.
pub fn validate_matrix(a: &CMatrix) -> Result<usize> {
    if a.nrows() != a.ncols() {
        return Err(Error::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    let n = qubits_for_dim(a.nrows())?;
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(n)
}

/// Largest entry modulus.
pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// `(1/d) * sum_i A_ii`.
pub fn normalized_trace(a: &CMatrix) -> Complex64 {
    let d = a.nrows().max(1);
    a.trace() / d as f64
}

/// `sqrt(normalized_trace(A^dagger A))`.
pub fn frobenius_norm(a: &CMatrix) -> f64 {
    let d = a.nrows().max(1) as f64;
    (a.iter().map(|z| z.norm_sqr()).sum::<f64>() / d).sqrt()
}

/// Largest singular value.
pub fn operator_norm(a: &CMatrix) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .fold(0.0, f64::max)
}

/// `max |U^dagger U - I|` over entries.
pub fn unitarity_deviation(u: &CMatrix) -> f64 {
    let mut p = u.adjoint() * u;
    for i in 0..p.nrows() {
        p[(i, i)] -= Complex64::new(1.0, 0.0);
    }
    max_abs(&p)
}

fn hermiticity_deviation(a: &CMatrix) -> f64 {
    let mut dev: f64 = 0.0;
    for i in 0..a.nrows() {
        for j in i..a.ncols() {
            dev = dev.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    dev
}

/// A validated Hermitian operator on `n` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct Hermitian(CMatrix);

impl Hermitian {
    pub fn new(m: CMatrix) -> Result<Self> {
        validate_matrix(&m)?;
        let dev = hermiticity_deviation(&m);
        if dev > HERMITIAN_TOL * max_abs(&m) {
            return Err(Error::NotHermitian { deviation: dev });
        }
        Ok(Self(m))
    }

    /// Wraps a matrix known to be Hermitian by construction (a real linear
    /// combination of Hermitian matrices).
    pub(crate) fn from_combination(m: CMatrix) -> Self {
        debug_assert!(hermiticity_deviation(&m) <= 1e-9 * max_abs(&m).max(1.0));
        Self(m)
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        qubits_for_dim(dim)?;
        Ok(Self(CMatrix::zeros(dim, dim)))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn qubits(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn normalized_trace(&self) -> f64 {
        normalized_trace(&self.0).re
    }

    pub fn is_traceless(&self, tol: f64) -> bool {
        self.normalized_trace().abs() <= tol
    }

    /// Real linear combination `sum_k c_k A_k` of operators of equal size.
    pub fn combination<'a, I>(dim: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (f64, &'a Hermitian)>,
    {
        let mut acc = CMatrix::zeros(dim, dim);
        for (c, h) in terms {
            if c != 0.0 {
                acc.zip_apply(&h.0, |a, b| *a += b * c);
            }
        }
        Self(acc)
    }
}

impl TryFrom<CMatrix> for Hermitian {
    type Error = Error;
    fn try_from(m: CMatrix) -> Result<Self> {
        Self::new(m)
    }
}

impl From<Hermitian> for CMatrix {
    fn from(h: Hermitian) -> Self {
        h.0
    }
}

/// A validated unitary operator on `n` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct Unitary(CMatrix);

impl Unitary {
    pub fn new(m: CMatrix) -> Result<Self> {
        validate_matrix(&m)?;
        let dev = unitarity_deviation(&m);
        if dev > UNITARY_TOL {
            return Err(Error::NotUnitary { deviation: dev });
        }
        Ok(Self(m))
    }

    pub(crate) fn from_trusted(m: CMatrix) -> Self {
        Self(m)
    }

    pub fn identity(dim: usize) -> Result<Self> {
        qubits_for_dim(dim)?;
        Ok(Self(identity(dim)))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn qubits(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn adjoint(&self) -> Unitary {
        Unitary(self.0.adjoint())
    }

    /// Product `self * rhs`.
    pub fn compose(&self, rhs: &Unitary) -> Unitary {
        Unitary(&self.0 * &rhs.0)
    }

    pub fn with_phase(&self, phi: f64) -> Unitary {
        Unitary(&self.0 * Complex64::from_polar(1.0, phi))
    }

    pub fn deviation(&self) -> f64 {
        unitarity_deviation(&self.0)
    }
}

impl TryFrom<CMatrix> for Unitary {
    type Error = Error;
    fn try_from(m: CMatrix) -> Result<Self> {
        Self::new(m)
    }
}

impl From<Unitary> for CMatrix {
    fn from(u: Unitary) -> Self {
        u.0
    }
}

/// `exp(-i H t)` via the spectral decomposition of `H`.
pub fn expm_neg_i(h: &Hermitian, t: f64) -> Result<Unitary> {
    if !t.is_finite() {
        return Err(Error::InvalidParameter(format!("time step {t} is not finite")));
    }
    Ok(Unitary(expm_neg_i_raw(&h.0, t)))
}

pub(crate) fn expm_neg_i_raw(h: &CMatrix, t: f64) -> CMatrix {
    if h.nrows() == 2 {
        return expm_neg_i_2x2(h, t);
    }
    let eig = SymmetricEigen::new(h.clone());
    let v = &eig.eigenvectors;
    let mut scaled = v.clone();
    for (j, lambda) in eig.eigenvalues.iter().enumerate() {
        let phase = Complex64::from_polar(1.0, -lambda * t);
        scaled.column_mut(j).iter_mut().for_each(|z| *z *= phase);
    }
    scaled * v.adjoint()
}

/// Closed-form spectral exponential for `H = a0 I + a . sigma`.
fn expm_neg_i_2x2(h: &CMatrix, t: f64) -> CMatrix {
    let a0 = 0.5 * (h[(0, 0)].re + h[(1, 1)].re);
    let az = 0.5 * (h[(0, 0)].re - h[(1, 1)].re);
    let off = 0.5 * (h[(0, 1)] + h[(1, 0)].conj());
    let (ax, ay) = (off.re, -off.im);
    let r = (ax * ax + ay * ay + az * az).sqrt();
    let c = (r * t).cos();
    // sin(r t) / r, continuous at r = 0
    let s = if r * t.abs() < 1e-8 {
        t * (1.0 - (r * t).powi(2) / 6.0)
    } else {
        (r * t).sin() / r
    };
    let g = Complex64::from_polar(1.0, -a0 * t);
    let i = Complex64::i();
    let m00 = Complex64::new(c, 0.0) - i * s * az;
    let m11 = Complex64::new(c, 0.0) + i * s * az;
    let m01 = -i * s * Complex64::new(ax, -ay);
    let m10 = -i * s * Complex64::new(ax, ay);
    CMatrix::from_row_slice(2, 2, &[g * m00, g * m01, g * m10, g * m11])
}

fn check_same_dim(u: &CMatrix, v: &CMatrix) -> Result<()> {
    if u.nrows() != v.nrows() {
        return Err(Error::DimensionMismatch {
            expected: u.nrows(),
            actual: v.nrows(),
        });
    }
    Ok(())
}

/// Max entrywise distance between two unitaries, optionally minimized over a
/// global phase applied to `u`.
pub fn sup_distance(u: &Unitary, v: &Unitary, phase_invariant: bool) -> Result<f64> {
    check_same_dim(&u.0, &v.0)?;
    Ok(sup_distance_raw(&u.0, &v.0, phase_invariant))
}

fn max_sq_with_phase(u: &CMatrix, v: &CMatrix, phi: f64) -> f64 {
    let p = Complex64::from_polar(1.0, phi);
    u.iter()
        .zip(v.iter())
        .map(|(a, b)| (p * a - b).norm_sqr())
        .fold(0.0, f64::max)
}

pub(crate) fn sup_distance_raw(u: &CMatrix, v: &CMatrix, phase_invariant: bool) -> f64 {
    if !phase_invariant {
        return u
            .iter()
            .zip(v.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .fold(0.0, f64::max)
            .sqrt();
    }
    // tr(V^dagger U) = sum conj(v_ij) u_ij
    let overlap: Complex64 = u.iter().zip(v.iter()).map(|(a, b)| b.conj() * a).sum();
    let phi_star = if overlap.norm() > 0.0 { -overlap.arg() } else { 0.0 };
    let f = |phi: f64| max_sq_with_phase(u, v, phi);
    let best_star = f(phi_star);
    let (_, val) = golden_section(f, phi_star - FRAC_PI_2, phi_star + FRAC_PI_2, PHASE_TOL);
    best_star.min(val).sqrt()
}

/// Golden-section minimization on `[a, b]`; returns `(argmin, min)`.
pub(crate) fn golden_section<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

const SCHUR_MAX_ITER: usize = 10_000;
const GENERIC_MIX: f64 = 0.577_215_664_901_532_9;

/// Result of a Killing (bi-invariant) geodesic distance evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KillingDistance {
    pub distance: f64,
    /// Set when some eigenphase of `U^dagger V` sits on the branch cut at
    /// `pi`, where the principal logarithm is not unique.
    pub branch_ambiguous: bool,
}

/// Eigenphases of a unitary, folded to `(-pi, pi]`.
pub fn eigenphases(w: &CMatrix) -> Vec<f64> {
    let eig = Schur::try_new(w.clone(), f64::EPSILON, SCHUR_MAX_ITER)
        .and_then(|s| s.eigenvalues())
        .map(|e| e.iter().copied().collect())
        .unwrap_or_else(|| normal_eigenvalues(w));
    eig.iter().map(|z| fold_phase(z.arg())).collect()
}

/// Eigenvalues of a normal matrix as Rayleigh quotients on the eigenvectors
/// of a generic Hermitian combination of its Hermitian and skew parts.
fn normal_eigenvalues(w: &CMatrix) -> Vec<Complex64> {
    let adj = w.adjoint();
    let herm = (w + &adj) * Complex64::new(0.5, 0.0);
    let skew = (w - &adj) * Complex64::new(0.0, -0.5);
    let mix = herm + skew * Complex64::new(GENERIC_MIX, 0.0);
    let vecs = SymmetricEigen::new(mix).eigenvectors;
    vecs.column_iter().map(|v| (v.adjoint() * w * v)[(0, 0)]).collect()
}

/// Folds an angle into `(-pi, pi]`.
pub fn fold_phase(theta: f64) -> f64 {
    let mut t = theta.rem_euclid(2.0 * PI);
    if t > PI {
        t -= 2.0 * PI;
    }
    t
}

/// Normalized Frobenius norm of the principal logarithm of `U^dagger V`.
pub fn killing_geodesic_distance(u: &Unitary, v: &Unitary) -> Result<KillingDistance> {
    check_same_dim(&u.0, &v.0)?;
    let w = u.0.adjoint() * &v.0;
    let phases = eigenphases(&w);
    let branch_ambiguous = phases.iter().any(|t| (t.abs() - PI).abs() < BRANCH_TOL);
    let mean_sq = phases.iter().map(|t| t * t).sum::<f64>() / phases.len() as f64;
    Ok(KillingDistance {
        distance: mean_sq.sqrt(),
        branch_ambiguous,
    })
}

/// Killing distance from `u` to the closest global-phase representative of
/// `v`, i.e. `min_phi s(u, e^{i phi} v)`.
pub fn killing_distance_mod_phase(u: &Unitary, v: &Unitary) -> Result<f64> {
    check_same_dim(&u.0, &v.0)?;
    let w = u.0.adjoint() * &v.0;
    let mut phases = eigenphases(&w);
    phases.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let d = phases.len();
    let cost = |phi: f64| (phases.iter().map(|t| fold_phase(t + phi).powi(2)).sum::<f64>() / d as f64).sqrt();
    // Each cut of the circle between consecutive phases gives one branch
    // assignment; its optimum is minus the unwrapped mean.
    let mut best = f64::INFINITY;
    for cut in 0..d {
        let mean = (0..d)
            .map(|k| {
                let idx = (cut + k) % d;
                if idx < cut {
                    phases[idx] + 2.0 * PI
                } else {
                    phases[idx]
                }
            })
            .sum::<f64>()
            / d as f64;
        best = best.min(cost(-mean));
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn qubit_count_from_dimension() {
        assert_eq!(qubits_for_dim(2).unwrap(), 1);
        assert_eq!(qubits_for_dim(64).unwrap(), 6);
        assert!(qubits_for_dim(1).is_err());
        assert!(qubits_for_dim(3).is_err());
        assert!(qubits_for_dim(128).is_err());
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert!(matches!(Hermitian::new(m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn rejects_non_finite() {
        let m = CMatrix::from_element(2, 2, c(f64::NAN, 0.0));
        assert_eq!(Hermitian::new(m), Err(Error::NonFinite));
    }

    #[test]
    fn expm_zero_generator_is_identity() {
        let z = Hermitian::zeros(4).unwrap();
        let u = expm_neg_i(&z, 5.0).unwrap();
        assert!(max_abs(&(u.matrix() - identity(4))) < 1e-15);
    }

    #[test]
    fn expm_pauli_x_quarter_turn() {
        // exp(-i theta X) = cos(theta) I - i sin(theta) X at theta = pi/2
        let u = expm_neg_i(&gates::pauli_x(), FRAC_PI_2).unwrap();
        let expected = gates::pauli_x().matrix() * c(0.0, -1.0);
        assert!(max_abs(&(u.matrix() - expected)) < 1e-15);
    }

    #[test]
    fn expm_pauli_z_half_turn() {
        let u = expm_neg_i(&gates::pauli_z(), PI).unwrap();
        assert!(max_abs(&(u.matrix() + identity(2))) < 1e-15);
    }

    #[test]
    fn expm_rejects_non_finite_time() {
        assert!(expm_neg_i(&gates::pauli_z(), f64::INFINITY).is_err());
    }

    #[test]
    fn two_by_two_fast_path_matches_eigendecomposition() {
        let h = CMatrix::from_row_slice(2, 2, &[c(0.3, 0.0), c(0.2, -0.7), c(0.2, 0.7), c(-1.1, 0.0)]);
        let fast = expm_neg_i_2x2(&h, 0.83);
        let eig = SymmetricEigen::new(h.clone());
        let d = CMatrix::from_diagonal(&eig.eigenvalues.map(|l| Complex64::from_polar(1.0, -l * 0.83)));
        let slow = &eig.eigenvectors * d * eig.eigenvectors.adjoint();
        assert!(max_abs(&(fast - slow)) < 1e-14);
    }

    #[test]
    fn normalized_trace_examples() {
        assert!((normalized_trace(&identity(8)) - c(1.0, 0.0)).norm() < 1e-15);
        assert!(normalized_trace(gates::pauli_x().matrix()).norm() < 1e-15);
        let zz = gates::pauli_z().matrix() * gates::pauli_z().matrix();
        assert!((normalized_trace(&zz) - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn frobenius_examples() {
        assert_eq!(frobenius_norm(&CMatrix::zeros(2, 2)), 0.0);
        assert!((frobenius_norm(&identity(16)) - 1.0).abs() < 1e-15);
        assert!((frobenius_norm(gates::pauli_x().matrix()) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sup_distance_examples() {
        let x = Unitary::new(gates::pauli_x().into_matrix()).unwrap();
        let i2 = Unitary::identity(2).unwrap();
        assert_eq!(sup_distance(&x, &x, false).unwrap(), 0.0);
        assert!((sup_distance(&x, &i2, false).unwrap() - 1.0).abs() < 1e-15);
        let h = gates::hadamard();
        let shifted = h.with_phase(2.1);
        assert!(sup_distance(&shifted, &h, true).unwrap() <= 1e-9);
        assert!(sup_distance(&shifted, &h, false).unwrap() > 0.5);
    }

    #[test]
    fn sup_distance_dimension_mismatch() {
        let a = Unitary::identity(2).unwrap();
        let b = Unitary::identity(4).unwrap();
        assert!(matches!(
            sup_distance(&a, &b, false),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(killing_geodesic_distance(&a, &b).is_err());
    }

    #[test]
    fn killing_distance_examples() {
        let i2 = Unitary::identity(2).unwrap();
        let r = expm_neg_i(&gates::pauli_z(), 0.3).unwrap();
        let k = killing_geodesic_distance(&i2, &r).unwrap();
        assert!((k.distance - 0.3).abs() < 1e-12);
        assert!(!k.branch_ambiguous);
        assert!(killing_geodesic_distance(&r, &r).unwrap().distance < 1e-12);
    }

    #[test]
    fn killing_distance_flags_branch_cut() {
        // Hadamard has eigenvalues +1 and -1
        let k = killing_geodesic_distance(&Unitary::identity(2).unwrap(), &gates::hadamard()).unwrap();
        assert!(k.branch_ambiguous);
        assert!((k.distance - PI / 2f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn killing_mod_phase_for_hadamard() {
        // closest representative is -iH = exp(-i pi/2 n.sigma)
        let d = killing_distance_mod_phase(&Unitary::identity(2).unwrap(), &gates::hadamard()).unwrap();
        assert!((d - FRAC_PI_2).abs() < 1e-9);
    }

    #[test]
    fn operator_norm_of_pauli_sum() {
        let s = gates::pauli_x().matrix() + gates::pauli_z().matrix();
        assert!((operator_norm(&s) - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn normal_eigenvalues_match_schur() {
        let h = Hermitian::new(CMatrix::from_fn(4, 4, |i, j| {
            let (a, b) = (i.min(j) as f64, i.max(j) as f64);
            let im = if i < j { 0.3 * (a - b) } else { 0.3 * (b - a) };
            c(0.7 * a - 0.2 * b + if i == j { a * a } else { 0.0 }, im)
        }))
        .unwrap();
        let u = expm_neg_i(&h, 0.9).unwrap();
        let mut fast: Vec<f64> = normal_eigenvalues(u.matrix()).iter().map(|z| z.arg()).collect();
        let mut schur: Vec<f64> = Schur::new(u.matrix().clone())
            .eigenvalues()
            .unwrap()
            .iter()
            .map(|z| z.arg())
            .collect();
        fast.sort_by(f64::total_cmp);
        schur.sort_by(f64::total_cmp);
        for (a, b) in fast.iter().zip(&schur) {
            assert!((a - b).abs() < 1e-12, "{fast:?} vs {schur:?}");
        }
    }
}
