//! Error bounds for three path approximations: pruning expensive directions,
//! replacing each short step by the exponential of its average generator,
//! and trotterizing that exponential term by term.
//!
//! Distances are Killing geodesic distances. Averaging steps are cut at
//! equal Killing arc length `delta`, so on each step the generator has unit
//! normalized Frobenius norm in the arc-length parametrization.

use serde::{Deserialize, Serialize};

use crate::dynamics::{effective_hamiltonian, step_pieces, ControlSchedule, HamiltonianSet};
use crate::error::{Error, Result};
use crate::linalg::{
    commutator, expm_neg_i_raw, frobenius_norm, identity, killing_geodesic_distance, CMatrix, Hermitian, Unitary,
};
use crate::metrics::PenaltyMatrix;
use crate::noise::NoiseRealization;
use crate::pauli::{expand_raw, PauliBasis};

/// Coefficients kept after pruning and how many of them are nonzero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pruned {
    pub coeffs: Vec<f64>,
    pub retained: usize,
}

/// Keeps `h_I` where `I_II < cutoff` and zeroes the rest.
pub fn prune(h: &[f64], penalty: &PenaltyMatrix, cutoff: f64) -> Result<Pruned> {
    check_cutoff(cutoff)?;
    if h.len() != penalty.len() {
        return Err(Error::LengthMismatch {
            expected: penalty.len(),
            actual: h.len(),
        });
    }
    let coeffs: Vec<f64> = h
        .iter()
        .zip(penalty.diag())
        .map(|(&c, &w)| if w < cutoff { c } else { 0.0 })
        .collect();
    let retained = coeffs.iter().filter(|c| **c != 0.0).count();
    Ok(Pruned { coeffs, retained })
}

fn check_cutoff(cutoff: f64) -> Result<()> {
    if cutoff > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("cutoff = {cutoff} must be > 0")))
    }
}

/// `sum_k Gamma_k dt / sqrt(cutoff)`.
pub fn pruning_bound(gamma_path: &[f64], dt: f64, cutoff: f64) -> Result<f64> {
    let pieces: Vec<(f64, f64)> = gamma_path.iter().map(|&g| (g, dt)).collect();
    pruning_bound_pieces(&pieces, cutoff)
}

/// Pruning bound for `(Gamma, duration)` pieces of unequal length.
pub fn pruning_bound_pieces(pieces: &[(f64, f64)], cutoff: f64) -> Result<f64> {
    check_cutoff(cutoff)?;
    if let Some((g, t)) = pieces
        .iter()
        .find(|(g, t)| g.is_nan() || t.is_nan() || *g < 0.0 || *t < 0.0)
    {
        return Err(Error::InvalidParameter(format!(
            "Gamma = {g} and duration = {t} must be >= 0"
        )));
    }
    if cutoff.is_infinite() {
        return Ok(0.0);
    }
    Ok(pieces.iter().map(|(g, t)| g * t).sum::<f64>() / cutoff.sqrt())
}

/// `pi sqrt(N) delta^2`, valid for `delta < N^(-1/2)`.
pub fn averaging_bound(n_active: usize, delta: f64) -> Result<f64> {
    if delta.is_nan() || delta < 0.0 {
        return Err(Error::InvalidParameter(format!("delta = {delta} must be >= 0")));
    }
    let root = (n_active as f64).sqrt();
    if delta * root >= 1.0 {
        return Err(Error::BoundPrecondition(format!(
            "delta = {delta} is not below N^(-1/2) = {} for N = {n_active}",
            1.0 / root
        )));
    }
    Ok(std::f64::consts::PI * root * delta * delta)
}

/// Leading trotter error `|1/2 sum_I sum_{J<I} [H_I, H_J]|_F delta^2`.
pub fn trotter_leading(terms: &[Hermitian], delta: f64) -> Result<f64> {
    let Some(first) = terms.first() else {
        return Ok(0.0);
    };
    let dim = first.dim();
    let mut acc = CMatrix::zeros(dim, dim);
    for (i, hi) in terms.iter().enumerate() {
        if hi.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: hi.dim(),
            });
        }
        for hj in &terms[..i] {
            acc += commutator(hi.matrix(), hj.matrix());
        }
    }
    Ok(0.5 * frobenius_norm(&acc) * delta * delta)
}

/// The three bounds with the parameters they were evaluated at.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub pruning_bound: f64,
    /// Sum of per-step bounds; absent unless every step meets the
    /// precondition.
    pub averaging_bound: Option<f64>,
    /// Sum of per-step leading terms.
    pub trotter_leading: f64,
    pub params: BoundParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub cutoff: f64,
    /// Killing length of one averaging step.
    pub delta: f64,
    /// Largest per-step count of nonzero retained Pauli coefficients.
    pub n_active: usize,
    pub steps: usize,
    /// Killing length of the pruned path.
    pub total_length: f64,
}

/// One averaging/trotter step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepCheck {
    pub n_active: usize,
    pub averaging_error: f64,
    /// `None` when `delta >= N^(-1/2)` on this step.
    pub averaging_bound: Option<f64>,
    pub trotter_error: f64,
    pub trotter_leading: f64,
}

impl StepCheck {
    pub fn averaging_holds(&self) -> Option<bool> {
        self.averaging_bound.map(|b| self.averaging_error <= b)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalCheck {
    pub report: BoundReport,
    /// Killing distance between full and pruned endpoints.
    pub pruning_error: f64,
    /// Killing distance between pruned and averaged endpoints.
    pub averaging_error: f64,
    /// Killing distance between averaged and trotterized endpoints.
    pub trotter_error: f64,
    pub per_step: Vec<StepCheck>,
}

impl EmpiricalCheck {
    pub fn pruning_holds(&self) -> bool {
        self.pruning_error <= self.report.pruning_bound
    }

    /// Steps whose averaging error exceeds a valid bound.
    pub fn averaging_violations(&self) -> usize {
        self.per_step
            .iter()
            .filter(|s| s.averaging_holds() == Some(false))
            .count()
    }

    /// Steps where the averaging bound is not applicable.
    pub fn averaging_skipped(&self) -> usize {
        self.per_step.iter().filter(|s| s.averaging_bound.is_none()).count()
    }
}

/// Constant generator `sum_I c_I sigma_I` applied for `duration`.
#[derive(Debug, Clone)]
struct Piece {
    duration: f64,
    coeffs: Vec<f64>,
}

fn generator(basis: &PauliBasis, coeffs: &[f64]) -> CMatrix {
    basis.reconstruct(coeffs).expect("basis-sized").into_matrix()
}

fn ordered_product(basis: &PauliBasis, pieces: &[Piece]) -> CMatrix {
    pieces.iter().fold(identity(basis.dim()), |u, p| {
        if p.duration == 0.0 || p.coeffs.iter().all(|c| *c == 0.0) {
            u
        } else {
            expm_neg_i_raw(&generator(basis, &p.coeffs), p.duration) * u
        }
    })
}

fn killing(u: CMatrix, v: CMatrix) -> f64 {
    killing_geodesic_distance(&Unitary::from_trusted(u), &Unitary::from_trusted(v))
        .expect("same dimension")
        .distance
}

fn path_pieces(
    schedule: &ControlSchedule,
    realization: Option<&NoiseRealization>,
    set: &HamiltonianSet,
    basis: &PauliBasis,
) -> Result<Vec<Piece>> {
    let mut out = Vec::new();
    for k in 0..schedule.steps() {
        for (a, b, alpha) in step_pieces(schedule, realization, set.len(), k) {
            let h = effective_hamiltonian(schedule.row(k), &alpha, set)?;
            let mut coeffs = expand_raw(h.matrix(), basis).coeffs;
            let scale = coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
            coeffs.iter_mut().for_each(|c| {
                if c.abs() <= 1e-13 * scale {
                    *c = 0.0
                }
            });
            out.push(Piece {
                duration: b - a,
                coeffs,
            });
        }
    }
    Ok(out)
}

fn speed(coeffs: &[f64]) -> f64 {
    coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
}

/// Splits a path into `steps` segments of equal Killing length.
fn arc_length_segments(pieces: &[Piece], steps: usize) -> (f64, Vec<Vec<Piece>>) {
    let total: f64 = pieces.iter().map(|p| speed(&p.coeffs) * p.duration).sum();
    let delta = total / steps as f64;
    let mut segments = vec![Vec::new(); steps];
    if total == 0.0 {
        return (0.0, segments);
    }
    let mut seg = 0;
    let mut room = delta;
    for p in pieces {
        let v = speed(&p.coeffs);
        if v == 0.0 || p.duration == 0.0 {
            continue;
        }
        let mut left = p.duration;
        while left > 0.0 {
            let fits = room / v;
            if fits >= left || seg == steps - 1 {
                segments[seg].push(Piece {
                    duration: left,
                    coeffs: p.coeffs.clone(),
                });
                room -= left * v;
                left = 0.0;
            } else {
                segments[seg].push(Piece {
                    duration: fits,
                    coeffs: p.coeffs.clone(),
                });
                left -= fits;
                seg += 1;
                room = delta;
            }
        }
    }
    (delta, segments)
}

/// Simulates the full, pruned, averaged and trotterized paths and compares
/// each consecutive pair against its bound.
pub fn empirical_bound_check(
    schedule: &ControlSchedule,
    realization: Option<&NoiseRealization>,
    set: &HamiltonianSet,
    basis: &PauliBasis,
    penalty: &PenaltyMatrix,
    cutoff: f64,
    steps: usize,
) -> Result<EmpiricalCheck> {
    check_cutoff(cutoff)?;
    if steps == 0 {
        return Err(Error::InvalidParameter("need at least one averaging step".into()));
    }
    if basis.dim() != set.dim() || penalty.len() != basis.len() {
        return Err(Error::DimensionMismatch {
            expected: set.dim(),
            actual: basis.dim(),
        });
    }
    if schedule.steps() > 0 && schedule.channels() != set.len() {
        return Err(Error::LengthMismatch {
            expected: set.len(),
            actual: schedule.channels(),
        });
    }
    let full = path_pieces(schedule, realization, set, basis)?;
    let mut gammas = Vec::with_capacity(full.len());
    let mut pruned = Vec::with_capacity(full.len());
    for p in &full {
        let g: f64 = p.coeffs.iter().zip(penalty.diag()).map(|(c, w)| w * c * c).sum();
        gammas.push((g.sqrt(), p.duration));
        pruned.push(Piece {
            duration: p.duration,
            coeffs: prune(&p.coeffs, penalty, cutoff)?.coeffs,
        });
    }
    let full_end = ordered_product(basis, &full);
    let pruned_end = ordered_product(basis, &pruned);
    let pruning_error = killing(full_end, pruned_end.clone());
    let pruning_bound = pruning_bound_pieces(&gammas, cutoff)?;

    let (delta, segments) = arc_length_segments(&pruned, steps);
    let mut averaged_end = identity(basis.dim());
    let mut trotter_end = identity(basis.dim());
    let mut per_step = Vec::with_capacity(steps);
    for seg in &segments {
        let mut integral = vec![0.0; basis.len()];
        let mut used = vec![false; basis.len()];
        for p in seg {
            for (i, c) in p.coeffs.iter().enumerate() {
                integral[i] += c * p.duration;
                used[i] |= *c != 0.0;
            }
        }
        let n_active = used.iter().filter(|u| **u).count();
        let ordered = ordered_product(basis, seg);
        let averaged = expm_neg_i_raw(&generator(basis, &integral), 1.0);
        let mut trotter = identity(basis.dim());
        let mut terms = Vec::new();
        for (i, &c) in integral.iter().enumerate() {
            if c != 0.0 {
                let sigma = basis.matrix(i);
                trotter = expm_neg_i_raw(sigma, c) * trotter;
                let avg = if delta > 0.0 { c / delta } else { 0.0 };
                terms.push(Hermitian::from_combination(
                    sigma * num_complex::Complex64::new(avg, 0.0),
                ));
            }
        }
        let check = StepCheck {
            n_active,
            averaging_error: killing(ordered, averaged.clone()),
            averaging_bound: averaging_bound(n_active, delta).ok(),
            trotter_error: killing(averaged.clone(), trotter.clone()),
            trotter_leading: trotter_leading(&terms, delta)?,
        };
        averaged_end = averaged * averaged_end;
        trotter_end = trotter * trotter_end;
        per_step.push(check);
    }
    let averaging_error = killing(pruned_end, averaged_end.clone());
    let trotter_error = killing(averaged_end, trotter_end);
    let averaging_total: Option<f64> = per_step.iter().map(|s| s.averaging_bound).sum();
    let report = BoundReport {
        pruning_bound,
        averaging_bound: averaging_total,
        trotter_leading: per_step.iter().map(|s| s.trotter_leading).sum(),
        params: BoundParams {
            cutoff,
            delta,
            n_active: per_step.iter().map(|s| s.n_active).max().unwrap_or(0),
            steps,
            total_length: delta * steps as f64,
        },
    };
    Ok(EmpiricalCheck {
        report,
        pruning_error,
        averaging_error,
        trotter_error,
        per_step,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates;
    use crate::metrics::{build_penalty, MetricKind};
    use crate::pauli::generate_basis;

    #[test]
    fn prune_examples() {
        let b = generate_basis(3).unwrap();
        let cliff = build_penalty(MetricKind::Cliff, &b).unwrap();
        let h: Vec<f64> = (0..b.len()).map(|i| 0.1 + i as f64).collect();
        assert_eq!(prune(&h, &cliff, 10.0).unwrap().coeffs, h);
        let p = prune(&h, &cliff, 2.0).unwrap();
        for (e, c) in b.elements().iter().zip(&p.coeffs) {
            assert_eq!(*c == 0.0, e.weight() == 3);
        }
        assert_eq!(p.retained, 9 + 27);
        let none = prune(&h, &cliff, 1.0).unwrap();
        assert_eq!(none.retained, 0);
        assert!(prune(&h, &cliff, 0.0).is_err());
    }

    #[test]
    fn pruning_bound_examples() {
        let gammas = vec![1.0; 10];
        assert!((pruning_bound(&gammas, 0.1, 4.0).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(pruning_bound(&gammas, 0.1, f64::INFINITY).unwrap(), 0.0);
        assert!(pruning_bound(&[-1.0], 0.1, 4.0).is_err());
    }

    #[test]
    fn averaging_bound_examples() {
        assert!((averaging_bound(1, 0.1).unwrap() - 0.031_415_926_5).abs() < 1e-9);
        assert!((averaging_bound(2, 0.1).unwrap() - 0.044_428_829_4).abs() < 1e-9);
        assert!(matches!(averaging_bound(4, 0.6), Err(Error::BoundPrecondition(_))));
    }

    #[test]
    fn trotter_examples() {
        let (x, y, z) = (gates::pauli_x(), gates::pauli_y(), gates::pauli_z());
        assert_eq!(trotter_leading(&[x.clone(), x.clone()], 0.1).unwrap(), 0.0);
        assert!((trotter_leading(&[x.clone(), y.clone()], 0.1).unwrap() - 0.01).abs() < 1e-12);
        let three = trotter_leading(&[x, y, z], 0.1).unwrap();
        assert!((three - 3f64.sqrt() * 0.01).abs() < 1e-12);
    }

    #[test]
    fn constant_single_term_has_no_averaging_error() {
        let b = generate_basis(1).unwrap();
        let killing = build_penalty(MetricKind::Killing, &b).unwrap();
        let set = HamiltonianSet::noiseless(vec![gates::pauli_x()]).unwrap();
        let s = ControlSchedule::constant(0.05, 20, &[0.7], 1.0).unwrap();
        let c = empirical_bound_check(&s, None, &set, &b, &killing, 10.0, 4).unwrap();
        assert!(c.averaging_error < 1e-14);
        assert!(c
            .per_step
            .iter()
            .all(|s| s.averaging_error < 1e-14 && s.trotter_error < 1e-14));
        assert!((c.report.params.total_length - 0.7).abs() < 1e-12);
        assert_eq!(c.pruning_error, 0.0);
    }

    #[test]
    fn commuting_terms_trotterize_exactly() {
        let b = generate_basis(2).unwrap();
        let killing = build_penalty(MetricKind::Killing, &b).unwrap();
        let zz = b.reconstruct(&{
            let mut v = vec![0.0; 15];
            v[b.position("zz").unwrap()] = 1.0;
            v
        });
        let z1 = b.reconstruct(&{
            let mut v = vec![0.0; 15];
            v[b.position("z1").unwrap()] = 1.0;
            v
        });
        let set = HamiltonianSet::noiseless(vec![zz.unwrap(), z1.unwrap()]).unwrap();
        let s = ControlSchedule::constant(0.1, 10, &[0.6, 0.8], 1.0).unwrap();
        let c = empirical_bound_check(&s, None, &set, &b, &killing, 10.0, 5).unwrap();
        assert!(c.trotter_error < 1e-13);
        assert!(c.per_step.iter().all(|s| s.trotter_leading == 0.0));
    }

    #[test]
    fn pruning_removes_expensive_channel() {
        let b = generate_basis(1).unwrap();
        let zz = build_penalty(MetricKind::SingleQubitZz { p: 9.0 }, &b).unwrap();
        let set = HamiltonianSet::full_single_qubit();
        let s = ControlSchedule::constant(0.1, 10, &[0.6, 0.0, 0.8], 1.0).unwrap();
        let c = empirical_bound_check(&s, None, &set, &b, &zz, 4.0, 4).unwrap();
        assert!(c.pruning_error > 0.0 && c.pruning_holds());
        assert_eq!(c.report.params.n_active, 1);
    }
}
