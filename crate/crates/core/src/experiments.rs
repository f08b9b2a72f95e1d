//! Ready-made problem setups and reference computations.

use serde::{Deserialize, Serialize};

use crate::dynamics::HamiltonianSet;
use crate::error::{Error, Result};
use crate::gates;
use crate::linalg::{expm_neg_i_raw, golden_section, sup_distance_raw, Hermitian, Unitary};
use crate::robust::{OcpProblem, RiskMeasure};

/// Closest approach of the one-parameter orbit `exp(-i theta G)` to a target
/// in phase-invariant sup distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitBound {
    pub theta: f64,
    pub distance: f64,
}

/// Scans `theta` over `[0, period)` on `samples` points, then refines the
/// best bracket by golden section.
pub fn orbit_lower_bound(generator: &Hermitian, target: &Unitary, period: f64, samples: usize) -> Result<OrbitBound> {
    if generator.dim() != target.dim() {
        return Err(Error::DimensionMismatch {
            expected: generator.dim(),
            actual: target.dim(),
        });
    }
    if samples < 3 || !(period > 0.0 && period.is_finite()) {
        return Err(Error::InvalidParameter(
            "need samples >= 3 and a positive period".into(),
        ));
    }
    let dist = |theta: f64| sup_distance_raw(&expm_neg_i_raw(generator.matrix(), theta), target.matrix(), true);
    let step = period / samples as f64;
    let (best, _) = (0..samples)
        .map(|i| (i, dist(i as f64 * step)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("samples > 0");
    let centre = best as f64 * step;
    let (theta, distance) = golden_section(dist, centre - step, centre + step, 1e-12);
    Ok(OrbitBound {
        theta: theta.rem_euclid(period),
        distance,
    })
}

/// Two channels `sigma_x`, `sigma_y`, both failing to `sigma_x`, Hadamard
/// target, phase-invariant hitting.
pub fn figure2_problem(h_max: f64, dt: f64, horizon: f64, eta: f64) -> OcpProblem {
    OcpProblem {
        set: HamiltonianSet::figure2(),
        target: gates::hadamard(),
        eta,
        beta: 0.0,
        phase_invariant: true,
        horizon,
        dt,
        h_max,
        risk: RiskMeasure::Expectation,
        penalty_mu: 10.0,
    }
}

/// The orbit reachable under both channels in error: rotations about `x`.
pub fn figure2_error_orbit_bound() -> OrbitBound {
    orbit_lower_bound(&gates::pauli_x(), &gates::hadamard(), 2.0 * std::f64::consts::PI, 4096)
        .expect("static single-qubit inputs")
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn orbit_reaching_target_has_zero_bound() {
        let target = Unitary::new(gates::pauli_x().matrix() * num_complex::Complex64::new(0.0, -1.0)).unwrap();
        let b = orbit_lower_bound(&gates::pauli_x(), &target, 2.0 * std::f64::consts::PI, 64).unwrap();
        assert!(b.distance < 1e-9);
        assert!((b.theta - FRAC_PI_2).abs() < 1e-6 || (b.theta - 3.0 * FRAC_PI_2).abs() < 1e-6);
    }

    #[test]
    fn hadamard_is_off_the_x_orbit() {
        let b = figure2_error_orbit_bound();
        assert!(b.distance > 0.3, "{b:?}");
        // a dense scan never beats the refined minimum
        let fine = (0..20_000)
            .map(|i| {
                let t = i as f64 * 2.0 * std::f64::consts::PI / 20_000.0;
                sup_distance_raw(
                    &expm_neg_i_raw(gates::pauli_x().matrix(), t),
                    gates::hadamard().matrix(),
                    true,
                )
            })
            .fold(f64::INFINITY, f64::min);
        assert!(b.distance <= fine + 1e-12);
    }
}
