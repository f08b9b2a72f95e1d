//! Controlled Schrödinger dynamics under bang-bang channel errors.
//!
//! Controls are piecewise constant on a uniform grid and the noise switches
//! are piecewise constant between jumps, so on every sub-interval between a
//! grid point and/or a jump the generator is constant and the propagator is
//! an exact matrix exponential. No time-stepping error enters anywhere.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates;
use crate::linalg::{
    expm_neg_i_raw, identity, sup_distance_raw, unitarity_deviation, CMatrix, Hermitian, Unitary, UNITARY_TOL,
};
use crate::noise::{NoiseRealization, ScenarioSet};

const TRACELESS_TOL: f64 = 1e-10;
const NORM_SLACK: f64 = 1e-12;

/// One control channel: the intended Hamiltonian and the one applied while
/// the channel is in error.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    pub intended: Hermitian,
    pub erroneous: Hermitian,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianSet {
    n: usize,
    channels: Vec<Channel>,
}

impl HamiltonianSet {
    pub fn new(channels: Vec<Channel>) -> Result<Self> {
        let first = channels.first().ok_or(Error::EmptyInput)?;
        let dim = first.intended.dim();
        for ch in &channels {
            for h in [&ch.intended, &ch.erroneous] {
                if h.dim() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        actual: h.dim(),
                    });
                }
                if !h.is_traceless(TRACELESS_TOL) {
                    return Err(Error::NotTraceless {
                        trace: h.normalized_trace(),
                    });
                }
            }
        }
        Ok(Self {
            n: first.intended.qubits(),
            channels,
        })
    }

    /// Channels whose error operator equals the intended one.
    pub fn noiseless(intended: Vec<Hermitian>) -> Result<Self> {
        Self::new(
            intended
                .into_iter()
                .map(|h| Channel {
                    erroneous: h.clone(),
                    intended: h,
                })
                .collect(),
        )
    }

    /// `{sigma_x, sigma_y}` with both channels failing to `sigma_x`.
    pub fn figure2() -> Self {
        Self::new(vec![
            Channel {
                intended: gates::pauli_x(),
                erroneous: gates::pauli_x(),
            },
            Channel {
                intended: gates::pauli_y(),
                erroneous: gates::pauli_x(),
            },
        ])
        .expect("valid single-qubit set")
    }

    /// Noiseless full single-qubit control `{sigma_x, sigma_y, sigma_z}`.
    pub fn full_single_qubit() -> Self {
        Self::noiseless(vec![gates::pauli_x(), gates::pauli_y(), gates::pauli_z()]).expect("valid single-qubit set")
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn intended(&self) -> Vec<Hermitian> {
        self.channels.iter().map(|c| c.intended.clone()).collect()
    }

    pub fn erroneous(&self) -> Vec<Hermitian> {
        self.channels.iter().map(|c| c.erroneous.clone()).collect()
    }
}

/// Piecewise-constant controls `h_j(t_k)` on a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlSchedule {
    dt: f64,
    h_max: f64,
    values: Vec<Vec<f64>>,
}

impl ControlSchedule {
    pub fn new(dt: f64, values: Vec<Vec<f64>>, h_max: f64) -> Result<Self> {
        if !dt.is_finite() || dt <= 0.0 {
            return Err(Error::InvalidParameter(format!("dt = {dt} must be > 0")));
        }
        if !h_max.is_finite() || h_max < 0.0 {
            return Err(Error::InvalidParameter(format!("h_max = {h_max} must be >= 0")));
        }
        let width = values.first().map(Vec::len).unwrap_or(0);
        for (k, row) in values.iter().enumerate() {
            if row.len() != width {
                return Err(Error::LengthMismatch {
                    expected: width,
                    actual: row.len(),
                });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidParameter(format!("step {k}: non-finite control")));
            }
            let norm = l2(row);
            if norm > h_max * (1.0 + NORM_SLACK) + NORM_SLACK {
                return Err(Error::InvalidParameter(format!(
                    "step {k}: |h| = {norm} exceeds h_max = {h_max}"
                )));
            }
        }
        Ok(Self { dt, h_max, values })
    }

    pub fn zeros(dt: f64, steps: usize, channels: usize, h_max: f64) -> Result<Self> {
        Self::new(dt, vec![vec![0.0; channels]; steps], h_max)
    }

    /// The same control vector on every step.
    pub fn constant(dt: f64, steps: usize, row: &[f64], h_max: f64) -> Result<Self> {
        Self::new(dt, vec![row.to_vec(); steps], h_max)
    }

    /// Builds a schedule after projecting every step onto the `h_max` ball.
    pub fn projected(dt: f64, mut values: Vec<Vec<f64>>, h_max: f64) -> Result<Self> {
        for row in &mut values {
            project_row(row, h_max);
        }
        Self::new(dt, values, h_max)
    }

    /// Independent uniform components in `[-h_max, h_max]` per step,
    /// projected onto the bound.
    pub fn random<R: Rng + ?Sized>(dt: f64, steps: usize, channels: usize, h_max: f64, rng: &mut R) -> Result<Self> {
        let values = (0..steps)
            .map(|_| (0..channels).map(|_| rng.random_range(-h_max..=h_max)).collect())
            .collect();
        Self::projected(dt, values, h_max)
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn h_max(&self) -> f64 {
        self.h_max
    }

    pub fn steps(&self) -> usize {
        self.values.len()
    }

    pub fn channels(&self) -> usize {
        self.values.first().map(Vec::len).unwrap_or(0)
    }

    pub fn horizon(&self) -> f64 {
        self.time(self.steps())
    }

    /// Grid time `t_k = k dt`.
    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.values[k]
    }

    pub fn into_values(self) -> Vec<Vec<f64>> {
        self.values
    }

    /// Probe access that skips the bound check.
    pub(crate) fn set_unchecked(&mut self, k: usize, j: usize, value: f64) {
        self.values[k][j] = value;
    }
}

pub(crate) fn l2(row: &[f64]) -> f64 {
    row.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Radial projection onto `{|h|_2 <= h_max}`.
pub fn project_row(row: &mut [f64], h_max: f64) {
    let norm = l2(row);
    if norm > h_max {
        let s = if norm > 0.0 { h_max / norm } else { 0.0 };
        row.iter_mut().for_each(|v| *v *= s);
    }
}

/// `sum_j h_j (alpha_j H^_j + (1 - alpha_j) H~_j)`.
pub fn effective_hamiltonian(h: &[f64], alpha: &[u8], set: &HamiltonianSet) -> Result<Hermitian> {
    for len in [h.len(), alpha.len()] {
        if len != set.len() {
            return Err(Error::LengthMismatch {
                expected: set.len(),
                actual: len,
            });
        }
    }
    Ok(effective_unchecked(h, alpha, set))
}

fn effective_unchecked(h: &[f64], alpha: &[u8], set: &HamiltonianSet) -> Hermitian {
    Hermitian::combination(
        set.dim(),
        set.channels.iter().zip(h).zip(alpha).map(|((ch, &hj), &a)| {
            let op = if a == 1 { &ch.intended } else { &ch.erroneous };
            (hj, op)
        }),
    )
}

/// Constant-generator pieces of grid step `k`: `(duration, alpha)` in time
/// order, split at the realization's interior jumps.
pub(crate) fn step_pieces(
    schedule: &ControlSchedule,
    realization: Option<&NoiseRealization>,
    channels: usize,
    k: usize,
) -> Vec<(f64, f64, Vec<u8>)> {
    let t0 = schedule.time(k);
    let t1 = schedule.time(k + 1);
    match realization {
        None => vec![(t0, t1, vec![1; channels])],
        Some(r) if r.total_jumps() == 0 => vec![(t0, t1, vec![1; channels])],
        Some(r) => {
            let mut cuts = vec![t0];
            cuts.extend(r.jumps_between(t0, t1));
            cuts.push(t1);
            cuts.windows(2).map(|w| (w[0], w[1], r.alphas_at(w[0]))).collect()
        }
    }
}

/// Propagator of one grid step.
pub(crate) fn step_propagator(
    schedule: &ControlSchedule,
    realization: Option<&NoiseRealization>,
    set: &HamiltonianSet,
    k: usize,
) -> Option<CMatrix> {
    let row = schedule.row(k);
    if row.iter().all(|v| *v == 0.0) {
        return None;
    }
    let mut step: Option<CMatrix> = None;
    for (a, b, alpha) in step_pieces(schedule, realization, set.len(), k) {
        let h = effective_unchecked(row, &alpha, set);
        let piece = expm_neg_i_raw(h.matrix(), b - a);
        step = Some(match step {
            None => piece,
            Some(prev) => piece * prev,
        });
    }
    step
}

fn check_inputs(
    schedule: &ControlSchedule,
    realization: Option<&NoiseRealization>,
    set: &HamiltonianSet,
) -> Result<()> {
    if schedule.channels() != set.len() && schedule.steps() > 0 {
        return Err(Error::LengthMismatch {
            expected: set.len(),
            actual: schedule.channels(),
        });
    }
    if let Some(r) = realization {
        if r.channels() != set.len() {
            return Err(Error::LengthMismatch {
                expected: set.len(),
                actual: r.channels(),
            });
        }
        if r.horizon() < schedule.horizon() * (1.0 - 1e-12) {
            return Err(Error::InvalidParameter(format!(
                "realization horizon {} shorter than schedule horizon {}",
                r.horizon(),
                schedule.horizon()
            )));
        }
    }
    Ok(())
}

/// Unitaries `U(t_k)` on the control grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub unitaries: Vec<Unitary>,
}

impl Trajectory {
    pub fn final_unitary(&self) -> &Unitary {
        self.unitaries.last().expect("trajectory holds U(t_0)")
    }
}

/// Integrates `dU/dt = -i H(t; xi) U` exactly on the jump-refined grid.
pub fn propagate(
    schedule: &ControlSchedule,
    realization: Option<&NoiseRealization>,
    set: &HamiltonianSet,
) -> Result<Trajectory> {
    check_inputs(schedule, realization, set)?;
    let mut u = identity(set.dim());
    let mut times = Vec::with_capacity(schedule.steps() + 1);
    let mut unitaries = Vec::with_capacity(schedule.steps() + 1);
    times.push(0.0);
    unitaries.push(Unitary::from_trusted(u.clone()));
    for k in 0..schedule.steps() {
        if let Some(step) = step_propagator(schedule, realization, set, k) {
            u = step * u;
            let deviation = unitarity_deviation(&u);
            if deviation > UNITARY_TOL {
                return Err(Error::UnitarityDrift { step: k, deviation });
            }
        }
        times.push(schedule.time(k + 1));
        unitaries.push(Unitary::from_trusted(u.clone()));
    }
    Ok(Trajectory { times, unitaries })
}

/// First grid index with `sup_distance(U(t_k), target) <= eta`.
pub fn hitting_index(traj: &Trajectory, target: &Unitary, eta: f64, phase_invariant: bool) -> Option<usize> {
    traj.unitaries
        .iter()
        .position(|u| sup_distance_raw(u.matrix(), target.matrix(), phase_invariant) <= eta)
}

/// First grid time at which the trajectory is within `eta` of the target.
pub fn hitting_time(traj: &Trajectory, target: &Unitary, eta: f64, phase_invariant: bool) -> Option<f64> {
    hitting_index(traj, target, eta, phase_invariant).map(|k| traj.times[k])
}

/// `psi(t_k) = U(t_k) psi0`, with Bloch coordinates for one qubit.
#[derive(Debug, Clone, PartialEq)]
pub struct StateTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<DVector<Complex64>>,
    pub bloch: Option<Vec<[f64; 3]>>,
}

pub fn bloch_vector(psi: &DVector<Complex64>) -> [f64; 3] {
    let (a, b) = (psi[0], psi[1]);
    let coherence = a.conj() * b;
    [2.0 * coherence.re, 2.0 * coherence.im, a.norm_sqr() - b.norm_sqr()]
}

pub fn apply_to_state(traj: &Trajectory, psi0: &DVector<Complex64>) -> Result<StateTrajectory> {
    let dim = traj.unitaries[0].dim();
    if psi0.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: psi0.len(),
        });
    }
    if (psi0.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "initial state norm {} != 1",
            psi0.norm()
        )));
    }
    let states: Vec<_> = traj.unitaries.iter().map(|u| u.matrix() * psi0).collect();
    let bloch = (dim == 2).then(|| states.iter().map(bloch_vector).collect());
    Ok(StateTrajectory {
        times: traj.times.clone(),
        states,
        bloch,
    })
}

/// Basis state `|0...0>`.
pub fn ground_state(dim: usize) -> DVector<Complex64> {
    let mut v = DVector::zeros(dim);
    v[0] = Complex64::new(1.0, 0.0);
    v
}

/// Distances to the target along one scenario's trajectory.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct DistanceProfile {
    /// `d_k` for `k = 0..=last`, where `last` is the hit index or `K`.
    pub distances: Vec<f64>,
    pub hit: Option<usize>,
}

/// Walks the trajectory computing `d_k`, stopping at the first hit.
pub(crate) fn distance_profile(
    schedule: &ControlSchedule,
    realization: Option<&NoiseRealization>,
    set: &HamiltonianSet,
    target: &Unitary,
    eta: f64,
    phase_invariant: bool,
) -> Result<DistanceProfile> {
    let mut u = identity(set.dim());
    let mut distances = Vec::with_capacity(schedule.steps() + 1);
    let mut d = sup_distance_raw(&u, target.matrix(), phase_invariant);
    distances.push(d);
    if d <= eta {
        return Ok(DistanceProfile {
            distances,
            hit: Some(0),
        });
    }
    for k in 0..schedule.steps() {
        if let Some(step) = step_propagator(schedule, realization, set, k) {
            u = step * u;
            d = sup_distance_raw(&u, target.matrix(), phase_invariant);
        }
        distances.push(d);
        if d <= eta {
            let deviation = unitarity_deviation(&u);
            if deviation > UNITARY_TOL {
                return Err(Error::UnitarityDrift { step: k, deviation });
            }
            return Ok(DistanceProfile {
                distances,
                hit: Some(k + 1),
            });
        }
    }
    let deviation = unitarity_deviation(&u);
    if deviation > UNITARY_TOL {
        return Err(Error::UnitarityDrift {
            step: schedule.steps(),
            deviation,
        });
    }
    Ok(DistanceProfile { distances, hit: None })
}

/// Monte-Carlo estimate of the chance constraint over a scenario set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChanceEstimate {
    pub success_fraction: f64,
    /// Per-scenario hitting time; misses are censored at the horizon.
    pub hitting_times: Vec<f64>,
    /// Marks the censored entries of `hitting_times`.
    pub censored: Vec<bool>,
}

pub fn chance_estimate(
    schedule: &ControlSchedule,
    scenarios: &ScenarioSet,
    set: &HamiltonianSet,
    target: &Unitary,
    eta: f64,
    phase_invariant: bool,
) -> Result<ChanceEstimate> {
    if scenarios.is_empty() {
        return Err(Error::EmptyInput);
    }
    check_target(target, set)?;
    let outcomes = scenarios
        .realizations
        .par_iter()
        .map(|r| {
            check_inputs(schedule, Some(r), set)?;
            distance_profile(schedule, Some(r), set, target, eta, phase_invariant).map(|p| p.hit)
        })
        .collect::<Result<Vec<_>>>()?;
    let horizon = schedule.horizon();
    let hitting_times = outcomes
        .iter()
        .map(|h| h.map_or(horizon, |k| schedule.time(k)))
        .collect();
    let censored: Vec<bool> = outcomes.iter().map(Option::is_none).collect();
    let hits = censored.iter().filter(|c| !**c).count();
    Ok(ChanceEstimate {
        success_fraction: hits as f64 / scenarios.len() as f64,
        hitting_times,
        censored,
    })
}

pub(crate) fn check_target(target: &Unitary, set: &HamiltonianSet) -> Result<()> {
    if target.dim() != set.dim() {
        return Err(Error::DimensionMismatch {
            expected: set.dim(),
            actual: target.dim(),
        });
    }
    Ok(())
}
