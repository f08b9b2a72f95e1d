//! Sample-average approximation of the robust time-optimal control problem
//! and a projected descent solver for it.
//!
//! The exact SAA objective is piecewise constant in the controls: hitting
//! times live on the grid and the success fraction counts scenarios. Descent
//! runs on a continuous surrogate that interpolates the crossing time of the
//! `eta`-ball between grid points and, for misses, measures how close the
//! trajectory got. A step is accepted only if the surrogate decreases and
//! the exact objective does not increase.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{check_target, l2, project_row, step_propagator, ControlSchedule, HamiltonianSet};
use crate::error::{Error, Result};
use crate::linalg::{identity, sup_distance_raw, unitarity_deviation, CMatrix, Unitary, UNITARY_TOL};
use crate::noise::{NoiseRealization, ScenarioSet};

/// Aggregation of scenario hitting times.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RiskMeasure {
    Expectation,
    /// Mean of the worst `ceil(gamma L)` values.
    Cvar {
        gamma: f64,
    },
}

impl RiskMeasure {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Cvar { gamma } if !(gamma > 0.0 && gamma <= 1.0) => Err(Error::InvalidParameter(format!(
                "cvar gamma = {gamma} must lie in (0, 1]"
            ))),
            _ => Ok(()),
        }
    }

    fn tail_len(&self, len: usize) -> usize {
        match *self {
            Self::Expectation => len,
            Self::Cvar { gamma } => ((gamma * len as f64).ceil() as usize).clamp(1, len),
        }
    }

    /// Per-value weights such that `risk = sum w_l v_l`; ties in the tail are
    /// broken by position.
    fn weights(&self, values: &[f64]) -> Vec<f64> {
        let m = self.tail_len(values.len());
        let mut w = vec![0.0; values.len()];
        for &i in &tail_indices(values, m) {
            w[i] = 1.0 / m as f64;
        }
        w
    }
}

fn tail_indices(values: &[f64], m: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    order.truncate(m);
    order
}

pub fn risk(values: &[f64], measure: RiskMeasure) -> Result<f64> {
    measure.validate()?;
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    let m = measure.tail_len(values.len());
    let mut tail: Vec<f64> = match measure {
        RiskMeasure::Expectation => values.to_vec(),
        RiskMeasure::Cvar { .. } => tail_indices(values, m).into_iter().map(|i| values[i]).collect(),
    };
    // summing in ascending order keeps permutations bitwise equal
    tail.sort_by(f64::total_cmp);
    Ok(tail.iter().sum::<f64>() / m as f64)
}

/// Robust time-optimal control problem on a fixed grid.
#[derive(Debug, Clone, PartialEq)]
pub struct OcpProblem {
    pub set: HamiltonianSet,
    pub target: Unitary,
    pub eta: f64,
    pub beta: f64,
    pub phase_invariant: bool,
    pub horizon: f64,
    pub dt: f64,
    pub h_max: f64,
    pub risk: RiskMeasure,
    pub penalty_mu: f64,
}

impl OcpProblem {
    /// Validates the problem and returns the number of grid steps.
    pub fn validate(&self) -> Result<usize> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.eta > 0.0 && self.eta < 2.0) {
            return bad(format!("eta = {} must lie in (0, 2)", self.eta));
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return bad(format!("beta = {} must lie in [0, 1]", self.beta));
        }
        if !(self.penalty_mu >= 0.0 && self.penalty_mu.is_finite()) {
            return bad(format!("penalty_mu = {} must be finite and >= 0", self.penalty_mu));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) || !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return bad(format!("dt = {} and horizon = {} must be > 0", self.dt, self.horizon));
        }
        if !(self.h_max >= 0.0 && self.h_max.is_finite()) {
            return bad(format!("h_max = {} must be finite and >= 0", self.h_max));
        }
        self.risk.validate()?;
        check_target(&self.target, &self.set)?;
        let ratio = self.horizon / self.dt;
        let steps = ratio.round();
        if steps < 1.0 || (ratio - steps).abs() > 1e-9 * ratio.max(1.0) {
            return bad(format!("horizon / dt = {ratio} is not a positive integer"));
        }
        Ok(steps as usize)
    }

    fn check_schedule(&self, schedule: &ControlSchedule, steps: usize) -> Result<()> {
        if schedule.steps() != steps || schedule.channels() != self.set.len() {
            return Err(Error::LengthMismatch {
                expected: steps * self.set.len(),
                actual: schedule.steps() * schedule.channels(),
            });
        }
        if schedule.dt() != self.dt {
            return Err(Error::InvalidParameter(format!(
                "schedule dt {} differs from problem dt {}",
                schedule.dt(),
                self.dt
            )));
        }
        Ok(())
    }

    fn check_scenarios(&self, scenarios: &ScenarioSet) -> Result<()> {
        if scenarios.is_empty() {
            return Err(Error::EmptyInput);
        }
        for r in &scenarios.realizations {
            if r.channels() != self.set.len() {
                return Err(Error::LengthMismatch {
                    expected: self.set.len(),
                    actual: r.channels(),
                });
            }
            if r.horizon() < self.horizon * (1.0 - 1e-12) {
                return Err(Error::InvalidParameter(format!(
                    "scenario horizon {} shorter than problem horizon {}",
                    r.horizon(),
                    self.horizon
                )));
            }
        }
        Ok(())
    }

    fn penalty(&self, success_fraction: f64) -> f64 {
        self.penalty_mu * ((1.0 - self.beta) - success_fraction).max(0.0)
    }
}

/// Exact SAA objective and its parts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaaEvaluation {
    pub objective: f64,
    pub risk_value: f64,
    pub penalty: f64,
    pub success_fraction: f64,
    /// Hitting times, censored at the horizon for misses.
    pub hitting_times: Vec<f64>,
    pub censored: Vec<bool>,
}

/// `risk(censored hitting times) + mu max(0, (1 - beta) - success)`.
pub fn saa_objective(
    schedule: &ControlSchedule,
    scenarios: &ScenarioSet,
    problem: &OcpProblem,
) -> Result<SaaEvaluation> {
    let steps = problem.validate()?;
    problem.check_schedule(schedule, steps)?;
    problem.check_scenarios(scenarios)?;
    let traces = trace_all(schedule, scenarios, problem)?;
    Ok(exact_from_traces(&traces, schedule, problem))
}

/// Prefix products and distances along one scenario, up to the first hit.
struct ScenarioTrace {
    /// `P_k = U(t_k)`.
    prefixes: Vec<CMatrix>,
    distances: Vec<f64>,
    hit: Option<usize>,
    argmin: usize,
}

fn trace_scenario(
    schedule: &ControlSchedule,
    realization: &NoiseRealization,
    problem: &OcpProblem,
) -> Result<ScenarioTrace> {
    let set = &problem.set;
    let target = problem.target.matrix();
    let mut u = identity(set.dim());
    let mut d = sup_distance_raw(&u, target, problem.phase_invariant);
    let mut prefixes = vec![u.clone()];
    let mut distances = vec![d];
    let mut hit = (d <= problem.eta).then_some(0);
    let mut k = 0;
    while hit.is_none() && k < schedule.steps() {
        if let Some(step) = step_propagator(schedule, Some(realization), set, k) {
            u = step * u;
            d = sup_distance_raw(&u, target, problem.phase_invariant);
        }
        prefixes.push(u.clone());
        distances.push(d);
        k += 1;
        if d <= problem.eta {
            hit = Some(k);
        }
    }
    let deviation = unitarity_deviation(&u);
    if deviation > UNITARY_TOL {
        return Err(Error::UnitarityDrift { step: k, deviation });
    }
    let argmin = distances
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1).then(a.0.cmp(&b.0)))
        .map(|(i, _)| i)
        .unwrap_or(0);
    Ok(ScenarioTrace {
        prefixes,
        distances,
        hit,
        argmin,
    })
}

fn trace_all(schedule: &ControlSchedule, scenarios: &ScenarioSet, problem: &OcpProblem) -> Result<Vec<ScenarioTrace>> {
    scenarios
        .realizations
        .par_iter()
        .map(|r| trace_scenario(schedule, r, problem))
        .collect()
}

fn exact_from_traces(traces: &[ScenarioTrace], schedule: &ControlSchedule, problem: &OcpProblem) -> SaaEvaluation {
    let horizon = schedule.horizon();
    let hitting_times: Vec<f64> = traces
        .iter()
        .map(|t| t.hit.map_or(horizon, |k| schedule.time(k)))
        .collect();
    let censored: Vec<bool> = traces.iter().map(|t| t.hit.is_none()).collect();
    let hits = censored.iter().filter(|c| !**c).count();
    let success_fraction = hits as f64 / traces.len() as f64;
    let risk_value = risk(&hitting_times, problem.risk).expect("validated, nonempty");
    let penalty = problem.penalty(success_fraction);
    SaaEvaluation {
        objective: risk_value + penalty,
        risk_value,
        penalty,
        success_fraction,
        hitting_times,
        censored,
    }
}

/// Continuous stand-in for one scenario's hitting time.
fn surrogate_time(
    hit: Option<usize>,
    d_prev: f64,
    d_at: f64,
    dt: f64,
    horizon: f64,
    eta: f64,
    miss_weight: f64,
) -> f64 {
    match hit {
        Some(0) => 0.0,
        Some(k) => (k - 1) as f64 * dt + dt * (d_prev - eta) / (d_prev - d_at),
        None => horizon + miss_weight * (d_at - eta),
    }
}

fn surrogate_of(trace: &ScenarioTrace, dt: f64, horizon: f64, eta: f64, miss_weight: f64) -> f64 {
    match trace.hit {
        Some(0) => 0.0,
        Some(k) => surrogate_time(
            trace.hit,
            trace.distances[k - 1],
            trace.distances[k],
            dt,
            horizon,
            eta,
            miss_weight,
        ),
        None => surrogate_time(None, 0.0, trace.distances[trace.argmin], dt, horizon, eta, miss_weight),
    }
}

/// Descent settings. Step sizes are in units of `h_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub max_iters: usize,
    /// Central-difference probe, in control units.
    pub fd_step: f64,
    pub initial_step: f64,
    pub min_step: f64,
    /// Stop once an accepted step lowers the surrogate by less than this,
    /// relative to `max(1, |surrogate|)`.
    pub tol: f64,
    pub shrink: f64,
    pub grow: f64,
    pub restarts: usize,
    pub init_seed: u64,
    /// Per-step Gaussian jitter of the random initializations.
    pub init_jitter: f64,
    /// Surrogate slope for misses, in horizons per unit distance.
    pub miss_weight: f64,
    /// Optional first initialization, projected onto the control bound.
    pub warm_start: Option<Vec<Vec<f64>>>,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            max_iters: 200,
            fd_step: 1e-6,
            initial_step: 0.25,
            min_step: 1e-6,
            tol: 1e-10,
            shrink: 0.5,
            grow: 2.0,
            restarts: 4,
            init_seed: 0,
            init_jitter: 0.3,
            miss_weight: 1.0,
            warm_start: None,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("fd_step", self.fd_step),
            ("initial_step", self.initial_step),
            ("min_step", self.min_step),
            ("tol", self.tol),
            ("miss_weight", self.miss_weight),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} = {v} must be > 0")));
            }
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) || !(self.grow >= 1.0 && self.grow.is_finite()) {
            return Err(Error::InvalidParameter("need 0 < shrink < 1 <= grow".into()));
        }
        if !(self.init_jitter >= 0.0 && self.init_jitter.is_finite()) {
            return Err(Error::InvalidParameter("init_jitter must be >= 0".into()));
        }
        if self.restarts == 0 && self.warm_start.is_none() {
            return Err(Error::InvalidParameter(
                "need at least one restart or a warm start".into(),
            ));
        }
        Ok(())
    }
}

/// One accepted iterate (iteration 0 is the initialization).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub restart: usize,
    pub iteration: usize,
    pub objective: f64,
    pub surrogate: f64,
    pub success_fraction: f64,
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationReport {
    pub schedule: ControlSchedule,
    pub objective: f64,
    pub risk_value: f64,
    pub penalty: f64,
    pub success_fraction: f64,
    /// Accepted iterations of the returned restart.
    pub iterations: usize,
    pub converged: bool,
    pub seed: u64,
    pub scenario_seed: u64,
    /// Index of the returned run: 0 is the warm start when one is given.
    pub restart: usize,
    pub hitting_times: Vec<f64>,
    pub censored: Vec<bool>,
    pub log: Vec<IterationRecord>,
}

impl OptimizationReport {
    /// Minimal hitting time over hit scenarios, if any.
    pub fn best_time(&self) -> Option<f64> {
        self.hitting_times
            .iter()
            .zip(&self.censored)
            .filter(|(_, c)| !**c)
            .map(|(t, _)| *t)
            .reduce(f64::min)
    }
}

struct Point {
    values: Vec<Vec<f64>>,
    traces: Vec<ScenarioTrace>,
    exact: SaaEvaluation,
    surrogates: Vec<f64>,
    surrogate: f64,
}

struct Solver<'a> {
    problem: &'a OcpProblem,
    scenarios: &'a ScenarioSet,
    config: &'a OptimizerConfig,
    steps: usize,
    miss_weight: f64,
}

impl Solver<'_> {
    fn schedule(&self, values: Vec<Vec<f64>>) -> Result<ControlSchedule> {
        ControlSchedule::new(self.problem.dt, values, self.problem.h_max)
    }

    fn evaluate(&self, values: Vec<Vec<f64>>, iteration: usize) -> Result<Point> {
        let schedule = self.schedule(values)?;
        let traces = trace_all(&schedule, self.scenarios, self.problem)?;
        let exact = exact_from_traces(&traces, &schedule, self.problem);
        let p = self.problem;
        let surrogates: Vec<f64> = traces
            .iter()
            .map(|t| surrogate_of(t, p.dt, schedule.horizon(), p.eta, self.miss_weight))
            .collect();
        let surrogate = risk(&surrogates, p.risk)? + exact.penalty;
        if !exact.objective.is_finite() || !surrogate.is_finite() {
            return Err(Error::NonFiniteObjective { iteration });
        }
        Ok(Point {
            values: schedule.into_values(),
            traces,
            exact,
            surrogates,
            surrogate,
        })
    }

    /// Central-difference gradient of the surrogate, holding every
    /// scenario's hitting index fixed. The surrogate is continuous across
    /// index changes, so this is its derivative almost everywhere.
    fn gradient(&self, point: &Point) -> Vec<Vec<f64>> {
        let p = self.problem;
        let m = p.set.len();
        let weights = p.risk.weights(&point.surrogates);
        let schedule = self.schedule(point.values.clone()).expect("feasible iterate");
        let horizon = schedule.horizon();
        let active: Vec<usize> = (0..weights.len()).filter(|&l| weights[l] > 0.0).collect();
        let partials: Vec<Vec<f64>> = active
            .par_iter()
            .map(|&l| {
                let trace = &point.traces[l];
                let realization = &self.scenarios.realizations[l];
                let keys: Vec<usize> = match trace.hit {
                    Some(0) => vec![],
                    Some(k) => vec![k - 1, k],
                    None if trace.argmin == 0 => vec![],
                    None => vec![trace.argmin],
                };
                let mut g = vec![0.0; self.steps * m];
                let Some(&last) = keys.last() else { return g };
                let eval = |dists: &[f64]| match trace.hit {
                    Some(k) => surrogate_time(Some(k), dists[0], dists[1], p.dt, horizon, p.eta, self.miss_weight),
                    None => surrogate_time(None, 0.0, dists[0], p.dt, horizon, p.eta, self.miss_weight),
                };
                let mut probe = schedule.clone();
                for k in 0..last {
                    // U_q = P_q P_{k+1}^dagger W_k P_k for q > k
                    let left: Vec<Option<CMatrix>> = keys
                        .iter()
                        .map(|&q| (q > k).then(|| &trace.prefixes[q] * trace.prefixes[k + 1].adjoint()))
                        .collect();
                    for j in 0..m {
                        let base = schedule.row(k)[j];
                        let mut side = |delta: f64| {
                            probe_set(&mut probe, k, j, base + delta);
                            let w = step_propagator(&probe, Some(realization), &p.set, k)
                                .unwrap_or_else(|| identity(p.set.dim()));
                            let moved = w * &trace.prefixes[k];
                            let dists: Vec<f64> = keys
                                .iter()
                                .zip(&left)
                                .map(|(&q, a)| match a {
                                    Some(a) => sup_distance_raw(&(a * &moved), p.target.matrix(), p.phase_invariant),
                                    None => trace.distances[q],
                                })
                                .collect();
                            eval(&dists)
                        };
                        let plus = side(self.config.fd_step);
                        let minus = side(-self.config.fd_step);
                        probe_set(&mut probe, k, j, base);
                        g[k * m + j] = weights[l] * (plus - minus) / (2.0 * self.config.fd_step);
                    }
                }
                g
            })
            .collect();
        let mut total = vec![0.0; self.steps * m];
        for g in &partials {
            total.iter_mut().zip(g).for_each(|(t, v)| *t += v);
        }
        total.chunks(m).map(<[f64]>::to_vec).collect()
    }

    fn initial(&self, restart: usize) -> Vec<Vec<f64>> {
        let m = self.problem.set.len();
        let h_max = self.problem.h_max;
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.init_seed);
        rng.set_stream(restart as u64);
        let mut dir: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
        let norm = l2(&dir);
        dir.iter_mut().for_each(|v| *v *= h_max / norm.max(f64::MIN_POSITIVE));
        (0..self.steps)
            .map(|_| {
                let mut row: Vec<f64> = dir
                    .iter()
                    .map(|v| v + self.config.init_jitter * h_max * rng.sample::<f64, _>(StandardNormal))
                    .collect();
                project_row(&mut row, h_max);
                row
            })
            .collect()
    }

    fn descend(
        &self,
        start: Vec<Vec<f64>>,
        restart: usize,
        log: &mut Vec<IterationRecord>,
    ) -> Result<(Point, usize, bool)> {
        let h_max = self.problem.h_max;
        let mut point = self.evaluate(start, 0)?;
        let mut step = self.config.initial_step;
        let record = |point: &Point, iteration: usize, step: f64| IterationRecord {
            restart,
            iteration,
            objective: point.exact.objective,
            surrogate: point.surrogate,
            success_fraction: point.exact.success_fraction,
            step,
        };
        log.push(record(&point, 0, step));
        let mut accepted = 0;
        let mut by_step = false;
        for _ in 0..self.config.max_iters {
            if point.exact.objective == 0.0 {
                by_step = true;
                break;
            }
            let grad = self.gradient(&point);
            let scale = grad.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
            if scale == 0.0 || !scale.is_finite() {
                by_step = scale == 0.0;
                break;
            }
            let mut next = None;
            while step >= self.config.min_step {
                let trial: Vec<Vec<f64>> = point
                    .values
                    .iter()
                    .zip(&grad)
                    .map(|(row, g)| {
                        let mut r: Vec<f64> = row.iter().zip(g).map(|(x, d)| x - step * h_max * d / scale).collect();
                        project_row(&mut r, h_max);
                        r
                    })
                    .collect();
                let cand = self.evaluate(trial, accepted + 1)?;
                if cand.surrogate < point.surrogate && cand.exact.objective <= point.exact.objective {
                    next = Some(cand);
                    break;
                }
                step *= self.config.shrink;
            }
            match next {
                Some(cand) => {
                    let gain = point.surrogate - cand.surrogate;
                    let stalled = gain <= self.config.tol * point.surrogate.abs().max(1.0);
                    point = cand;
                    accepted += 1;
                    log.push(record(&point, accepted, step));
                    if stalled {
                        by_step = true;
                        break;
                    }
                    step = (step * self.config.grow).min(self.config.initial_step.max(step));
                }
                None => {
                    by_step = true;
                    break;
                }
            }
        }
        Ok((point, accepted, by_step))
    }

    /// Zeroes the controls after the last hit; hitting times are unchanged.
    fn trim(&self, point: Point) -> Result<Point> {
        let Some(last) = point.traces.iter().filter_map(|t| t.hit).max() else {
            return Ok(point);
        };
        if point.values[last..].iter().flatten().all(|v| *v == 0.0) {
            return Ok(point);
        }
        let mut values = point.values.clone();
        values[last..]
            .iter_mut()
            .for_each(|r| r.iter_mut().for_each(|v| *v = 0.0));
        let trimmed = self.evaluate(values, 0)?;
        Ok(if trimmed.exact.objective <= point.exact.objective {
            trimmed
        } else {
            point
        })
    }
}

fn probe_set(schedule: &mut ControlSchedule, k: usize, j: usize, value: f64) {
    schedule.set_unchecked(k, j, value);
}

/// Projected finite-difference descent over the control grid with seeded
/// restarts; returns the best run.
pub fn optimize(problem: &OcpProblem, scenarios: &ScenarioSet, config: &OptimizerConfig) -> Result<OptimizationReport> {
    let steps = problem.validate()?;
    problem.check_scenarios(scenarios)?;
    config.validate()?;
    let solver = Solver {
        problem,
        scenarios,
        config,
        steps,
        miss_weight: config.miss_weight * problem.horizon,
    };
    let m = problem.set.len();
    let mut log = Vec::new();

    let zero = solver.evaluate(vec![vec![0.0; m]; steps], 0)?;
    if zero.exact.objective == 0.0 {
        log.push(IterationRecord {
            restart: 0,
            iteration: 0,
            objective: 0.0,
            surrogate: zero.surrogate,
            success_fraction: zero.exact.success_fraction,
            step: 0.0,
        });
        return report(problem, scenarios, config, zero, 0, 0, true, log);
    }

    let mut starts = Vec::new();
    if let Some(warm) = &config.warm_start {
        let warm = ControlSchedule::projected(problem.dt, warm.clone(), problem.h_max)?;
        problem.check_schedule(&warm, steps)?;
        starts.push(warm.into_values());
    }
    starts.extend((0..config.restarts).map(|r| solver.initial(r)));

    let mut best: Option<(Point, usize, usize, bool)> = None;
    for (restart, start) in starts.into_iter().enumerate() {
        let (point, iters, by_step) = solver.descend(start, restart, &mut log)?;
        let better = match &best {
            None => true,
            Some((b, _, _, b_conv)) => {
                point.exact.objective < b.exact.objective
                    || (point.exact.objective == b.exact.objective && by_step && !b_conv)
            }
        };
        if better {
            best = Some((point, iters, restart, by_step));
        }
    }
    let (point, iters, restart, by_step) = best.expect("at least one start");
    let point = solver.trim(point)?;
    let feasible = point.exact.success_fraction >= 1.0 - problem.beta;
    report(
        problem,
        scenarios,
        config,
        point,
        iters,
        restart,
        feasible && by_step,
        log,
    )
}

#[allow(clippy::too_many_arguments)]
fn report(
    problem: &OcpProblem,
    scenarios: &ScenarioSet,
    config: &OptimizerConfig,
    point: Point,
    iterations: usize,
    restart: usize,
    converged: bool,
    log: Vec<IterationRecord>,
) -> Result<OptimizationReport> {
    let schedule = ControlSchedule::new(problem.dt, point.values, problem.h_max)?;
    let e = point.exact;
    Ok(OptimizationReport {
        schedule,
        objective: e.objective,
        risk_value: e.risk_value,
        penalty: e.penalty,
        success_fraction: e.success_fraction,
        iterations,
        converged,
        seed: config.init_seed,
        scenario_seed: scenarios.seed,
        restart,
        hitting_times: e.hitting_times,
        censored: e.censored,
        log,
    })
}

/// Noise-free time-optimal control: a single clean scenario, chance
/// constraint reduced to "the target is reached".
pub fn solve_deterministic(problem: &OcpProblem, config: &OptimizerConfig) -> Result<OptimizationReport> {
    problem.validate()?;
    let clean = ScenarioSet::noiseless(problem.set.len(), problem.horizon)?;
    let problem = OcpProblem {
        beta: 0.0,
        ..problem.clone()
    };
    optimize(&problem, &clean, config)
}

/// Matrix view of a schedule's values, steps by channels.
pub fn schedule_matrix(schedule: &ControlSchedule) -> DMatrix<f64> {
    DMatrix::from_fn(schedule.steps(), schedule.channels(), |k, j| schedule.row(k)[j])
}
