//! Experiment configuration: a strict TOML schema plus semantic checks that
//! name the offending field.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Deserialize;

use qrobust::dynamics::{Channel, ControlSchedule, HamiltonianSet};
use qrobust::gates;
use qrobust::linalg::{CMatrix, Hermitian, Unitary};
use qrobust::metrics::MetricKind;
use qrobust::noise::NoiseParams;
use qrobust::pauli::{generate_basis, PauliString};
use qrobust::robust::{OcpProblem, OptimizerConfig, RiskMeasure};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("{field}: {message}")]
    Field { field: String, message: String },
}

pub fn field_err(field: impl Into<String>, message: impl std::fmt::Display) -> ConfigError {
    ConfigError::Field {
        field: field.into(),
        message: message.to_string(),
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub seed: Option<u64>,
    pub qubits: Option<usize>,
    pub system: Option<SystemTable>,
    pub target: Option<TargetDef>,
    pub grid: Option<GridTable>,
    pub noise: Option<NoiseTable>,
    pub metric: Option<MetricKind>,
    pub problem: Option<ProblemTable>,
    pub optimizer: Option<OptimizerConfig>,
    pub schedule: Option<ScheduleTable>,
    pub simulate: Option<SimulateTable>,
    pub metrics: Option<MetricsTable>,
    pub bounds: Option<BoundsTable>,
    pub figure2: Option<Figure2Table>,
}

/// A Hermitian operator: a Pauli label such as `"x"` or `"1z"`, a map of
/// labels to real weights, or a dense matrix.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum OperatorDef {
    Label(String),
    Dense(DenseDef),
    Combination(BTreeMap<String, f64>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DenseDef {
    pub re: Vec<Vec<f64>>,
    #[serde(default)]
    pub im: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelDef {
    pub intended: OperatorDef,
    /// Defaults to the intended operator (a channel that cannot fail).
    pub erroneous: Option<OperatorDef>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemTable {
    pub qubits: usize,
    pub channels: Vec<ChannelDef>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum TargetDef {
    Named(String),
    Dense(DenseDef),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridTable {
    /// Step length, in time units.
    pub dt: f64,
    /// Total time, in time units; must be an integer number of steps.
    pub horizon: f64,
    /// Euclidean bound on the control vector at each step, in rate units.
    pub h_max: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseTable {
    /// Error onset rate, per time unit.
    pub lambda_e: f64,
    /// Error clearing rate, per time unit.
    pub lambda_c: f64,
    /// Number of sampled scenarios.
    pub scenarios: usize,
    /// Replaces the process by the noiseless one while keeping everything
    /// else fixed.
    #[serde(default = "yes")]
    pub enabled: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemTable {
    pub eta: f64,
    #[serde(default)]
    pub beta: f64,
    #[serde(default = "yes")]
    pub phase_invariant: bool,
    #[serde(default = "expectation")]
    pub risk: RiskMeasure,
    #[serde(default = "default_mu")]
    pub penalty_mu: f64,
}

fn expectation() -> RiskMeasure {
    RiskMeasure::Expectation
}

fn default_mu() -> f64 {
    10.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleTable {
    /// CSV with columns `t, h_1, ..., h_m`, relative to the config file.
    pub file: Option<PathBuf>,
    pub constant: Option<Vec<f64>>,
    pub values: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateTable {
    /// How many scenarios get per-step trajectory files.
    #[serde(default = "one")]
    pub trajectories: usize,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricsTable {
    /// Basis coefficients for the clean cost.
    pub coefficients: Option<Vec<f64>>,
    /// Channel controls and error bits for the noisy costs.
    pub controls: Option<Vec<f64>>,
    pub alpha: Option<Vec<u8>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsTable {
    pub cutoff: f64,
    /// Averaging steps `S`.
    pub steps: usize,
    /// Random paths to sample when no schedule is given.
    #[serde(default)]
    pub random_paths: usize,
    /// Grid steps of each random path.
    #[serde(default = "default_random_len")]
    pub random_path_steps: usize,
}

fn default_random_len() -> usize {
    20
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseBranch {
    AllError,
    Sampled,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Figure2Table {
    #[serde(default = "default_fig_h")]
    pub h_max: f64,
    #[serde(default = "default_fig_dt")]
    pub dt: f64,
    #[serde(default = "default_fig_horizon")]
    pub horizon: f64,
    #[serde(default = "default_fig_eta")]
    pub eta: f64,
    #[serde(default = "all_error")]
    pub noise_branch: NoiseBranch,
    #[serde(default = "default_lambda_e")]
    pub lambda_e: f64,
    #[serde(default = "default_lambda_c")]
    pub lambda_c: f64,
}

fn default_fig_h() -> f64 {
    1.0
}
fn default_fig_dt() -> f64 {
    0.04
}
fn default_fig_horizon() -> f64 {
    3.2
}
fn default_fig_eta() -> f64 {
    0.05
}
fn all_error() -> NoiseBranch {
    NoiseBranch::AllError
}
fn default_lambda_e() -> f64 {
    1.0
}
fn default_lambda_c() -> f64 {
    10.0
}

/// A parsed config together with where it came from.
pub struct Loaded {
    pub config: Config,
    pub text: String,
    pub dir: PathBuf,
}

pub fn load(path: &Path) -> Result<Loaded, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let config: Config = toml::from_str(&text).map_err(|e| ConfigError::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok(Loaded { config, text, dir })
}

fn require<'a, T>(value: &'a Option<T>, field: &str) -> Result<&'a T, ConfigError> {
    value.as_ref().ok_or_else(|| field_err(field, "missing section"))
}

impl Config {
    pub fn grid(&self) -> Result<&GridTable, ConfigError> {
        let g = require(&self.grid, "grid")?;
        if !(g.dt > 0.0 && g.dt.is_finite()) {
            return Err(field_err("grid.dt", format!("{} must be > 0", g.dt)));
        }
        if !(g.horizon > 0.0 && g.horizon.is_finite()) {
            return Err(field_err("grid.horizon", format!("{} must be > 0", g.horizon)));
        }
        if !(g.h_max >= 0.0 && g.h_max.is_finite()) {
            return Err(field_err("grid.h_max", format!("{} must be >= 0", g.h_max)));
        }
        grid_steps(g)?;
        Ok(g)
    }

    pub fn system(&self) -> Result<HamiltonianSet, ConfigError> {
        let s = require(&self.system, "system")?;
        if !(1..=qrobust::pauli::MAX_QUBITS).contains(&s.qubits) {
            return Err(field_err("system.qubits", format!("{} outside 1..=6", s.qubits)));
        }
        if s.channels.is_empty() {
            return Err(field_err("system.channels", "need at least one channel"));
        }
        let mut channels = Vec::with_capacity(s.channels.len());
        for (j, ch) in s.channels.iter().enumerate() {
            let intended = operator(&ch.intended, s.qubits, &format!("system.channels[{j}].intended"))?;
            let erroneous = match &ch.erroneous {
                Some(e) => operator(e, s.qubits, &format!("system.channels[{j}].erroneous"))?,
                None => intended.clone(),
            };
            channels.push(Channel { intended, erroneous });
        }
        HamiltonianSet::new(channels).map_err(|e| field_err("system.channels", e))
    }

    pub fn target(&self, qubits: usize) -> Result<Unitary, ConfigError> {
        let t = require(&self.target, "target")?;
        let u = match t {
            TargetDef::Named(name) => match (name.as_str(), qubits) {
                ("identity", n) => Unitary::identity(1 << n).map_err(|e| field_err("target", e))?,
                ("hadamard", 1) => gates::hadamard(),
                ("pauli_x", 1) => gates::x_gate(),
                ("hadamard" | "pauli_x", n) => {
                    return Err(field_err(
                        "target",
                        format!("{name:?} is a one-qubit gate, system has {n}"),
                    ))
                }
                _ => {
                    return Err(field_err(
                        "target",
                        format!("unknown gate {name:?}; expected hadamard, pauli_x or identity"),
                    ))
                }
            },
            TargetDef::Dense(d) => Unitary::new(dense(d, "target")?).map_err(|e| field_err("target", e))?,
        };
        if u.dim() != 1 << qubits {
            return Err(field_err(
                "target",
                format!("dimension {} for {qubits} qubit(s)", u.dim()),
            ));
        }
        Ok(u)
    }

    /// Noise parameters and scenario count; `None` without a `[noise]`
    /// section.
    pub fn noise(&self) -> Result<Option<(NoiseParams, usize)>, ConfigError> {
        let Some(n) = &self.noise else { return Ok(None) };
        let params = NoiseParams::new(n.lambda_e, n.lambda_c).map_err(|e| field_err("noise", e))?;
        if n.scenarios == 0 {
            return Err(field_err("noise.scenarios", "must be >= 1"));
        }
        let params = if n.enabled { params } else { NoiseParams::noiseless() };
        Ok(Some((params, n.scenarios)))
    }

    pub fn problem(&self, set: HamiltonianSet, target: Unitary) -> Result<OcpProblem, ConfigError> {
        let g = self.grid()?;
        let p = require(&self.problem, "problem")?;
        let problem = OcpProblem {
            set,
            target,
            eta: p.eta,
            beta: p.beta,
            phase_invariant: p.phase_invariant,
            horizon: g.horizon,
            dt: g.dt,
            h_max: g.h_max,
            risk: p.risk,
            penalty_mu: p.penalty_mu,
        };
        problem.validate().map_err(|e| field_err("problem", e))?;
        Ok(problem)
    }

    pub fn schedule(&self, dir: &Path, channels: usize) -> Result<ControlSchedule, ConfigError> {
        let g = self.grid()?;
        let steps = grid_steps(g)?;
        let s = require(&self.schedule, "schedule")?;
        let given = [s.file.is_some(), s.constant.is_some(), s.values.is_some()];
        if given.iter().filter(|b| **b).count() != 1 {
            return Err(field_err("schedule", "give exactly one of file, constant, values"));
        }
        let values = if let Some(file) = &s.file {
            crate::output::read_schedule_csv(&dir.join(file), g.dt)?
        } else if let Some(row) = &s.constant {
            vec![row.clone(); steps]
        } else {
            s.values.clone().expect("checked above")
        };
        if values.len() != steps {
            return Err(field_err(
                "schedule",
                format!("{} steps, grid has {steps}", values.len()),
            ));
        }
        if values.iter().any(|r| r.len() != channels) {
            return Err(field_err(
                "schedule",
                format!("every step needs {channels} control value(s)"),
            ));
        }
        ControlSchedule::new(g.dt, values, g.h_max).map_err(|e| field_err("schedule", e))
    }

    pub fn optimizer(&self) -> Result<OptimizerConfig, ConfigError> {
        let cfg = self.optimizer.clone().unwrap_or_default();
        cfg.validate().map_err(|e| field_err("optimizer", e))?;
        Ok(cfg)
    }

    pub fn bounds(&self) -> Result<&BoundsTable, ConfigError> {
        let b = require(&self.bounds, "bounds")?;
        if b.cutoff.is_nan() || b.cutoff <= 0.0 {
            return Err(field_err("bounds.cutoff", format!("{} must be > 0", b.cutoff)));
        }
        if b.steps == 0 {
            return Err(field_err("bounds.steps", "must be >= 1"));
        }
        if b.random_path_steps == 0 {
            return Err(field_err("bounds.random_path_steps", "must be >= 1"));
        }
        Ok(b)
    }
}

pub fn grid_steps(g: &GridTable) -> Result<usize, ConfigError> {
    let ratio = g.horizon / g.dt;
    let steps = ratio.round();
    if steps < 1.0 || (ratio - steps).abs() > 1e-9 * ratio.max(1.0) {
        return Err(field_err(
            "grid.horizon",
            format!("horizon / dt = {ratio} is not a positive integer"),
        ));
    }
    Ok(steps as usize)
}

fn dense(d: &DenseDef, field: &str) -> Result<CMatrix, ConfigError> {
    let rows = d.re.len();
    let square = |m: &Vec<Vec<f64>>| m.len() == rows && m.iter().all(|r| r.len() == rows);
    if rows == 0 || !square(&d.re) || d.im.as_ref().is_some_and(|im| !square(im)) {
        return Err(field_err(field, "re and im must be square and of equal size"));
    }
    Ok(DMatrix::from_fn(rows, rows, |i, j| {
        Complex64::new(d.re[i][j], d.im.as_ref().map_or(0.0, |im| im[i][j]))
    }))
}

pub fn operator(def: &OperatorDef, qubits: usize, field: &str) -> Result<Hermitian, ConfigError> {
    let terms: Vec<(String, f64)> = match def {
        OperatorDef::Dense(d) => return Hermitian::new(dense(d, field)?).map_err(|e| field_err(field, e)),
        OperatorDef::Label(label) => vec![(label.clone(), 1.0)],
        OperatorDef::Combination(map) => map.iter().map(|(k, v)| (k.clone(), *v)).collect(),
    };
    let basis = generate_basis(qubits).map_err(|e| field_err(field, e))?;
    let mut coeffs = vec![0.0; basis.len()];
    for (label, weight) in terms {
        let p = PauliString::parse(&label).map_err(|e| field_err(field, e))?;
        if p.qubits() != qubits {
            return Err(field_err(
                field,
                format!("label {label:?} acts on {} qubit(s), system has {qubits}", p.qubits()),
            ));
        }
        let pos = basis.position(&label).expect("parsed label is in the basis");
        coeffs[pos] += weight;
    }
    basis.reconstruct(&coeffs).map_err(|e| field_err(field, e))
}
