//! Subcommand implementations.

use std::path::Path;

use serde::Serialize;

use qrobust::bounds::{empirical_bound_check, EmpiricalCheck};
use qrobust::dynamics::{apply_to_state, chance_estimate, ground_state, hitting_time, propagate, ControlSchedule};
use qrobust::experiments::{figure2_error_orbit_bound, figure2_problem, OrbitBound};
use qrobust::linalg::sup_distance;
use qrobust::metrics::{
    build_penalty, metric_cost_clean, metric_cost_noisy_expanded, metric_cost_noisy_oracle, path_length, MetricKind,
};
use qrobust::noise::{build_scenarios, scenario_rng, NoiseParams, NoiseRealization, ScenarioSet};
use qrobust::pauli::{count_weight, generate_basis};
use qrobust::robust::{optimize, solve_deterministic, OptimizationReport};

use crate::config::{field_err, Config, ConfigError, NoiseBranch};
use crate::output::OutputDir;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Library(#[from] qrobust::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

/// How a completed run ended.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Status {
    Success,
    /// Outputs were written but the chance constraint is not met or the
    /// solver did not converge.
    Infeasible(String),
}

pub struct Context<'a> {
    pub config: &'a Config,
    pub dir: &'a Path,
    pub seed: Option<u64>,
    pub out: &'a mut OutputDir,
}

impl Context<'_> {
    fn seed(&self, what: &str) -> Result<u64, ConfigError> {
        self.seed.ok_or_else(|| {
            field_err(
                "seed",
                format!("required for {what}; set it in the config or pass --seed"),
            )
        })
    }

    fn qubits(&self) -> Result<usize, ConfigError> {
        match (&self.config.system, self.config.qubits) {
            (Some(s), _) => Ok(s.qubits),
            (None, Some(n)) => Ok(n),
            (None, None) => Err(field_err("qubits", "give qubits or a [system] section")),
        }
    }

    fn scenarios(&self, channels: usize, horizon: f64) -> Result<ScenarioSet, RunError> {
        Ok(match self.config.noise()? {
            Some((params, count)) => {
                let seed = self.seed("sampled noise")?;
                build_scenarios(&params, horizon, channels, count, seed)?
            }
            None => ScenarioSet::noiseless(channels, horizon)?,
        })
    }
}

#[derive(Serialize)]
struct BasisElement {
    index: usize,
    label: String,
    weight: usize,
}

#[derive(Serialize)]
struct BasisOutput {
    qubits: usize,
    count: usize,
    weight_counts: Vec<usize>,
    elements: Vec<BasisElement>,
}

pub fn basis(ctx: &mut Context) -> Result<Status, RunError> {
    let n = ctx.qubits()?;
    let basis = generate_basis(n).map_err(|e| field_err("qubits", e))?;
    let weight_counts = (1..=n).map(|k| count_weight(n, k)).collect::<Result<_, _>>()?;
    let elements = basis
        .elements()
        .iter()
        .map(|e| BasisElement {
            index: e.index(),
            label: e.label(),
            weight: e.weight(),
        })
        .collect();
    ctx.out.json(
        "basis.json",
        &BasisOutput {
            qubits: n,
            count: basis.len(),
            weight_counts,
            elements,
        },
    )?;
    Ok(Status::Success)
}

#[derive(Serialize)]
struct PenaltyEntry {
    label: String,
    weight: usize,
    penalty: f64,
}

#[derive(Serialize)]
struct NoisyCost {
    oracle: f64,
    /// Term-by-term expansion; absent when channels are not single Pauli
    /// strings.
    expanded: Option<f64>,
    difference: Option<f64>,
}

#[derive(Serialize)]
struct MetricsOutput {
    metric: MetricKind,
    qubits: usize,
    penalties: Vec<PenaltyEntry>,
    clean_cost: Option<f64>,
    noisy_cost: Option<NoisyCost>,
    path_length: Option<f64>,
}

pub fn metrics(ctx: &mut Context) -> Result<Status, RunError> {
    let n = ctx.qubits()?;
    let kind = ctx.config.metric.unwrap_or(MetricKind::Killing);
    let basis = generate_basis(n).map_err(|e| field_err("qubits", e))?;
    let penalty = build_penalty(kind, &basis).map_err(|e| field_err("metric", e))?;
    let penalties = basis
        .elements()
        .iter()
        .zip(penalty.diag())
        .map(|(e, &p)| PenaltyEntry {
            label: e.label(),
            weight: e.weight(),
            penalty: p,
        })
        .collect();
    let table = ctx.config.metrics.clone().unwrap_or(crate::config::MetricsTable {
        coefficients: None,
        controls: None,
        alpha: None,
    });
    let clean_cost = match &table.coefficients {
        Some(h) => Some(metric_cost_clean(h, &penalty).map_err(|e| field_err("metrics.coefficients", e))?),
        None => None,
    };
    let set = match &ctx.config.system {
        Some(_) => Some(ctx.config.system()?),
        None => None,
    };
    let noisy_cost = match (&table.controls, &set) {
        (Some(h), Some(set)) => {
            let alpha = table.alpha.clone().unwrap_or_else(|| vec![1; set.len()]);
            if alpha.iter().any(|a| *a > 1) {
                return Err(field_err("metrics.alpha", "entries must be 0 or 1").into());
            }
            let oracle = metric_cost_noisy_oracle(h, &alpha, set, &basis, &penalty)
                .map_err(|e| field_err("metrics.controls", e))?;
            let expanded = match metric_cost_noisy_expanded(h, &alpha, set, &basis, &penalty) {
                Ok(c) => Some(c),
                Err(qrobust::Error::NotPauliAligned { .. }) => None,
                Err(e) => return Err(e.into()),
            };
            Some(NoisyCost {
                oracle,
                expanded: expanded.map(|c| c.expanded),
                difference: expanded.map(|c| c.difference),
            })
        }
        (Some(_), None) => return Err(field_err("system", "metrics.controls needs a [system] section").into()),
        _ => None,
    };
    let path_length = match (&ctx.config.schedule, &set) {
        (Some(_), Some(set)) => {
            let schedule = ctx.config.schedule(ctx.dir, set.len())?;
            Some(path_length(&schedule, None, set, &basis, &penalty)?)
        }
        _ => None,
    };
    ctx.out.json(
        "metrics.json",
        &MetricsOutput {
            metric: kind,
            qubits: n,
            penalties,
            clean_cost,
            noisy_cost,
            path_length,
        },
    )?;
    Ok(Status::Success)
}

#[derive(Serialize)]
struct SimulateSummary {
    scenarios: usize,
    eta: f64,
    phase_invariant: bool,
    success_fraction: f64,
    hitting_times: Vec<f64>,
    censored: Vec<bool>,
}

pub fn simulate(ctx: &mut Context) -> Result<Status, RunError> {
    let set = ctx.config.system()?;
    let target = ctx.config.target(set.qubits())?;
    let problem = ctx.config.problem(set.clone(), target.clone())?;
    let schedule = ctx.config.schedule(ctx.dir, set.len())?;
    let scenarios = ctx.scenarios(set.len(), schedule.horizon())?;
    let estimate = chance_estimate(
        &schedule,
        &scenarios,
        &set,
        &target,
        problem.eta,
        problem.phase_invariant,
    )?;
    let keep = ctx
        .config
        .simulate
        .as_ref()
        .map_or(1, |s| s.trajectories)
        .min(scenarios.len());
    for (l, realization) in scenarios.realizations.iter().take(keep).enumerate() {
        let traj = propagate(&schedule, Some(realization), &set)?;
        ctx.out.unitary_csv(&format!("unitary_{l}.csv"), &traj)?;
        if set.qubits() == 1 {
            let states = apply_to_state(&traj, &ground_state(2))?;
            ctx.out.bloch_csv(&format!("bloch_{l}.csv"), &states)?;
        }
    }
    ctx.out.json(
        "summary.json",
        &SimulateSummary {
            scenarios: scenarios.len(),
            eta: problem.eta,
            phase_invariant: problem.phase_invariant,
            success_fraction: estimate.success_fraction,
            hitting_times: estimate.hitting_times,
            censored: estimate.censored,
        },
    )?;
    Ok(Status::Success)
}

pub fn optimize_cmd(ctx: &mut Context) -> Result<Status, RunError> {
    let set = ctx.config.system()?;
    let target = ctx.config.target(set.qubits())?;
    let problem = ctx.config.problem(set, target)?;
    let mut opt = ctx.config.optimizer()?;
    if ctx.config.schedule.is_some() {
        opt.warm_start = Some(ctx.config.schedule(ctx.dir, problem.set.len())?.into_values());
    }
    let (report, required) = match ctx.config.noise()? {
        Some(_) => {
            let scenarios = ctx.scenarios(problem.set.len(), problem.horizon)?;
            (optimize(&problem, &scenarios, &opt)?, 1.0 - problem.beta)
        }
        None => (solve_deterministic(&problem, &opt)?, 1.0),
    };
    ctx.out.json("report.json", &report)?;
    ctx.out.schedule_csv("schedule.csv", &report.schedule)?;
    Ok(if report.success_fraction >= required {
        Status::Success
    } else {
        Status::Infeasible(format!(
            "success fraction {} below required {required}",
            report.success_fraction
        ))
    })
}

#[derive(Serialize)]
struct BoundsSummary {
    paths: usize,
    pruning_violations: usize,
    averaging_violations: usize,
    averaging_skipped: usize,
}

#[derive(Serialize)]
struct BoundsOutput {
    metric: MetricKind,
    summary: BoundsSummary,
    checks: Vec<EmpiricalCheck>,
}

pub fn bounds_cmd(ctx: &mut Context) -> Result<Status, RunError> {
    let set = ctx.config.system()?;
    let table = ctx.config.bounds()?.clone();
    let kind = ctx.config.metric.unwrap_or(MetricKind::Killing);
    let basis = generate_basis(set.qubits())?;
    let penalty = build_penalty(kind, &basis).map_err(|e| field_err("metric", e))?;
    let mut checks = Vec::new();
    if ctx.config.schedule.is_some() {
        let schedule = ctx.config.schedule(ctx.dir, set.len())?;
        checks.push(empirical_bound_check(
            &schedule,
            None,
            &set,
            &basis,
            &penalty,
            table.cutoff,
            table.steps,
        )?);
    }
    if table.random_paths > 0 {
        let seed = ctx.seed("random paths")?;
        let grid = ctx.config.grid()?;
        for path in 0..table.random_paths {
            let mut rng = scenario_rng(seed, path, 0);
            let schedule = ControlSchedule::random(grid.dt, table.random_path_steps, set.len(), grid.h_max, &mut rng)?;
            checks.push(empirical_bound_check(
                &schedule,
                None,
                &set,
                &basis,
                &penalty,
                table.cutoff,
                table.steps,
            )?);
        }
    }
    if checks.is_empty() {
        return Err(field_err("bounds", "give a [schedule] or random_paths > 0").into());
    }
    let summary = BoundsSummary {
        paths: checks.len(),
        pruning_violations: checks.iter().filter(|c| !c.pruning_holds()).count(),
        averaging_violations: checks.iter().map(EmpiricalCheck::averaging_violations).sum(),
        averaging_skipped: checks.iter().map(EmpiricalCheck::averaging_skipped).sum(),
    };
    ctx.out.json(
        "bounds.json",
        &BoundsOutput {
            metric: kind,
            summary,
            checks,
        },
    )?;
    Ok(Status::Success)
}

#[derive(Serialize)]
struct Branch {
    hitting_time: Option<f64>,
    final_distance: f64,
}

#[derive(Serialize)]
struct Figure2Summary {
    h_max: f64,
    dt: f64,
    horizon: f64,
    eta: f64,
    optimal_time: Option<f64>,
    converged: bool,
    noiseless: Branch,
    noisy: Branch,
    noise_branch: &'static str,
    x_orbit_bound: OrbitBound,
}

pub fn figure2(ctx: &mut Context) -> Result<Status, RunError> {
    let table = ctx
        .config
        .figure2
        .clone()
        .unwrap_or_else(|| toml::from_str::<crate::config::Figure2Table>("").expect("all fields defaulted"));
    let problem = figure2_problem(table.h_max, table.dt, table.horizon, table.eta);
    problem.validate().map_err(|e| field_err("figure2", e))?;
    let opt = ctx.config.optimizer()?;
    let report: OptimizationReport = solve_deterministic(&problem, &opt)?;
    let schedule = &report.schedule;
    ctx.out.schedule_csv("schedule.csv", schedule)?;

    let realization = match table.noise_branch {
        NoiseBranch::AllError => NoiseRealization::all_error(2, table.horizon)?,
        NoiseBranch::Sampled => {
            let params = NoiseParams::new(table.lambda_e, table.lambda_c).map_err(|e| field_err("figure2", e))?;
            let seed = ctx.seed("a sampled noise branch")?;
            build_scenarios(&params, table.horizon, 2, 1, seed)?
                .realizations
                .remove(0)
        }
    };
    let mut branch = |name: &str, r: Option<&NoiseRealization>| -> Result<Branch, RunError> {
        let traj = propagate(schedule, r, &problem.set)?;
        let states = apply_to_state(&traj, &ground_state(2))?;
        ctx.out.bloch_csv(name, &states)?;
        Ok(Branch {
            hitting_time: hitting_time(&traj, &problem.target, problem.eta, true),
            final_distance: sup_distance(traj.final_unitary(), &problem.target, true)?,
        })
    };
    let noiseless = branch("bloch_noiseless.csv", None)?;
    let noisy = branch("bloch_noisy.csv", Some(&realization))?;
    ctx.out.json(
        "figure2.json",
        &Figure2Summary {
            h_max: table.h_max,
            dt: table.dt,
            horizon: table.horizon,
            eta: table.eta,
            optimal_time: report.best_time(),
            converged: report.converged,
            noiseless,
            noisy,
            noise_branch: match table.noise_branch {
                NoiseBranch::AllError => "all_error",
                NoiseBranch::Sampled => "sampled",
            },
            x_orbit_bound: figure2_error_orbit_bound(),
        },
    )?;
    ctx.out.json("report.json", &report)?;
    Ok(if report.converged {
        Status::Success
    } else {
        Status::Infeasible("noise-free solve did not converge".into())
    })
}
