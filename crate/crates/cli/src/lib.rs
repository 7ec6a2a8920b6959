//! Command-line driver: turns a scenario file into CSV/JSON data files.

pub mod config;
pub mod output;

use std::path::{Path, PathBuf};

use budget_core::{
    compose, integrate, iterate_discrete, phase_portrait, sweep, validate, CrossingDirection,
    ExpenditureRule, ModelError, Regime, Sample, Trajectory, TrajectorySource, ZeroCrossing,
};
use thiserror::Error;

pub use config::{load, RunKind, ScenarioConfig, TrajectoryKind};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("runtime error: {0}")]
    Runtime(String),
}

impl CliError {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

/// Files written by a run, in the order they were produced.
#[derive(Debug, Default)]
pub struct RunOutcome {
    pub written: Vec<PathBuf>,
    /// Output that had no destination file.
    pub stdout: String,
}

/// Load, override and execute one scenario.
pub fn run(
    kind: RunKind,
    config_path: Option<&Path>,
    out: Option<&Path>,
    sets: &[String],
) -> Result<RunOutcome, CliError> {
    let mut cfg = load(config_path, sets, kind)?;
    if let Some(out) = out {
        cfg.output = Some(out.to_owned());
    }
    execute(&cfg)
}

pub fn execute(cfg: &ScenarioConfig) -> Result<RunOutcome, CliError> {
    let mut outcome = RunOutcome::default();
    let target = cfg.output.as_deref();
    match cfg.run {
        RunKind::Simulate => {
            let traj = simulate(cfg)?;
            let csv = output::trajectory_csv(&traj, &cfg.model.params);
            emit(&mut outcome, target, csv)?;
        }
        RunKind::FixedPoints => {
            let report = cfg.model.fixed_points();
            emit(&mut outcome, target, output::fixed_points_csv(cfg.model.gamma(), &report))?;
        }
        RunKind::PhasePortrait => {
            let opts = cfg.portrait.expect("checked when loading");
            let points = phase_portrait(&cfg.model, opts.b_min, opts.b_max, opts.n)
                .map_err(|e| config_from_model("portrait", e))?;
            emit(&mut outcome, target, output::portrait_csv(&points))?;
        }
        RunKind::Sweep => {
            let spec = cfg.sweep.as_ref().expect("checked when loading");
            let rows = sweep(spec)?;
            emit(&mut outcome, target, output::sweep_csv(spec, &rows))?;
        }
        RunKind::Validate => {
            let b0 = cfg.require_b0()?;
            let integrator = cfg.require_integrator()?;
            let tolerances = cfg.validate.tolerances.unwrap_or_default();
            let id = cfg.validate.id.clone().unwrap_or_else(|| "validate".to_owned());
            let report = validate(&cfg.model, b0, integrator, &tolerances, &id).map_err(|e| match e {
                ModelError::RequiresQuadratic => CliError::config(
                    "rule",
                    "validation needs the quadratic rule without interest",
                ),
                other => other.into(),
            })?;
            let numeric = integrate(b0, &cfg.model, integrator)?;
            let exact = compose(b0, &cfg.model.params, integrator.t_end)?;
            let json = output::report_json(&report);
            match target {
                Some(path) => {
                    let csv = output::comparison_csv(&numeric, &exact)?;
                    let report_path = cfg
                        .validate
                        .report
                        .clone()
                        .unwrap_or_else(|| path.with_extension("json"));
                    // both files are staged before either is renamed into place
                    let staged = [
                        output::stage(path, csv.as_bytes())?,
                        output::stage(&report_path, json.as_bytes())?,
                    ];
                    for (file, dest) in staged.into_iter().zip([path.to_owned(), report_path]) {
                        file.persist(&dest).map_err(|e| CliError::Runtime(e.to_string()))?;
                        outcome.written.push(dest);
                    }
                }
                None => outcome.stdout.push_str(&json),
            }
        }
    }
    Ok(outcome)
}

fn config_from_model(section: &str, e: ModelError) -> CliError {
    match e {
        ModelError::InvalidParameter { name, value, bound } => {
            CliError::config(format!("{section}.{name}"), format!("value {value} violates {bound}"))
        }
        other => other.into(),
    }
}

fn emit(outcome: &mut RunOutcome, target: Option<&Path>, body: String) -> Result<(), CliError> {
    match target {
        Some(path) => {
            output::write_atomic(path, body.as_bytes())?;
            outcome.written.push(path.to_owned());
        }
        None => outcome.stdout.push_str(&body),
    }
    Ok(())
}

/// Trajectory selected by `simulate.source`.
pub fn simulate(cfg: &ScenarioConfig) -> Result<Trajectory, CliError> {
    let b0 = cfg.require_b0()?;
    match cfg.simulate.source {
        TrajectoryKind::Integrator => Ok(integrate(b0, &cfg.model, cfg.require_integrator()?)?),
        TrajectoryKind::Discrete => {
            let n = cfg.simulate.periods.expect("checked when loading");
            Ok(iterate_discrete(b0, n, &cfg.model))
        }
        TrajectoryKind::Analytic => {
            let integrator = cfg.require_integrator()?;
            if cfg.model.rule != ExpenditureRule::Quadratic || cfg.model.rho() != 0.0 {
                return Err(CliError::config(
                    "simulate.source",
                    "closed forms exist only for the quadratic rule without interest",
                ));
            }
            let exact = compose(b0, &cfg.model.params, integrator.t_end)?;
            let samples = integrator
                .grid()
                .into_iter()
                .map(|t| exact.eval(t).map(|b| Sample { t, b }))
                .collect::<Result<Vec<_>, _>>()?;
            let events = exact
                .switch_times
                .iter()
                .map(|&t| {
                    let entering_debt = exact.regime_at(t) == Some(Regime::Debt);
                    ZeroCrossing {
                        t,
                        direction: if entering_debt {
                            CrossingDirection::DownThroughZero
                        } else {
                            CrossingDirection::UpThroughZero
                        },
                        b: 0.0,
                    }
                })
                .collect();
            Ok(Trajectory {
                samples,
                source: TrajectorySource::Analytic,
                events,
            })
        }
    }
}
