//! JSON scenario files and `--set` overrides.

use std::path::{Path, PathBuf};

use budget_core::{
    ExpenditureRule, IntegratorConfig, Method, Model, ModelError, ModelParams, SweepOutput,
    SweepParam, SweepSpec, Tolerances,
};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum RunKind {
    Simulate,
    FixedPoints,
    Sweep,
    PhasePortrait,
    Validate,
}

impl RunKind {
    pub fn name(self) -> &'static str {
        match self {
            RunKind::Simulate => "simulate",
            RunKind::FixedPoints => "fixed-points",
            RunKind::Sweep => "sweep",
            RunKind::PhasePortrait => "phase-portrait",
            RunKind::Validate => "validate",
        }
    }
}

/// `y0` may be given directly or through the surplus equilibrium `b_s`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawParams {
    pub a: f64,
    #[serde(default)]
    pub c0: f64,
    pub y0: Option<f64>,
    pub b_s: Option<f64>,
    #[serde(default)]
    pub r: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawIntegrator {
    #[serde(default = "default_method")]
    pub method: Method,
    pub dt: f64,
    pub t_end: f64,
    pub event_tolerance: Option<f64>,
}

fn default_method() -> Method {
    Method::Rk4
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrajectoryKind {
    #[default]
    Integrator,
    Analytic,
    Discrete,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateOptions {
    #[serde(default)]
    pub source: TrajectoryKind,
    /// Number of periods for the discrete recurrence.
    pub periods: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSweep {
    pub varying: SweepParam,
    pub values: Vec<f64>,
    #[serde(default = "default_outputs")]
    pub outputs: Vec<SweepOutput>,
}

fn default_outputs() -> Vec<SweepOutput> {
    vec![SweepOutput::FixedPoint]
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PortraitOptions {
    pub b_min: f64,
    pub b_max: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateOptions {
    pub id: Option<String>,
    pub tolerances: Option<Tolerances>,
    /// Where the JSON report goes; defaults to the output path with a `.json` extension.
    pub report: Option<PathBuf>,
}

/// Scenario file as written on disk.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub run: Option<RunKind>,
    pub params: RawParams,
    #[serde(default)]
    pub rule: ExpenditureRule,
    pub b0: Option<f64>,
    #[serde(default)]
    pub include_interest: bool,
    pub integrator: Option<RawIntegrator>,
    pub simulate: Option<SimulateOptions>,
    pub sweep: Option<RawSweep>,
    pub portrait: Option<PortraitOptions>,
    pub validate: Option<ValidateOptions>,
    pub output: Option<PathBuf>,
}

/// Validated configuration for one run.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub run: RunKind,
    pub model: Model,
    pub b0: Option<f64>,
    pub integrator: Option<IntegratorConfig>,
    pub simulate: SimulateOptions,
    pub sweep: Option<SweepSpec>,
    pub portrait: Option<PortraitOptions>,
    pub validate: ValidateOptions,
    pub output: Option<PathBuf>,
}

impl ScenarioConfig {
    pub fn require_b0(&self) -> Result<f64, CliError> {
        self.b0.ok_or_else(|| CliError::config("b0", "missing initial budget"))
    }

    pub fn require_integrator(&self) -> Result<&IntegratorConfig, CliError> {
        self.integrator
            .as_ref()
            .ok_or_else(|| CliError::config("integrator", "missing integrator settings"))
    }
}

fn model_error(section: &str, err: ModelError) -> CliError {
    match err {
        ModelError::InvalidParameter { name, value, bound } => {
            let field = if section.is_empty() {
                name.to_owned()
            } else {
                format!("{section}.{name}")
            };
            CliError::config(field, format!("value {value} violates {bound}"))
        }
        other => CliError::config(section, other.to_string()),
    }
}

/// Merge `key=value` overrides into a parsed config document.
///
/// Keys are dotted paths (`params.a`, `integrator.dt`); values are parsed as
/// JSON and fall back to plain strings.
pub fn apply_overrides(doc: &mut Value, sets: &[String]) -> Result<(), CliError> {
    for set in sets {
        let (key, raw) = set
            .split_once('=')
            .ok_or_else(|| CliError::config(set.clone(), "override must look like key=value"))?;
        let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_owned()));
        let mut node = &mut *doc;
        let parts: Vec<&str> = key.split('.').collect();
        for (i, part) in parts.iter().enumerate() {
            if part.is_empty() {
                return Err(CliError::config(key, "empty path segment"));
            }
            if !node.is_object() {
                if node.is_null() {
                    *node = Value::Object(Default::default());
                } else {
                    return Err(CliError::config(
                        parts[..i].join("."),
                        "cannot override a field inside a non-object value",
                    ));
                }
            }
            let map = node.as_object_mut().expect("object");
            if i + 1 == parts.len() {
                map.insert((*part).to_owned(), value.clone());
                break;
            }
            node = map.entry(*part).or_insert(Value::Null);
        }
    }
    Ok(())
}

/// Read a config file (or start empty), apply overrides and validate.
pub fn load(
    path: Option<&Path>,
    sets: &[String],
    run: RunKind,
) -> Result<ScenarioConfig, CliError> {
    let mut doc = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::config("--config", format!("{}: {e}", p.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::config("--config", format!("not valid JSON: {e}")))?
        }
        None => Value::Object(Default::default()),
    };
    apply_overrides(&mut doc, sets)?;
    let raw: RawConfig = serde_path_to_error::deserialize(doc).map_err(|e| {
        let path = e.path().to_string();
        CliError::config(path, e.into_inner().to_string())
    })?;
    resolve(raw, run)
}

pub fn resolve(raw: RawConfig, run: RunKind) -> Result<ScenarioConfig, CliError> {
    if let Some(declared) = raw.run {
        if declared != run {
            return Err(CliError::config(
                "run",
                format!(
                    "config declares `{}` but `{}` was requested",
                    declared.name(),
                    run.name()
                ),
            ));
        }
    }

    let p = &raw.params;
    let y0 = match (p.y0, p.b_s) {
        (Some(y0), None) => y0,
        (None, Some(b_s)) => {
            if !(b_s >= 0.0 && b_s.is_finite()) {
                return Err(CliError::config("params.b_s", format!("value {b_s} violates b_s >= 0")));
            }
            p.c0 + p.a * b_s * b_s
        }
        (Some(_), Some(_)) => {
            return Err(CliError::config("params.b_s", "give either y0 or b_s, not both"))
        }
        (None, None) => return Err(CliError::config("params.y0", "missing income (y0 or b_s)")),
    };
    let params = ModelParams::with_interest(p.a, p.c0, y0, p.r).map_err(|e| model_error("params", e))?;
    let model = Model::new(params, raw.rule)
        .map_err(|e| model_error("rule", e))?
        .with_interest(raw.include_interest);

    if let Some(b0) = raw.b0 {
        if !b0.is_finite() {
            return Err(CliError::config("b0", "must be finite"));
        }
    }

    let integrator = raw
        .integrator
        .map(|ri| {
            let mut cfg = IntegratorConfig::new(ri.method, ri.dt, ri.t_end);
            if let Some(tol) = ri.event_tolerance {
                cfg.event_tolerance = tol;
            }
            cfg.validate().map(|_| cfg).map_err(|e| model_error("integrator", e))
        })
        .transpose()?;

    let sweep = match raw.sweep {
        Some(rs) => {
            let b0 = match (raw.b0, rs.varying) {
                (Some(b0), _) => b0,
                (None, SweepParam::B0) => 0.0,
                (None, _) => return Err(CliError::config("b0", "missing initial budget")),
            };
            let mut outputs = rs.outputs;
            outputs.sort();
            outputs.dedup();
            let spec = SweepSpec {
                varying: rs.varying,
                values: rs.values,
                base: model,
                b0,
                outputs,
                integrator,
            };
            spec.validate().map_err(|e| match e {
                ModelError::InvalidParameter { value, bound, .. } => CliError::config(
                    "sweep.values",
                    format!("value {value} for `{}` violates {bound}", rs.varying),
                ),
                other => CliError::config("sweep", other.to_string()),
            })?;
            Some(spec)
        }
        None if run == RunKind::Sweep => {
            return Err(CliError::config("sweep", "missing sweep settings"))
        }
        None => None,
    };

    if run == RunKind::PhasePortrait && raw.portrait.is_none() {
        return Err(CliError::config("portrait", "missing portrait settings"));
    }

    let config = ScenarioConfig {
        run,
        model,
        b0: raw.b0,
        integrator,
        simulate: raw.simulate.unwrap_or_default(),
        sweep,
        portrait: raw.portrait,
        validate: raw.validate.unwrap_or_default(),
        output: raw.output,
    };

    match run {
        RunKind::Simulate => {
            config.require_b0()?;
            match config.simulate.source {
                TrajectoryKind::Discrete => {
                    if config.simulate.periods.is_none() {
                        return Err(CliError::config("simulate.periods", "missing period count"));
                    }
                }
                _ => {
                    config.require_integrator()?;
                }
            }
        }
        RunKind::Validate => {
            config.require_b0()?;
            config.require_integrator()?;
        }
        _ => {}
    }
    Ok(config)
}
