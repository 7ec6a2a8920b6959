//! Batch experiments: phase portraits, parameter sweeps and closed-form versus
//! numerical validation.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{compose, time_to_zero};
use crate::error::{ModelError, Result};
use crate::model::{ExpenditureRule, Model, ModelParams, Stability};
use crate::numeric::{integrate, IntegratorConfig, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PortraitPoint {
    pub b: f64,
    pub dbdt: f64,
}

/// `n` evenly spaced samples of the drift on `[b_min, b_max]`.
pub fn phase_portrait(model: &Model, b_min: f64, b_max: f64, n: usize) -> Result<Vec<PortraitPoint>> {
    if !(b_min.is_finite() && b_max.is_finite() && b_min < b_max) {
        return Err(ModelError::InvalidParameter {
            name: "b_max",
            value: b_max,
            bound: "b_min < b_max, both finite",
        });
    }
    if n < 2 {
        return Err(ModelError::InvalidParameter {
            name: "n",
            value: n as f64,
            bound: "n >= 2",
        });
    }
    let span = b_max - b_min;
    let last = (n - 1) as f64;
    Ok((0..n)
        .map(|i| {
            let b = if i + 1 == n {
                b_max
            } else {
                b_min + span * (i as f64 / last)
            };
            PortraitPoint {
                b,
                dbdt: model.drift(b),
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    A,
    C0,
    Y0,
    B0,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::A => "a",
            SweepParam::C0 => "c0",
            SweepParam::Y0 => "y0",
            SweepParam::B0 => "b0",
        }
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepOutput {
    FixedPoint,
    T0,
    FinalB,
    MaxError,
}

/// One-parameter family of scenarios sharing everything but the varied value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSpec {
    pub varying: SweepParam,
    pub values: Vec<f64>,
    pub base: Model,
    pub b0: f64,
    pub outputs: Vec<SweepOutput>,
    /// Needed for `final_b` and `max_error`.
    pub integrator: Option<IntegratorConfig>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(ModelError::Sweep("no values to sweep".into()));
        }
        if self.outputs.is_empty() {
            return Err(ModelError::Sweep("no outputs requested".into()));
        }
        for &v in &self.values {
            self.scenario(v)?;
        }
        let needs_integrator = self
            .outputs
            .iter()
            .any(|o| matches!(o, SweepOutput::FinalB | SweepOutput::MaxError));
        match &self.integrator {
            Some(cfg) => cfg.validate(),
            None if needs_integrator => Err(ModelError::Sweep(
                "final_b and max_error need integrator settings".into(),
            )),
            None => Ok(()),
        }
    }

    /// Model and initial budget with the varied parameter set to `value`.
    pub fn scenario(&self, value: f64) -> Result<(Model, f64)> {
        if !value.is_finite() {
            return Err(ModelError::InvalidParameter {
                name: self.varying.name(),
                value,
                bound: "finite",
            });
        }
        let p = self.base.params;
        let (a, c0, y0, mut b0) = (p.a(), p.c0(), p.y0(), self.b0);
        let params = match self.varying {
            SweepParam::A => ModelParams::with_interest(value, c0, y0, p.r())?,
            SweepParam::C0 => ModelParams::with_interest(a, value, y0, p.r())?,
            SweepParam::Y0 => ModelParams::with_interest(a, c0, value, p.r())?,
            SweepParam::B0 => {
                b0 = value;
                p
            }
        };
        let model = Model {
            params,
            ..self.base
        };
        Ok((model, b0))
    }
}

/// Result of one sweep value; `error` is set when the row could not be completed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub gamma: f64,
    pub b_star: Option<f64>,
    pub stability: Option<Stability>,
    pub debt_continuum: bool,
    pub t0: Option<f64>,
    pub final_b: Option<f64>,
    pub max_error: Option<f64>,
    pub error: Option<String>,
}

/// Rows are evaluated independently and returned in input order.
pub fn sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    Ok(spec
        .values
        .par_iter()
        .map(|&value| sweep_row(spec, value))
        .collect())
}

fn sweep_row(spec: &SweepSpec, value: f64) -> SweepRow {
    let mut row = SweepRow {
        value,
        gamma: f64::NAN,
        b_star: None,
        stability: None,
        debt_continuum: false,
        t0: None,
        final_b: None,
        max_error: None,
        error: None,
    };
    if let Err(e) = fill_row(spec, value, &mut row) {
        row.error = Some(e.to_string());
    }
    row
}

fn fill_row(spec: &SweepSpec, value: f64, row: &mut SweepRow) -> Result<()> {
    let (model, b0) = spec.scenario(value)?;
    row.gamma = model.gamma();
    let wants = |o| spec.outputs.contains(&o);

    if wants(SweepOutput::FixedPoint) {
        let report = model.fixed_points();
        if let Some(p) = report.solvent() {
            row.b_star = Some(p.b_star);
            row.stability = Some(p.stability);
        }
        row.debt_continuum = report.debt_continuum;
    }

    let mut trajectory: Option<Trajectory> = None;
    if wants(SweepOutput::FinalB) || wants(SweepOutput::T0) && !is_closed_form(&model) {
        if let Some(cfg) = &spec.integrator {
            trajectory = Some(integrate(b0, &model, cfg)?);
        }
    }

    if wants(SweepOutput::T0) && b0 >= 0.0 && model.gamma() < 0.0 {
        row.t0 = if is_closed_form(&model) {
            Some(time_to_zero(b0, &model.params)?)
        } else {
            trajectory
                .as_ref()
                .and_then(|t| t.events.first())
                .map(|e| e.t)
        };
    }

    if wants(SweepOutput::FinalB) {
        row.final_b = trajectory.as_ref().map(|t| t.last().b);
    }

    if wants(SweepOutput::MaxError) {
        let cfg = spec.integrator.as_ref().expect("validated");
        let report = validate(&model, b0, cfg, &Tolerances::default(), "sweep")?;
        row.max_error = Some(report.sup_norm_error);
    }
    Ok(())
}

fn is_closed_form(model: &Model) -> bool {
    model.rule == ExpenditureRule::Quadratic && model.rho() == 0.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub sup_norm: f64,
    pub event_time: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            sup_norm: 1e-6,
            event_time: 1e-6,
        }
    }
}

/// Discrepancy between a numerical run and the closed form on the same grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub scenario_id: String,
    pub sup_norm_error: f64,
    /// Largest gap between paired zero crossings; 0 when neither side has any.
    pub event_time_error: f64,
    /// Numerical and closed-form runs disagree on the number of crossings.
    pub event_count_mismatch: bool,
    pub tolerances: Tolerances,
    pub passed: bool,
}

/// Integrate numerically and compare against the composite closed form.
pub fn validate(
    model: &Model,
    b0: f64,
    cfg: &IntegratorConfig,
    tolerances: &Tolerances,
    scenario_id: &str,
) -> Result<ValidationReport> {
    if !is_closed_form(model) {
        return Err(ModelError::RequiresQuadratic);
    }
    let numeric = integrate(b0, model, cfg)?;
    let exact = compose(b0, &model.params, cfg.t_end)?;

    let mut sup_norm_error: f64 = 0.0;
    for s in &numeric.samples {
        let err = (s.b - exact.eval(s.t)?).abs();
        sup_norm_error = sup_norm_error.max(err);
    }

    let event_count_mismatch = numeric.events.len() != exact.switch_times.len();
    let event_time_error = numeric
        .events
        .iter()
        .zip(&exact.switch_times)
        .map(|(e, &t)| (e.t - t).abs())
        .fold(0.0, f64::max);

    let passed = !event_count_mismatch
        && sup_norm_error < tolerances.sup_norm
        && event_time_error < tolerances.event_time;

    Ok(ValidationReport {
        scenario_id: scenario_id.to_owned(),
        sup_norm_error,
        event_time_error,
        event_count_mismatch,
        tolerances: *tolerances,
        passed,
    })
}
