//! Closed-form budget trajectories for the quadratic rule without interest.
//!
//! Each regime has its own solution:
//!
//! | regime    | `b(t)`                                                   |
//! |-----------|----------------------------------------------------------|
//! | surplus   | `b_s (b0 + b_s tanh(a b_s t)) / (b_s + b0 tanh(a b_s t))` |
//! | deficit   | `b_N tan(atan(b0 / b_N) - b_N a t)`, `t <= t0`            |
//! | balanced  | `b0 / (1 + a b0 t)`                                      |
//! | debt      | `gamma t + b0`                                           |
//!
//! [`compose`] chains them across `b = 0` into one continuous trajectory.
//! The interest rate carried by [`ModelParams`] is ignored here.

use serde::Serialize;

use crate::error::{ModelError, Result};
use crate::model::{ModelParams, Regime};

/// Beyond this value of `a b_s t` the surplus solution equals `b_s` to double precision.
pub const SURPLUS_SATURATION: f64 = 50.0;

fn domain(solution: &'static str, reason: impl Into<String>) -> ModelError {
    ModelError::Domain {
        solution,
        reason: reason.into(),
    }
}

fn check_time(solution: &'static str, t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(domain(solution, format!("time {t} is not a finite value >= 0")))
    }
}

fn check_solvent(solution: &'static str, b0: f64) -> Result<()> {
    if b0 >= 0.0 && b0.is_finite() {
        Ok(())
    } else {
        Err(domain(solution, format!("initial budget {b0} is negative")))
    }
}

/// Budget at time `t` for `gamma > 0`, `b0 >= 0`.
pub fn solve_surplus(t: f64, b0: f64, params: &ModelParams) -> Result<f64> {
    let b_s = params
        .b_s()
        .ok_or_else(|| domain("surplus", format!("gamma = {} is not positive", params.gamma())))?;
    check_solvent("surplus", b0)?;
    check_time("surplus", t)?;
    Ok(surplus_at(t, b0, b_s, params.a()))
}

/// Written as `b_s + b_s (b0 - b_s)(1 - T) / (b_s + b0 T)` with `1 - T` from
/// `exp(-2x)`, so the approach to `b_s` keeps full relative accuracy.
fn surplus_at(t: f64, b0: f64, b_s: f64, a: f64) -> f64 {
    if t == 0.0 {
        return b0;
    }
    let x = a * b_s * t;
    if x > SURPLUS_SATURATION {
        return b_s;
    }
    let u = (-2.0 * x).exp();
    let tanh = (1.0 - u) / (1.0 + u);
    let one_minus_tanh = 2.0 * u / (1.0 + u);
    b_s + b_s * (b0 - b_s) * one_minus_tanh / (b_s + b0 * tanh)
}

/// Budget at time `t` for `gamma < 0`, valid until it reaches zero at [`time_to_zero`].
pub fn solve_deficit(t: f64, b0: f64, params: &ModelParams) -> Result<f64> {
    let b_n = params
        .b_n()
        .ok_or_else(|| domain("deficit", format!("gamma = {} is not negative", params.gamma())))?;
    check_solvent("deficit", b0)?;
    check_time("deficit", t)?;
    let t0 = zero_time(b0, b_n, params.a());
    if t > t0 {
        return Err(domain(
            "deficit",
            format!("t = {t} is past the vanishing time t0 = {t0}"),
        ));
    }
    Ok(deficit_at(t, b0, b_n, params.a()))
}

fn deficit_at(t: f64, b0: f64, b_n: f64, a: f64) -> f64 {
    // tan(atan(x)) is not exact
    if t == 0.0 {
        return b0;
    }
    let phase = (b0 / b_n).atan() - b_n * a * t;
    b_n * phase.max(0.0).tan()
}

fn zero_time(b0: f64, b_n: f64, a: f64) -> f64 {
    (b0 / b_n).atan() / (b_n * a)
}

/// Affine evolution while in debt: expenditure is pinned at `c0`.
pub fn solve_debt(t: f64, b0: f64, params: &ModelParams) -> f64 {
    params.gamma() * t + b0
}

/// Budget at time `t` for `gamma = 0`, `b0 >= 0`.
pub fn solve_balanced(t: f64, b0: f64, params: &ModelParams) -> Result<f64> {
    if params.gamma() != 0.0 {
        return Err(domain(
            "balanced",
            format!("gamma = {} is not zero", params.gamma()),
        ));
    }
    check_solvent("balanced", b0)?;
    check_time("balanced", t)?;
    Ok(b0 / (1.0 + params.a() * b0 * t))
}

/// Time at which a deficit budget starting from `b0` is exhausted.
pub fn time_to_zero(b0: f64, params: &ModelParams) -> Result<f64> {
    let b_n = params
        .b_n()
        .ok_or_else(|| domain("deficit", format!("gamma = {} is not negative", params.gamma())))?;
    check_solvent("deficit", b0)?;
    Ok(zero_time(b0, b_n, params.a()))
}

/// Closed form of one regime, evaluated in time measured from its own start.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "regime")]
pub enum AnalyticSolution {
    SurplusSolvent { a: f64, b0: f64, b_s: f64 },
    DeficitSolvent { a: f64, b0: f64, b_n: f64, t0: f64 },
    BalancedSolvent { a: f64, b0: f64 },
    Debt { gamma: f64, b0: f64 },
}

impl AnalyticSolution {
    /// Solution through `b0` in the regime `b0` belongs to.
    pub fn new(b0: f64, params: &ModelParams) -> Result<Self> {
        if !b0.is_finite() {
            return Err(domain("analytic", format!("initial budget {b0} is not finite")));
        }
        let a = params.a();
        Ok(match Regime::classify(b0, params) {
            Regime::Debt => AnalyticSolution::Debt {
                gamma: params.gamma(),
                b0,
            },
            Regime::SurplusSolvent => AnalyticSolution::SurplusSolvent {
                a,
                b0,
                b_s: params.b_s().expect("gamma > 0"),
            },
            Regime::DeficitSolvent => {
                let b_n = params.b_n().expect("gamma < 0");
                AnalyticSolution::DeficitSolvent {
                    a,
                    b0,
                    b_n,
                    t0: zero_time(b0, b_n, a),
                }
            }
            Regime::BalancedSolvent => AnalyticSolution::BalancedSolvent { a, b0 },
        })
    }

    fn debt(gamma: f64, b0: f64) -> Self {
        AnalyticSolution::Debt { gamma, b0 }
    }

    pub fn regime(&self) -> Regime {
        match self {
            AnalyticSolution::SurplusSolvent { .. } => Regime::SurplusSolvent,
            AnalyticSolution::DeficitSolvent { .. } => Regime::DeficitSolvent,
            AnalyticSolution::BalancedSolvent { .. } => Regime::BalancedSolvent,
            AnalyticSolution::Debt { .. } => Regime::Debt,
        }
    }

    pub fn b0(&self) -> f64 {
        match *self {
            AnalyticSolution::SurplusSolvent { b0, .. }
            | AnalyticSolution::DeficitSolvent { b0, .. }
            | AnalyticSolution::BalancedSolvent { b0, .. }
            | AnalyticSolution::Debt { b0, .. } => b0,
        }
    }

    pub fn b_s(&self) -> Option<f64> {
        match *self {
            AnalyticSolution::SurplusSolvent { b_s, .. } => Some(b_s),
            _ => None,
        }
    }

    pub fn b_n(&self) -> Option<f64> {
        match *self {
            AnalyticSolution::DeficitSolvent { b_n, .. } => Some(b_n),
            _ => None,
        }
    }

    /// Vanishing time of a deficit solution.
    pub fn t0(&self) -> Option<f64> {
        match *self {
            AnalyticSolution::DeficitSolvent { t0, .. } => Some(t0),
            _ => None,
        }
    }

    /// Latest local time at which the solution stays in its regime.
    pub fn horizon(&self) -> f64 {
        match *self {
            AnalyticSolution::DeficitSolvent { t0, .. } => t0,
            AnalyticSolution::Debt { gamma, b0 } if gamma > 0.0 => -b0 / gamma,
            _ => f64::INFINITY,
        }
    }

    /// Value at local time `t >= 0`; deficit solutions are valid up to `t0`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        check_time("analytic", t)?;
        Ok(match *self {
            AnalyticSolution::SurplusSolvent { a, b0, b_s } => surplus_at(t, b0, b_s, a),
            AnalyticSolution::DeficitSolvent { a, b0, b_n, t0 } => {
                if t > t0 {
                    return Err(domain(
                        "deficit",
                        format!("t = {t} is past the vanishing time t0 = {t0}"),
                    ));
                }
                deficit_at(t, b0, b_n, a)
            }
            AnalyticSolution::BalancedSolvent { a, b0 } => b0 / (1.0 + a * b0 * t),
            AnalyticSolution::Debt { gamma, b0 } => gamma * t + b0,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Segment {
    pub t_start: f64,
    pub t_end: f64,
    pub solution: AnalyticSolution,
}

/// Regime-by-regime closed form over `[0, t_end]`, continuous at each switch.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompositeSolution {
    pub segments: Vec<Segment>,
    pub switch_times: Vec<f64>,
}

impl CompositeSolution {
    pub fn t_end(&self) -> f64 {
        self.segments.last().map_or(0.0, |s| s.t_end)
    }

    /// Segment covering `t`; at a switch time the later segment wins.
    pub fn segment_at(&self, t: f64) -> Option<&Segment> {
        if !(t >= 0.0 && t <= self.t_end()) {
            return None;
        }
        self.segments
            .iter()
            .rev()
            .find(|s| t >= s.t_start)
            .or_else(|| self.segments.first())
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        let seg = self.segment_at(t).ok_or_else(|| {
            domain(
                "composite",
                format!("t = {t} outside [0, {}]", self.t_end()),
            )
        })?;
        let local = (t - seg.t_start).max(0.0);
        match seg.solution {
            // rounding in `t - t_start` may step a hair past t0
            AnalyticSolution::DeficitSolvent { t0, .. } => seg.solution.eval(local.min(t0)),
            s => s.eval(local),
        }
    }

    pub fn regime_at(&self, t: f64) -> Option<Regime> {
        self.segment_at(t).map(|s| s.solution.regime())
    }
}

/// Continue the closed forms across `b = 0` up to `t_end`.
///
/// A deficit budget that runs out enters debt with the same `gamma`; a debt
/// repaid under `gamma > 0` re-enters the surplus branch from `b = 0`.
/// Surplus and balanced budgets never leave their regime.
pub fn compose(b0: f64, params: &ModelParams, t_end: f64) -> Result<CompositeSolution> {
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(domain("composite", format!("t_end = {t_end} is not positive")));
    }
    let mut segments = Vec::new();
    let mut switch_times = Vec::new();
    let mut t = 0.0;
    let mut solution = AnalyticSolution::new(b0, params)?;

    loop {
        let horizon = solution.horizon();
        let end = t + horizon;
        if end >= t_end || end.is_nan() {
            segments.push(Segment {
                t_start: t,
                t_end,
                solution,
            });
            break;
        }
        if horizon > 0.0 {
            segments.push(Segment {
                t_start: t,
                t_end: end,
                solution,
            });
        }
        switch_times.push(end);
        t = end;
        solution = match solution.regime() {
            Regime::DeficitSolvent => AnalyticSolution::debt(params.gamma(), 0.0),
            Regime::Debt => AnalyticSolution::new(0.0, params)?,
            r => unreachable!("{r} has an unbounded horizon"),
        };
    }

    Ok(CompositeSolution {
        segments,
        switch_times,
    })
}
