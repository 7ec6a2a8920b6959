//! Fixed-step integration of the budget drift, the per-period savings
//! recurrence, and zero-crossing detection.
//!
//! Nothing here uses the closed forms, so trajectories produced by this
//! module serve as an independent check on [`crate::analytic`].

use serde::{Deserialize, Serialize};

use crate::error::{check, ModelError, Result};
use crate::model::Model;

/// Largest admissible |interpolated b| at a recorded crossing.
pub const EVENT_RESIDUAL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Euler,
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    pub method: Method,
    pub dt: f64,
    pub t_end: f64,
    /// Width to which crossing times are refined.
    pub event_tolerance: f64,
}

impl IntegratorConfig {
    pub fn new(method: Method, dt: f64, t_end: f64) -> Self {
        Self {
            method,
            dt,
            t_end,
            event_tolerance: (dt * 1e-6).max(1e-12),
        }
    }

    pub fn validate(&self) -> Result<()> {
        check("dt", self.dt, self.dt > 0.0, "dt > 0")?;
        check("t_end", self.t_end, self.t_end > 0.0, "t_end > 0")?;
        check(
            "event_tolerance",
            self.event_tolerance,
            self.event_tolerance > 0.0 && self.event_tolerance <= self.dt,
            "0 < event_tolerance <= dt",
        )
    }

    /// Sample times `0, dt, 2 dt, ...` closed exactly at `t_end`.
    pub fn grid(&self) -> Vec<f64> {
        let ratio = self.t_end / self.dt;
        let nearest = ratio.round();
        let steps = if (ratio - nearest).abs() <= 1e-9 * nearest.max(1.0) {
            nearest
        } else {
            ratio.ceil()
        }
        .max(1.0) as usize;
        let mut grid: Vec<f64> = (0..steps).map(|k| k as f64 * self.dt).collect();
        grid.push(self.t_end);
        grid
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CrossingDirection {
    DownThroughZero,
    UpThroughZero,
}

/// A sign change of the budget located inside one step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZeroCrossing {
    pub t: f64,
    pub direction: CrossingDirection,
    /// Linear interpolant of the step evaluated at `t`.
    pub b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample {
    pub t: f64,
    pub b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "source", rename_all = "lowercase")]
pub enum TrajectorySource {
    Integrator(IntegratorConfig),
    Discrete,
    Analytic,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub source: TrajectorySource,
    pub events: Vec<ZeroCrossing>,
}

impl Trajectory {
    pub fn last(&self) -> Sample {
        *self.samples.last().expect("trajectory has at least one sample")
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.t)
    }
}

/// `n` periods of the savings recurrence from `b0`, sampled at integer times.
pub fn iterate_discrete(b0: f64, n: usize, model: &Model) -> Trajectory {
    let mut samples = Vec::with_capacity(n + 1);
    let mut b = b0;
    samples.push(Sample { t: 0.0, b });
    for k in 1..=n {
        b = model.step_discrete(b);
        samples.push(Sample { t: k as f64, b });
    }
    Trajectory {
        samples,
        source: TrajectorySource::Discrete,
        events: Vec::new(),
    }
}

fn step(model: &Model, method: Method, b: f64, h: f64) -> f64 {
    match method {
        Method::Euler => b + h * model.drift(b),
        Method::Rk4 => {
            let k1 = model.drift(b);
            let k2 = model.drift(b + 0.5 * h * k1);
            let k3 = model.drift(b + 0.5 * h * k2);
            let k4 = model.drift(b + h * k3);
            b + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        }
    }
}

/// Crossing of zero between two consecutive samples, if any.
///
/// `b = 0` is solvent, so a step leaving zero downwards is a crossing while a
/// step landing on zero from above is not.
fn crossing(prev: Sample, next: Sample, tolerance: f64) -> Option<ZeroCrossing> {
    let direction = if prev.b >= 0.0 && next.b < 0.0 {
        CrossingDirection::DownThroughZero
    } else if prev.b < 0.0 && next.b >= 0.0 {
        CrossingDirection::UpThroughZero
    } else {
        return None;
    };
    let h = next.t - prev.t;
    let line = |tau: f64| prev.b + (next.b - prev.b) * (tau / h);
    let (mut lo, mut hi) = (0.0, h);
    let mut mid = 0.5 * h;
    for _ in 0..200 {
        mid = 0.5 * (lo + hi);
        let value = line(mid);
        if hi - lo <= tolerance && value.abs() <= EVENT_RESIDUAL {
            break;
        }
        if mid <= lo || mid >= hi {
            break;
        }
        // keep the bracket [lo, hi] with line(lo) on prev's side
        if (value >= 0.0) == (prev.b >= 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(ZeroCrossing {
        t: prev.t + mid,
        direction,
        b: line(mid),
    })
}

/// Fixed-step integration of the drift from `b0` over `[0, cfg.t_end]`.
pub fn integrate(b0: f64, model: &Model, cfg: &IntegratorConfig) -> Result<Trajectory> {
    cfg.validate()?;
    if !b0.is_finite() {
        return Err(ModelError::NonFinite { last_good_t: 0.0 });
    }
    let grid = cfg.grid();
    let mut samples = Vec::with_capacity(grid.len());
    let mut events = Vec::new();
    let mut prev = Sample { t: 0.0, b: b0 };
    samples.push(prev);
    for &t in &grid[1..] {
        let b = step(model, cfg.method, prev.b, t - prev.t);
        if !b.is_finite() {
            return Err(ModelError::NonFinite {
                last_good_t: prev.t,
            });
        }
        let next = Sample { t, b };
        if let Some(event) = crossing(prev, next, cfg.event_tolerance) {
            events.push(event);
        }
        samples.push(next);
        prev = next;
    }
    Ok(Trajectory {
        samples,
        source: TrajectorySource::Integrator(*cfg),
        events,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelParams;

    fn rk4(dt: f64, t_end: f64) -> IntegratorConfig {
        IntegratorConfig {
            method: Method::Rk4,
            dt,
            t_end,
            event_tolerance: 1e-9,
        }
    }

    #[test]
    fn grid_lands_on_t_end() {
        let g = rk4(0.1, 4.0).grid();
        assert_eq!(g.len(), 41);
        assert_eq!(*g.last().unwrap(), 4.0);
        let g = rk4(0.3, 1.0).grid();
        assert_eq!(g, vec![0.0, 0.3, 0.6, 0.8999999999999999, 1.0]);
    }

    #[test]
    fn config_validation() {
        assert!(rk4(0.0, 1.0).validate().is_err());
        assert!(rk4(-1e-3, 1.0).validate().is_err());
        assert!(rk4(1e-3, 0.0).validate().is_err());
        let mut cfg = rk4(1e-3, 1.0);
        cfg.event_tolerance = 1e-2;
        assert!(cfg.validate().is_err());
        let model = Model::quadratic(ModelParams::new(1.0, 1.0, 2.0).unwrap());
        assert!(matches!(
            integrate(1.0, &model, &rk4(0.0, 1.0)),
            Err(ModelError::InvalidParameter { name: "dt", .. })
        ));
    }

    #[test]
    fn fixed_point_trajectory_is_constant() {
        let model = Model::quadratic(ModelParams::from_fixed_point(0.125, 1.0, 10.0).unwrap());
        let traj = integrate(10.0, &model, &rk4(1e-2, 5.0)).unwrap();
        assert!(traj.samples.iter().all(|s| s.b == 10.0));
        assert!(traj.events.is_empty());
        assert_eq!(traj.samples[0], Sample { t: 0.0, b: 10.0 });
    }

    #[test]
    fn deficit_anchor_crossing() {
        let model = Model::quadratic(ModelParams::from_gamma(0.125, -12.5).unwrap());
        let traj = integrate(10.0, &model, &rk4(1e-3, 1.0)).unwrap();
        assert_eq!(traj.events.len(), 1);
        let ev = traj.events[0];
        assert_eq!(ev.direction, CrossingDirection::DownThroughZero);
        assert!((ev.t - 0.6283185307179586).abs() < 1e-6, "{}", ev.t);
        assert!(ev.b.abs() <= EVENT_RESIDUAL);
    }

    #[test]
    fn surplus_approaches_fixed_point() {
        let model = Model::quadratic(ModelParams::from_fixed_point(0.125, 1.0, 10.0).unwrap());
        let traj = integrate(15.0, &model, &rk4(1e-3, 10.0)).unwrap();
        assert!((traj.last().b - 10.0).abs() < 1e-6);
    }

    #[test]
    fn debt_repayment_crosses_upwards() {
        let model = Model::quadratic(ModelParams::new(0.125, 1.0, 3.0).unwrap());
        let traj = integrate(-3.0, &model, &rk4(0.01, 3.0)).unwrap();
        assert_eq!(traj.events.len(), 1);
        assert_eq!(traj.events[0].direction, CrossingDirection::UpThroughZero);
        assert!((traj.events[0].t - 1.5).abs() < 1e-9);
    }

    #[test]
    fn blow_up_reports_last_good_time() {
        let model = Model::quadratic(ModelParams::new(1.0, 0.0, 0.0).unwrap());
        let cfg = IntegratorConfig::new(Method::Euler, 0.1, 1.0);
        match integrate(1e200, &model, &cfg) {
            Err(ModelError::NonFinite { last_good_t }) => assert_eq!(last_good_t, 0.0),
            other => panic!("expected non-finite error, got {other:?}"),
        }
    }

    #[test]
    fn discrete_examples() {
        let model = Model::quadratic(ModelParams::new(0.125, 1.0, 1.0).unwrap());
        let traj = iterate_discrete(-3.0, 0, &model);
        assert_eq!(traj.samples, vec![Sample { t: 0.0, b: -3.0 }]);
        let traj = iterate_discrete(-3.0, 25, &model);
        assert!(traj.samples.iter().all(|s| s.b == -3.0));

        let model = Model::quadratic(ModelParams::from_fixed_point(0.125, 1.0, 10.0).unwrap());
        let traj = iterate_discrete(10.0, 10, &model);
        assert_eq!(traj.samples.len(), 11);
        assert!(traj.samples.iter().all(|s| (s.b - 10.0).abs() < 1e-12));
        assert_eq!(traj.last().t, 10.0);
    }
}
