//! Model constants, expenditure rules, the budget drift and its equilibria.
//!
//! The budget `b` evolves as `db/dt = y0 - c(b) + rho * b`, where `c(b)` is the
//! expenditure rule and `rho = r / (r + 1)` is the per-period interest factor
//! (zero unless interest is switched on). With the quadratic rule and no
//! interest the solvent branch reduces to `db/dt + a b^2 = gamma`,
//! `gamma = y0 - c0`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{check, Result};

/// Below this magnitude a linearization is treated as zero.
pub const STABILITY_TIE: f64 = 1e-12;

/// Step of the central difference used to linearize rules without a closed form.
pub const FD_STEP: f64 = 1e-6;

/// Constants of one consumer scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams {
    a: f64,
    c0: f64,
    y0: f64,
    r: f64,
}

impl ModelParams {
    /// Curvature `a > 0`, minimum expenditure `c0 >= 0`, income `y0 >= 0`, no interest.
    pub fn new(a: f64, c0: f64, y0: f64) -> Result<Self> {
        Self::with_interest(a, c0, y0, 0.0)
    }

    pub fn with_interest(a: f64, c0: f64, y0: f64, r: f64) -> Result<Self> {
        check("a", a, a > 0.0, "a > 0")?;
        check("c0", c0, c0 >= 0.0, "c0 >= 0")?;
        check("y0", y0, y0 >= 0.0, "y0 >= 0")?;
        check("r", r, r >= 0.0, "r >= 0")?;
        Ok(Self { a, c0, y0, r })
    }

    /// Parameters whose surplus equilibrium sits at `b_s`: `y0 = c0 + a b_s^2`.
    pub fn from_fixed_point(a: f64, c0: f64, b_s: f64) -> Result<Self> {
        check("b_s", b_s, b_s >= 0.0, "b_s >= 0")?;
        Self::new(a, c0, c0 + a * b_s * b_s)
    }

    /// Parameters with net surplus `gamma`, choosing the smallest admissible `c0`.
    pub fn from_gamma(a: f64, gamma: f64) -> Result<Self> {
        check("gamma", gamma, true, "finite")?;
        if gamma >= 0.0 {
            Self::new(a, 0.0, gamma)
        } else {
            Self::new(a, -gamma, 0.0)
        }
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn y0(&self) -> f64 {
        self.y0
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// Net surplus rate `y0 - c0`.
    pub fn gamma(&self) -> f64 {
        self.y0 - self.c0
    }

    /// Per-period interest factor `r / (r + 1)`.
    pub fn interest_factor(&self) -> f64 {
        self.r / (self.r + 1.0)
    }

    /// Surplus equilibrium `sqrt(gamma / a)`, when `gamma > 0`.
    pub fn b_s(&self) -> Option<f64> {
        let g = self.gamma();
        (g > 0.0).then(|| (g / self.a).sqrt())
    }

    /// Deficit scale `sqrt(|gamma| / a)`, when `gamma < 0`.
    pub fn b_n(&self) -> Option<f64> {
        let g = self.gamma();
        (g < 0.0).then(|| (-g / self.a).sqrt())
    }
}

/// Expenditure rate as a function of the budget.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ExpenditureRule {
    /// `a b^2 + c0` while solvent, `c0` in debt.
    #[default]
    Quadratic,
    /// Leaking-vessel analog: `k sqrt(b) + c0` while solvent, `c0` in debt.
    SqrtHydro { k: f64 },
}

impl ExpenditureRule {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ExpenditureRule::Quadratic => Ok(()),
            ExpenditureRule::SqrtHydro { k } => check("k", k, k >= 0.0, "k >= 0"),
        }
    }

    pub fn expenditure(&self, b: f64, params: &ModelParams) -> f64 {
        if b < 0.0 {
            return params.c0;
        }
        match *self {
            ExpenditureRule::Quadratic => params.a * b * b + params.c0,
            ExpenditureRule::SqrtHydro { k } => k * b.sqrt() + params.c0,
        }
    }
}

/// Dynamical regime selected by the sign of `gamma` and of the budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    SurplusSolvent,
    DeficitSolvent,
    BalancedSolvent,
    Debt,
}

impl Regime {
    /// Total classification; `b = 0` counts as solvent.
    pub fn classify(b: f64, params: &ModelParams) -> Regime {
        if b < 0.0 {
            return Regime::Debt;
        }
        let g = params.gamma();
        if g > 0.0 {
            Regime::SurplusSolvent
        } else if g < 0.0 {
            Regime::DeficitSolvent
        } else {
            Regime::BalancedSolvent
        }
    }

    pub fn is_solvent(self) -> bool {
        self != Regime::Debt
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Stability {
    Stable,
    Unstable,
    /// Attracting from one side only.
    HalfStable,
    /// Zero linearization with neutral flow around the point.
    MarginallyStable,
}

impl fmt::Display for Stability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FixedPoint {
    pub b_star: f64,
    pub stability: Stability,
    /// `d(drift)/db` at the point; `None` at the branch junction `b = 0`.
    pub slope: Option<f64>,
}

/// Equilibria of one model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedPointReport {
    /// Isolated equilibria in increasing order of `b_star`.
    pub points: Vec<FixedPoint>,
    /// Every negative budget is an equilibrium (debt branch with zero net flow).
    pub debt_continuum: bool,
}

impl FixedPointReport {
    pub fn is_empty(&self) -> bool {
        self.points.is_empty() && !self.debt_continuum
    }

    /// Largest equilibrium on the solvent branch.
    pub fn solvent(&self) -> Option<&FixedPoint> {
        self.points.iter().rev().find(|p| p.b_star >= 0.0)
    }
}

/// A parameter set bound to an expenditure rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Model {
    pub params: ModelParams,
    pub rule: ExpenditureRule,
    /// Keep the `r / (r + 1) * b` interest term in the drift.
    pub include_interest: bool,
}

impl Model {
    pub fn new(params: ModelParams, rule: ExpenditureRule) -> Result<Self> {
        rule.validate()?;
        Ok(Self {
            params,
            rule,
            include_interest: false,
        })
    }

    /// The quadratic-rule model without interest.
    pub fn quadratic(params: ModelParams) -> Self {
        Self {
            params,
            rule: ExpenditureRule::Quadratic,
            include_interest: false,
        }
    }

    pub fn with_interest(mut self, on: bool) -> Self {
        self.include_interest = on;
        self
    }

    /// Interest factor actually applied by the drift.
    pub fn rho(&self) -> f64 {
        if self.include_interest {
            self.params.interest_factor()
        } else {
            0.0
        }
    }

    pub fn gamma(&self) -> f64 {
        self.params.gamma()
    }

    pub fn expenditure(&self, b: f64) -> f64 {
        self.rule.expenditure(b, &self.params)
    }

    /// Budget rate of change `y0 - c(b) + rho b`.
    pub fn drift(&self, b: f64) -> f64 {
        let net = self.params.y0 - self.expenditure(b);
        if self.include_interest {
            net + self.params.interest_factor() * b
        } else {
            net
        }
    }

    /// One period of the savings recurrence: `b + y0 - c(b) + r/(r+1) b`.
    ///
    /// Interest is always applied here; with `r = 0` this is the forward Euler
    /// step of unit length.
    pub fn step_discrete(&self, b: f64) -> f64 {
        b + (self.params.y0 - self.expenditure(b) + self.params.interest_factor() * b)
    }

    pub fn regime(&self, b: f64) -> Regime {
        Regime::classify(b, &self.params)
    }

    /// Equilibria of the drift on both branches with their stability.
    pub fn fixed_points(&self) -> FixedPointReport {
        let gamma = self.gamma();
        let rho = self.rho();
        let mut points = Vec::new();

        // Debt branch: drift = gamma + rho b.
        let mut debt_continuum = false;
        if rho > 0.0 {
            let b = -gamma / rho;
            if b < 0.0 {
                points.push(FixedPoint {
                    b_star: b,
                    stability: Stability::Unstable,
                    slope: Some(rho),
                });
            }
        } else if gamma == 0.0 {
            debt_continuum = true;
        }

        // Junction: drift(0) = gamma for every rule.
        if gamma == 0.0 {
            points.push(FixedPoint {
                b_star: 0.0,
                stability: self.junction_stability(),
                slope: None,
            });
        }

        let interior = match self.rule {
            ExpenditureRule::Quadratic => self.quadratic_roots(),
            ExpenditureRule::SqrtHydro { k } => self.sqrt_roots(k),
        };
        for b in interior {
            let slope = match self.rule {
                ExpenditureRule::Quadratic => -2.0 * self.params.a * b + rho,
                ExpenditureRule::SqrtHydro { .. } => self.slope_fd(b),
            };
            points.push(FixedPoint {
                b_star: b,
                stability: classify_slope(slope),
                slope: Some(slope),
            });
        }

        FixedPointReport {
            points,
            debt_continuum,
        }
    }

    /// Positive roots of `gamma + rho b - a b^2`.
    fn quadratic_roots(&self) -> Vec<f64> {
        let (a, gamma, rho) = (self.params.a, self.gamma(), self.rho());
        if rho == 0.0 {
            return if gamma > 0.0 {
                vec![(gamma / a).sqrt()]
            } else {
                Vec::new()
            };
        }
        let disc = rho * rho + 4.0 * a * gamma;
        if disc < 0.0 {
            return Vec::new();
        }
        let s = disc.sqrt();
        let mut roots: Vec<f64> = [(rho - s) / (2.0 * a), (rho + s) / (2.0 * a)]
            .into_iter()
            .filter(|&b| b > 0.0)
            .collect();
        roots.dedup();
        roots
    }

    /// Positive roots of `gamma - k sqrt(b) + rho b` by bracketing and bisection.
    ///
    /// The drift is monotone on each side of its extremum at `(k / 2 rho)^2`.
    fn sqrt_roots(&self, k: f64) -> Vec<f64> {
        let rho = self.rho();
        let f = |b: f64| self.drift(b);
        let mut pieces = Vec::new();
        if rho > 0.0 && k > 0.0 {
            let vertex = (k / (2.0 * rho)).powi(2);
            pieces.push((0.0, Some(vertex)));
            pieces.push((vertex, None));
        } else {
            pieces.push((0.0, None));
        }

        let mut roots = Vec::new();
        for (lo, hi) in pieces {
            let f_lo = f(lo);
            let hi = match hi {
                Some(hi) => hi,
                None => match expand_bracket(&f, lo, f_lo) {
                    Some(hi) => hi,
                    None => continue,
                },
            };
            let f_hi = f(hi);
            if f_lo == 0.0 || f_hi == 0.0 || f_lo.signum() == f_hi.signum() {
                if f_hi == 0.0 && hi > 0.0 {
                    roots.push(hi);
                }
                continue;
            }
            roots.push(bisect(&f, lo, hi));
        }
        roots.retain(|&b| b > 0.0);
        roots.sort_by(f64::total_cmp);
        roots.dedup();
        roots
    }

    fn slope_fd(&self, b: f64) -> f64 {
        let h = FD_STEP.min(b / 2.0).max(f64::EPSILON);
        (self.drift(b + h) - self.drift(b - h)) / (2.0 * h)
    }

    /// One-sided flow probe around `b = 0`, where the drift has a kink.
    fn junction_stability(&self) -> Stability {
        let right = self.drift(FD_STEP);
        let left = self.drift(-FD_STEP);
        let right_in = right < 0.0;
        let left_in = left > 0.0;
        let right_out = right > 0.0;
        let left_out = left < 0.0;
        match (left_in, right_in) {
            (true, true) => Stability::Stable,
            (true, false) | (false, true) => Stability::HalfStable,
            (false, false) if !left_out && !right_out => Stability::MarginallyStable,
            _ => Stability::Unstable,
        }
    }
}

fn classify_slope(slope: f64) -> Stability {
    if slope.abs() < STABILITY_TIE {
        Stability::HalfStable
    } else if slope < 0.0 {
        Stability::Stable
    } else {
        Stability::Unstable
    }
}

fn expand_bracket(f: &impl Fn(f64) -> f64, lo: f64, f_lo: f64) -> Option<f64> {
    let mut hi = lo.max(1.0);
    for _ in 0..2100 {
        let f_hi = f(hi);
        if !f_hi.is_finite() {
            return None;
        }
        if f_hi == 0.0 || f_hi.signum() != f_lo.signum() {
            return Some(hi);
        }
        hi *= 2.0;
        if !hi.is_finite() {
            return None;
        }
    }
    None
}

/// Bisection on a sign-changing bracket, run to floating-point resolution.
pub(crate) fn bisect(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return lo;
    }
    if f_hi == 0.0 {
        return hi;
    }
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    if f(lo).abs() <= f(hi).abs() {
        lo
    } else {
        hi
    }
}
