//! Deviation-from-feasibility penalties and the penalized per-sample loss.
//!
//! For an inequality residual `r = fᵢ(x) − cᵢ` the penalty is `0` when
//! `r ≤ 0` and `η·rᵞ` otherwise; for an equality residual it is `η·|r|ᵞ`.
//! The per-sample loss is `f₀ + Ω` where `Ω` sums every constraint term.

use crate::error::{Error, Result};
use crate::problems::ProblemSpec;

/// Weight applied to every constraint in the reference settings.
pub const DEFAULT_ETA: f64 = 1e8;
pub const DEFAULT_GAMMA: f64 = 2.0;
/// Finite stand-in for the infinite indicator value.
pub const DEFAULT_INDICATOR_BIG: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PenaltyMode {
    /// Smooth piece-wise penalty; the training mode.
    Piecewise,
    /// 0/"∞" indicator. Its gradient is zero everywhere, so it cannot steer
    /// training; kept as a diagnostic.
    Indicator,
    /// Objective only.
    None,
}

impl std::str::FromStr for PenaltyMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "piecewise" => Ok(PenaltyMode::Piecewise),
            "indicator" => Ok(PenaltyMode::Indicator),
            "none" => Ok(PenaltyMode::None),
            other => Err(Error::Config(format!(
                "unknown penalty mode '{other}' (expected piecewise, indicator or none)"
            ))),
        }
    }
}

impl std::fmt::Display for PenaltyMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PenaltyMode::Piecewise => "piecewise",
            PenaltyMode::Indicator => "indicator",
            PenaltyMode::None => "none",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PenaltyConfig {
    pub mode: PenaltyMode,
    pub eta_ineq: Vec<f64>,
    pub eta_eq: Vec<f64>,
    pub gamma: f64,
    pub indicator_big: f64,
    pub eq_tolerance: f64,
}

impl PenaltyConfig {
    /// One `eta` broadcast to every constraint of `spec`.
    pub fn uniform(spec: &ProblemSpec, mode: PenaltyMode, eta: f64, gamma: f64) -> Self {
        Self {
            mode,
            eta_ineq: vec![eta; spec.inequalities.len()],
            eta_eq: vec![eta; spec.equalities.len()],
            gamma,
            indicator_big: DEFAULT_INDICATOR_BIG,
            eq_tolerance: 0.0,
        }
    }

    /// `η = 1e8`, `γ = 2`, piece-wise.
    pub fn reference(spec: &ProblemSpec) -> Self {
        Self::uniform(spec, PenaltyMode::Piecewise, DEFAULT_ETA, DEFAULT_GAMMA)
    }

    pub fn with_mode(mut self, mode: PenaltyMode) -> Self {
        self.mode = mode;
        self
    }

    /// Multiplies every weight by `factor`.
    pub fn scaled(mut self, factor: f64) -> Self {
        self.eta_ineq.iter_mut().for_each(|e| *e *= factor);
        self.eta_eq.iter_mut().for_each(|e| *e *= factor);
        self
    }

    pub fn validate(&self, spec: &ProblemSpec) -> Result<()> {
        if self.eta_ineq.len() != spec.inequalities.len() || self.eta_eq.len() != spec.equalities.len() {
            return Err(Error::Config(format!(
                "penalty weights ({} inequality, {} equality) do not match {} ({} inequality, {} equality)",
                self.eta_ineq.len(),
                self.eta_eq.len(),
                spec.name,
                spec.inequalities.len(),
                spec.equalities.len()
            )));
        }
        if self.eta_ineq.iter().chain(&self.eta_eq).any(|e| !(*e >= 0.0) || !e.is_finite()) {
            return Err(Error::Config("penalty weights must be finite and >= 0".into()));
        }
        if !(self.gamma >= 1.0) || !self.gamma.is_finite() {
            return Err(Error::Config(format!("gamma must be >= 1, got {}", self.gamma)));
        }
        if !(self.indicator_big > 0.0) || !self.indicator_big.is_finite() {
            return Err(Error::Config("indicator_big must be a positive finite value".into()));
        }
        if !(self.eq_tolerance >= 0.0) {
            return Err(Error::Config("eq_tolerance must be >= 0".into()));
        }
        Ok(())
    }
}

/// Constraint residuals `fᵢ − cᵢ`, `hⱼ − bⱼ` and their gradients in `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintEval {
    pub ineq_values: Vec<f64>,
    pub eq_values: Vec<f64>,
    pub ineq_grads: Vec<Vec<f64>>,
    pub eq_grads: Vec<Vec<f64>>,
}

#[inline]
fn pow(base: f64, exponent: f64) -> f64 {
    if exponent.fract() == 0.0 && exponent.abs() <= 64.0 {
        base.powi(exponent as i32)
    } else {
        base.powf(exponent)
    }
}

/// `(η·rᵞ, η·γ·rᵞ⁻¹)` for `r > 0`, `(0, 0)` otherwise.
pub fn ineq_penalty(residual: f64, eta: f64, gamma: f64) -> (f64, f64) {
    if residual <= 0.0 {
        return (0.0, 0.0);
    }
    (
        eta * pow(residual, gamma),
        eta * gamma * pow(residual, gamma - 1.0),
    )
}

/// `(η·|r|ᵞ, η·γ·|r|ᵞ⁻¹·sign r)`; the derivative is 0 at `r = 0`.
pub fn eq_penalty(residual: f64, eta: f64, gamma: f64) -> (f64, f64) {
    if residual == 0.0 {
        return (0.0, 0.0);
    }
    let a = residual.abs();
    (
        eta * pow(a, gamma),
        eta * gamma * pow(a, gamma - 1.0) * residual.signum(),
    )
}

/// Decomposed per-sample loss.
#[derive(Debug, Clone, PartialEq)]
pub struct LossTerms {
    pub objective: f64,
    pub penalty: f64,
    pub loss: f64,
    pub grad_x: Vec<f64>,
}

/// Evaluates `f₀ + Ω` and its gradient in `x`.
pub fn loss_terms(x: &[f64], p: &[f64], spec: &ProblemSpec, cfg: &PenaltyConfig) -> Result<LossTerms> {
    let (objective, mut grad_x) = spec.eval_objective(x, p)?;
    if cfg.mode == PenaltyMode::None {
        return Ok(LossTerms {
            objective,
            penalty: 0.0,
            loss: objective,
            grad_x,
        });
    }
    if cfg.eta_ineq.len() != spec.inequalities.len() || cfg.eta_eq.len() != spec.equalities.len() {
        return Err(Error::Config(format!(
            "penalty weights do not match the constraints of {}",
            spec.name
        )));
    }
    let eval = spec.eval_constraints(x, p)?;
    let residuals = eval.ineq_values.iter().zip(&eval.ineq_grads).chain(eval.eq_values.iter().zip(&eval.eq_grads));
    for (index, (r, g)) in residuals.enumerate() {
        if !r.is_finite() || g.iter().any(|v| !v.is_finite()) {
            return Err(Error::Evaluation {
                what: format!("{} constraint", spec.name),
                index: Some(index),
            });
        }
    }

    let mut penalty = 0.0;
    match cfg.mode {
        PenaltyMode::Piecewise => {
            let ineq = eval.ineq_values.iter().zip(&eval.ineq_grads).zip(&cfg.eta_ineq);
            let terms = ineq
                .map(|((&r, g), &eta)| (ineq_penalty(r, eta, cfg.gamma), g))
                .chain(
                    eval.eq_values
                        .iter()
                        .zip(&eval.eq_grads)
                        .zip(&cfg.eta_eq)
                        .map(|((&r, g), &eta)| (eq_penalty(r, eta, cfg.gamma), g)),
                );
            for (index, ((v, d), g)) in terms.enumerate() {
                if !v.is_finite() || !d.is_finite() {
                    return Err(Error::Evaluation {
                        what: format!("{} penalty", spec.name),
                        index: Some(index),
                    });
                }
                penalty += v;
                if d != 0.0 {
                    grad_x.iter_mut().zip(g).for_each(|(gx, gi)| *gx += d * gi);
                }
            }
        }
        PenaltyMode::Indicator => {
            let violated = eval.ineq_values.iter().filter(|&&r| r > 0.0).count()
                + eval.eq_values.iter().filter(|r| r.abs() > cfg.eq_tolerance).count();
            penalty = cfg.indicator_big * violated as f64;
        }
        PenaltyMode::None => unreachable!(),
    }
    Ok(LossTerms {
        objective,
        penalty,
        loss: objective + penalty,
        grad_x,
    })
}

/// `(f₀ + Ω, ∇ₓ(f₀ + Ω))`.
pub fn total_loss(x: &[f64], p: &[f64], spec: &ProblemSpec, cfg: &PenaltyConfig) -> Result<(f64, Vec<f64>)> {
    let t = loss_terms(x, p, spec, cfg)?;
    Ok((t.loss, t.grad_x))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViolationReport {
    pub max_ineq_violation: f64,
    pub max_eq_violation: f64,
    pub feasible: bool,
}

impl ViolationReport {
    /// Largest violation over both constraint kinds.
    pub fn max_violation(&self) -> f64 {
        self.max_ineq_violation.max(self.max_eq_violation)
    }

    /// Feasible when every violation is at most `tol`.
    pub fn within(&self, tol: f64) -> bool {
        self.max_violation() <= tol
    }
}

/// Largest inequality/equality violation at `x`.
pub fn violation_report(x: &[f64], p: &[f64], spec: &ProblemSpec, eq_tolerance: f64) -> Result<ViolationReport> {
    let eval = spec.eval_constraints(x, p)?;
    let max_ineq_violation = eval.ineq_values.iter().fold(0.0_f64, |m, &r| m.max(r));
    let max_eq_violation = eval.eq_values.iter().fold(0.0_f64, |m, &r| m.max(r.abs()));
    Ok(ViolationReport {
        max_ineq_violation,
        max_eq_violation,
        feasible: max_ineq_violation <= 0.0 && max_eq_violation <= eq_tolerance,
    })
}
