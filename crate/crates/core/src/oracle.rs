//! Per-instance reference solver: a dense grid scan plus multi-start
//! penalized descent with an increasing penalty weight.
//!
//! The descent uses BFGS directions with an Armijo backtracking line
//! search on `f₀ + Ω_η`, restarting the curvature estimate at each stage of
//! the `η` schedule. Starts are independent and may run in parallel; the
//! winner is chosen by a total order (feasible first, then objective, then
//! start index), so the result does not depend on evaluation order.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::penalty::{loss_terms, violation_report, PenaltyConfig, PenaltyMode};
use crate::problems::ProblemSpec;

/// Violation at or below which an oracle point counts as feasible.
pub const ORACLE_FEASIBILITY_TOL: f64 = 1e-6;

/// Largest decision dimension the grid scan accepts.
pub const MAX_GRID_DIM: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleConfig {
    pub grid_points_per_dim: usize,
    /// Per-dimension `[low, high]`. A single entry is broadcast to every dimension.
    pub grid_bounds: Vec<(f64, f64)>,
    pub starts: usize,
    /// BFGS iterations per `η` stage.
    pub descent_steps: usize,
    /// Initial trial step of each line search.
    pub descent_lr: f64,
    pub eta_schedule: Vec<f64>,
    pub gamma: f64,
    /// Stage convergence threshold on the gradient norm.
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            grid_points_per_dim: 201,
            grid_bounds: vec![(-6.0, 6.0)],
            starts: 16,
            descent_steps: 200,
            descent_lr: 1.0,
            eta_schedule: vec![1.0, 1e2, 1e4, 1e6, 1e8],
            gamma: 2.0,
            tolerance: 1e-10,
            seed: 0,
        }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_points_per_dim < 2 {
            return Err(Error::Config("grid_points_per_dim must be >= 2".into()));
        }
        if self.grid_bounds.is_empty() || self.grid_bounds.iter().any(|(lo, hi)| !(lo < hi)) {
            return Err(Error::Config(format!("invalid grid bounds {:?}", self.grid_bounds)));
        }
        if self.eta_schedule.is_empty()
            || self.eta_schedule.windows(2).any(|w| !(w[0] < w[1]))
            || self.eta_schedule.iter().any(|e| !(*e > 0.0) || !e.is_finite())
        {
            return Err(Error::Config(format!(
                "eta_schedule must be positive and strictly increasing, got {:?}",
                self.eta_schedule
            )));
        }
        if !(self.gamma >= 1.0) {
            return Err(Error::Config("gamma must be >= 1".into()));
        }
        if !(self.descent_lr > 0.0) || !(self.tolerance >= 0.0) {
            return Err(Error::Config("descent_lr must be > 0 and tolerance >= 0".into()));
        }
        Ok(())
    }

    fn bounds(&self, dim: usize) -> Result<Vec<(f64, f64)>> {
        match self.grid_bounds.len() {
            1 => Ok(vec![self.grid_bounds[0]; dim]),
            n if n == dim => Ok(self.grid_bounds.clone()),
            n => Err(Error::Config(format!("{n} grid bounds for {dim} decision variables"))),
        }
    }

    /// Distance between neighbouring grid points along dimension `d`.
    pub fn grid_step(&self, dim: usize, d: usize) -> Result<f64> {
        let (lo, hi) = self.bounds(dim)?[d];
        Ok((hi - lo) / (self.grid_points_per_dim - 1) as f64)
    }

    fn final_eta(&self) -> f64 {
        *self.eta_schedule.last().unwrap()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMethod {
    Grid,
    Descent,
}

impl std::fmt::Display for OracleMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            OracleMethod::Grid => "grid",
            OracleMethod::Descent => "descent",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub max_violation: f64,
    pub solve_ns: f64,
    pub method: OracleMethod,
}

impl OracleSolution {
    pub fn is_feasible(&self) -> bool {
        self.max_violation <= ORACLE_FEASIBILITY_TOL
    }
}

/// Ordering key: feasible before infeasible, then lower objective
/// (penalized at the final `η` for infeasible points).
fn rank(c: &Candidate) -> (u8, f64) {
    if c.max_violation <= ORACLE_FEASIBILITY_TOL {
        (0, c.objective)
    } else {
        (1, c.penalized)
    }
}

fn penalized(spec: &ProblemSpec, eta: f64, gamma: f64) -> PenaltyConfig {
    PenaltyConfig::uniform(spec, PenaltyMode::Piecewise, eta, gamma)
}

struct Candidate {
    x: Vec<f64>,
    objective: f64,
    max_violation: f64,
    penalized: f64,
}

fn describe(spec: &ProblemSpec, x: Vec<f64>, p: &[f64], cfg: &OracleConfig) -> Result<Candidate> {
    let pen = penalized(spec, cfg.final_eta(), cfg.gamma);
    let terms = loss_terms(&x, p, spec, &pen)?;
    let max_violation = violation_report(&x, p, spec, 0.0)?.max_violation();
    Ok(Candidate {
        x,
        objective: terms.objective,
        max_violation,
        penalized: terms.loss,
    })
}

/// Exhaustive scan of a regular grid. Returns the feasible grid point with
/// the lowest objective or, if no grid point is feasible, the point with the
/// lowest penalized objective at the final `η`.
pub fn grid_scan(spec: &ProblemSpec, p: &[f64], cfg: &OracleConfig) -> Result<OracleSolution> {
    let start = Instant::now();
    cfg.validate()?;
    let dim = spec.decision_dim;
    if dim > MAX_GRID_DIM {
        return Err(Error::Unsupported(format!(
            "grid scan over {dim} dimensions (at most {MAX_GRID_DIM})"
        )));
    }
    let bounds = cfg.bounds(dim)?;
    let n = cfg.grid_points_per_dim;
    let axes: Vec<Vec<f64>> = bounds
        .iter()
        .map(|&(lo, hi)| {
            (0..n)
                .map(|i| {
                    // Exact endpoints and centre, e.g. 0 on a symmetric axis.
                    let t = i as f64 / (n - 1) as f64;
                    let v = lo + (hi - lo) * t;
                    if 2 * i == n - 1 {
                        0.5 * (lo + hi)
                    } else {
                        v
                    }
                })
                .collect()
        })
        .collect();
    let pen = penalized(spec, cfg.final_eta(), cfg.gamma);

    let mut best_feasible: Option<(f64, Vec<f64>)> = None;
    let mut best_penalized: Option<(f64, Vec<f64>)> = None;
    let total = n.pow(dim as u32);
    let mut x = vec![0.0; dim];
    for flat in 0..total {
        let mut rem = flat;
        for d in (0..dim).rev() {
            x[d] = axes[d][rem % n];
            rem /= n;
        }
        let (f0, _) = spec.eval_objective(&x, p)?;
        let violation = violation_report(&x, p, spec, 0.0)?.max_violation();
        if violation <= ORACLE_FEASIBILITY_TOL {
            if best_feasible.as_ref().map_or(true, |(b, _)| f0 < *b) {
                best_feasible = Some((f0, x.clone()));
            }
        } else if best_feasible.is_none() {
            let phi = loss_terms(&x, p, spec, &pen)?.loss;
            if best_penalized.as_ref().map_or(true, |(b, _)| phi < *b) {
                best_penalized = Some((phi, x.clone()));
            }
        }
    }
    let (_, x) = best_feasible.or(best_penalized).expect("grid has at least 2 points per axis");
    let c = describe(spec, x, p, cfg)?;
    Ok(OracleSolution {
        x: c.x,
        objective: c.objective,
        max_violation: c.max_violation,
        solve_ns: elapsed_ns(start),
        method: OracleMethod::Grid,
    })
}

fn elapsed_ns(start: Instant) -> f64 {
    (start.elapsed().as_nanos() as f64).max(1.0)
}

/// Multi-start penalized descent. One start is seeded from [`grid_scan`]
/// when the dimension permits; the rest are drawn uniformly from the grid
/// bounds.
pub fn solve(spec: &ProblemSpec, p: &[f64], cfg: &OracleConfig) -> Result<OracleSolution> {
    let start = Instant::now();
    cfg.validate()?;
    if p.len() != spec.param_dim {
        return Err(Error::Dimension(format!(
            "{} expects {} parameters, got {}",
            spec.name,
            spec.param_dim,
            p.len()
        )));
    }
    let dim = spec.decision_dim;
    let bounds = cfg.bounds(dim)?;

    let mut starts = Vec::with_capacity(cfg.starts + 1);
    let grid = if dim <= MAX_GRID_DIM {
        let g = grid_scan(spec, p, cfg)?;
        starts.push(g.x.clone());
        Some(g)
    } else {
        None
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    while starts.len() < cfg.starts.max(1) {
        starts.push(bounds.iter().map(|&(lo, hi)| rng.gen_range(lo..=hi)).collect());
    }

    let results: Vec<Option<Candidate>> = starts
        .into_par_iter()
        .map(|x0| descend(spec, p, cfg, x0).ok())
        .collect();

    let mut best: Option<(usize, Candidate, OracleMethod)> = None;
    let mut consider = |idx: usize, c: Candidate, method: OracleMethod| {
        let key = rank(&c);
        let better = match &best {
            None => true,
            Some((bi, b, _)) => {
                let bk = rank(b);
                key.0 < bk.0 || (key.0 == bk.0 && (key.1 < bk.1 || (key.1 == bk.1 && idx < *bi)))
            }
        };
        if better {
            best = Some((idx, c, method));
        }
    };
    for (i, c) in results.into_iter().enumerate() {
        if let Some(c) = c {
            consider(i + 1, c, OracleMethod::Descent);
        }
    }
    if let Some(g) = grid {
        consider(usize::MAX, describe(spec, g.x, p, cfg)?, OracleMethod::Grid);
    }
    let (_, c, method) = best.ok_or_else(|| Error::OracleFailed(format!("every start diverged on {}", spec.name)))?;
    Ok(OracleSolution {
        x: c.x,
        objective: c.objective,
        max_violation: c.max_violation,
        solve_ns: elapsed_ns(start),
        method,
    })
}

/// Runs every `η` stage from `x0`; fails if an iterate becomes non-finite.
fn descend(spec: &ProblemSpec, p: &[f64], cfg: &OracleConfig, mut x: Vec<f64>) -> Result<Candidate> {
    for &eta in &cfg.eta_schedule {
        let pen = penalized(spec, eta, cfg.gamma);
        x = bfgs_stage(&x, cfg, |x| loss_terms(x, p, spec, &pen).map(|t| (t.loss, t.grad_x)))?;
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::OracleFailed("non-finite iterate".into()));
    }
    describe(spec, x, p, cfg)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// BFGS on a smooth-enough function with Armijo backtracking.
fn bfgs_stage<F>(x0: &[f64], cfg: &OracleConfig, f: F) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    const ARMIJO: f64 = 1e-4;
    const MAX_HALVINGS: usize = 60;
    let n = x0.len();
    let identity = |scale: f64| {
        let mut h = vec![0.0; n * n];
        for i in 0..n {
            h[i * n + i] = scale;
        }
        h
    };
    let mut x = x0.to_vec();
    let (mut fx, mut g) = f(&x)?;
    let mut h = identity(1.0);
    let mut fresh = true;

    for _ in 0..cfg.descent_steps {
        if norm(&g) <= cfg.tolerance * fx.abs().max(1.0) {
            break;
        }
        let mut d: Vec<f64> = (0..n).map(|i| -dot(&h[i * n..(i + 1) * n], &g)).collect();
        let mut slope = dot(&g, &d);
        if !(slope < 0.0) {
            h = identity(1.0);
            fresh = true;
            d = g.iter().map(|v| -v).collect();
            slope = -dot(&g, &g);
        }

        let mut t = cfg.descent_lr;
        if fresh {
            // Keep the first trial step comparable to the point's scale.
            t = t.min(norm(&x).max(1.0) / norm(&d));
        }
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let trial: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + t * di).collect();
            if let Ok((ft, gt)) = f(&trial) {
                if ft.is_finite() && ft <= fx + ARMIJO * t * slope {
                    accepted = Some((trial, ft, gt));
                    break;
                }
            }
            t *= 0.5;
        }
        let Some((x_new, f_new, g_new)) = accepted else {
            if fresh {
                break;
            }
            h = identity(1.0);
            fresh = true;
            continue;
        };

        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * norm(&s) * norm(&y) {
            if fresh {
                h = identity(sy / dot(&y, &y));
            }
            // H ← (I − ρ s yᵀ) H (I − ρ y sᵀ) + ρ s sᵀ
            let rho = 1.0 / sy;
            let hy: Vec<f64> = (0..n).map(|i| dot(&h[i * n..(i + 1) * n], &y)).collect();
            let yhy = dot(&y, &hy);
            for i in 0..n {
                for j in 0..n {
                    h[i * n + j] += -rho * (s[i] * hy[j] + hy[i] * s[j]) + (rho * rho * yhy + rho) * s[i] * s[j];
                }
            }
            fresh = false;
        }
        let progress = (fx - f_new).abs();
        x = x_new;
        fx = f_new;
        g = g_new;
        if progress <= f64::EPSILON * fx.abs().max(1e-300) && norm(&s) <= f64::EPSILON * norm(&x).max(1.0) {
            break;
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::make_problem;

    fn dist(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
    }

    #[test]
    fn grid_finds_interior_rosenbrock_optimum() {
        let spec = make_problem("rosenbrock-1c").unwrap();
        let cfg = OracleConfig {
            grid_bounds: vec![(-1.5, 1.5)],
            ..OracleConfig::default()
        };
        let sol = grid_scan(&spec, &[5.0, 0.1], &cfg).unwrap();
        let cell = cfg.grid_step(2, 0).unwrap();
        assert!((sol.x[0] - 0.1).abs() <= cell && (sol.x[1] - 0.01).abs() <= cell, "{sol:?}");
        assert!(sol.is_feasible());
        assert_eq!(sol.method, OracleMethod::Grid);
    }

    #[test]
    fn grid_finds_ackley_origin() {
        let spec = make_problem("ackley-1c").unwrap();
        let cfg = OracleConfig::default();
        let sol = grid_scan(&spec, &[20.0, 0.2, 0.5, 0.5, 20.0], &cfg).unwrap();
        let cell = cfg.grid_step(2, 0).unwrap();
        assert!(sol.x.iter().all(|v| v.abs() <= cell), "{sol:?}");
    }

    #[test]
    fn empty_feasible_set_is_flagged() {
        let spec = make_problem("rosenbrock-3c").unwrap();
        let cfg = OracleConfig::default();
        let g = grid_scan(&spec, &[1.0, 1.0], &cfg).unwrap();
        assert!(g.max_violation > 0.0);
        let s = solve(&spec, &[1.0, 1.0], &cfg).unwrap();
        assert!(s.max_violation > 0.0);
        assert!(!s.is_feasible());
    }

    #[test]
    fn grid_rejects_high_dimension() {
        let spec = crate::problems::ProblemSpec::squared_distance(4, 0.0, 1.0, 4).unwrap();
        assert!(matches!(
            grid_scan(&spec, &[0.1; 4], &OracleConfig::default()),
            Err(Error::Unsupported(_))
        ));
        // Descent alone still works without the grid seed.
        let sol = solve(&spec, &[0.1, 0.2, 0.3, 0.4], &OracleConfig::default()).unwrap();
        assert!(dist(&sol.x, &[0.1, 0.2, 0.3, 0.4]) <= 1e-6);
    }

    #[test]
    fn table_one_rows() {
        let spec = make_problem("rosenbrock-1c").unwrap();
        let cfg = OracleConfig::default();
        for (p, reference) in [
            ([1.0, 1.0], [0.8082, 0.5889]),
            ([5.0, 0.1], [0.1000, 0.0100]),
            ([25.0, 0.3], [0.3000, 0.0900]),
        ] {
            let sol = solve(&spec, &p, &cfg).unwrap();
            assert!(dist(&sol.x, &reference) <= 1e-2, "{p:?}: {sol:?}");
            assert!(sol.is_feasible());
            assert!(sol.solve_ns > 0.0);
        }
    }

    #[test]
    fn convex_toy_is_exact() {
        let spec = crate::problems::ProblemSpec::squared_distance(1, -5.0, 5.0, 4).unwrap();
        let sol = solve(&spec, &[0.7], &OracleConfig::default()).unwrap();
        assert!((sol.x[0] - 0.7).abs() <= 1e-6, "{sol:?}");
    }

    #[test]
    fn kkt_stationarity_on_rosenbrock() {
        let spec = make_problem("rosenbrock-1c").unwrap();
        let cfg = OracleConfig::default();
        let params = spec.sample_params(30, 8).unwrap();
        for i in 0..params.len() {
            let p = params.row(i);
            let sol = solve(&spec, p, &cfg).unwrap();
            let (_, g0) = spec.eval_objective(&sol.x, p).unwrap();
            let e = spec.eval_constraints(&sol.x, p).unwrap();
            let (r, n) = (e.ineq_values[0], &e.ineq_grads[0]);
            if r < -1e-4 {
                assert!(norm(&g0) <= 1e-3, "interior {p:?}: {g0:?}");
            } else {
                let lambda = -dot(&g0, n) / dot(n, n);
                let res: Vec<f64> = g0.iter().zip(n).map(|(a, b)| a + lambda * b).collect();
                assert!(lambda >= -1e-6, "{p:?}: lambda {lambda}");
                assert!(norm(&res) <= 1e-3, "{p:?}: {res:?}");
            }
        }
    }

    #[test]
    fn solve_is_deterministic_and_not_worse_than_grid() {
        let cfg = OracleConfig::default();
        for name in ["rosenbrock-1c", "ackley-1c"] {
            let spec = make_problem(name).unwrap();
            let params = spec.sample_params(5, 1).unwrap();
            for i in 0..params.len() {
                let p = params.row(i);
                let a = solve(&spec, p, &cfg).unwrap();
                let b = solve(&spec, p, &cfg).unwrap();
                assert_eq!(a.x, b.x);
                let g = grid_scan(&spec, p, &cfg).unwrap();
                if g.is_feasible() {
                    assert!(a.is_feasible());
                    assert!(a.objective <= g.objective + 1e-6);
                }
            }
        }
    }

    #[test]
    fn config_validation() {
        let mut cfg = OracleConfig::default();
        cfg.eta_schedule = vec![1.0, 1.0];
        assert!(cfg.validate().is_err());
        let mut cfg = OracleConfig::default();
        cfg.grid_points_per_dim = 1;
        assert!(cfg.validate().is_err());
    }
}
