//! Parameterized benchmark landscapes and their constraint sets.
//!
//! Every evaluator returns a value together with its analytic gradient in
//! the decision vector `x`. Constraint residuals follow one sign
//! convention across the registry: `residual <= 0` means satisfied.

use std::f64::consts::{E, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::nn::Matrix;
use crate::penalty::ConstraintEval;

/// Names accepted by [`make_problem`].
pub const PROBLEM_NAMES: [&str; 4] = ["rosenbrock-1c", "rosenbrock-3c", "ackley-1c", "ackley-3c"];

/// Objective landscapes `f₀(x; p)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Objective {
    /// `c₁(x₂ − x₁²)² + (c₂ − x₁)²` with `p = (c₁, c₂)`.
    Rosenbrock,
    /// `−c₁·exp(−c₂·√(c₃(x₁² + x₂²))) − exp(c₄(cos 2πx₁ + cos 2πx₂)) + e + c₅`
    /// with `p = (c₁, …, c₅)`. The gradient of the root term is taken as
    /// zero at the origin.
    Ackley,
    /// `‖x − p‖²`, a convex toy problem with `p` of the same length as `x`.
    SquaredDistance,
}

impl Objective {
    fn param_dim(&self, decision_dim: usize) -> usize {
        match self {
            Objective::Rosenbrock => 2,
            Objective::Ackley => 5,
            Objective::SquaredDistance => decision_dim,
        }
    }

    fn eval(&self, x: &[f64], p: &[f64]) -> (f64, Vec<f64>) {
        match self {
            Objective::Rosenbrock => {
                let (c1, c2) = (p[0], p[1]);
                let (x1, x2) = (x[0], x[1]);
                let valley = x2 - x1 * x1;
                let lead = c2 - x1;
                let value = c1 * valley * valley + lead * lead;
                let grad = vec![-4.0 * c1 * x1 * valley - 2.0 * lead, 2.0 * c1 * valley];
                (value, grad)
            }
            Objective::Ackley => {
                let (c1, c2, c3, c4, c5) = (p[0], p[1], p[2], p[3], p[4]);
                let (x1, x2) = (x[0], x[1]);
                let root = (c3 * (x1 * x1 + x2 * x2)).sqrt();
                let well = c1 * (-c2 * root).exp();
                let (w1, w2) = (2.0 * PI * x1, 2.0 * PI * x2);
                let ripple = (c4 * (w1.cos() + w2.cos())).exp();
                let value = -well - ripple + E + c5;

                let mut grad = vec![0.0, 0.0];
                if root > 0.0 {
                    let k = well * c2 * c3 / root;
                    grad[0] += k * x1;
                    grad[1] += k * x2;
                }
                let r = ripple * c4 * 2.0 * PI;
                grad[0] += r * w1.sin();
                grad[1] += r * w2.sin();
                (value, grad)
            }
            Objective::SquaredDistance => {
                let mut value = 0.0;
                let grad = x
                    .iter()
                    .zip(p)
                    .map(|(xi, pi)| {
                        let d = xi - pi;
                        value += d * d;
                        2.0 * d
                    })
                    .collect();
                (value, grad)
            }
        }
    }
}

/// Left-hand sides of constraints, functions of `x` only.
#[derive(Debug, Clone, PartialEq)]
pub enum ConstraintFn {
    /// `Σ xᵢ²`
    SquaredNorm,
    /// `x[i]`
    Coordinate(usize),
    /// `a · x`
    Linear(Vec<f64>),
}

impl ConstraintFn {
    fn eval(&self, x: &[f64]) -> (f64, Vec<f64>) {
        match self {
            ConstraintFn::SquaredNorm => (
                x.iter().map(|v| v * v).sum(),
                x.iter().map(|v| 2.0 * v).collect(),
            ),
            ConstraintFn::Coordinate(i) => {
                let mut g = vec![0.0; x.len()];
                g[*i] = 1.0;
                (x[*i], g)
            }
            ConstraintFn::Linear(a) => (a.iter().zip(x).map(|(a, x)| a * x).sum(), a.clone()),
        }
    }
}

/// `function(x) ≤ bound` or `function(x) = bound`, depending on the list it sits in.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub function: ConstraintFn,
    pub bound: f64,
}

impl Constraint {
    pub fn new(function: ConstraintFn, bound: f64) -> Self {
        Self { function, bound }
    }

    /// `(function(x) − bound, ∇ₓ function)`.
    pub fn residual(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let (v, g) = self.function.eval(x);
        (v - self.bound, g)
    }
}

/// A parameterized constrained problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub name: String,
    pub decision_dim: usize,
    pub param_dim: usize,
    pub objective: Objective,
    pub inequalities: Vec<Constraint>,
    pub equalities: Vec<Constraint>,
    pub param_ranges: Vec<(f64, f64)>,
    pub default_net_shape: Vec<usize>,
}

impl ProblemSpec {
    pub fn new(
        name: impl Into<String>,
        decision_dim: usize,
        objective: Objective,
        inequalities: Vec<Constraint>,
        equalities: Vec<Constraint>,
        param_ranges: Vec<(f64, f64)>,
        default_net_shape: Vec<usize>,
    ) -> Result<Self> {
        let param_dim = objective.param_dim(decision_dim);
        if matches!(objective, Objective::Rosenbrock | Objective::Ackley) && decision_dim != 2 {
            return Err(Error::Dimension(format!(
                "{objective:?} is defined for 2 decision variables, got {decision_dim}"
            )));
        }
        if param_ranges.len() != param_dim {
            return Err(Error::Dimension(format!(
                "{} parameter ranges for {param_dim} parameters",
                param_ranges.len()
            )));
        }
        if let Some((lo, hi)) = param_ranges.iter().find(|(lo, hi)| !(lo <= hi)) {
            return Err(Error::Config(format!("parameter range [{lo}, {hi}] is empty")));
        }
        for c in inequalities.iter().chain(&equalities) {
            let ok = match &c.function {
                ConstraintFn::SquaredNorm => true,
                ConstraintFn::Coordinate(i) => *i < decision_dim,
                ConstraintFn::Linear(a) => a.len() == decision_dim,
            };
            if !ok {
                return Err(Error::Dimension(format!(
                    "constraint {c:?} does not fit {decision_dim} decision variables"
                )));
            }
        }
        if default_net_shape.len() < 3
            || default_net_shape[0] != param_dim
            || *default_net_shape.last().unwrap() != decision_dim
        {
            return Err(Error::Shape(format!(
                "network shape {default_net_shape:?} does not map {param_dim} parameters to {decision_dim} decisions"
            )));
        }
        Ok(Self {
            name: name.into(),
            decision_dim,
            param_dim,
            objective,
            inequalities,
            equalities,
            param_ranges,
            default_net_shape,
        })
    }

    /// Unconstrained `min ‖x − p‖²` over `dim` variables with `p ∈ [low, high]ᵈⁱᵐ`.
    pub fn squared_distance(dim: usize, low: f64, high: f64, hidden: usize) -> Result<Self> {
        Self::new(
            "squared-distance",
            dim,
            Objective::SquaredDistance,
            Vec::new(),
            Vec::new(),
            vec![(low, high); dim],
            vec![dim, hidden, dim],
        )
    }

    fn check_shapes(&self, x: &[f64], p: &[f64]) -> Result<()> {
        if x.len() != self.decision_dim || p.len() != self.param_dim {
            return Err(Error::Dimension(format!(
                "{}: expected x of length {} and p of length {}, got {} and {}",
                self.name,
                self.decision_dim,
                self.param_dim,
                x.len(),
                p.len()
            )));
        }
        Ok(())
    }

    /// `(f₀(x; p), ∇ₓ f₀)`.
    pub fn eval_objective(&self, x: &[f64], p: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.check_shapes(x, p)?;
        let (v, g) = self.objective.eval(x, p);
        if !v.is_finite() || g.iter().any(|v| !v.is_finite()) {
            return Err(Error::Evaluation {
                what: format!("{} objective", self.name),
                index: None,
            });
        }
        Ok((v, g))
    }

    /// Residuals and gradients of every constraint, in registry order.
    pub fn eval_constraints(&self, x: &[f64], p: &[f64]) -> Result<ConstraintEval> {
        self.check_shapes(x, p)?;
        let (ineq_values, ineq_grads) = self.inequalities.iter().map(|c| c.residual(x)).unzip();
        let (eq_values, eq_grads) = self.equalities.iter().map(|c| c.residual(x)).unzip();
        Ok(ConstraintEval {
            ineq_values,
            eq_values,
            ineq_grads,
            eq_grads,
        })
    }

    /// Uniform samples inside `param_ranges`, reproducible from `seed`.
    pub fn sample_params(&self, count: usize, seed: u64) -> Result<ParamSet> {
        if count == 0 {
            return Err(Error::Config("sample count must be at least 1".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut values = Matrix::zeros(count, self.param_dim);
        for r in 0..count {
            for (c, &(lo, hi)) in self.param_ranges.iter().enumerate() {
                let u: f64 = rng.gen();
                values.set(r, c, lo + (hi - lo) * u);
            }
        }
        Ok(ParamSet {
            values,
            seed: Some(seed),
        })
    }
}

/// A set of parameter vectors, one per row.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSet {
    pub values: Matrix,
    pub seed: Option<u64>,
}

impl ParamSet {
    /// Explicit parameter vectors, e.g. the fixed rows of a results table.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R], param_dim: usize) -> Result<Self> {
        let values = if rows.is_empty() {
            Matrix::zeros(0, param_dim)
        } else {
            Matrix::from_rows(rows)?
        };
        if values.cols() != param_dim {
            return Err(Error::Dimension(format!(
                "parameter rows have {} entries, expected {param_dim}",
                values.cols()
            )));
        }
        Ok(Self { values, seed: None })
    }

    pub fn len(&self) -> usize {
        self.values.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.values.rows() == 0
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.values.row(i)
    }
}

fn disk(radius_sq: f64) -> Constraint {
    Constraint::new(ConstraintFn::SquaredNorm, radius_sq)
}

fn half_planes() -> [Constraint; 2] {
    [
        Constraint::new(ConstraintFn::Coordinate(0), -2.5),
        Constraint::new(ConstraintFn::Coordinate(1), -1.0),
    ]
}

const ROSENBROCK_RANGES: [(f64, f64); 2] = [(0.0, 30.0), (0.0, 1.0)];
const ACKLEY_RANGES: [(f64, f64); 5] = [(0.0, 30.0), (0.0, 1.0), (0.0, 1.0), (0.0, 1.0), (0.0, 30.0)];

/// Looks up a registry problem by name.
pub fn make_problem(name: &str) -> Result<ProblemSpec> {
    let deep = |n_in: usize| vec![n_in, 10, 20, 20, 20, 10, 2];
    match name {
        "rosenbrock-1c" => ProblemSpec::new(
            name,
            2,
            Objective::Rosenbrock,
            vec![disk(1.0)],
            Vec::new(),
            ROSENBROCK_RANGES.to_vec(),
            vec![2, 20, 20, 2],
        ),
        "rosenbrock-3c" => {
            let [a, b] = half_planes();
            ProblemSpec::new(
                name,
                2,
                Objective::Rosenbrock,
                vec![disk(1.0), a, b],
                Vec::new(),
                ROSENBROCK_RANGES.to_vec(),
                deep(2),
            )
        }
        "ackley-1c" => ProblemSpec::new(
            name,
            2,
            Objective::Ackley,
            vec![disk(25.0)],
            Vec::new(),
            ACKLEY_RANGES.to_vec(),
            deep(5),
        ),
        "ackley-3c" => {
            let [a, b] = half_planes();
            ProblemSpec::new(
                name,
                2,
                Objective::Ackley,
                vec![disk(1.0), a, b],
                Vec::new(),
                ACKLEY_RANGES.to_vec(),
                deep(5),
            )
        }
        _ => Err(Error::Registry {
            name: name.to_string(),
            known: PROBLEM_NAMES.join(", "),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn fd_grad(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
        (0..x.len())
            .map(|i| {
                let mut a = x.to_vec();
                let mut b = x.to_vec();
                a[i] += h;
                b[i] -= h;
                (f(&a) - f(&b)) / (2.0 * h)
            })
            .collect()
    }

    fn assert_grad_close(analytic: &[f64], fd: &[f64], tol: f64) {
        let scale = analytic.iter().fold(1e-8_f64, |m, v| m.max(v.abs()));
        for (a, b) in analytic.iter().zip(fd) {
            let err = (a - b).abs() / a.abs().max(b.abs()).max(1e-4 * scale);
            assert!(err < tol, "analytic {a} vs fd {b} (rel {err})");
        }
    }

    fn random_x(rng: &mut ChaCha8Rng, bound: f64) -> Vec<f64> {
        vec![rng.gen_range(-bound..bound), rng.gen_range(-bound..bound)]
    }

    #[test]
    fn registry_entries() {
        let r = make_problem("rosenbrock-1c").unwrap();
        assert_eq!((r.decision_dim, r.param_dim), (2, 2));
        assert_eq!(r.inequalities.len(), 1);
        assert_eq!(r.default_net_shape, vec![2, 20, 20, 2]);
        assert_eq!(r.param_ranges, vec![(0.0, 30.0), (0.0, 1.0)]);

        let a = make_problem("ackley-3c").unwrap();
        assert_eq!((a.decision_dim, a.param_dim), (2, 5));
        assert_eq!(a.inequalities.len(), 3);
        assert_eq!(a.default_net_shape, vec![5, 10, 20, 20, 20, 10, 2]);

        assert_eq!(
            make_problem("rosenbrock-3c").unwrap().default_net_shape,
            vec![2, 10, 20, 20, 20, 10, 2]
        );
        assert_eq!(make_problem("ackley-1c").unwrap().inequalities[0].bound, 25.0);
    }

    #[test]
    fn unknown_name_lists_known() {
        let err = make_problem("nosuch").unwrap_err();
        let msg = err.to_string();
        assert!(matches!(err, Error::Registry { .. }));
        for n in PROBLEM_NAMES {
            assert!(msg.contains(n));
        }
    }

    #[test]
    fn rosenbrock_unconstrained_minimum() {
        let spec = make_problem("rosenbrock-1c").unwrap();
        for (c1, c2) in [(1.0, 0.5), (30.0, 0.9), (0.1, 0.0)] {
            let (v, g) = spec.eval_objective(&[c2, c2 * c2], &[c1, c2]).unwrap();
            assert_eq!(v, 0.0);
            assert_eq!(g, vec![0.0, 0.0]);
        }
    }

    #[test]
    fn ackley_value_at_origin() {
        let spec = make_problem("ackley-1c").unwrap();
        for (c2, c3) in [(0.2, 0.5), (0.05, 0.05), (1.0, 1.0)] {
            let (v, g) = spec.eval_objective(&[0.0, 0.0], &[20.0, c2, c3, 0.5, 20.0]).unwrap();
            assert_relative_eq!(v, 0.0, epsilon = 1e-12);
            assert_eq!(g, vec![0.0, 0.0]);
        }
    }

    #[test]
    fn objective_gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for name in PROBLEM_NAMES {
            let spec = make_problem(name).unwrap();
            let params = spec.sample_params(100, 5).unwrap();
            for i in 0..params.len() {
                let p = params.row(i);
                let x = random_x(&mut rng, 6.0);
                let (_, g) = spec.eval_objective(&x, p).unwrap();
                let fd = fd_grad(|x| spec.eval_objective(x, p).unwrap().0, &x, 1e-6);
                assert_grad_close(&g, &fd, 1e-6);
            }
        }
    }

    #[test]
    fn constraint_gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for name in PROBLEM_NAMES {
            let spec = make_problem(name).unwrap();
            let p = spec.sample_params(1, 1).unwrap();
            for _ in 0..100 {
                let x = random_x(&mut rng, 6.0);
                let eval = spec.eval_constraints(&x, p.row(0)).unwrap();
                for (i, g) in eval.ineq_grads.iter().enumerate() {
                    let fd = fd_grad(
                        |x| spec.eval_constraints(x, p.row(0)).unwrap().ineq_values[i],
                        &x,
                        1e-6,
                    );
                    assert_grad_close(g, &fd, 1e-6);
                }
            }
        }
    }

    #[test]
    fn constraint_residuals() {
        let r1 = make_problem("rosenbrock-1c").unwrap();
        let e = r1.eval_constraints(&[0.6, 0.8], &[1.0, 1.0]).unwrap();
        assert_relative_eq!(e.ineq_values[0], 0.0, epsilon = 1e-15);

        let r3 = make_problem("rosenbrock-3c").unwrap();
        let e = r3.eval_constraints(&[0.0, 0.0], &[1.0, 1.0]).unwrap();
        assert_eq!(e.ineq_values, vec![-1.0, 2.5, 1.0]);
        assert!(e.eq_values.is_empty());

        let a1 = make_problem("ackley-1c").unwrap();
        let e = a1.eval_constraints(&[3.0, 4.0], &[20.0, 0.2, 0.5, 0.5, 20.0]).unwrap();
        assert_eq!(e.ineq_values, vec![0.0]);
    }

    #[test]
    fn shape_errors() {
        let spec = make_problem("ackley-1c").unwrap();
        assert!(matches!(
            spec.eval_objective(&[0.0, 0.0], &[1.0, 2.0]),
            Err(Error::Dimension(_))
        ));
        assert!(matches!(
            spec.eval_constraints(&[0.0], &[0.0; 5]),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn non_finite_objective_is_an_error() {
        let spec = make_problem("ackley-1c").unwrap();
        let err = spec
            .eval_objective(&[0.1, 0.0], &[20.0, 0.2, 0.5, 1e308, 20.0])
            .unwrap_err();
        assert!(matches!(err, Error::Evaluation { index: None, .. }));
    }

    #[test]
    fn sampling_respects_ranges_and_seed() {
        let spec = make_problem("rosenbrock-1c").unwrap();
        let a = spec.sample_params(1000, 42).unwrap();
        assert_eq!(a.len(), 1000);
        for row in a.values.iter_rows() {
            assert!((0.0..=30.0).contains(&row[0]));
            assert!((0.0..=1.0).contains(&row[1]));
        }
        assert_eq!(a, spec.sample_params(1000, 42).unwrap());
        assert_ne!(a, spec.sample_params(1000, 43).unwrap());
        assert!(spec.sample_params(0, 1).is_err());
    }

    #[test]
    fn degenerate_range_samples_exact_value() {
        let spec = ProblemSpec::squared_distance(1, 0.375, 0.375, 4).unwrap();
        let s = spec.sample_params(1, 9).unwrap();
        assert_eq!(s.row(0), &[0.375]);
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(ProblemSpec::new(
            "bad",
            2,
            Objective::Rosenbrock,
            vec![],
            vec![],
            vec![(1.0, 0.0), (0.0, 1.0)],
            vec![2, 4, 2],
        )
        .is_err());
        assert!(ProblemSpec::new(
            "bad",
            2,
            Objective::Rosenbrock,
            vec![Constraint::new(ConstraintFn::Coordinate(2), 0.0)],
            vec![],
            ROSENBROCK_RANGES.to_vec(),
            vec![2, 4, 2],
        )
        .is_err());
    }
}
