//! Unsupervised training loop and per-instance evaluation.
//!
//! Each sample contributes `f₀(x*; p) + Ω(x*; p)` with `x* = net(p)`; the
//! network is trained on the mean of that loss over shuffled minibatches.
//! No solved instances are needed.

use std::io::Write;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::nn::{adam_step, AdamConfig, AdamState, Gradients, Matrix, Mlp};
use crate::penalty::{loss_terms, violation_report, PenaltyConfig, ViolationReport};
use crate::problems::{ParamSet, ProblemSpec};

/// Mean loss above which training is aborted.
pub const DIVERGENCE_LIMIT: f64 = 1e15;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub sample_count: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub adam: AdamConfig,
    pub penalty: PenaltyConfig,
    /// Full-set statistics are logged every `log_every` epochs (and after the last).
    pub log_every: usize,
    /// Overrides the problem's default network shape.
    pub net_shape: Option<Vec<usize>>,
    /// Violation tolerance behind the logged feasibility fraction.
    pub feasibility_tol: f64,
    /// Train on inputs rescaled from `param_ranges` to `[-1, 1]`; the
    /// rescaling is folded into the first layer of the returned network.
    pub normalize_inputs: bool,
}

impl TrainConfig {
    /// 1000 samples, batches of 100, 5000 epochs, `η = 1e8`, `γ = 2`.
    pub fn reference(spec: &ProblemSpec) -> Self {
        Self {
            sample_count: 1000,
            epochs: 5000,
            batch_size: 100,
            seed: 0,
            adam: AdamConfig {
                learning_rate: 1e-4,
                ..AdamConfig::default()
            },
            penalty: PenaltyConfig::reference(spec),
            log_every: 100,
            net_shape: None,
            feasibility_tol: 0.1,
            normalize_inputs: true,
        }
    }

    pub fn net_shape<'a>(&'a self, spec: &'a ProblemSpec) -> &'a [usize] {
        self.net_shape.as_deref().unwrap_or(&spec.default_net_shape)
    }

    pub fn validate(&self, spec: &ProblemSpec) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be at least 1".into()));
        }
        if self.sample_count == 0 {
            return Err(Error::Config("sample_count must be at least 1".into()));
        }
        if self.batch_size == 0 || self.batch_size > self.sample_count {
            return Err(Error::Config(format!(
                "batch_size must be in 1..={}, got {}",
                self.sample_count, self.batch_size
            )));
        }
        if self.log_every == 0 {
            return Err(Error::Config("log_every must be at least 1".into()));
        }
        if !(self.feasibility_tol >= 0.0) {
            return Err(Error::Config("feasibility_tol must be >= 0".into()));
        }
        self.adam.validate()?;
        self.penalty.validate(spec)?;
        let shape = self.net_shape(spec);
        if shape.len() < 3 || shape[0] != spec.param_dim || shape[shape.len() - 1] != spec.decision_dim {
            return Err(Error::Config(format!(
                "network shape {shape:?} must map {} parameters to {} decisions",
                spec.param_dim, spec.decision_dim
            )));
        }
        Ok(())
    }
}

/// Full-set statistics at one logged epoch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainLogEntry {
    pub epoch: usize,
    pub mean_loss: f64,
    pub mean_objective: f64,
    pub mean_penalty: f64,
    pub feasible_frac: f64,
    pub elapsed_s: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainLog {
    pub entries: Vec<TrainLogEntry>,
}

pub const TRAIN_LOG_HEADER: &str = "epoch,mean_loss,mean_objective,mean_penalty,feasible_frac,elapsed_s";

impl TrainLog {
    pub fn first(&self) -> Option<&TrainLogEntry> {
        self.entries.first()
    }

    pub fn last(&self) -> Option<&TrainLogEntry> {
        self.entries.last()
    }

    /// CSV with the standard header. With `with_time = false` the elapsed
    /// column is written as `0` so that runs can be compared byte for byte.
    pub fn write_csv<W: Write>(&self, mut out: W, with_time: bool) -> Result<()> {
        writeln!(out, "{TRAIN_LOG_HEADER}")?;
        for e in &self.entries {
            let t = if with_time { e.elapsed_s } else { 0.0 };
            writeln!(
                out,
                "{},{:.17e},{:.17e},{:.17e},{},{}",
                e.epoch, e.mean_loss, e.mean_objective, e.mean_penalty, e.feasible_frac, t
            )?;
        }
        Ok(())
    }
}

/// Means of the loss terms over a set of parameter vectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossSummary {
    pub mean_loss: f64,
    pub mean_objective: f64,
    pub mean_penalty: f64,
    pub feasible_frac: f64,
}

/// Mean of `f₀ + Ω` over every row of `params`, plus the fraction of
/// outputs whose violation is at most `feasibility_tol`.
pub fn mean_loss(
    net: &Mlp,
    spec: &ProblemSpec,
    penalty: &PenaltyConfig,
    params: &Matrix,
    feasibility_tol: f64,
) -> Result<LossSummary> {
    mean_loss_on(net, spec, penalty, params, params, feasibility_tol)
}

/// As [`mean_loss`], with network inputs given separately from the raw
/// problem parameters (row `i` of `inputs` encodes row `i` of `params`).
fn mean_loss_on(
    net: &Mlp,
    spec: &ProblemSpec,
    penalty: &PenaltyConfig,
    inputs: &Matrix,
    params: &Matrix,
    feasibility_tol: f64,
) -> Result<LossSummary> {
    let (out, _) = net.forward(inputs)?;
    let n = params.rows() as f64;
    let (mut loss, mut obj, mut pen, mut feasible) = (0.0, 0.0, 0.0, 0usize);
    for (i, x) in out.iter_rows().enumerate() {
        let p = params.row(i);
        let t = loss_terms(x, p, spec, penalty)?;
        loss += t.loss;
        obj += t.objective;
        pen += t.penalty;
        if violation_report(x, p, spec, penalty.eq_tolerance)?.within(feasibility_tol) {
            feasible += 1;
        }
    }
    Ok(LossSummary {
        mean_loss: loss / n,
        mean_objective: obj / n,
        mean_penalty: pen / n,
        feasible_frac: feasible as f64 / n,
    })
}

/// Gradient of the batch-mean loss with respect to every network
/// parameter, summed in fixed sample order. Returns the gradient and the
/// batch-mean loss.
pub fn batch_gradient(
    net: &Mlp,
    spec: &ProblemSpec,
    penalty: &PenaltyConfig,
    batch: &Matrix,
) -> Result<(Gradients, f64)> {
    batch_gradient_on(net, spec, penalty, batch, batch)
}

fn batch_gradient_on(
    net: &Mlp,
    spec: &ProblemSpec,
    penalty: &PenaltyConfig,
    inputs: &Matrix,
    params: &Matrix,
) -> Result<(Gradients, f64)> {
    let (out, trace) = net.forward(inputs)?;
    let n = params.rows() as f64;
    let mut upstream = Matrix::zeros(out.rows(), out.cols());
    let mut total = 0.0;
    for (i, x) in out.iter_rows().enumerate() {
        let t = loss_terms(x, params.row(i), spec, penalty)?;
        total += t.loss;
        for (u, g) in upstream.row_mut(i).iter_mut().zip(&t.grad_x) {
            *u = g / n;
        }
    }
    let (grads, _) = net.backward(&trace, &upstream)?;
    Ok((grads, total / n))
}

/// Trains a freshly initialised network on `cfg.sample_count` sampled
/// parameter vectors.
pub fn train(spec: &ProblemSpec, cfg: &TrainConfig) -> Result<(Mlp, TrainLog)> {
    cfg.validate(spec)?;
    let params = spec.sample_params(cfg.sample_count, cfg.seed)?;
    let net = Mlp::seeded(cfg.net_shape(spec), cfg.seed.wrapping_add(1))?;
    train_from(spec, cfg, net, &params)
}

/// Trains `net` on an explicit sample set. `cfg.sample_count` is ignored in
/// favour of `params.len()`.
pub fn train_from(spec: &ProblemSpec, cfg: &TrainConfig, mut net: Mlp, params: &ParamSet) -> Result<(Mlp, TrainLog)> {
    let cfg = TrainConfig {
        sample_count: params.len(),
        ..cfg.clone()
    };
    cfg.validate(spec)?;
    if net.layer_sizes() != cfg.net_shape(spec) {
        return Err(Error::Dimension(format!(
            "network shape {:?} differs from configured {:?}",
            net.layer_sizes(),
            cfg.net_shape(spec)
        )));
    }
    let scaling = cfg
        .normalize_inputs
        .then(|| InputScaling::from_ranges(&spec.param_ranges));
    let samples = &params.values;
    let inputs = match &scaling {
        Some(sc) => sc.apply(samples),
        None => samples.clone(),
    };
    let mut adam = AdamState::new(&net, cfg.adam);
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(2));
    let mut order: Vec<usize> = (0..samples.rows()).collect();
    let mut log = TrainLog::default();
    let start = Instant::now();

    let log_point = |net: &Mlp, epoch: usize, log: &mut TrainLog| -> Result<()> {
        let s = mean_loss_on(net, spec, &cfg.penalty, &inputs, samples, cfg.feasibility_tol)
            .map_err(|e| diverged(epoch, 0, e.to_string()))?;
        if !s.mean_loss.is_finite() || s.mean_loss > DIVERGENCE_LIMIT {
            return Err(diverged(epoch, 0, format!("mean loss {:e}", s.mean_loss)));
        }
        log.entries.push(TrainLogEntry {
            epoch,
            mean_loss: s.mean_loss,
            mean_objective: s.mean_objective,
            mean_penalty: s.mean_penalty,
            feasible_frac: s.feasible_frac,
            elapsed_s: start.elapsed().as_secs_f64(),
        });
        Ok(())
    };

    log_point(&net, 0, &mut log)?;
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut shuffle_rng);
        for chunk in order.chunks(cfg.batch_size) {
            let batch = samples.select_rows(chunk);
            let batch_inputs = inputs.select_rows(chunk);
            let (grads, batch_loss) = batch_gradient_on(&net, spec, &cfg.penalty, &batch_inputs, &batch)
                .map_err(|e| diverged(epoch, chunk[0], e.to_string()))?;
            if !batch_loss.is_finite() || batch_loss > DIVERGENCE_LIMIT {
                let worst = worst_sample(&net, spec, &cfg.penalty, &batch_inputs, &batch).unwrap_or(0);
                return Err(diverged(epoch, chunk[worst], format!("batch mean loss {batch_loss:e}")));
            }
            adam_step(&mut net, &mut adam, &grads)?;
        }
        if epoch % cfg.log_every == 0 || epoch == cfg.epochs {
            log_point(&net, epoch, &mut log)?;
        }
    }
    let net = match &scaling {
        Some(sc) => sc.fold_into(&net)?,
        None => net,
    };
    Ok((net, log))
}

/// Per-parameter affine map `p ↦ (p − center) / half_width` onto `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct InputScaling {
    pub center: Vec<f64>,
    pub half_width: Vec<f64>,
}

impl InputScaling {
    pub fn from_ranges(ranges: &[(f64, f64)]) -> Self {
        let center = ranges.iter().map(|(lo, hi)| 0.5 * (lo + hi)).collect();
        let half_width = ranges
            .iter()
            .map(|(lo, hi)| {
                let h = 0.5 * (hi - lo);
                if h > 0.0 {
                    h
                } else {
                    1.0
                }
            })
            .collect();
        Self { center, half_width }
    }

    pub fn apply(&self, params: &Matrix) -> Matrix {
        let mut out = params.clone();
        for r in 0..out.rows() {
            for (c, v) in out.row_mut(r).iter_mut().enumerate() {
                *v = (*v - self.center[c]) / self.half_width[c];
            }
        }
        out
    }

    /// Inverse of [`InputScaling::apply`] on the network side: returns a network
    /// on raw parameters computing what `net` computes on scaled ones.
    pub fn fold_into(&self, net: &Mlp) -> Result<Mlp> {
        let mut weights = net.weights().to_vec();
        let mut biases = net.biases().to_vec();
        let w0 = &mut weights[0];
        for o in 0..w0.rows() {
            let row = w0.row_mut(o);
            let mut shift = 0.0;
            for (c, w) in row.iter_mut().enumerate() {
                *w /= self.half_width[c];
                shift += *w * self.center[c];
            }
            biases[0][o] -= shift;
        }
        Mlp::from_parts(net.layer_sizes(), weights, biases)
    }
}

fn diverged(epoch: usize, sample: usize, reason: String) -> Error {
    Error::Diverged { epoch, sample, reason }
}

fn worst_sample(
    net: &Mlp,
    spec: &ProblemSpec,
    penalty: &PenaltyConfig,
    inputs: &Matrix,
    batch: &Matrix,
) -> Option<usize> {
    let (out, _) = net.forward(inputs).ok()?;
    let mut worst = (0, f64::NEG_INFINITY);
    for (i, x) in out.iter_rows().enumerate() {
        let loss = loss_terms(x, batch.row(i), spec, penalty).map_or(f64::INFINITY, |t| t.loss);
        if !(loss <= worst.1) {
            worst = (i, loss);
        }
    }
    Some(worst.0)
}

/// Per-instance evaluation of a trained network.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub params: Vec<f64>,
    pub x: Vec<f64>,
    pub objective: f64,
    pub violation: ViolationReport,
    /// Mean wall time of one forward pass, in nanoseconds.
    pub forward_ns: f64,
}

/// Forward passes averaged per timing measurement.
pub const FORWARD_TIMING_REPS: usize = 100;

/// Mean wall time of `reps` single-sample forward passes.
pub fn time_forward(net: &Mlp, p: &[f64], reps: usize) -> Result<f64> {
    let reps = reps.max(1);
    let start = Instant::now();
    for _ in 0..reps {
        std::hint::black_box(net.predict(std::hint::black_box(p))?);
    }
    Ok((start.elapsed().as_nanos() as f64 / reps as f64).max(f64::MIN_POSITIVE))
}

pub fn evaluate(net: &Mlp, spec: &ProblemSpec, params: &ParamSet, penalty: &PenaltyConfig) -> Result<Vec<EvalReport>> {
    if net.input_dim() != spec.param_dim || net.output_dim() != spec.decision_dim {
        return Err(Error::Dimension(format!(
            "network maps {} -> {}, {} needs {} -> {}",
            net.input_dim(),
            net.output_dim(),
            spec.name,
            spec.param_dim,
            spec.decision_dim
        )));
    }
    (0..params.len())
        .map(|i| {
            let p = params.row(i);
            let x = net.predict(p)?;
            let (objective, _) = spec.eval_objective(&x, p)?;
            let violation = violation_report(&x, p, spec, penalty.eq_tolerance)?;
            let forward_ns = time_forward(net, p, FORWARD_TIMING_REPS)?;
            Ok(EvalReport {
                params: p.to_vec(),
                x,
                objective,
                violation,
                forward_ns,
            })
        })
        .collect()
}

/// Writes evaluation rows as CSV:
/// `c1..,x1..,f0,max_ineq_viol,max_eq_viol,feasible,t_fwd_ns`.
pub fn write_eval_csv<W: Write>(reports: &[EvalReport], spec: &ProblemSpec, mut out: W, with_time: bool) -> Result<()> {
    let mut header: Vec<String> = (1..=spec.param_dim).map(|i| format!("c{i}")).collect();
    header.extend((1..=spec.decision_dim).map(|i| format!("x{i}")));
    header.extend(["f0", "max_ineq_viol", "max_eq_viol", "feasible", "t_fwd_ns"].map(String::from));
    writeln!(out, "{}", header.join(","))?;
    for r in reports {
        let mut cols: Vec<String> = r.params.iter().chain(&r.x).map(|v| format!("{v:.17e}")).collect();
        cols.push(format!("{:.17e}", r.objective));
        cols.push(format!("{:.17e}", r.violation.max_ineq_violation));
        cols.push(format!("{:.17e}", r.violation.max_eq_violation));
        cols.push(r.violation.feasible.to_string());
        cols.push(if with_time { format!("{:.0}", r.forward_ns) } else { "0".into() });
        writeln!(out, "{}", cols.join(","))?;
    }
    Ok(())
}
