//! Dense feed-forward network: forward pass, reverse-mode gradients, ADAM
//! updates and the forward-pass multiply-accumulate estimate.
//!
//! Layout conventions:
//! - batches are row-major `[batch × dim]` matrices, one sample per row;
//! - layer weights are row-major `[fan_out × fan_in]`.
//!
//! Hidden layers use `tanh`; the output layer is the identity so the
//! network can emit any point of the decision space.

use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Row-major dense matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} values cannot fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from equally sized rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::Dimension(format!(
                    "row {i} has {} columns, expected {cols}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.cols.max(1)).take(self.rows)
    }

    /// Copies the given rows, in order, into a new matrix.
    pub fn select_rows(&self, indices: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Matrix {
            rows: indices.len(),
            cols: self.cols,
            data,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Tanh,
    Identity,
}

impl Activation {
    #[inline]
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Tanh => z.tanh(),
            Activation::Identity => z,
        }
    }

    /// Derivative expressed through the activation output.
    #[inline]
    fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - y * y,
            Activation::Identity => 1.0,
        }
    }
}

/// Multiply-accumulate count of one forward pass:
/// `n·m₁ + Σ mᵢ·mᵢ₊₁ + m_l·k`, i.e. the sum of consecutive layer products.
pub fn mac_count(layer_sizes: &[usize]) -> Result<u64> {
    validate_layer_sizes(layer_sizes)?;
    Ok(layer_sizes
        .windows(2)
        .map(|w| (w[0] as u64) * (w[1] as u64))
        .sum())
}

/// Training-cost proxy `epochs · samples · mac_count`. Constant factors of
/// the backward pass are not modelled.
pub fn training_cost_estimate(layer_sizes: &[usize], epochs: usize, samples: usize) -> Result<u128> {
    Ok(epochs as u128 * samples as u128 * mac_count(layer_sizes)? as u128)
}

fn validate_layer_sizes(layer_sizes: &[usize]) -> Result<()> {
    if layer_sizes.len() < 3 {
        return Err(Error::Shape(format!(
            "need input, at least one hidden and an output layer, got {layer_sizes:?}"
        )));
    }
    if layer_sizes.contains(&0) {
        return Err(Error::Shape(format!(
            "layer sizes must be positive, got {layer_sizes:?}"
        )));
    }
    Ok(())
}

/// Per-parameter tensors with the same shapes as an [`Mlp`]'s parameters.
/// Used for gradients and ADAM moments.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Matrix>,
    pub biases: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn zeros_like(net: &Mlp) -> Self {
        Self {
            weights: net
                .weights
                .iter()
                .map(|w| Matrix::zeros(w.rows, w.cols))
                .collect(),
            biases: net.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }

    fn matches(&self, net: &Mlp) -> bool {
        self.weights.len() == net.weights.len()
            && self.biases.len() == net.biases.len()
            && self
                .weights
                .iter()
                .zip(&net.weights)
                .all(|(a, b)| a.shape() == b.shape())
            && self
                .biases
                .iter()
                .zip(&net.biases)
                .all(|(a, b)| a.len() == b.len())
    }

    /// All entries in the canonical order `W₀, b₀, W₁, b₁, …`.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.extend_from_slice(w.as_slice());
            out.extend_from_slice(b);
        }
        out
    }

    pub fn scale(&mut self, factor: f64) {
        for w in &mut self.weights {
            w.as_mut_slice().iter_mut().for_each(|v| *v *= factor);
        }
        for b in &mut self.biases {
            b.iter_mut().for_each(|v| *v *= factor);
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.to_flat().iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// Cached activations of one forward pass. `post[0]` is the input batch;
/// `pre[t]` and `post[t + 1]` belong to layer `t`.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    pre: Vec<Matrix>,
    post: Vec<Matrix>,
}

impl ForwardTrace {
    pub fn pre_activations(&self) -> &[Matrix] {
        &self.pre
    }

    pub fn post_activations(&self) -> &[Matrix] {
        &self.post
    }

    pub fn batch_size(&self) -> usize {
        self.post.first().map_or(0, Matrix::rows)
    }
}

/// Dense multilayer perceptron with `tanh` hidden layers and an identity
/// output layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    layer_sizes: Vec<usize>,
    weights: Vec<Matrix>,
    biases: Vec<Vec<f64>>,
    hidden_activation: Activation,
    output_activation: Activation,
}

impl Mlp {
    /// All weights and biases zero.
    pub fn zeros(layer_sizes: &[usize]) -> Result<Self> {
        validate_layer_sizes(layer_sizes)?;
        let weights = layer_sizes
            .windows(2)
            .map(|w| Matrix::zeros(w[1], w[0]))
            .collect();
        let biases = layer_sizes[1..].iter().map(|&m| vec![0.0; m]).collect();
        Ok(Self {
            layer_sizes: layer_sizes.to_vec(),
            weights,
            biases,
            hidden_activation: Activation::Tanh,
            output_activation: Activation::Identity,
        })
    }

    /// Glorot-uniform weights in `±sqrt(6 / (fan_in + fan_out))`, zero biases.
    pub fn seeded(layer_sizes: &[usize], seed: u64) -> Result<Self> {
        let mut net = Self::zeros(layer_sizes)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for w in &mut net.weights {
            let limit = (6.0 / (w.rows + w.cols) as f64).sqrt();
            let dist = Uniform::new_inclusive(-limit, limit);
            for v in w.as_mut_slice() {
                *v = dist.sample(&mut rng);
            }
        }
        Ok(net)
    }

    pub fn from_parts(
        layer_sizes: &[usize],
        weights: Vec<Matrix>,
        biases: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let mut net = Self::zeros(layer_sizes)?;
        let probe = Gradients { weights, biases };
        if !probe.matches(&net) {
            return Err(Error::Dimension(format!(
                "parameter tensors do not match layer sizes {layer_sizes:?}"
            )));
        }
        if probe.to_flat().iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("non-finite network parameter".into()));
        }
        net.weights = probe.weights;
        net.biases = probe.biases;
        Ok(net)
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    pub fn num_layers(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[Matrix] {
        &self.weights
    }

    pub fn biases(&self) -> &[Vec<f64>] {
        &self.biases
    }

    pub fn num_params(&self) -> usize {
        self.weights
            .iter()
            .zip(&self.biases)
            .map(|(w, b)| w.as_slice().len() + b.len())
            .sum()
    }

    pub fn mac_count(&self) -> u64 {
        mac_count(&self.layer_sizes).expect("layer sizes validated at construction")
    }

    /// Parameters in the order `W₀, b₀, W₁, b₁, …`.
    pub fn flat_params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_params());
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.extend_from_slice(w.as_slice());
            out.extend_from_slice(b);
        }
        out
    }

    pub fn set_flat_params(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.num_params() {
            return Err(Error::Dimension(format!(
                "expected {} parameters, got {}",
                self.num_params(),
                flat.len()
            )));
        }
        let mut at = 0;
        for (w, b) in self.weights.iter_mut().zip(&mut self.biases) {
            let n = w.as_slice().len();
            w.as_mut_slice().copy_from_slice(&flat[at..at + n]);
            at += n;
            let m = b.len();
            b.copy_from_slice(&flat[at..at + m]);
            at += m;
        }
        Ok(())
    }

    fn activation_of(&self, layer: usize) -> Activation {
        if layer + 1 == self.weights.len() {
            self.output_activation
        } else {
            self.hidden_activation
        }
    }

    /// Forward pass over a `[batch × n]` input matrix.
    pub fn forward(&self, batch: &Matrix) -> Result<(Matrix, ForwardTrace)> {
        if batch.cols() != self.input_dim() {
            return Err(Error::Dimension(format!(
                "input has {} columns, network expects {}",
                batch.cols(),
                self.input_dim()
            )));
        }
        if batch.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("non-finite network input".into()));
        }
        let mut pre = Vec::with_capacity(self.num_layers());
        let mut post = Vec::with_capacity(self.num_layers() + 1);
        post.push(batch.clone());
        for (t, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let act = self.activation_of(t);
            let input = post.last().unwrap();
            let mut z = Matrix::zeros(input.rows(), w.rows());
            for s in 0..input.rows() {
                affine(w, b, input.row(s), z.row_mut(s));
            }
            let mut a = z.clone();
            a.as_mut_slice().iter_mut().for_each(|v| *v = act.apply(*v));
            pre.push(z);
            post.push(a);
        }
        let out = post.last().unwrap().clone();
        Ok((out, ForwardTrace { pre, post }))
    }

    /// Single-sample forward pass without caching.
    pub fn predict(&self, input: &[f64]) -> Result<Vec<f64>> {
        if input.len() != self.input_dim() {
            return Err(Error::Dimension(format!(
                "input has {} entries, network expects {}",
                input.len(),
                self.input_dim()
            )));
        }
        let mut cur = input.to_vec();
        let mut next = Vec::new();
        for (t, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let act = self.activation_of(t);
            next.clear();
            next.resize(w.rows(), 0.0);
            affine(w, b, &cur, &mut next);
            next.iter_mut().for_each(|v| *v = act.apply(*v));
            std::mem::swap(&mut cur, &mut next);
        }
        Ok(cur)
    }

    /// Reverse pass. `upstream` holds `dL/d(output)` per sample; the returned
    /// parameter gradients are summed over the batch.
    pub fn backward(&self, trace: &ForwardTrace, upstream: &Matrix) -> Result<(Gradients, Matrix)> {
        self.check_trace(trace)?;
        let batch = trace.batch_size();
        if upstream.shape() != (batch, self.output_dim()) {
            return Err(Error::Dimension(format!(
                "upstream gradient is {:?}, expected {:?}",
                upstream.shape(),
                (batch, self.output_dim())
            )));
        }
        let mut grads = Gradients::zeros_like(self);
        let mut delta = upstream.clone();
        for t in (0..self.num_layers()).rev() {
            let act = self.activation_of(t);
            let out = &trace.post[t + 1];
            for (d, y) in delta.as_mut_slice().iter_mut().zip(out.as_slice()) {
                *d *= act.derivative_from_output(*y);
            }
            let input = &trace.post[t];
            let w = &self.weights[t];
            let gw = &mut grads.weights[t];
            let gb = &mut grads.biases[t];
            let mut prev = Matrix::zeros(batch, w.cols());
            for s in 0..batch {
                let d_row = delta.row(s);
                let a_row = input.row(s);
                let p_row = prev.row_mut(s);
                for (o, &d) in d_row.iter().enumerate() {
                    if d == 0.0 {
                        continue;
                    }
                    gb[o] += d;
                    let g_row = gw.row_mut(o);
                    let w_row = w.row(o);
                    for i in 0..a_row.len() {
                        g_row[i] += d * a_row[i];
                        p_row[i] += d * w_row[i];
                    }
                }
            }
            delta = prev;
        }
        Ok((grads, delta))
    }

    fn check_trace(&self, trace: &ForwardTrace) -> Result<()> {
        let layers = self.num_layers();
        if trace.pre.len() != layers || trace.post.len() != layers + 1 {
            return Err(Error::Trace(format!(
                "trace has {} layers, network has {layers}",
                trace.pre.len()
            )));
        }
        let batch = trace.batch_size();
        for (t, &size) in self.layer_sizes.iter().enumerate() {
            if trace.post[t].shape() != (batch, size)
                || (t > 0 && trace.pre[t - 1].shape() != (batch, size))
            {
                return Err(Error::Trace(format!(
                    "layer {t} activations do not match width {size}"
                )));
            }
        }
        Ok(())
    }
}

#[inline]
fn affine(w: &Matrix, b: &[f64], input: &[f64], out: &mut [f64]) {
    for (o, slot) in out.iter_mut().enumerate() {
        let row = w.row(o);
        let mut acc = b[o];
        for (wi, xi) in row.iter().zip(input) {
            acc += wi * xi;
        }
        *slot = acc;
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

impl AdamConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.learning_rate > 0.0
            && self.epsilon > 0.0
            && (0.0..1.0).contains(&self.beta1)
            && (0.0..1.0).contains(&self.beta2)
            && self.beta1 > 0.0
            && self.beta2 > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid ADAM hyperparameters {self:?}")))
        }
    }
}

/// First/second moment estimates and step counter for one network.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub config: AdamConfig,
    first_moment: Gradients,
    second_moment: Gradients,
    step_count: u64,
}

impl AdamState {
    pub fn new(net: &Mlp, config: AdamConfig) -> Self {
        Self {
            config,
            first_moment: Gradients::zeros_like(net),
            second_moment: Gradients::zeros_like(net),
            step_count: 0,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    pub fn first_moment(&self) -> &Gradients {
        &self.first_moment
    }

    pub fn second_moment(&self) -> &Gradients {
        &self.second_moment
    }
}

/// Bias-corrected ADAM update of every network parameter.
pub fn adam_step(net: &mut Mlp, state: &mut AdamState, grads: &Gradients) -> Result<()> {
    if !grads.matches(net) {
        return Err(Error::Dimension("gradients do not match the network".into()));
    }
    if !state.first_moment.matches(net) || !state.second_moment.matches(net) {
        return Err(Error::Dimension("ADAM state does not match the network".into()));
    }
    state.step_count += 1;
    let AdamConfig {
        learning_rate,
        beta1,
        beta2,
        epsilon,
    } = state.config;
    let t = state.step_count as i32;
    let c1 = 1.0 - beta1.powi(t);
    let c2 = 1.0 - beta2.powi(t);

    let update = |param: &mut [f64], m: &mut [f64], v: &mut [f64], g: &[f64]| {
        for i in 0..param.len() {
            m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
            v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
            let m_hat = m[i] / c1;
            let v_hat = v[i] / c2;
            param[i] -= learning_rate * m_hat / (v_hat.sqrt() + epsilon);
        }
    };

    for t in 0..net.weights.len() {
        update(
            net.weights[t].as_mut_slice(),
            state.first_moment.weights[t].as_mut_slice(),
            state.second_moment.weights[t].as_mut_slice(),
            grads.weights[t].as_slice(),
        );
        update(
            &mut net.biases[t],
            &mut state.first_moment.biases[t],
            &mut state.second_moment.biases[t],
            &grads.biases[t],
        );
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::Rng;

    fn scalar_net(w1: f64, w2: f64) -> Mlp {
        Mlp::from_parts(
            &[1, 1, 1],
            vec![
                Matrix::from_vec(1, 1, vec![w1]).unwrap(),
                Matrix::from_vec(1, 1, vec![w2]).unwrap(),
            ],
            vec![vec![0.0], vec![0.0]],
        )
        .unwrap()
    }

    fn random_batch(rows: usize, cols: usize, seed: u64) -> Matrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..rows * cols).map(|_| rng.gen_range(-2.0..2.0)).collect();
        Matrix::from_vec(rows, cols, data).unwrap()
    }

    /// Central finite difference of `Σ upstream ⊙ forward(batch)` w.r.t. every parameter.
    fn fd_param_grads(net: &Mlp, batch: &Matrix, upstream: &Matrix, h: f64) -> Vec<f64> {
        let base = net.flat_params();
        let objective = |params: &[f64]| {
            let mut n = net.clone();
            n.set_flat_params(params).unwrap();
            let (out, _) = n.forward(batch).unwrap();
            out.as_slice()
                .iter()
                .zip(upstream.as_slice())
                .map(|(a, b)| a * b)
                .sum::<f64>()
        };
        (0..base.len())
            .map(|i| {
                let mut plus = base.clone();
                let mut minus = base.clone();
                plus[i] += h;
                minus[i] -= h;
                (objective(&plus) - objective(&minus)) / (2.0 * h)
            })
            .collect()
    }

    fn rel_err(a: f64, b: f64, floor: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs()).max(floor)
    }

    #[test]
    fn zero_net_outputs_zero() {
        let net = Mlp::zeros(&[3, 7, 5, 2]).unwrap();
        let (out, _) = net.forward(&random_batch(4, 3, 1)).unwrap();
        assert!(out.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn scalar_composition() {
        let net = scalar_net(1.0, 1.0);
        let (out, trace) = net.forward(&Matrix::from_vec(1, 1, vec![0.5]).unwrap()).unwrap();
        assert_relative_eq!(out.get(0, 0), 0.5_f64.tanh(), epsilon = 1e-15);
        assert_relative_eq!(out.get(0, 0), 0.462117, epsilon = 1e-6);
        assert_eq!(trace.pre_activations().len(), 2);
        assert_eq!(trace.post_activations().len(), 3);
    }

    #[test]
    fn forward_is_deterministic() {
        let net = Mlp::seeded(&[2, 20, 20, 2], 42).unwrap();
        let x = Matrix::from_vec(1, 2, vec![1.0, 1.0]).unwrap();
        let (a, _) = net.forward(&x).unwrap();
        let (b, _) = net.forward(&x).unwrap();
        assert!(a.as_slice().iter().all(|v| v.is_finite()));
        let bits = |m: &Matrix| m.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
        assert_eq!(net.predict(&[1.0, 1.0]).unwrap(), a.row(0).to_vec());
    }

    #[test]
    fn forward_rejects_bad_input() {
        let net = Mlp::seeded(&[2, 4, 1], 0).unwrap();
        assert!(matches!(
            net.forward(&Matrix::zeros(1, 3)),
            Err(Error::Dimension(_))
        ));
        let bad = Matrix::from_vec(1, 2, vec![f64::NAN, 0.0]).unwrap();
        assert!(matches!(net.forward(&bad), Err(Error::Input(_))));
    }

    #[test]
    fn hidden_activations_bounded() {
        let net = Mlp::seeded(&[2, 20, 20, 2], 3).unwrap();
        let (_, trace) = net.forward(&random_batch(16, 2, 9)).unwrap();
        let post = trace.post_activations();
        for layer in &post[1..post.len() - 1] {
            assert!(layer.as_slice().iter().all(|v| v.abs() < 1.0));
        }
    }

    #[test]
    fn zero_upstream_gives_zero_gradients() {
        let net = Mlp::seeded(&[2, 5, 3], 1).unwrap();
        let batch = random_batch(3, 2, 2);
        let (_, trace) = net.forward(&batch).unwrap();
        let (g, gin) = net.backward(&trace, &Matrix::zeros(3, 3)).unwrap();
        assert!(g.to_flat().iter().all(|&v| v == 0.0));
        assert!(gin.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn stale_trace_is_rejected() {
        let a = Mlp::seeded(&[2, 5, 3], 1).unwrap();
        let b = Mlp::seeded(&[2, 6, 3], 1).unwrap();
        let (_, trace) = a.forward(&random_batch(2, 2, 0)).unwrap();
        assert!(matches!(
            b.backward(&trace, &Matrix::zeros(2, 3)),
            Err(Error::Trace(_))
        ));
        assert!(matches!(
            a.backward(&trace, &Matrix::zeros(3, 3)),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn scalar_gradient_matches_finite_difference() {
        let net = scalar_net(1e-3, 2e-3);
        let batch = Matrix::from_vec(1, 1, vec![0.7]).unwrap();
        let upstream = Matrix::from_vec(1, 1, vec![1.0]).unwrap();
        let (_, trace) = net.forward(&batch).unwrap();
        let (g, _) = net.backward(&trace, &upstream).unwrap();
        let fd = fd_param_grads(&net, &batch, &upstream, 1e-6);
        for (a, b) in g.to_flat().iter().zip(&fd) {
            assert!(rel_err(*a, *b, 1e-12) < 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn deep_gradient_matches_finite_difference() {
        let net = Mlp::seeded(&[2, 20, 20, 2], 11).unwrap();
        let batch = random_batch(5, 2, 12);
        let upstream = random_batch(5, 2, 13);
        let (_, trace) = net.forward(&batch).unwrap();
        let (g, gin) = net.backward(&trace, &upstream).unwrap();
        let fd = fd_param_grads(&net, &batch, &upstream, 1e-6);
        let flat = g.to_flat();
        let scale = flat.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        for (a, b) in flat.iter().zip(&fd) {
            assert!(rel_err(*a, *b, 1e-6 * scale) < 1e-5, "{a} vs {b}");
        }
        assert_eq!(gin.shape(), (5, 2));
    }

    #[test]
    fn adam_zero_gradient_leaves_params() {
        let mut net = Mlp::seeded(&[2, 4, 2], 5).unwrap();
        let before = net.clone();
        let mut state = AdamState::new(&net, AdamConfig::default());
        let zero = Gradients::zeros_like(&net);
        adam_step(&mut net, &mut state, &zero).unwrap();
        assert_eq!(net, before);
        assert_eq!(state.step_count(), 1);
    }

    #[test]
    fn adam_single_step_value() {
        // One step: m̂ = g, v̂ = g², update = lr·g/(|g|+ε).
        let lr = 1e-3;
        let eps = 1e-8;
        let expected = -lr * 1.0 / (1.0 + eps);
        let mut net = scalar_net(0.0, 0.0);
        let mut state = AdamState::new(&net, AdamConfig::default());
        let mut g = Gradients::zeros_like(&net);
        g.weights[0].set(0, 0, 1.0);
        adam_step(&mut net, &mut state, &g).unwrap();
        assert_relative_eq!(net.weights()[0].get(0, 0), expected, epsilon = 1e-18);
        assert!((net.weights()[0].get(0, 0) - -0.000999999995).abs() < 1e-11);
        assert_eq!(net.weights()[1].get(0, 0), 0.0);
    }

    #[test]
    fn adam_constant_gradient_moves_monotonically() {
        // Scalar reference recurrences, independent of the tensor code path.
        let cfg = AdamConfig::default();
        let (mut m, mut v, mut w_ref) = (0.0_f64, 0.0_f64, 0.5_f64);
        let grad = 0.3;
        let mut net = scalar_net(0.5, 0.0);
        let mut state = AdamState::new(&net, cfg);
        let mut g = Gradients::zeros_like(&net);
        g.weights[0].set(0, 0, grad);
        let mut prev = 0.5;
        for t in 1..=10 {
            adam_step(&mut net, &mut state, &g).unwrap();
            m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad;
            v = cfg.beta2 * v + (1.0 - cfg.beta2) * grad * grad;
            let mh = m / (1.0 - cfg.beta1.powi(t));
            let vh = v / (1.0 - cfg.beta2.powi(t));
            w_ref -= cfg.learning_rate * mh / (vh.sqrt() + cfg.epsilon);
            let w = net.weights()[0].get(0, 0);
            assert!(w < prev);
            assert_relative_eq!(w, w_ref, epsilon = 1e-15);
            prev = w;
        }
        assert_eq!(state.step_count(), 10);
    }

    #[test]
    fn adam_shape_mismatch() {
        let mut net = Mlp::seeded(&[2, 4, 2], 5).unwrap();
        let other = Mlp::seeded(&[2, 3, 2], 5).unwrap();
        let mut state = AdamState::new(&net, AdamConfig::default());
        let g = Gradients::zeros_like(&other);
        assert!(matches!(
            adam_step(&mut net, &mut state, &g),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn mac_counts() {
        assert_eq!(mac_count(&[2, 20, 20, 2]).unwrap(), 480);
        assert_eq!(mac_count(&[2, 10, 20, 20, 20, 10, 2]).unwrap(), 1240);
        assert_eq!(mac_count(&[1, 1, 1]).unwrap(), 2);
        assert!(matches!(mac_count(&[2, 2]), Err(Error::Shape(_))));
        assert_eq!(
            training_cost_estimate(&[2, 20, 20, 2], 5000, 1000).unwrap(),
            5000 * 1000 * 480
        );
    }

    #[test]
    fn seeded_init_respects_glorot_bound() {
        let net = Mlp::seeded(&[5, 10, 20, 2], 8).unwrap();
        for w in net.weights() {
            let limit = (6.0 / (w.rows() + w.cols()) as f64).sqrt();
            assert!(w.as_slice().iter().all(|v| v.abs() <= limit));
        }
        assert_eq!(net, Mlp::seeded(&[5, 10, 20, 2], 8).unwrap());
        assert_ne!(net, Mlp::seeded(&[5, 10, 20, 2], 9).unwrap());
    }
}
