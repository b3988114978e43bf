//! Fully-connected Q-network with hand-written forward and backward passes.
//!
//! Plain f64 MLP: rectified hidden layers, linear output, one output unit
//! per action. Everything is explicit — no autodiff, no BLAS — so the
//! arithmetic can be audited and checked against finite differences.

use super::AgentError;
use crate::rng::Rng;
use rand::Rng as _;
use std::fmt::Write as _;
use std::path::Path;

/// MLP parameters. `shapes` lists layer widths input-first, e.g.
/// `[4, 64, 64, 2]`; weights are stored row-major as `out x in` per layer.
#[derive(Debug, Clone, PartialEq)]
pub struct QNetwork {
    shapes: Vec<usize>,
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
}

/// Per-parameter gradient accumulator mirroring a network's layout.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn zeros_like(net: &QNetwork) -> Self {
        Self {
            weights: net.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            biases: net.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }

    /// Global L2 norm over every parameter gradient.
    pub fn norm(&self) -> f64 {
        let sq: f64 = self
            .weights
            .iter()
            .chain(self.biases.iter())
            .flat_map(|v| v.iter())
            .map(|g| g * g)
            .sum();
        sq.sqrt()
    }

    pub fn scale(&mut self, factor: f64) {
        for v in self.weights.iter_mut().chain(self.biases.iter_mut()) {
            for g in v.iter_mut() {
                *g *= factor;
            }
        }
    }
}

/// Scratch space for a cached forward pass: pre-activations and activations
/// per layer, reused across samples to avoid allocation churn.
#[derive(Debug, Default, Clone)]
pub struct Workspace {
    /// z_l = W_l a_{l-1} + b_l per layer.
    pre: Vec<Vec<f64>>,
    /// a_l = relu(z_l) on hidden layers, z_l on the output layer.
    act: Vec<Vec<f64>>,
}

impl QNetwork {
    /// He-style uniform initialization: each layer's weights drawn from
    /// U[-sqrt(6/fan_in), +sqrt(6/fan_in)], biases zero.
    pub fn new(shapes: &[usize], rng: &mut Rng) -> Self {
        assert!(shapes.len() >= 2, "need at least input and output widths");
        assert!(shapes.iter().all(|&s| s > 0), "zero-width layer");
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for w in shapes.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let limit = (6.0 / fan_in as f64).sqrt();
            weights.push((0..fan_in * fan_out).map(|_| rng.gen_range(-limit..=limit)).collect());
            biases.push(vec![0.0; fan_out]);
        }
        Self { shapes: shapes.to_vec(), weights, biases }
    }

    /// All-zero parameters (outputs equal the biases, i.e. zero).
    pub fn zeros(shapes: &[usize]) -> Self {
        assert!(shapes.len() >= 2);
        let weights = shapes.windows(2).map(|w| vec![0.0; w[0] * w[1]]).collect();
        let biases = shapes.windows(2).map(|w| vec![0.0; w[1]]).collect();
        Self { shapes: shapes.to_vec(), weights, biases }
    }

    pub fn shapes(&self) -> &[usize] {
        &self.shapes
    }

    pub fn input_dim(&self) -> usize {
        self.shapes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.shapes.last().unwrap()
    }

    fn layer_count(&self) -> usize {
        self.weights.len()
    }

    /// Forward pass into a caller-provided workspace; returns a reference to
    /// the output activations.
    pub fn forward_cached<'w>(
        &self,
        state: &[f64],
        ws: &'w mut Workspace,
    ) -> Result<&'w [f64], AgentError> {
        if state.len() != self.input_dim() {
            return Err(AgentError::DimensionMismatch {
                got: state.len(),
                expected: self.input_dim(),
            });
        }
        ws.pre.resize(self.layer_count(), Vec::new());
        ws.act.resize(self.layer_count(), Vec::new());

        for l in 0..self.layer_count() {
            let (in_dim, out_dim) = (self.shapes[l], self.shapes[l + 1]);
            let w = &self.weights[l];
            let b = &self.biases[l];
            // Split borrows: the input of layer l is either the state or the
            // activation of layer l-1.
            let (done, rest) = ws.act.split_at_mut(l);
            let input: &[f64] = if l == 0 { state } else { &done[l - 1] };
            let pre = &mut ws.pre[l];
            pre.clear();
            pre.resize(out_dim, 0.0);
            for o in 0..out_dim {
                let row = &w[o * in_dim..(o + 1) * in_dim];
                let mut z = b[o];
                for (wi, xi) in row.iter().zip(input) {
                    z += wi * xi;
                }
                pre[o] = z;
            }
            let act = &mut rest[0];
            act.clear();
            if l + 1 == self.layer_count() {
                act.extend_from_slice(pre);
            } else {
                act.extend(pre.iter().map(|z| z.max(0.0)));
            }
        }
        Ok(&ws.act[self.layer_count() - 1])
    }

    /// Forward pass with a fresh workspace, returning an owned q-vector.
    pub fn forward(&self, state: &[f64]) -> Result<Vec<f64>, AgentError> {
        let mut ws = Workspace::default();
        self.forward_cached(state, &mut ws).map(<[f64]>::to_vec)
    }

    /// Backward pass for one sample whose forward pass is cached in `ws`.
    /// `out_grad` is dL/d(output); parameter gradients accumulate into
    /// `grads`. `scratch` holds the propagated deltas between layers.
    pub fn backward_cached(
        &self,
        state: &[f64],
        ws: &Workspace,
        out_grad: &[f64],
        grads: &mut Gradients,
        scratch: &mut Vec<f64>,
    ) {
        let last = self.layer_count() - 1;
        scratch.clear();
        scratch.extend_from_slice(out_grad);
        for l in (0..=last).rev() {
            let (in_dim, out_dim) = (self.shapes[l], self.shapes[l + 1]);
            let input: &[f64] = if l == 0 { state } else { &ws.act[l - 1] };
            let delta = scratch.clone();
            let gw = &mut grads.weights[l];
            let gb = &mut grads.biases[l];
            for o in 0..out_dim {
                let d = delta[o];
                gb[o] += d;
                let row = &mut gw[o * in_dim..(o + 1) * in_dim];
                for (g, xi) in row.iter_mut().zip(input) {
                    *g += d * xi;
                }
            }
            if l > 0 {
                // delta_{l-1} = W_l^T delta_l gated by relu'(z_{l-1}).
                scratch.clear();
                scratch.resize(in_dim, 0.0);
                let w = &self.weights[l];
                for o in 0..out_dim {
                    let d = delta[o];
                    let row = &w[o * in_dim..(o + 1) * in_dim];
                    for (s, wi) in scratch.iter_mut().zip(row) {
                        *s += wi * d;
                    }
                }
                for (s, z) in scratch.iter_mut().zip(&ws.pre[l - 1]) {
                    if *z <= 0.0 {
                        *s = 0.0;
                    }
                }
            }
        }
    }

    /// Gradient descent update: θ ← θ − lr·g.
    pub fn apply_gradients(&mut self, grads: &Gradients, lr: f64) {
        for (w, g) in self.weights.iter_mut().zip(&grads.weights) {
            for (wi, gi) in w.iter_mut().zip(g) {
                *wi -= lr * gi;
            }
        }
        for (b, g) in self.biases.iter_mut().zip(&grads.biases) {
            for (bi, gi) in b.iter_mut().zip(g) {
                *bi -= lr * gi;
            }
        }
    }

    pub fn param_count(&self) -> usize {
        self.weights.iter().map(Vec::len).sum::<usize>()
            + self.biases.iter().map(Vec::len).sum::<usize>()
    }

    /// Flat view of one parameter for finite-difference probing: weights of
    /// all layers first, then biases of all layers.
    pub fn param(&self, idx: usize) -> f64 {
        *self.flat(idx)
    }

    pub fn param_mut(&mut self, idx: usize) -> &mut f64 {
        let total = self.param_count();
        let total_w: usize = self.weights.iter().map(Vec::len).sum();
        if idx < total_w {
            let mut i = idx;
            for w in &mut self.weights {
                if i < w.len() {
                    return &mut w[i];
                }
                i -= w.len();
            }
            unreachable!()
        }
        let mut i = idx - total_w;
        for b in &mut self.biases {
            if i < b.len() {
                return &mut b[i];
            }
            i -= b.len();
        }
        panic!("parameter index {idx} out of range {total}");
    }

    fn flat(&self, idx: usize) -> &f64 {
        let total_w: usize = self.weights.iter().map(Vec::len).sum();
        if idx < total_w {
            let mut i = idx;
            for w in &self.weights {
                if i < w.len() {
                    return &w[i];
                }
                i -= w.len();
            }
            unreachable!()
        }
        let mut i = idx - total_w;
        for b in &self.biases {
            if i < b.len() {
                return &b[i];
            }
            i -= b.len();
        }
        panic!("parameter index {idx} out of range {}", self.param_count());
    }

    /// Direct access for tests and the identity-setup helpers.
    pub fn layer_mut(&mut self, l: usize) -> (&mut [f64], &mut [f64]) {
        (&mut self.weights[l], &mut self.biases[l])
    }

    /// Serialize to a small text checkpoint: a header with the layer widths
    /// followed by one parameter per line (weights first, then biases, in
    /// layer order). f64 formatting round-trips exactly.
    pub fn save(&self, path: &Path) -> Result<(), AgentError> {
        let mut out = String::new();
        write!(out, "qnet-v1").unwrap();
        for s in &self.shapes {
            write!(out, " {s}").unwrap();
        }
        out.push('\n');
        for v in self.weights.iter().chain(self.biases.iter()).flat_map(|v| v.iter()) {
            writeln!(out, "{v}").unwrap();
        }
        std::fs::write(path, out)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, AgentError> {
        let text = std::fs::read_to_string(path)?;
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| AgentError::Checkpoint("empty file".into()))?;
        let mut parts = header.split_whitespace();
        if parts.next() != Some("qnet-v1") {
            return Err(AgentError::Checkpoint("bad magic".into()));
        }
        let shapes: Vec<usize> = parts
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map_err(|e| AgentError::Checkpoint(format!("bad shape: {e}")))?;
        if shapes.len() < 2 {
            return Err(AgentError::Checkpoint("need at least two layer widths".into()));
        }
        let mut net = QNetwork::zeros(&shapes);
        let expected = net.param_count();
        let mut idx = 0;
        for line in lines {
            if line.is_empty() {
                continue;
            }
            if idx >= expected {
                return Err(AgentError::Checkpoint("too many parameters".into()));
            }
            *net.param_mut(idx) = line
                .parse()
                .map_err(|e| AgentError::Checkpoint(format!("bad parameter: {e}")))?;
            idx += 1;
        }
        if idx != expected {
            return Err(AgentError::Checkpoint(format!(
                "expected {expected} parameters, found {idx}"
            )));
        }
        Ok(net)
    }
}
