//! Fully connected networks with rectifier hidden layers and exact
//! backpropagation.
//!
//! Parameters live in one flat buffer. Layer `l` stores its weight matrix
//! row-major (`out x in`) followed by its bias vector, so optimizers, soft
//! updates and checkpoints can treat a network as a single slice.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{contract_err, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OutputActivation {
    /// Exponentiate-and-normalize onto the probability simplex.
    Softmax,
    Identity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    sizes: Vec<usize>,
    output: OutputActivation,
    params: Vec<f64>,
}

/// Everything the backward pass needs from a forward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// `activations[0]` is the input; `activations[l]` the rectified output
    /// of hidden layer `l`.
    activations: Vec<Vec<f64>>,
    /// Pre-activation of the output layer.
    pub logits: Vec<f64>,
    pub output: Vec<f64>,
}

/// Max-subtracted softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let sum: f64 = out.iter().sum();
    out.iter_mut().for_each(|p| *p /= sum);
    out
}

fn param_count(sizes: &[usize]) -> usize {
    sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
}

impl Mlp {
    /// Weights and biases uniform in `+-1/sqrt(fan_in)`.
    pub fn new<R: Rng + ?Sized>(
        sizes: &[usize],
        output: OutputActivation,
        rng: &mut R,
    ) -> Result<Self> {
        Self::check_sizes(sizes)?;
        let mut params = Vec::with_capacity(param_count(sizes));
        for w in sizes.windows(2) {
            let bound = 1.0 / (w[0] as f64).sqrt();
            for _ in 0..(w[0] * w[1] + w[1]) {
                params.push(rng.random_range(-bound..bound));
            }
        }
        Ok(Self {
            sizes: sizes.to_vec(),
            output,
            params,
        })
    }

    pub fn from_parts(sizes: Vec<usize>, output: OutputActivation, params: Vec<f64>) -> Result<Self> {
        Self::check_sizes(&sizes)?;
        let expect = param_count(&sizes);
        if params.len() != expect {
            return Err(contract_err(format!(
                "network {sizes:?} needs {expect} parameters, got {}",
                params.len()
            )));
        }
        Ok(Self {
            sizes,
            output,
            params,
        })
    }

    fn check_sizes(sizes: &[usize]) -> Result<()> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(contract_err(format!("invalid layer sizes {sizes:?}")));
        }
        Ok(())
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn input_size(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_size(&self) -> usize {
        self.sizes[self.sizes.len() - 1]
    }

    pub fn output_activation(&self) -> OutputActivation {
        self.output
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn n_params(&self) -> usize {
        self.params.len()
    }

    pub fn is_finite(&self) -> bool {
        self.params.iter().all(|p| p.is_finite())
    }

    fn n_layers(&self) -> usize {
        self.sizes.len() - 1
    }

    /// Offsets of (weights, biases) for layer `l`.
    fn layer_offsets(&self, l: usize) -> (usize, usize) {
        let w_off: usize = self.sizes[..=l].windows(2).map(|w| w[0] * w[1] + w[1]).sum();
        (w_off, w_off + self.sizes[l] * self.sizes[l + 1])
    }

    fn affine(&self, l: usize, x: &[f64]) -> Vec<f64> {
        let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
        let (w_off, b_off) = self.layer_offsets(l);
        let w = &self.params[w_off..w_off + n_in * n_out];
        let b = &self.params[b_off..b_off + n_out];
        w.chunks_exact(n_in)
            .zip(b)
            .map(|(row, &bias)| bias + row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>())
            .collect()
    }

    pub fn forward(&self, x: &[f64]) -> Result<ForwardCache> {
        if x.len() != self.input_size() {
            return Err(contract_err(format!(
                "input has {} values, network expects {}",
                x.len(),
                self.input_size()
            )));
        }
        let mut activations = Vec::with_capacity(self.n_layers());
        activations.push(x.to_vec());
        for l in 0..self.n_layers() - 1 {
            let mut z = self.affine(l, &activations[l]);
            z.iter_mut().for_each(|v| *v = v.max(0.0));
            activations.push(z);
        }
        let logits = self.affine(self.n_layers() - 1, &activations[self.n_layers() - 1]);
        let output = match self.output {
            OutputActivation::Softmax => softmax(&logits),
            OutputActivation::Identity => logits.clone(),
        };
        Ok(ForwardCache {
            activations,
            logits,
            output,
        })
    }

    pub fn predict(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward(x)?.output)
    }

    /// Backpropagates `dy = dL/dy` through the network.
    ///
    /// Parameter gradients are accumulated (`+=`) into `param_grad` when
    /// given; the gradient with respect to the input is returned.
    pub fn backward(
        &self,
        cache: &ForwardCache,
        dy: &[f64],
        mut param_grad: Option<&mut [f64]>,
    ) -> Result<Vec<f64>> {
        if dy.len() != self.output_size() || cache.output.len() != self.output_size() {
            return Err(contract_err("upstream gradient does not match the output layer"));
        }
        if cache.activations.len() != self.n_layers() || cache.activations[0].len() != self.input_size() {
            return Err(contract_err("forward cache does not belong to this network"));
        }
        if let Some(g) = param_grad.as_deref() {
            if g.len() != self.params.len() {
                return Err(contract_err("gradient buffer has the wrong length"));
            }
        }

        let mut delta: Vec<f64> = match self.output {
            OutputActivation::Identity => dy.to_vec(),
            OutputActivation::Softmax => {
                let y = &cache.output;
                let dot: f64 = y.iter().zip(dy).map(|(a, b)| a * b).sum();
                y.iter().zip(dy).map(|(&yi, &gi)| yi * (gi - dot)).collect()
            }
        };

        for l in (0..self.n_layers()).rev() {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let (w_off, b_off) = self.layer_offsets(l);
            let input = &cache.activations[l];
            let w = &self.params[w_off..w_off + n_in * n_out];
            let mut d_input = vec![0.0; n_in];
            for (o, &d) in delta.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                let row = &w[o * n_in..(o + 1) * n_in];
                for (di, &wi) in d_input.iter_mut().zip(row) {
                    *di += wi * d;
                }
            }
            if let Some(g) = param_grad.as_deref_mut() {
                for (o, &d) in delta.iter().enumerate() {
                    if d == 0.0 {
                        continue;
                    }
                    let g_row = &mut g[w_off + o * n_in..w_off + (o + 1) * n_in];
                    for (gi, &xi) in g_row.iter_mut().zip(input) {
                        *gi += d * xi;
                    }
                    g[b_off + o] += d;
                }
            }
            if l > 0 {
                // Rectifier derivative: the stored activation is positive
                // exactly where the pre-activation was.
                for (di, &a) in d_input.iter_mut().zip(input) {
                    if a <= 0.0 {
                        *di = 0.0;
                    }
                }
            }
            delta = d_input;
        }
        Ok(delta)
    }
}

/// `target <- tau * live + (1 - tau) * target`, elementwise.
pub fn soft_update(live: &Mlp, target: &mut Mlp, tau: f64) -> Result<()> {
    if live.sizes != target.sizes || live.output != target.output {
        return Err(contract_err("soft update between differently shaped networks"));
    }
    if !(0.0..=1.0).contains(&tau) {
        return Err(contract_err(format!("soft update rate {tau} outside [0, 1]")));
    }
    if tau == 1.0 {
        target.params.copy_from_slice(&live.params);
        return Ok(());
    }
    for (t, &l) in target.params.iter_mut().zip(&live.params) {
        *t = tau * l + (1.0 - tau) * *t;
    }
    Ok(())
}
