//! Fully connected ReLU network with a linear output layer, plus the
//! squared-TD loss and its backpropagated gradient.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::Experience;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub inputs: usize,
    pub outputs: usize,
    /// `outputs × inputs`, row-major.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Dense {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Self {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            bias: vec![0.0; outputs],
        }
    }

    fn apply(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend(self.bias.iter().enumerate().map(|(o, b)| {
            let row = &self.weights[o * self.inputs..(o + 1) * self.inputs];
            b + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()
        }));
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub layers: Vec<Dense>,
}

impl Mlp {
    pub fn zeros(widths: &[usize]) -> Self {
        assert!(widths.len() >= 2, "an MLP needs at least input and output widths");
        Self {
            layers: widths.windows(2).map(|w| Dense::zeros(w[0], w[1])).collect(),
        }
    }

    /// Glorot-uniform weights, zero biases.
    pub fn glorot<R: Rng + ?Sized>(widths: &[usize], rng: &mut R) -> Self {
        let mut net = Self::zeros(widths);
        for layer in &mut net.layers {
            let limit = (6.0 / (layer.inputs + layer.outputs) as f64).sqrt();
            for w in &mut layer.weights {
                *w = rng.random_range(-limit..=limit);
            }
        }
        net
    }

    /// Layer widths `input → 12K → 8K → n_actions` for `n_ues` UEs.
    pub fn beam_selector_widths(input_dim: usize, n_ues: usize, n_actions: usize) -> Vec<usize> {
        vec![input_dim, 12 * n_ues, 8 * n_ues, n_actions]
    }

    pub fn widths(&self) -> Vec<usize> {
        let mut w = vec![self.layers[0].inputs];
        w.extend(self.layers.iter().map(|l| l.outputs));
        w
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map_or(0, |l| l.outputs)
    }

    pub fn same_shape(&self, other: &Mlp) -> bool {
        self.widths() == other.widths()
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(&self.widths())
    }

    pub fn param_slices(&self) -> impl Iterator<Item = &[f64]> {
        self.layers
            .iter()
            .flat_map(|l| [l.weights.as_slice(), l.bias.as_slice()])
    }

    pub fn param_slices_mut(&mut self) -> impl Iterator<Item = &mut [f64]> {
        self.layers
            .iter_mut()
            .flat_map(|l| [l.weights.as_mut_slice(), l.bias.as_mut_slice()])
    }

    pub fn n_params(&self) -> usize {
        self.param_slices().map(<[f64]>::len).sum()
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                actual: x.len(),
            });
        }
        Ok(())
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        let mut cur = x.to_vec();
        let mut next = Vec::new();
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            layer.apply(&cur, &mut next);
            if i < last {
                next.iter_mut().for_each(|v| *v = v.max(0.0));
            }
            std::mem::swap(&mut cur, &mut next);
        }
        Ok(cur)
    }

    /// Activations of every layer, input first; hidden entries are post-ReLU.
    fn trace(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let last = self.layers.len() - 1;
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(x.to_vec());
        for (i, layer) in self.layers.iter().enumerate() {
            let mut out = Vec::with_capacity(layer.outputs);
            layer.apply(&acts[i], &mut out);
            if i < last {
                out.iter_mut().for_each(|v| *v = v.max(0.0));
            }
            acts.push(out);
        }
        acts
    }

    /// Accumulates `d_out`, the loss gradient w.r.t. the output, back into `grads`.
    fn backprop(&self, acts: &[Vec<f64>], d_out: Vec<f64>, grads: &mut Mlp) {
        let mut delta = d_out;
        for (li, layer) in self.layers.iter().enumerate().rev() {
            let input = &acts[li];
            let g = &mut grads.layers[li];
            for (o, &d) in delta.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                g.bias[o] += d;
                let row = &mut g.weights[o * layer.inputs..(o + 1) * layer.inputs];
                row.iter_mut().zip(input).for_each(|(w, &a)| *w += d * a);
            }
            if li == 0 {
                break;
            }
            // Hidden activations are post-ReLU, so a > 0 marks an open unit.
            delta = (0..layer.inputs)
                .map(|i| {
                    if input[i] > 0.0 {
                        delta
                            .iter()
                            .enumerate()
                            .map(|(o, d)| d * layer.weights[o * layer.inputs + i])
                            .sum()
                    } else {
                        0.0
                    }
                })
                .collect();
        }
    }
}

/// Mean squared TD error on the taken actions and its gradient. `targets` are
/// constants: nothing flows back into the network that produced them.
pub fn loss_and_gradients(net: &Mlp, batch: &[&Experience], targets: &[f64]) -> Result<(f64, Mlp)> {
    if batch.len() != targets.len() {
        return Err(Error::DimensionMismatch {
            expected: batch.len(),
            actual: targets.len(),
        });
    }
    let mut grads = net.zeros_like();
    if batch.is_empty() {
        return Ok((0.0, grads));
    }
    let scale = 1.0 / batch.len() as f64;
    let mut loss = 0.0;
    for (exp, &y) in batch.iter().zip(targets) {
        net.check_input(&exp.state)?;
        if exp.action >= net.output_dim() {
            return Err(Error::ActionOutOfRange {
                action: exp.action,
                size: net.output_dim(),
            });
        }
        let acts = net.trace(&exp.state);
        let q = acts.last().unwrap()[exp.action];
        let err = q - y;
        loss += err * err * scale;
        let mut d_out = vec![0.0; net.output_dim()];
        d_out[exp.action] = 2.0 * err * scale;
        net.backprop(&acts, d_out, &mut grads);
    }
    Ok((loss, grads))
}

/// Central finite-difference estimate of the gradient of the
/// [`loss_and_gradients`] loss, one parameter at a time.
pub fn numerical_gradients(net: &Mlp, batch: &[&Experience], targets: &[f64], h: f64) -> Result<Mlp> {
    let mut probe = net.clone();
    let mut grads = net.zeros_like();
    let n_slices = net.param_slices().count();
    for s in 0..n_slices {
        let len = net.param_slices().nth(s).map_or(0, <[f64]>::len);
        for i in 0..len {
            let base = net.param_slices().nth(s).unwrap()[i];
            probe.param_slices_mut().nth(s).unwrap()[i] = base + h;
            let (plus, _) = loss_and_gradients(&probe, batch, targets)?;
            probe.param_slices_mut().nth(s).unwrap()[i] = base - h;
            let (minus, _) = loss_and_gradients(&probe, batch, targets)?;
            probe.param_slices_mut().nth(s).unwrap()[i] = base;
            grads.param_slices_mut().nth(s).unwrap()[i] = (plus - minus) / (2.0 * h);
        }
    }
    Ok(grads)
}

/// Largest entrywise `|a - b| / max(|a|, |b|, floor)` over two same-shaped nets.
pub fn max_relative_error(a: &Mlp, b: &Mlp, floor: f64) -> f64 {
    a.param_slices()
        .zip(b.param_slices())
        .flat_map(|(x, y)| x.iter().zip(y))
        .map(|(&x, &y)| (x - y).abs() / x.abs().max(y.abs()).max(floor))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::SeedTree;

    fn one_wide() -> Mlp {
        let mut net = Mlp::zeros(&[1, 1, 1, 1]);
        net.layers[0].weights[0] = 2.0;
        net.layers[0].bias[0] = -1.0;
        net.layers[1].weights[0] = 3.0;
        net.layers[2].weights[0] = 1.0;
        net
    }

    fn exp(state: Vec<f64>, action: usize) -> Experience {
        Experience {
            state,
            action,
            reward: 0.0,
            next_state: Vec::new(),
            terminal: true,
        }
    }

    #[test]
    fn zero_weights_return_output_bias() {
        let mut net = Mlp::zeros(&[4, 6, 5, 8]);
        net.layers[2].bias = (0..8).map(|i| 0.1 * (i + 1) as f64).collect();
        assert_eq!(net.forward(&[1.0, -2.0, 3.0, 0.5]).unwrap(), net.layers[2].bias);
    }

    #[test]
    fn hand_evaluated_one_wide_net() {
        assert_eq!(one_wide().forward(&[1.0]).unwrap(), vec![3.0]);
    }

    #[test]
    fn negative_preactivation_is_cut() {
        let mut net = one_wide();
        net.layers[0].bias[0] = -5.0; // 2·1 − 5 < 0
        assert_eq!(net.forward(&[1.0]).unwrap(), vec![0.0]);
    }

    #[test]
    fn wrong_input_length_is_rejected() {
        let net = Mlp::zeros(&[3, 2, 2]);
        assert!(matches!(net.forward(&[1.0]), Err(Error::DimensionMismatch { expected: 3, actual: 1 })));
    }

    #[test]
    fn hand_chain_rule() {
        let net = one_wide();
        let e = exp(vec![1.0], 0);
        let (loss, g) = loss_and_gradients(&net, &[&e], &[5.0]).unwrap();
        assert_eq!(loss, 4.0);
        assert_eq!(g.layers[2].bias[0], -4.0);
        // dq/dW3 = 3, dq/db2 = W3 = 1, dq/dW2 = relu1 = 1, dq/dW1 = W3·W2·x = 3
        assert_eq!(g.layers[2].weights[0], -12.0);
        assert_eq!(g.layers[1].bias[0], -4.0);
        assert_eq!(g.layers[1].weights[0], -4.0);
        assert_eq!(g.layers[0].weights[0], -12.0);
        assert_eq!(g.layers[0].bias[0], -12.0);
    }

    #[test]
    fn perfect_fit_has_zero_loss_and_gradient() {
        let net = Mlp::glorot(&[3, 5, 4, 2], &mut SeedTree::new(1).rng("w", &[]));
        let batch: Vec<Experience> = (0..4).map(|i| exp(vec![0.1 * i as f64, 0.5, -0.3], i % 2)).collect();
        let refs: Vec<&Experience> = batch.iter().collect();
        let y: Vec<f64> = batch.iter().map(|e| net.forward(&e.state).unwrap()[e.action]).collect();
        let (loss, g) = loss_and_gradients(&net, &refs, &y).unwrap();
        assert_eq!(loss, 0.0);
        assert!(g.param_slices().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn untaken_actions_get_no_output_gradient() {
        let net = Mlp::glorot(&[3, 4, 4, 3], &mut SeedTree::new(2).rng("w", &[]));
        let e = exp(vec![0.4, 0.2, 0.9], 1);
        let (_, g) = loss_and_gradients(&net, &[&e], &[10.0]).unwrap();
        let out = &g.layers[2];
        assert_eq!(out.bias[0], 0.0);
        assert_eq!(out.bias[2], 0.0);
        assert!(out.bias[1] != 0.0);
        assert!(out.weights[..4].iter().chain(&out.weights[8..]).all(|&w| w == 0.0));
    }

    #[test]
    fn glorot_respects_limits() {
        let net = Mlp::glorot(&[16, 24, 16, 8], &mut SeedTree::new(3).rng("w", &[]));
        for l in &net.layers {
            let lim = (6.0 / (l.inputs + l.outputs) as f64).sqrt();
            assert!(l.weights.iter().all(|w| w.abs() <= lim));
            assert!(l.bias.iter().all(|&b| b == 0.0));
        }
        assert_eq!(net.widths(), vec![16, 24, 16, 8]);
        assert_eq!(net.n_params(), 16 * 24 + 24 + 24 * 16 + 16 + 16 * 8 + 8);
    }
}
