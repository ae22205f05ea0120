use serde::{Deserialize, Serialize};

use super::mlp::Mlp;

pub const BETA1: f64 = 0.9;
pub const BETA2: f64 = 0.999;
pub const EPSILON: f64 = 1e-8;

/// Bias-corrected Adam moments, shaped like the network they optimize.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub first_moment: Mlp,
    pub second_moment: Mlp,
    pub step: u64,
}

impl AdamState {
    pub fn new(like: &Mlp) -> Self {
        Self {
            first_moment: like.zeros_like(),
            second_moment: like.zeros_like(),
            step: 0,
        }
    }

    pub fn step(&mut self, params: &mut Mlp, grads: &Mlp, lr: f64) {
        assert!(params.same_shape(grads), "gradient shape differs from parameters");
        self.step += 1;
        let t = self.step as i32;
        let c1 = 1.0 - BETA1.powi(t);
        let c2 = 1.0 - BETA2.powi(t);
        let slices = params
            .param_slices_mut()
            .zip(grads.param_slices())
            .zip(self.first_moment.param_slices_mut().zip(self.second_moment.param_slices_mut()));
        for ((p, g), (m, v)) in slices {
            for i in 0..p.len() {
                m[i] = BETA1 * m[i] + (1.0 - BETA1) * g[i];
                v[i] = BETA2 * v[i] + (1.0 - BETA2) * g[i] * g[i];
                let m_hat = m[i] / c1;
                let v_hat = v[i] / c2;
                p[i] -= lr * m_hat / (v_hat.sqrt() + EPSILON);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(v: f64) -> Mlp {
        let mut n = Mlp::zeros(&[1, 1]);
        n.layers[0].weights[0] = v;
        n
    }

    #[test]
    fn zero_gradient_leaves_params() {
        let mut p = scalar(0.7);
        let mut adam = AdamState::new(&p);
        adam.step(&mut p, &scalar(0.0), 0.01);
        assert_eq!(p, scalar(0.7));
        assert_eq!(adam.step, 1);
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        let mut p = scalar(0.0);
        let mut adam = AdamState::new(&p);
        adam.step(&mut p, &scalar(1.0), 0.005);
        // m̂ = 1, v̂ = 1 → Δ = −lr·1/(1 + 1e−8)
        let expected = -0.005 / (1.0 + 1e-8);
        assert!((p.layers[0].weights[0] - expected).abs() < 1e-15);
    }

    #[test]
    fn updates_decay_after_gradient_stops() {
        let mut p = scalar(0.0);
        let mut adam = AdamState::new(&p);
        adam.step(&mut p, &scalar(1.0), 0.005);
        let mut prev = p.layers[0].weights[0];
        let mut steps = Vec::new();
        for _ in 0..2 {
            adam.step(&mut p, &scalar(0.0), 0.005);
            let now = p.layers[0].weights[0];
            steps.push((now - prev).abs());
            prev = now;
        }
        // Hand values: t=2 m̂=0.09/0.19, v̂=0.000999/0.001999; t=3 m̂=0.081/0.271, v̂=0.000998001/0.002997001.
        let d2 = 0.005 * (0.09 / 0.19) / ((0.000999f64 / 0.001999).sqrt() + 1e-8);
        let d3 = 0.005 * (0.081 / 0.271) / ((0.000998001f64 / 0.002997001).sqrt() + 1e-8);
        assert!((steps[0] - d2).abs() < 1e-12);
        assert!((steps[1] - d3).abs() < 1e-12);
        assert!(steps[1] < steps[0] && steps[0] < 0.005);
    }
}
