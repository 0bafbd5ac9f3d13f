//! Gradient-ascent optimizers.
//!
//! The training objective (the evidence lower bound) is maximized, so
//! `step` moves parameters *along* the supplied gradient. Descent on a loss
//! is the same thing with the gradient negated by the caller.

use crate::error::{Error, Result};
use crate::nn::mlp::{GradientBuffer, MlpParams};

/// Which update rule to apply.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OptAlgo {
    Sgd,
    Adam { beta1: f64, beta2: f64, eps: f64 },
}

impl OptAlgo {
    pub fn adam_default() -> Self {
        OptAlgo::Adam {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Per-network optimizer state (moment buffers for Adam, nothing for SGD).
#[derive(Debug, Clone)]
pub struct OptimizerState {
    algo: OptAlgo,
    learning_rate: f64,
    step_count: u64,
    first_moment: Option<GradientBuffer>,
    second_moment: Option<GradientBuffer>,
}

impl OptimizerState {
    pub fn new(algo: OptAlgo, learning_rate: f64, params: &MlpParams) -> Self {
        let moments = match algo {
            OptAlgo::Sgd => (None, None),
            OptAlgo::Adam { .. } => (
                Some(GradientBuffer::zeros_like(params)),
                Some(GradientBuffer::zeros_like(params)),
            ),
        };
        Self {
            algo,
            learning_rate,
            step_count: 0,
            first_moment: moments.0,
            second_moment: moments.1,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    /// One ascent step. A non-finite gradient refuses the step and leaves
    /// both the parameters and the optimizer state untouched.
    pub fn step(&mut self, params: &mut MlpParams, grads: &GradientBuffer) -> Result<()> {
        if !grads.congruent_with(params) {
            return Err(Error::Shape("gradient shape does not match parameters".into()));
        }
        if !grads.is_finite() {
            return Err(Error::Numeric("non-finite gradient, step refused".into()));
        }
        match self.algo {
            OptAlgo::Sgd => {
                self.step_count += 1;
                let lr = self.learning_rate;
                for (li, layer) in params.layers.iter_mut().enumerate() {
                    for (p, g) in layer.weight.data_mut().iter_mut().zip(grads.weights[li].data()) {
                        *p += lr * g;
                    }
                    for (p, g) in layer.bias.iter_mut().zip(&grads.biases[li]) {
                        *p += lr * g;
                    }
                }
            }
            OptAlgo::Adam { beta1, beta2, eps } => {
                self.step_count += 1;
                let t = self.step_count as i32;
                let bc1 = 1.0 - beta1.powi(t);
                let bc2 = 1.0 - beta2.powi(t);
                let lr = self.learning_rate;
                let m = self.first_moment.as_mut().expect("adam moment buffer");
                let v = self.second_moment.as_mut().expect("adam moment buffer");
                for (li, layer) in params.layers.iter_mut().enumerate() {
                    adam_update(
                        layer.weight.data_mut(),
                        grads.weights[li].data(),
                        m.weights[li].data_mut(),
                        v.weights[li].data_mut(),
                        beta1,
                        beta2,
                        eps,
                        lr,
                        bc1,
                        bc2,
                    );
                    adam_update(
                        &mut layer.bias,
                        &grads.biases[li],
                        &mut m.biases[li],
                        &mut v.biases[li],
                        beta1,
                        beta2,
                        eps,
                        lr,
                        bc1,
                        bc2,
                    );
                }
            }
        }
        Ok(())
    }
}

#[allow(clippy::too_many_arguments)]
fn adam_update(
    params: &mut [f64],
    grads: &[f64],
    m: &mut [f64],
    v: &mut [f64],
    beta1: f64,
    beta2: f64,
    eps: f64,
    lr: f64,
    bc1: f64,
    bc2: f64,
) {
    for i in 0..params.len() {
        let g = grads[i];
        m[i] = beta1 * m[i] + (1.0 - beta1) * g;
        v[i] = beta2 * v[i] + (1.0 - beta2) * g * g;
        let m_hat = m[i] / bc1;
        let v_hat = v[i] / bc2;
        params[i] += lr * m_hat / (v_hat.sqrt() + eps);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_net(value: f64) -> MlpParams {
        let mut p = MlpParams::init(&[1, 1], 0);
        p.layers[0].weight.data_mut()[0] = value;
        p.layers[0].bias[0] = 0.0;
        p
    }

    fn scalar_grad(params: &MlpParams, g: f64) -> GradientBuffer {
        let mut grads = GradientBuffer::zeros_like(params);
        grads.weights[0].data_mut()[0] = g;
        grads
    }

    #[test]
    fn zero_gradient_leaves_params_unchanged() {
        for algo in [OptAlgo::Sgd, OptAlgo::adam_default()] {
            let mut params = scalar_net(1.5);
            let before = params.clone();
            let grads = GradientBuffer::zeros_like(&params);
            let mut opt = OptimizerState::new(algo, 0.1, &params);
            opt.step(&mut params, &grads).unwrap();
            assert_eq!(params, before);
        }
    }

    #[test]
    fn sgd_single_step_arithmetic() {
        // Ascent: param 1.0 with gradient 2.0 and lr 0.1 moves to 1.2.
        let mut params = scalar_net(1.0);
        let grads = scalar_grad(&params, 2.0);
        let mut opt = OptimizerState::new(OptAlgo::Sgd, 0.1, &params);
        opt.step(&mut params, &grads).unwrap();
        assert!((params.layers[0].weight.get(0, 0) - 1.2).abs() < 1e-15);
    }

    #[test]
    fn adam_first_step_magnitude_is_learning_rate() {
        // At t=1 the bias-corrected update is lr * g / (|g| + eps'), which is
        // ~lr in magnitude no matter how large or small g is.
        let lr = 1e-3;
        for &g in &[1e-4, 0.5, 2.0, 300.0] {
            let mut params = scalar_net(0.0);
            let grads = scalar_grad(&params, g);
            let mut opt = OptimizerState::new(OptAlgo::adam_default(), lr, &params);
            opt.step(&mut params, &grads).unwrap();
            let update = params.layers[0].weight.get(0, 0);
            assert!(update > 0.0);
            assert!(
                (update - lr).abs() <= lr * 1e-3,
                "gradient {g}: update {update} should be ~{lr}"
            );
        }
    }

    #[test]
    fn nan_gradient_refuses_step() {
        let mut params = scalar_net(1.0);
        let before = params.clone();
        let grads = scalar_grad(&params, f64::NAN);
        let mut opt = OptimizerState::new(OptAlgo::adam_default(), 0.1, &params);
        let err = opt.step(&mut params, &grads);
        assert!(matches!(err, Err(Error::Numeric(_))));
        assert_eq!(params, before);
        assert_eq!(opt.step_count(), 0);
    }

    #[test]
    fn step_counter_is_monotone() {
        let mut params = scalar_net(0.3);
        let grads = scalar_grad(&params, 1.0);
        let mut opt = OptimizerState::new(OptAlgo::adam_default(), 0.01, &params);
        for expected in 1..=5 {
            opt.step(&mut params, &grads).unwrap();
            assert_eq!(opt.step_count(), expected);
        }
    }
}
