//! Dense feed-forward networks: forward pass with cached activations,
//! reverse-mode backward pass, and a central-difference gradient oracle.
//!
//! Hidden layers apply `tanh`; the final layer is affine. Output heads
//! (sigmoid, Gaussian mean, ...) are applied by callers, which keeps the
//! backward pass generic in the output cotangent.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::nn::dense::DenseMatrix;

/// Element-wise non-linearity used on hidden layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Tanh,
}

impl Activation {
    pub fn apply(self, values: &mut [f64]) {
        match self {
            Activation::Tanh => {
                for v in values.iter_mut() {
                    *v = v.tanh();
                }
            }
        }
    }

    /// Derivative expressed in terms of the activation output `a`.
    pub fn grad_from_output(self, a: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - a * a,
        }
    }
}

/// One affine layer `z = W x + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub weight: DenseMatrix,
    pub bias: Vec<f64>,
}

impl Layer {
    pub fn in_dim(&self) -> usize {
        self.weight.cols()
    }

    pub fn out_dim(&self) -> usize {
        self.weight.rows()
    }

    fn affine_into(&self, x: &[f64], out: &mut [f64]) {
        self.weight.matvec_into(x, out);
        for (o, b) in out.iter_mut().zip(&self.bias) {
            *o += b;
        }
    }
}

/// Parameters of a multi-layer perceptron.
///
/// Layer dimensions chain: layer `i` output width equals layer `i+1` input
/// width. A single-layer net is a plain affine map.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    pub layers: Vec<Layer>,
    pub activation: Activation,
}

impl MlpParams {
    /// Fresh network with the given widths `[in, hidden..., out]`.
    ///
    /// Weights are drawn uniformly from `[-1/sqrt(fan_in), +1/sqrt(fan_in)]`
    /// so pre-activations start near unit scale; biases start at zero.
    pub fn init(dims: &[usize], seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::init_with_rng(dims, &mut rng)
    }

    pub fn init_with_rng<R: Rng>(dims: &[usize], rng: &mut R) -> Self {
        assert!(dims.len() >= 2, "an MLP needs at least [in, out] widths");
        assert!(dims.iter().all(|&d| d > 0), "zero-width layer");
        let mut layers = Vec::with_capacity(dims.len() - 1);
        for w in dims.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let bound = 1.0 / (fan_in as f64).sqrt();
            let mut weight = DenseMatrix::zeros(fan_out, fan_in);
            for v in weight.data_mut() {
                *v = bound * (2.0 * rng.gen::<f64>() - 1.0);
            }
            layers.push(Layer {
                weight,
                bias: vec![0.0; fan_out],
            });
        }
        Self {
            layers,
            activation: Activation::Tanh,
        }
    }

    pub fn in_dim(&self) -> usize {
        self.layers.first().map_or(0, Layer::in_dim)
    }

    pub fn out_dim(&self) -> usize {
        self.layers.last().map_or(0, Layer::out_dim)
    }

    /// Hidden widths, i.e. the output widths of all but the last layer.
    pub fn hidden_widths(&self) -> Vec<usize> {
        self.layers[..self.layers.len().saturating_sub(1)]
            .iter()
            .map(Layer::out_dim)
            .collect()
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weight.data().len() + l.bias.len())
            .sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(Error::Shape("MLP has no layers".into()));
        }
        for (i, pair) in self.layers.windows(2).enumerate() {
            if pair[0].out_dim() != pair[1].in_dim() {
                return Err(Error::Shape(format!(
                    "layer {i} output width {} does not chain into layer {} input width {}",
                    pair[0].out_dim(),
                    i + 1,
                    pair[1].in_dim()
                )));
            }
        }
        for (i, layer) in self.layers.iter().enumerate() {
            if layer.bias.len() != layer.out_dim() {
                return Err(Error::Shape(format!("layer {i} bias length mismatch")));
            }
            if !layer.weight.is_finite() || !layer.bias.iter().all(|v| v.is_finite()) {
                return Err(Error::Numeric(format!("layer {i} has non-finite parameters")));
            }
        }
        Ok(())
    }
}

/// Activations cached by [`mlp_forward`] for the backward pass.
///
/// `inputs[i]` is the vector fed into layer `i` (so `inputs[0]` is the
/// network input and the rest are post-tanh hidden activations).
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    inputs: Vec<Vec<f64>>,
    output: Vec<f64>,
}

impl ForwardTrace {
    pub fn output(&self) -> &[f64] {
        &self.output
    }

    /// Post-activation hidden vectors, one per hidden layer.
    pub fn hidden(&self) -> &[Vec<f64>] {
        &self.inputs[1..]
    }
}

/// Forward pass: tanh on hidden layers, affine final layer.
pub fn mlp_forward(params: &MlpParams, input: &[f64]) -> Result<ForwardTrace> {
    if input.len() != params.in_dim() {
        return Err(Error::Shape(format!(
            "forward input length {} != network input width {}",
            input.len(),
            params.in_dim()
        )));
    }
    let last = params.layers.len() - 1;
    let mut inputs = Vec::with_capacity(params.layers.len());
    inputs.push(input.to_vec());
    for (i, layer) in params.layers.iter().enumerate() {
        let mut out = vec![0.0; layer.out_dim()];
        layer.affine_into(inputs.last().expect("nonempty"), &mut out);
        if i == last {
            return Ok(ForwardTrace { inputs, output: out });
        }
        params.activation.apply(&mut out);
        inputs.push(out);
    }
    unreachable!("loop returns on the last layer")
}

/// Parameter-shaped accumulator for partial derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientBuffer {
    pub weights: Vec<DenseMatrix>,
    pub biases: Vec<Vec<f64>>,
}

impl GradientBuffer {
    pub fn zeros_like(params: &MlpParams) -> Self {
        Self {
            weights: params
                .layers
                .iter()
                .map(|l| DenseMatrix::zeros(l.out_dim(), l.in_dim()))
                .collect(),
            biases: params.layers.iter().map(|l| vec![0.0; l.out_dim()]).collect(),
        }
    }

    pub fn congruent_with(&self, params: &MlpParams) -> bool {
        self.weights.len() == params.layers.len()
            && self
                .weights
                .iter()
                .zip(&params.layers)
                .all(|(g, l)| g.rows() == l.out_dim() && g.cols() == l.in_dim())
            && self
                .biases
                .iter()
                .zip(&params.layers)
                .all(|(g, l)| g.len() == l.out_dim())
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().all(DenseMatrix::is_finite)
            && self.biases.iter().flatten().all(|v| v.is_finite())
    }

    pub fn iter_flat(&self) -> impl Iterator<Item = f64> + '_ {
        self.weights
            .iter()
            .zip(&self.biases)
            .flat_map(|(w, b)| w.data().iter().chain(b.iter()).copied())
    }

    /// `self += scale * other`.
    pub fn add_scaled(&mut self, other: &GradientBuffer, scale: f64) {
        for (w, ow) in self.weights.iter_mut().zip(&other.weights) {
            for (v, o) in w.data_mut().iter_mut().zip(ow.data()) {
                *v += scale * o;
            }
        }
        for (b, ob) in self.biases.iter_mut().zip(&other.biases) {
            for (v, o) in b.iter_mut().zip(ob) {
                *v += scale * o;
            }
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.iter_flat().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Backward pass accumulating into `grads`; returns ∂loss/∂input.
///
/// `output_grad` is the cotangent ∂loss/∂output of the matching forward
/// call. The result is linear in `output_grad`.
pub fn mlp_backward_into(
    params: &MlpParams,
    trace: &ForwardTrace,
    output_grad: &[f64],
    grads: &mut GradientBuffer,
) -> Result<Vec<f64>> {
    if output_grad.len() != params.out_dim() {
        return Err(Error::Shape(format!(
            "output_grad length {} != network output width {}",
            output_grad.len(),
            params.out_dim()
        )));
    }
    if trace.inputs.len() != params.layers.len() {
        return Err(Error::Shape(
            "forward trace does not match network depth".into(),
        ));
    }
    if !grads.congruent_with(params) {
        return Err(Error::Shape("gradient buffer not parameter-shaped".into()));
    }

    let mut cot = output_grad.to_vec();
    for i in (0..params.layers.len()).rev() {
        let layer = &params.layers[i];
        let x = &trace.inputs[i];
        if x.len() != layer.in_dim() {
            return Err(Error::Shape(format!("trace input {i} width mismatch")));
        }
        grads.weights[i].add_outer(&cot, x, 1.0);
        for (g, c) in grads.biases[i].iter_mut().zip(&cot) {
            *g += c;
        }
        let mut gx = vec![0.0; layer.in_dim()];
        layer.weight.matvec_transpose_into(&cot, &mut gx);
        if i == 0 {
            return Ok(gx);
        }
        // x is the tanh output produced by layer i-1.
        for (g, a) in gx.iter_mut().zip(x) {
            *g *= params.activation.grad_from_output(*a);
        }
        cot = gx;
    }
    unreachable!("loop returns at layer 0")
}

/// Allocating wrapper around [`mlp_backward_into`].
pub fn mlp_backward(
    params: &MlpParams,
    trace: &ForwardTrace,
    output_grad: &[f64],
) -> Result<(GradientBuffer, Vec<f64>)> {
    let mut grads = GradientBuffer::zeros_like(params);
    let input_grad = mlp_backward_into(params, trace, output_grad, &mut grads)?;
    Ok((grads, input_grad))
}

/// Central-difference gradient of `loss` with respect to every parameter.
///
/// This is the test oracle used to validate analytic gradients; it only
/// ever evaluates `loss`, never the backward pass.
pub fn finite_diff_grad<F>(mut loss: F, params: &MlpParams, h: f64) -> Result<GradientBuffer>
where
    F: FnMut(&MlpParams) -> Result<f64>,
{
    if !(h > 0.0) {
        return Err(Error::Domain(format!("finite difference step {h} must be > 0")));
    }
    let mut work = params.clone();
    let mut grads = GradientBuffer::zeros_like(params);
    for li in 0..params.layers.len() {
        for idx in 0..params.layers[li].weight.data().len() {
            let orig = work.layers[li].weight.data()[idx];
            work.layers[li].weight.data_mut()[idx] = orig + h;
            let plus = loss(&work)?;
            work.layers[li].weight.data_mut()[idx] = orig - h;
            let minus = loss(&work)?;
            work.layers[li].weight.data_mut()[idx] = orig;
            if !plus.is_finite() || !minus.is_finite() {
                return Err(Error::Numeric("non-finite loss during finite differences".into()));
            }
            grads.weights[li].data_mut()[idx] = (plus - minus) / (2.0 * h);
        }
        for idx in 0..params.layers[li].bias.len() {
            let orig = work.layers[li].bias[idx];
            work.layers[li].bias[idx] = orig + h;
            let plus = loss(&work)?;
            work.layers[li].bias[idx] = orig - h;
            let minus = loss(&work)?;
            work.layers[li].bias[idx] = orig;
            if !plus.is_finite() || !minus.is_finite() {
                return Err(Error::Numeric("non-finite loss during finite differences".into()));
            }
            grads.biases[li][idx] = (plus - minus) / (2.0 * h);
        }
    }
    Ok(grads)
}

/// Default step for [`finite_diff_grad`].
pub const FINITE_DIFF_STEP: f64 = 1e-5;

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    fn single_layer(weight: Vec<f64>, rows: usize, cols: usize, bias: Vec<f64>) -> MlpParams {
        MlpParams {
            layers: vec![Layer {
                weight: DenseMatrix::from_vec(rows, cols, weight).unwrap(),
                bias,
            }],
            activation: Activation::Tanh,
        }
    }

    #[test]
    fn forward_identity_layer() {
        let params = single_layer(vec![1.0, 0.0, 0.0, 1.0], 2, 2, vec![0.0, 0.0]);
        let trace = mlp_forward(&params, &[0.3, -0.2]).unwrap();
        assert_eq!(trace.output(), &[0.3, -0.2]);
        assert!(trace.hidden().is_empty());
    }

    #[test]
    fn forward_zero_weight_returns_bias() {
        let params = single_layer(vec![0.0; 4], 2, 2, vec![1.0, 2.0]);
        let trace = mlp_forward(&params, &[5.0, -7.0]).unwrap();
        assert_eq!(trace.output(), &[1.0, 2.0]);
    }

    #[test]
    fn forward_matches_hand_composed_two_layer_chain() {
        let params = MlpParams::init(&[2, 3, 2], 42);
        let input = [1.0, 0.0];
        let trace = mlp_forward(&params, &input).unwrap();

        // Compose the chain by hand: h = tanh(W0 x + b0), out = W1 h + b1.
        let l0 = &params.layers[0];
        let l1 = &params.layers[1];
        let mut h = [0.0; 3];
        for r in 0..3 {
            let mut s = l0.bias[r];
            for c in 0..2 {
                s += l0.weight.get(r, c) * input[c];
            }
            h[r] = s.tanh();
        }
        let mut out = [0.0; 2];
        for r in 0..2 {
            let mut s = l1.bias[r];
            for c in 0..3 {
                s += l1.weight.get(r, c) * h[c];
            }
            out[r] = s;
        }
        assert_eq!(trace.output(), &out);
        assert_eq!(trace.hidden()[0].as_slice(), &h);
    }

    #[test]
    fn forward_rejects_bad_input_width() {
        let params = MlpParams::init(&[3, 2], 0);
        assert!(matches!(
            mlp_forward(&params, &[1.0, 2.0]),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn backward_zero_cotangent_gives_zero_gradients() {
        let params = MlpParams::init(&[3, 4, 2], 1);
        let trace = mlp_forward(&params, &[0.1, -0.5, 0.9]).unwrap();
        let (grads, dx) = mlp_backward(&params, &trace, &[0.0, 0.0]).unwrap();
        assert_eq!(grads.max_abs(), 0.0);
        assert!(dx.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn backward_affine_layer_weight_grad_is_outer_product() {
        // loss = output . c  =>  dL/dW = c ⊗ input, dL/db = c.
        let params = single_layer(vec![0.4, -0.3, 0.2, 0.8, 0.0, -1.0], 2, 3, vec![0.1, 0.2]);
        let input = [0.5, -1.5, 2.0];
        let c = [2.0, -3.0];
        let trace = mlp_forward(&params, &input).unwrap();
        let (grads, dx) = mlp_backward(&params, &trace, &c).unwrap();
        for r in 0..2 {
            for col in 0..3 {
                assert_eq!(grads.weights[0].get(r, col), c[r] * input[col]);
            }
            assert_eq!(grads.biases[0][r], c[r]);
        }
        // dL/dx = W^T c.
        for col in 0..3 {
            let expect = params.layers[0].weight.get(0, col) * c[0]
                + params.layers[0].weight.get(1, col) * c[1];
            assert_close(dx[col], expect, 1e-15);
        }
    }

    #[test]
    fn backward_matches_finite_differences_on_two_layer_net() {
        let params = MlpParams::init(&[4, 6, 3], 9);
        let input = [0.2, -0.7, 1.1, 0.05];
        // loss = sum of squared outputs / 2, cotangent = output.
        let trace = mlp_forward(&params, &input).unwrap();
        let cot: Vec<f64> = trace.output().to_vec();
        let (analytic, _) = mlp_backward(&params, &trace, &cot).unwrap();
        let numeric = finite_diff_grad(
            |p| {
                let t = mlp_forward(p, &input)?;
                Ok(t.output().iter().map(|v| v * v).sum::<f64>() / 2.0)
            },
            &params,
            FINITE_DIFF_STEP,
        )
        .unwrap();
        for (a, n) in analytic.iter_flat().zip(numeric.iter_flat()) {
            let rel = (a - n).abs() / a.abs().max(n.abs()).max(1e-3);
            assert!(rel <= 1e-5, "analytic {a} vs numeric {n}");
        }
    }

    #[test]
    fn finite_diff_quadratic() {
        // Single 1x1 layer; loss(p) = w^2 at w = 3 has gradient 6.
        let params = single_layer(vec![3.0], 1, 1, vec![0.0]);
        let g = finite_diff_grad(
            |p| Ok(p.layers[0].weight.get(0, 0).powi(2)),
            &params,
            FINITE_DIFF_STEP,
        )
        .unwrap();
        assert_close(g.weights[0].get(0, 0), 6.0, 1e-8);
    }

    #[test]
    fn finite_diff_constant_loss_is_zero() {
        let params = MlpParams::init(&[2, 2], 3);
        let g = finite_diff_grad(|_| Ok(41.5), &params, FINITE_DIFF_STEP).unwrap();
        assert_eq!(g.max_abs(), 0.0);
    }

    #[test]
    fn init_is_deterministic_and_bounded() {
        let a = MlpParams::init(&[5, 7, 2], 11);
        let b = MlpParams::init(&[5, 7, 2], 11);
        assert_eq!(a, b);
        let bound0 = 1.0 / (5f64).sqrt();
        assert!(a.layers[0].weight.data().iter().all(|v| v.abs() <= bound0));
        assert!(a.layers[0].bias.iter().all(|v| *v == 0.0));
    }
}
