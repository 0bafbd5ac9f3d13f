//! The training objective and its gradients.
//!
//! For a batch of length-`n` binary samples (rating rows or feature
//! columns), the objective is
//!
//! ```text
//! (1/L) * sum_l sum_b loglik_head(target_b, decode(z_b^l))
//!   - beta * sum_b KL(encode(target_b) || N(0, I)),
//! z_b^l = mu_b + eps_b^l ⊙ sigma_b
//! ```
//!
//! maximized by gradient ascent. Gradients flow to the decoder through the
//! reconstruction terms and to the encoder through both the
//! reparameterized samples and the analytic KL. With frozen `eps` the
//! `(value, gradient)` pair is fully deterministic, which is what makes
//! the finite-difference oracle applicable.

use rand::Rng;

use crate::error::{Error, Result};
use crate::model::likelihood::{
    bernoulli_loglik, bernoulli_loglik_grad, gaussian_loglik, gaussian_loglik_grad,
    kl_from_mu_logvar,
};
use crate::model::vae::{encode_traced, split_heads, VaeParams};
use crate::nn::{mlp_backward_into, mlp_forward, GradientBuffer};

/// Output distribution of the generation network for one sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Head {
    /// Binary targets through a sigmoid: rating rows.
    Bernoulli,
    /// Unit-variance Gaussian around the raw output: feature columns.
    Gaussian,
}

/// One batch element: a dense 0/1 target and the head it is scored with.
#[derive(Debug, Clone, Copy)]
pub struct ElboSample<'a> {
    pub target: &'a [f64],
    pub head: Head,
}

/// Model shape plus the objective weights.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub k: usize,
    pub enc_hidden: Vec<usize>,
    pub dec_hidden: Vec<usize>,
    /// Multiplicative weight on positive-entry likelihood terms.
    pub alpha: f64,
    /// Multiplier on the KL regularizer.
    pub beta: f64,
    /// Monte-Carlo samples per datapoint.
    pub l_samples: usize,
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(Error::Config("latent dimension k must be >= 1".into()));
        }
        if self.l_samples < 1 {
            return Err(Error::Config("l_samples must be >= 1".into()));
        }
        if !(self.alpha >= 1.0) {
            return Err(Error::Config(format!("alpha must be >= 1, got {}", self.alpha)));
        }
        if !(self.beta >= 0.0) {
            return Err(Error::Config(format!("beta must be >= 0, got {}", self.beta)));
        }
        Ok(())
    }
}

/// Source of reparameterization noise, injected so tests can freeze it.
pub trait EpsSource {
    /// The next standard-normal vector of dimension `k`.
    fn next_eps(&mut self, k: usize) -> Vec<f64>;
}

/// Standard-normal noise from a seeded generator (Box–Muller).
pub struct GaussianEps<R: Rng> {
    rng: R,
}

impl<R: Rng> GaussianEps<R> {
    pub fn new(rng: R) -> Self {
        Self { rng }
    }
}

impl<R: Rng> EpsSource for GaussianEps<R> {
    fn next_eps(&mut self, k: usize) -> Vec<f64> {
        (0..k)
            .map(|_| {
                // u1 in (0, 1] keeps the log finite.
                let u1 = 1.0 - self.rng.gen::<f64>();
                let u2 = self.rng.gen::<f64>();
                (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
            })
            .collect()
    }
}

/// Replays a fixed table of noise vectors in order; used to freeze the
/// Monte-Carlo estimate across repeated objective evaluations.
pub struct TableEps {
    table: Vec<Vec<f64>>,
    cursor: usize,
}

impl TableEps {
    pub fn new(table: Vec<Vec<f64>>) -> Self {
        Self { table, cursor: 0 }
    }
}

impl EpsSource for TableEps {
    fn next_eps(&mut self, k: usize) -> Vec<f64> {
        let eps = self
            .table
            .get(self.cursor)
            .unwrap_or_else(|| panic!("eps table exhausted at draw {}", self.cursor));
        assert_eq!(eps.len(), k, "eps table entry has wrong dimension");
        self.cursor += 1;
        eps.clone()
    }
}

/// Gradients of the objective with respect to both networks.
#[derive(Debug, Clone, PartialEq)]
pub struct VaeGradient {
    pub encoder: GradientBuffer,
    pub decoder: GradientBuffer,
}

impl VaeGradient {
    pub fn zeros_like(params: &VaeParams) -> Self {
        Self {
            encoder: GradientBuffer::zeros_like(&params.encoder),
            decoder: GradientBuffer::zeros_like(&params.decoder),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.encoder.is_finite() && self.decoder.is_finite()
    }

    pub fn iter_flat(&self) -> impl Iterator<Item = f64> + '_ {
        self.encoder.iter_flat().chain(self.decoder.iter_flat())
    }
}

fn head_loglik(head: Head, target: &[f64], output: &[f64], alpha: f64) -> f64 {
    match head {
        Head::Bernoulli => bernoulli_loglik(target, output, alpha),
        Head::Gaussian => gaussian_loglik(target, output, alpha),
    }
}

fn head_loglik_grad(head: Head, target: &[f64], output: &[f64], alpha: f64, out: &mut [f64]) {
    match head {
        Head::Bernoulli => bernoulli_loglik_grad(target, output, alpha, out),
        Head::Gaussian => gaussian_loglik_grad(target, output, alpha, out),
    }
}

fn check_batch(params: &VaeParams, batch: &[ElboSample<'_>], config: &ModelConfig) -> Result<()> {
    config.validate()?;
    if batch.is_empty() {
        return Err(Error::Domain("elbo batch must be nonempty".into()));
    }
    for (i, sample) in batch.iter().enumerate() {
        if sample.target.len() != params.n() {
            return Err(Error::Shape(format!(
                "batch item {i} has length {}, expected n={}",
                sample.target.len(),
                params.n()
            )));
        }
    }
    Ok(())
}

/// Objective value only (no gradients). This is the evaluation path used by
/// the finite-difference oracle.
pub fn elbo_value(
    params: &VaeParams,
    batch: &[ElboSample<'_>],
    config: &ModelConfig,
    eps_source: &mut dyn EpsSource,
) -> Result<f64> {
    check_batch(params, batch, config)?;
    let k = params.k();
    let inv_l = 1.0 / config.l_samples as f64;
    let mut value = 0.0;
    for sample in batch {
        let (lg, trace) = encode_traced(params, sample.target)?;
        let (_, logvar) = split_heads(trace.output());
        value -= config.beta * kl_from_mu_logvar(&lg.mu, logvar);
        for _ in 0..config.l_samples {
            let eps = eps_source.next_eps(k);
            let z: Vec<f64> = lg
                .mu
                .iter()
                .zip(&lg.sigma)
                .zip(&eps)
                .map(|((m, s), e)| m + e * s)
                .collect();
            let dec = mlp_forward(&params.decoder, &z)?;
            value += inv_l * head_loglik(sample.head, sample.target, dec.output(), config.alpha);
        }
    }
    if !value.is_finite() {
        return Err(Error::Numeric("objective is not finite".into()));
    }
    Ok(value)
}

/// Objective value and its gradient with respect to every parameter of
/// both networks, via the reparameterized path.
pub fn elbo_batch(
    params: &VaeParams,
    batch: &[ElboSample<'_>],
    config: &ModelConfig,
    eps_source: &mut dyn EpsSource,
) -> Result<(f64, VaeGradient)> {
    check_batch(params, batch, config)?;
    let k = params.k();
    let inv_l = 1.0 / config.l_samples as f64;
    let mut value = 0.0;
    let mut grads = VaeGradient::zeros_like(params);
    let mut loglik_grad = vec![0.0; params.n()];

    for sample in batch {
        let (lg, enc_trace) = encode_traced(params, sample.target)?;
        let (_, logvar) = split_heads(enc_trace.output());

        // KL path (computed once per datapoint, outside the MC average):
        // objective -= beta * KL, so d/dmu = -beta*mu and
        // d/dlogvar = -beta*(e^logvar - 1)/2 = -beta*(sigma^2 - 1)/2.
        value -= config.beta * kl_from_mu_logvar(&lg.mu, logvar);
        let mut d_mu: Vec<f64> = lg.mu.iter().map(|m| -config.beta * m).collect();
        let mut d_logvar: Vec<f64> = lg
            .sigma
            .iter()
            .map(|s| -config.beta * 0.5 * (s * s - 1.0))
            .collect();

        for _ in 0..config.l_samples {
            let eps = eps_source.next_eps(k);
            let z: Vec<f64> = lg
                .mu
                .iter()
                .zip(&lg.sigma)
                .zip(&eps)
                .map(|((m, s), e)| m + e * s)
                .collect();
            let dec_trace = mlp_forward(&params.decoder, &z)?;
            value += inv_l * head_loglik(sample.head, sample.target, dec_trace.output(), config.alpha);

            head_loglik_grad(
                sample.head,
                sample.target,
                dec_trace.output(),
                config.alpha,
                &mut loglik_grad,
            );
            for g in loglik_grad.iter_mut() {
                *g *= inv_l;
            }
            let dz = mlp_backward_into(&params.decoder, &dec_trace, &loglik_grad, &mut grads.decoder)?;
            // z = mu + eps ⊙ sigma with sigma = exp(logvar/2), so
            // dz/dmu = 1 and dz/dlogvar = eps ⊙ sigma / 2.
            for j in 0..k {
                d_mu[j] += dz[j];
                d_logvar[j] += dz[j] * eps[j] * lg.sigma[j] * 0.5;
            }
        }

        let mut enc_cot = d_mu;
        enc_cot.extend_from_slice(&d_logvar);
        mlp_backward_into(&params.encoder, &enc_trace, &enc_cot, &mut grads.encoder)?;
    }

    if !value.is_finite() {
        return Err(Error::Numeric("objective is not finite".into()));
    }
    if !grads.is_finite() {
        return Err(Error::Numeric("objective gradient is not finite".into()));
    }
    Ok((value, grads))
}
