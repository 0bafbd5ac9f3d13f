//! The shared inference/generation network pair.
//!
//! One encoder and one decoder serve both kinds of input: a user's rating
//! row and a feature's column over all items are both length-`n` binary
//! vectors, so they pass through the same networks. The encoder's final
//! affine layer has width `2k` and is split into a mean head and a
//! log-variance head; the decoder maps a latent `k`-vector back to `n`
//! output logits (Bernoulli head applies a sigmoid downstream, the Gaussian
//! head uses the raw values as means).

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::nn::{mlp_forward, ForwardTrace, MlpParams};

/// Diagonal Gaussian over the latent space: per-dimension mean and
/// standard deviation (entrywise positive).
#[derive(Debug, Clone, PartialEq)]
pub struct LatentGaussian {
    pub mu: Vec<f64>,
    pub sigma: Vec<f64>,
}

/// Encoder + decoder parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct VaeParams {
    pub encoder: MlpParams,
    pub decoder: MlpParams,
    n: usize,
    k: usize,
}

impl VaeParams {
    /// Fresh seeded parameters. Encoder widths are
    /// `[n, enc_hidden..., 2k]`, decoder widths `[k, dec_hidden..., n]`.
    pub fn init(n: usize, k: usize, enc_hidden: &[usize], dec_hidden: &[usize], seed: u64) -> Self {
        assert!(n >= 1 && k >= 1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut enc_dims = Vec::with_capacity(enc_hidden.len() + 2);
        enc_dims.push(n);
        enc_dims.extend_from_slice(enc_hidden);
        enc_dims.push(2 * k);
        let mut dec_dims = Vec::with_capacity(dec_hidden.len() + 2);
        dec_dims.push(k);
        dec_dims.extend_from_slice(dec_hidden);
        dec_dims.push(n);
        let encoder = MlpParams::init_with_rng(&enc_dims, &mut rng);
        let decoder = MlpParams::init_with_rng(&dec_dims, &mut rng);
        Self { encoder, decoder, n, k }
    }

    /// Wraps existing networks, checking the head/width invariants.
    pub fn from_networks(encoder: MlpParams, decoder: MlpParams) -> Result<Self> {
        let n = encoder.in_dim();
        if encoder.out_dim() % 2 != 0 {
            return Err(Error::Shape(
                "encoder output width must be 2k (mean and log-variance heads)".into(),
            ));
        }
        let k = encoder.out_dim() / 2;
        let params = Self { encoder, decoder, n, k };
        params.validate()?;
        Ok(params)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn validate(&self) -> Result<()> {
        self.encoder.validate()?;
        self.decoder.validate()?;
        if self.encoder.in_dim() != self.n || self.decoder.out_dim() != self.n {
            return Err(Error::Shape(format!(
                "encoder input width {} and decoder output width {} must both be n={}",
                self.encoder.in_dim(),
                self.decoder.out_dim(),
                self.n
            )));
        }
        if self.encoder.out_dim() != 2 * self.k || self.decoder.in_dim() != self.k {
            return Err(Error::Shape(format!(
                "latent widths must be encoder out 2k={} and decoder in k={}",
                2 * self.k,
                self.k
            )));
        }
        Ok(())
    }
}

/// Splits the encoder's `2k` output into `(mu, logvar)` halves.
pub(crate) fn split_heads(output: &[f64]) -> (&[f64], &[f64]) {
    let k = output.len() / 2;
    (&output[..k], &output[k..])
}

pub(crate) fn encode_traced(
    params: &VaeParams,
    input: &[f64],
) -> Result<(LatentGaussian, ForwardTrace)> {
    let trace = mlp_forward(&params.encoder, input)?;
    let (mu, logvar) = split_heads(trace.output());
    let sigma: Vec<f64> = logvar.iter().map(|lv| (0.5 * lv).exp()).collect();
    if !mu.iter().all(|v| v.is_finite()) || !sigma.iter().all(|v| v.is_finite() && *v > 0.0) {
        return Err(Error::Numeric("encoder produced non-finite latent parameters".into()));
    }
    let lg = LatentGaussian {
        mu: mu.to_vec(),
        sigma,
    };
    Ok((lg, trace))
}

/// Deterministic encoding: `mu` comes straight off the mean head and
/// `sigma = exp(0.5 * logvar)` off the log-variance head.
pub fn encode(params: &VaeParams, input: &[f64]) -> Result<LatentGaussian> {
    encode_traced(params, input).map(|(lg, _)| lg)
}

/// The reparameterization `z = mu + eps ⊙ sigma`; `eps` is drawn from a
/// standard normal by the caller so tests can inject it.
pub fn reparameterize(lg: &LatentGaussian, eps: &[f64]) -> Vec<f64> {
    debug_assert_eq!(lg.mu.len(), eps.len());
    lg.mu
        .iter()
        .zip(&lg.sigma)
        .zip(eps)
        .map(|((m, s), e)| m + e * s)
        .collect()
}

/// Decoder forward pass; returns the raw affine output.
pub fn decode(params: &VaeParams, z: &[f64]) -> Result<Vec<f64>> {
    let trace = mlp_forward(&params.decoder, z)?;
    let out = trace.output();
    if !out.iter().all(|v| v.is_finite()) {
        return Err(Error::Numeric("decoder produced non-finite output".into()));
    }
    Ok(out.to_vec())
}

/// Ranking scores for one user: decode the mean of the encoded training
/// row, with no sampling. Raw logits are returned — the sigmoid is monotone
/// and cannot change the ranking.
pub fn predict_scores(params: &VaeParams, y_row: &[f64]) -> Result<Vec<f64>> {
    let lg = encode(params, y_row)?;
    decode(params, &lg.mu)
}
