//! Reconstruction log-likelihoods and the latent KL term.
//!
//! Both likelihoods weight positive entries by `alpha >= 1` to counter the
//! extreme sparsity of the inputs. The Bernoulli form is computed through
//! softplus identities — `log sigmoid(t) = -softplus(-t)` — so finite logits
//! can never produce a NaN. The Gaussian form drops the constant
//! `-0.5 ln(2 pi)` terms; they affect neither gradients nor rankings.

use crate::error::{Error, Result};
use crate::model::vae::LatentGaussian;

/// Numerically stable `ln(1 + e^t)`.
fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

/// Numerically stable logistic function.
pub fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

fn is_positive(target: f64) -> bool {
    debug_assert!(target == 0.0 || target == 1.0, "targets must be binary");
    target > 0.5
}

/// Weighted logistic log-likelihood of a binary vector given logits:
/// `alpha * sum_pos log sigmoid(f) + sum_neg log(1 - sigmoid(f))`. Always
/// <= 0, approaching 0 only as the logits saturate toward the targets.
pub fn bernoulli_loglik(targets: &[f64], logits: &[f64], alpha: f64) -> f64 {
    debug_assert_eq!(targets.len(), logits.len());
    debug_assert!(alpha >= 1.0);
    let mut total = 0.0;
    for (&y, &f) in targets.iter().zip(logits) {
        if is_positive(y) {
            total -= alpha * softplus(-f);
        } else {
            total -= softplus(f);
        }
    }
    total
}

/// Gradient of [`bernoulli_loglik`] with respect to the logits.
pub fn bernoulli_loglik_grad(targets: &[f64], logits: &[f64], alpha: f64, out: &mut [f64]) {
    debug_assert_eq!(targets.len(), logits.len());
    debug_assert_eq!(targets.len(), out.len());
    for ((&y, &f), g) in targets.iter().zip(logits).zip(out.iter_mut()) {
        let s = sigmoid(f);
        *g = if is_positive(y) { alpha * (1.0 - s) } else { -s };
    }
}

/// Weighted Gaussian log-likelihood of a binary vector given the decoder
/// mean `f`: `-(alpha/2) sum_pos (1 - f)^2 - (1/2) sum_neg f^2`. Zero
/// exactly at perfect reconstruction.
pub fn gaussian_loglik(targets: &[f64], means: &[f64], alpha: f64) -> f64 {
    debug_assert_eq!(targets.len(), means.len());
    debug_assert!(alpha >= 1.0);
    let mut total = 0.0;
    for (&x, &f) in targets.iter().zip(means) {
        if is_positive(x) {
            let d = 1.0 - f;
            total -= 0.5 * alpha * d * d;
        } else {
            total -= 0.5 * f * f;
        }
    }
    total
}

/// Gradient of [`gaussian_loglik`] with respect to the decoder means.
pub fn gaussian_loglik_grad(targets: &[f64], means: &[f64], alpha: f64, out: &mut [f64]) {
    debug_assert_eq!(targets.len(), means.len());
    debug_assert_eq!(targets.len(), out.len());
    for ((&x, &f), g) in targets.iter().zip(means).zip(out.iter_mut()) {
        *g = if is_positive(x) { alpha * (1.0 - f) } else { -f };
    }
}

/// Analytic `KL(N(mu, diag(sigma^2)) || N(0, I))`
/// `= -1/2 sum_j (1 + 2 ln sigma_j - mu_j^2 - sigma_j^2)`.
///
/// Non-negative, and zero exactly at the standard normal.
pub fn kl_standard_normal(lg: &LatentGaussian) -> Result<f64> {
    let mut total = 0.0;
    for (&mu, &sigma) in lg.mu.iter().zip(&lg.sigma) {
        if !(sigma > 0.0) || !sigma.is_finite() || !mu.is_finite() {
            return Err(Error::Domain(format!(
                "KL requires finite mu and sigma > 0, got mu={mu}, sigma={sigma}"
            )));
        }
        total += 0.5 * (mu * mu + sigma * sigma - 2.0 * sigma.ln() - 1.0);
    }
    Ok(total)
}

/// Same KL evaluated from the encoder's log-variance head
/// (`sigma^2 = e^logvar`), used on the training path.
pub(crate) fn kl_from_mu_logvar(mu: &[f64], logvar: &[f64]) -> f64 {
    let mut total = 0.0;
    for (&m, &lv) in mu.iter().zip(logvar) {
        total += 0.5 * (m * m + lv.exp() - lv - 1.0);
    }
    total
}
