use std::cmp::Ordering;

use rand::Rng;

use super::{checked_logprobs, DecodeConfig, DecodeError, Hypothesis};
use crate::corpus::TokenId;
use crate::lm::LanguageModel;
use crate::Scalar;

/// The `k` most probable token ids, most probable first; equal
/// probabilities keep the lower id.
pub(crate) fn top_k_ids<F: Scalar>(logprobs: &[F], k: usize) -> Vec<usize> {
    let by_rank = |a: &usize, b: &usize| {
        logprobs[*b]
            .partial_cmp(&logprobs[*a])
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(b))
    };
    let mut ids: Vec<usize> = (0..logprobs.len()).collect();
    if k < ids.len() {
        ids.select_nth_unstable_by(k, by_rank);
        ids.truncate(k);
    }
    ids.sort_by(by_rank);
    ids
}

/// Draws an index from the renormalized probabilities of `kept`.
pub(crate) fn sample_kept<F: Scalar, R: Rng + ?Sized>(
    logprobs: &[F],
    kept: &[usize],
    rng: &mut R,
) -> usize {
    let probs: Vec<f64> = kept
        .iter()
        .map(|&t| logprobs[t].to_f64_lossy().exp())
        .collect();
    let total: f64 = probs.iter().sum();
    let target = rng.gen::<f64>() * total;
    let mut cumulative = 0.0;
    for (&t, p) in kept.iter().zip(&probs) {
        cumulative += p;
        if cumulative > target {
            return t;
        }
    }
    *kept.last().expect("k >= 1")
}

/// At each step keeps the `cfg.k` most probable tokens, renormalizes and samples.
pub fn top_k<F: Scalar, M: LanguageModel<F> + ?Sized, R: Rng + ?Sized>(
    model: &M,
    cfg: &DecodeConfig,
    prompt: &[TokenId],
    rng: &mut R,
) -> Result<Hypothesis<F>, DecodeError> {
    cfg.validate(model.vocab_size())?;
    let mut hyp = Hypothesis::start(prompt);
    for step in 0..cfg.max_len {
        let lp = checked_logprobs(model, &hyp.ids, step)?;
        let kept = top_k_ids(&lp, cfg.k);
        let token = sample_kept(&lp, &kept, rng);
        hyp = hyp.extended(token as TokenId, lp[token]);
        if hyp.finished {
            break;
        }
    }
    Ok(hyp)
}
