use std::cmp::Ordering;

use super::{checked_logprobs, DecodeConfig, DecodeError, Hypothesis};
use crate::corpus::{TokenId, Vocabulary};
use crate::lm::LanguageModel;
use crate::Scalar;

struct Scorer<F> {
    penalty: F,
    max_len: usize,
}

impl<F: Scalar> Scorer<F> {
    fn score(&self, logprob: F, generated: usize) -> F {
        if self.penalty == F::zero() {
            logprob
        } else {
            logprob / F::of_count(generated.max(1)).powf(self.penalty)
        }
    }

    /// Best score any continuation of a live hypothesis could reach: its
    /// log-probability can only fall, and the divisor is largest at `max_len`.
    fn bound(&self, logprob: F) -> F {
        self.score(logprob, self.max_len)
    }
}

/// Higher score first, then the lexicographically smaller id sequence.
fn rank<F: Scalar>(a: (F, &[TokenId]), b: (F, &[TokenId])) -> Ordering {
    b.0.partial_cmp(&a.0)
        .unwrap_or(Ordering::Equal)
        .then_with(|| a.1.cmp(b.1))
}

struct Candidate<F> {
    parent: usize,
    token: TokenId,
    token_logprob: F,
    score: F,
}

/// Beam search with `cfg.beam_size` live hypotheses.
///
/// Every step expands each live hypothesis by every token and keeps the best
/// `beam_size` candidates; candidates ending in EOS move to the finished pool.
/// The search stops once the best finished score beats every live bound, or at
/// `cfg.max_len`. The result is the best of the finished pool and the surviving
/// live hypotheses.
pub fn beam<F: Scalar, M: LanguageModel<F> + ?Sized>(
    model: &M,
    cfg: &DecodeConfig,
    prompt: &[TokenId],
) -> Result<Hypothesis<F>, DecodeError> {
    cfg.validate(model.vocab_size())?;
    let scorer = Scorer {
        penalty: F::of(cfg.length_penalty),
        max_len: cfg.max_len,
    };
    let mut live: Vec<Hypothesis<F>> = vec![Hypothesis::start(prompt)];
    let mut finished: Vec<(F, Hypothesis<F>)> = Vec::new();

    for step in 0..cfg.max_len {
        let mut candidates: Vec<Candidate<F>> = Vec::with_capacity(live.len() * model.vocab_size());
        for (parent, hyp) in live.iter().enumerate() {
            let lp = checked_logprobs(model, &hyp.ids, step)?;
            let generated = hyp.generated_len() + 1;
            for (token, &token_lp) in lp.iter().enumerate() {
                candidates.push(Candidate {
                    parent,
                    token: token as TokenId,
                    token_logprob: token_lp,
                    score: scorer.score(hyp.logprob + token_lp, generated),
                });
            }
        }

        // Live hypotheses all have the same length, so comparing the parent's
        // ids and then the new token is the lexicographic order.
        let order = |a: &Candidate<F>, b: &Candidate<F>| {
            b.score
                .partial_cmp(&a.score)
                .unwrap_or(Ordering::Equal)
                .then_with(|| live[a.parent].ids.cmp(&live[b.parent].ids))
                .then(a.token.cmp(&b.token))
        };
        if candidates.len() > cfg.beam_size {
            candidates.select_nth_unstable_by(cfg.beam_size, order);
            candidates.truncate(cfg.beam_size);
        }
        candidates.sort_by(order);

        let mut next = Vec::with_capacity(candidates.len());
        for c in candidates {
            let hyp = live[c.parent].extended(c.token, c.token_logprob);
            if c.token == Vocabulary::EOS {
                finished.push((c.score, hyp));
            } else {
                next.push(hyp);
            }
        }
        live = next;
        if live.is_empty() {
            break;
        }

        let best_finished = finished
            .iter()
            .map(|(s, _)| *s)
            .fold(F::neg_infinity(), F::max);
        let best_live = live
            .iter()
            .map(|h| scorer.bound(h.logprob))
            .fold(F::neg_infinity(), F::max);
        if best_finished > best_live {
            break;
        }
    }

    let pool = finished.into_iter().chain(live.into_iter().map(|h| {
        let score = scorer.score(h.logprob, h.generated_len());
        (score, h)
    }));
    let best = pool
        .min_by(|a, b| rank((a.0, &a.1.ids), (b.0, &b.1.ids)))
        .expect("beam search always keeps at least one hypothesis");
    Ok(best.1)
}
