use super::{argmax, checked_logprobs, DecodeConfig, DecodeError, Hypothesis};
use crate::corpus::TokenId;
use crate::lm::LanguageModel;
use crate::Scalar;

/// Appends the most probable token until EOS or `cfg.max_len` tokens.
pub fn greedy<F: Scalar, M: LanguageModel<F> + ?Sized>(
    model: &M,
    cfg: &DecodeConfig,
    prompt: &[TokenId],
) -> Result<Hypothesis<F>, DecodeError> {
    let mut hyp = Hypothesis::start(prompt);
    for step in 0..cfg.max_len {
        let lp = checked_logprobs(model, &hyp.ids, step)?;
        let token = argmax(&lp);
        hyp = hyp.extended(token as TokenId, lp[token]);
        if hyp.finished {
            break;
        }
    }
    Ok(hyp)
}
