use super::MetricError;
use crate::corpus::TokenId;
use crate::lm::LanguageModel;
use crate::Scalar;

/// Negative log-likelihood summaries of a model over framed sequences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Likelihood<F> {
    /// Mean NLL per scored token (natural log).
    pub nll_token: F,
    /// Mean NLL per sequence.
    pub nll_seq: F,
    /// `exp(nll_token)`.
    pub ppl: F,
    pub tokens: usize,
    pub sequences: usize,
}

impl<F: Scalar> Likelihood<F> {
    /// False when the model gave zero probability to some observed token.
    pub fn is_finite(&self) -> bool {
        self.nll_token.is_finite()
    }
}

/// Scores every token after the leading SOS of each sequence (EOS included).
pub fn nll_ppl<F, M>(model: &M, data: &[Vec<TokenId>]) -> Result<Likelihood<F>, MetricError>
where
    F: Scalar,
    M: LanguageModel<F> + ?Sized,
{
    score(model, data.iter().map(|seq| (seq.as_slice(), 1)))
}

/// Like [`nll_ppl`], but sequence `i` is only scored from position
/// `prompt_lens[i]` on; the leading ids condition without being scored.
pub fn conditional_nll_ppl<F, M>(
    model: &M,
    data: &[Vec<TokenId>],
    prompt_lens: &[usize],
) -> Result<Likelihood<F>, MetricError>
where
    F: Scalar,
    M: LanguageModel<F> + ?Sized,
{
    if data.len() != prompt_lens.len() {
        return Err(MetricError::Misaligned {
            hyps: data.len(),
            refs: prompt_lens.len(),
        });
    }
    score(
        model,
        data.iter()
            .zip(prompt_lens)
            .map(|(seq, &p)| (seq.as_slice(), p.max(1))),
    )
}

fn score<'a, F, M>(
    model: &M,
    data: impl ExactSizeIterator<Item = (&'a [TokenId], usize)>,
) -> Result<Likelihood<F>, MetricError>
where
    F: Scalar,
    M: LanguageModel<F> + ?Sized,
{
    let vocab = model.vocab_size();
    let sequences = data.len();
    let mut total = F::zero();
    let mut tokens = 0usize;
    for (seq, from) in data {
        if let Some(&bad) = seq.iter().find(|&&id| id as usize >= vocab) {
            return Err(MetricError::Config(format!(
                "token id {bad} is outside the model vocabulary of size {vocab}"
            )));
        }
        for i in from..seq.len() {
            total = total + model.token_logprob(&seq[..i], seq[i]);
            tokens += 1;
        }
    }
    if tokens == 0 {
        return Err(MetricError::Config("no tokens to score for nll/ppl".into()));
    }
    let nll_token = -total / F::of_count(tokens);
    Ok(Likelihood {
        nll_token,
        nll_seq: -total / F::of_count(sequences),
        ppl: nll_token.exp(),
        tokens,
        sequences,
    })
}
