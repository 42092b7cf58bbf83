//! Greedy, top-k and beam-search generation over any [`LanguageModel`].
//!
//! Ties are always broken toward the lower token id (or the lexicographically
//! smaller id sequence), so every strategy is deterministic given its seed.

mod beam;
mod greedy;
mod top_k;

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{decode, TokenId, TokenSequence, Vocabulary};
use crate::lm::LanguageModel;
use crate::Scalar;

pub use beam::beam;
pub use greedy::greedy;
pub use top_k::top_k;

/// Generator behind top-k sampling. Sample `i` of a run uses stream `i` of a
/// generator seeded with the run seed.
pub const RNG_ALGORITHM: &str = "chacha20 (rand_chacha 0.3, seed_from_u64, stream = sample index)";

#[derive(Debug, thiserror::Error)]
pub enum DecodeError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("model returned {got} log-probabilities at step {step}, expected {expected}")]
    Distribution {
        step: usize,
        got: usize,
        expected: usize,
    },
    #[error(transparent)]
    Corpus(#[from] crate::corpus::CorpusError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    #[default]
    Greedy,
    TopK,
    Beam,
}

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Greedy => "greedy",
            Strategy::TopK => "topk",
            Strategy::Beam => "beam",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = DecodeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s
            .trim()
            .to_ascii_lowercase()
            .replace(['-', '_'], "")
            .as_str()
        {
            "greedy" | "greedysearch" => Ok(Strategy::Greedy),
            "topk" | "topksampling" | "topksearch" => Ok(Strategy::TopK),
            "beam" | "beamsearch" => Ok(Strategy::Beam),
            _ => Err(DecodeError::Config(format!(
                "unknown decoding strategy {s:?}; expected greedy, topk or beam"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodeConfig {
    pub strategy: Strategy,
    pub beam_size: usize,
    pub k: usize,
    /// Maximum number of generated tokens, EOS included.
    pub max_len: usize,
    pub seed: u64,
    /// Beam scores are `logprob / len^length_penalty`; 0 disables normalization.
    pub length_penalty: f64,
}

impl Default for DecodeConfig {
    fn default() -> Self {
        DecodeConfig {
            strategy: Strategy::Greedy,
            beam_size: 5,
            k: 10,
            max_len: 30,
            seed: 0,
            length_penalty: 0.0,
        }
    }
}

impl DecodeConfig {
    pub fn validate(&self, vocab_size: usize) -> Result<(), DecodeError> {
        if self.beam_size == 0 {
            return Err(DecodeError::Config("beam_size must be at least 1".into()));
        }
        if self.max_len == 0 {
            return Err(DecodeError::Config("max_len must be at least 1".into()));
        }
        if !(self.length_penalty >= 0.0 && self.length_penalty.is_finite()) {
            return Err(DecodeError::Config(format!(
                "length_penalty must be a non-negative number, got {}",
                self.length_penalty
            )));
        }
        if self.strategy == Strategy::TopK && (self.k == 0 || self.k > vocab_size) {
            return Err(DecodeError::Config(format!(
                "top-k requires 1 <= k <= vocabulary size ({vocab_size}), got k = {}",
                self.k
            )));
        }
        Ok(())
    }
}

/// A (partial) decode: `ids` starts with SOS followed by the prompt, then the
/// generated tokens. `logprob` sums the model's log-probabilities of the
/// generated tokens only.
#[derive(Debug, Clone, PartialEq)]
pub struct Hypothesis<F> {
    pub ids: Vec<TokenId>,
    pub prompt_len: usize,
    pub logprob: F,
    pub finished: bool,
}

impl<F: Scalar> Hypothesis<F> {
    pub(crate) fn start(prompt: &[TokenId]) -> Self {
        let mut ids = Vec::with_capacity(prompt.len() + 1);
        ids.push(Vocabulary::SOS);
        ids.extend_from_slice(prompt);
        Hypothesis {
            prompt_len: ids.len(),
            ids,
            logprob: F::zero(),
            finished: false,
        }
    }

    pub(crate) fn extended(&self, token: TokenId, logprob: F) -> Self {
        let mut ids = Vec::with_capacity(self.ids.len() + 1);
        ids.extend_from_slice(&self.ids);
        ids.push(token);
        Hypothesis {
            ids,
            prompt_len: self.prompt_len,
            logprob: self.logprob + logprob,
            finished: token == Vocabulary::EOS,
        }
    }

    /// Generated ids, EOS included when present.
    pub fn generated(&self) -> &[TokenId] {
        &self.ids[self.prompt_len..]
    }

    pub fn generated_len(&self) -> usize {
        self.ids.len() - self.prompt_len
    }
}

pub(crate) fn checked_logprobs<F: Scalar, M: LanguageModel<F> + ?Sized>(
    model: &M,
    prefix: &[TokenId],
    step: usize,
) -> Result<Vec<F>, DecodeError> {
    let lp = model.next_logprobs(prefix);
    if lp.len() != model.vocab_size() {
        return Err(DecodeError::Distribution {
            step,
            got: lp.len(),
            expected: model.vocab_size(),
        });
    }
    Ok(lp)
}

/// Index of the largest value; the lowest index wins ties.
pub(crate) fn argmax<F: Scalar>(values: &[F]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

pub(crate) fn sample_rng(seed: u64, sample: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(sample);
    rng
}

fn decode_one<F: Scalar, M: LanguageModel<F> + ?Sized>(
    model: &M,
    cfg: &DecodeConfig,
    prompt: &[TokenId],
    sample: u64,
) -> Result<Hypothesis<F>, DecodeError> {
    match cfg.strategy {
        Strategy::Greedy => greedy(model, cfg, prompt),
        Strategy::TopK => top_k(model, cfg, prompt, &mut sample_rng(cfg.seed, sample)),
        Strategy::Beam => beam(model, cfg, prompt),
    }
}

/// `count` hypotheses from the unprompted model. Greedy and beam search are
/// deterministic, so their single result is repeated `count` times; top-k draws
/// sample `i` from RNG stream `i`.
pub fn generate_ids<F: Scalar, M: LanguageModel<F> + ?Sized>(
    model: &M,
    cfg: &DecodeConfig,
    prompt: &[TokenId],
    count: usize,
) -> Result<Vec<Hypothesis<F>>, DecodeError> {
    cfg.validate(model.vocab_size())?;
    match cfg.strategy {
        Strategy::Greedy | Strategy::Beam => {
            if count == 0 {
                return Ok(Vec::new());
            }
            let hyp = decode_one(model, cfg, prompt, 0)?;
            Ok(vec![hyp; count])
        }
        Strategy::TopK => (0..count as u64)
            .into_par_iter()
            .map(|i| decode_one(model, cfg, prompt, i))
            .collect(),
    }
}

/// One hypothesis per prompt; prompt `i` uses RNG stream `i` for top-k.
pub fn generate_for_prompts<F: Scalar, M: LanguageModel<F> + ?Sized>(
    model: &M,
    cfg: &DecodeConfig,
    prompts: &[Vec<TokenId>],
) -> Result<Vec<Hypothesis<F>>, DecodeError> {
    cfg.validate(model.vocab_size())?;
    prompts
        .par_iter()
        .enumerate()
        .map(|(i, p)| decode_one(model, cfg, p, i as u64))
        .collect()
}

/// `count` generated token sequences with specials stripped.
pub fn generate<F: Scalar, M: LanguageModel<F> + ?Sized>(
    model: &M,
    cfg: &DecodeConfig,
    count: usize,
    vocab: &Vocabulary,
) -> Result<Vec<TokenSequence>, DecodeError> {
    generate_ids(model, cfg, &[], count)?
        .iter()
        .map(|h| Ok(decode(vocab, h.generated())?))
        .collect()
}
