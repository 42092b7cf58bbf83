//! The model contract and the reference n-gram language model.
//!
//! Any model plugged into the pipeline supplies next-token log-probabilities;
//! the loss (`forward`), sequence scoring and generation come from that.

mod checkpoint;
mod ngram;

use std::path::PathBuf;

use crate::corpus::{Batch, TokenId, Vocabulary};
use crate::decoding::{self, DecodeConfig, DecodeError, Hypothesis};
use crate::Scalar;

pub use checkpoint::{load, save, FORMAT_VERSION, MAGIC};
pub use ngram::{NGramModel, NGramParams};

#[derive(Debug, thiserror::Error)]
pub enum LmError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("checkpoint {path}: {reason} (reader format version {expected}, file version {found})", found = found.map_or("unknown".to_string(), |v| v.to_string()))]
    Checkpoint {
        path: PathBuf,
        expected: u32,
        found: Option<u32>,
        reason: String,
    },
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// What a model must provide to be trained, scored and decoded from.
pub trait LanguageModel<F: Scalar>: Send + Sync {
    fn vocab_size(&self) -> usize;

    /// Natural-log probabilities of every token following `prefix`. `prefix`
    /// starts with SOS. The result has exactly `vocab_size()` entries.
    fn next_logprobs(&self, prefix: &[TokenId]) -> Vec<F>;

    /// Log-probability of one next token; must equal `next_logprobs(prefix)[token]`.
    fn token_logprob(&self, prefix: &[TokenId], token: TokenId) -> F {
        self.next_logprobs(prefix)[token as usize]
    }

    /// Sum of next-token log-probabilities for every position after the leading SOS.
    fn sequence_logprob(&self, seq: &[TokenId]) -> F {
        (1..seq.len()).fold(F::zero(), |acc, i| {
            acc + self.token_logprob(&seq[..i], seq[i])
        })
    }

    /// Mean per-token negative log-likelihood of the batch rows.
    fn forward(&self, batch: &Batch) -> F {
        let mut nll = F::zero();
        let mut tokens = 0usize;
        for i in 0..batch.rows() {
            let row = batch.row(i);
            nll = nll - self.sequence_logprob(row);
            tokens += row.len().saturating_sub(1);
        }
        if tokens == 0 {
            F::zero()
        } else {
            nll / F::of_count(tokens)
        }
    }

    /// `count` decoded samples under `cfg`.
    fn generate(&self, cfg: &DecodeConfig, count: usize) -> Result<Vec<Hypothesis<F>>, DecodeError>
    where
        Self: Sized,
    {
        decoding::generate_ids(self, cfg, &[], count)
    }
}

/// Assigns `1 / vocab_size` to every token regardless of context.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UniformModel {
    vocab_size: usize,
}

impl UniformModel {
    pub fn new(vocab_size: usize) -> Result<Self, LmError> {
        if vocab_size == 0 {
            return Err(LmError::Config("vocabulary size must be positive".into()));
        }
        Ok(UniformModel { vocab_size })
    }
}

impl<F: Scalar> LanguageModel<F> for UniformModel {
    fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    fn next_logprobs(&self, _prefix: &[TokenId]) -> Vec<F> {
        vec![-F::of_count(self.vocab_size).ln(); self.vocab_size]
    }

    fn token_logprob(&self, _prefix: &[TokenId], _token: TokenId) -> F {
        -F::of_count(self.vocab_size).ln()
    }
}

/// Whether `seq` is SOS-framed with all ids inside the vocabulary.
pub(crate) fn check_framed(seq: &[TokenId], vocab_size: usize) -> Result<(), LmError> {
    if seq.first() != Some(&Vocabulary::SOS) {
        return Err(LmError::Config(format!(
            "training sequences must start with SOS ({}), got {:?}",
            Vocabulary::SOS,
            seq.first()
        )));
    }
    if let Some(&bad) = seq.iter().find(|&&id| id as usize >= vocab_size) {
        return Err(LmError::Config(format!(
            "token id {bad} out of range for vocabulary of size {vocab_size}"
        )));
    }
    Ok(())
}
