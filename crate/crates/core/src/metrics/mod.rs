//! Evaluation: likelihood metrics (NLL, PPL) and word-overlap metrics (BLEU-n,
//! Self-BLEU, ROUGE-n, ROUGE-L, Distinct-n), with a thread-count-independent
//! corpus driver.
//!
//! Overlap metrics are generic over the token type, so they work on surface
//! strings and on ids alike.

mod bleu;
mod config;
mod distinct;
mod likelihood;
mod ngram;
mod parallel;
mod report;
mod rouge;

pub use bleu::{aligned_corpus_bleu, bleu_n, corpus_bleu, self_bleu, sentence_bleu, BleuOptions};
pub use config::{BleuWeighting, MetricConfig, MetricName, SelfBleuSample, Smoothing};
pub use distinct::distinct_n;
pub use likelihood::{conditional_nll_ppl, nll_ppl, Likelihood};
pub use ngram::{ngram_counts, NGramMultiset};
pub use report::{evaluate, EvalInputs, MetricReport, References, ReportMeta};
pub use rouge::{corpus_rouge_l, corpus_rouge_n, lcs_len, rouge_l, rouge_n};

#[derive(Debug, thiserror::Error)]
pub enum MetricError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("metric {metric} needs {input}, which was not provided")]
    MissingInput { metric: String, input: &'static str },
    #[error("no hypotheses to score")]
    EmptyHypotheses,
    #[error("reference set is empty")]
    EmptyReferences,
    #[error("need at least {needed} hypotheses, got {got}")]
    TooFewHypotheses { needed: usize, got: usize },
    #[error("{hyps} hypotheses but {refs} aligned references")]
    Misaligned { hyps: usize, refs: usize },
}
