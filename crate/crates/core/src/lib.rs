//! Text-generation experimentation engine.
//!
//! * [`corpus`]: tokenization, vocabulary, dataset loading, splitting and batching.
//! * [`lm`]: the language-model contract and an interpolated add-δ n-gram model.
//! * [`decoding`]: greedy, top-k and beam-search generation.
//! * [`metrics`]: NLL/PPL, BLEU-n, Self-BLEU, ROUGE-n/L and Distinct-n.
//! * [`runner`]: layered configuration and the end-to-end experiment flow.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases below
//! fix the scalar for the common cases.

pub mod corpus;
pub mod decoding;
pub mod lm;
pub mod metrics;
pub mod runner;
mod scalar;

pub use scalar::Scalar;

/// Reference n-gram model in double precision.
pub type NGramLM = lm::NGramModel<f64>;
/// Reference n-gram model in single precision.
pub type NGramLM32 = lm::NGramModel<f32>;
pub type Hypothesis = decoding::Hypothesis<f64>;
pub type Hypothesis32 = decoding::Hypothesis<f32>;
pub type Likelihood = metrics::Likelihood<f64>;
