use std::fmt::Write as _;
use std::hash::Hash;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::parallel::{map_indexed, order_free_mean};
use super::{
    aligned_corpus_bleu, conditional_nll_ppl, corpus_bleu, corpus_rouge_l, corpus_rouge_n,
    distinct_n, nll_ppl, rouge_l, rouge_n, self_bleu, Likelihood, MetricConfig, MetricError,
    MetricName,
};
use crate::corpus::TokenId;
use crate::lm::LanguageModel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub dataset: String,
    pub hypotheses: usize,
    /// SHA-256 of the metric configuration, hex encoded.
    pub config_digest: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// Metric name to score, in the order the metrics were requested.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub scores: IndexMap<String, f64>,
    pub meta: ReportMeta,
}

impl MetricReport {
    pub fn get(&self, key: &str) -> Option<f64> {
        self.scores.get(key).copied()
    }

    /// `key<TAB>value` lines followed by `#`-prefixed metadata lines.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (key, value) in &self.scores {
            let _ = writeln!(out, "{key}\t{value}");
        }
        let _ = writeln!(out, "# dataset\t{}", self.meta.dataset);
        let _ = writeln!(out, "# hypotheses\t{}", self.meta.hypotheses);
        let _ = writeln!(out, "# config_digest\t{}", self.meta.config_digest);
        for note in &self.meta.notes {
            let _ = writeln!(out, "# note\t{note}");
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Reference layout for overlap metrics.
#[derive(Debug)]
pub enum References<'a, T> {
    /// Every hypothesis is scored against the whole set (unconditional generation).
    Pooled(&'a [Vec<T>]),
    /// `refs[i]` is the single reference of `hyps[i]` (conditional generation).
    Aligned(&'a [Vec<T>]),
}

impl<T> Clone for References<'_, T> {
    fn clone(&self) -> Self {
        *self
    }
}

impl<T> Copy for References<'_, T> {}

pub struct EvalInputs<'a, T> {
    pub dataset: &'a str,
    pub hyps: &'a [Vec<T>],
    pub refs: Option<References<'a, T>>,
    pub model: Option<&'a dyn LanguageModel<f64>>,
    /// SOS/EOS-framed ids for the likelihood metrics.
    pub data: Option<&'a [Vec<TokenId>]>,
    /// Per-sequence count of leading ids in `data` that condition without being scored.
    pub prompt_lens: Option<&'a [usize]>,
}

impl<'a, T> EvalInputs<'a, T> {
    pub fn hyps_only(dataset: &'a str, hyps: &'a [Vec<T>]) -> Self {
        EvalInputs {
            dataset,
            hyps,
            refs: None,
            model: None,
            data: None,
            prompt_lens: None,
        }
    }
}

pub fn config_digest(cfg: &MetricConfig) -> String {
    let bytes = serde_json::to_vec(cfg).expect("metric config serializes");
    hex::encode(Sha256::digest(&bytes))
}

/// Computes every metric named in `cfg` and assembles the report.
pub fn evaluate<T>(
    cfg: &MetricConfig,
    inputs: &EvalInputs<'_, T>,
) -> Result<MetricReport, MetricError>
where
    T: Hash + Eq + Sync,
{
    cfg.validate()?;
    let mut scores = IndexMap::new();
    let mut notes = Vec::new();

    let need_hyps = |metric: MetricName| -> Result<&[Vec<T>], MetricError> {
        if inputs.hyps.is_empty() {
            Err(MetricError::MissingInput {
                metric: metric.to_string(),
                input: "generated hypotheses",
            })
        } else {
            Ok(inputs.hyps)
        }
    };
    let need_refs = |metric: MetricName| -> Result<References<'_, T>, MetricError> {
        inputs.refs.ok_or(MetricError::MissingInput {
            metric: metric.to_string(),
            input: "references",
        })
    };

    let mut likelihood_done = false;
    for &metric in &cfg.names {
        match metric {
            MetricName::Nll | MetricName::Ppl => {
                if likelihood_done {
                    continue;
                }
                let model = inputs.model.ok_or(MetricError::MissingInput {
                    metric: metric.to_string(),
                    input: "a language model",
                })?;
                let data = inputs.data.ok_or(MetricError::MissingInput {
                    metric: metric.to_string(),
                    input: "evaluation sequences",
                })?;
                let l: Likelihood<f64> = match inputs.prompt_lens {
                    Some(lens) => conditional_nll_ppl(model, data, lens)?,
                    None => nll_ppl(model, data)?,
                };
                if !l.is_finite() {
                    notes.push("model assigned zero probability to an observed token; nll and ppl are infinite".into());
                }
                if cfg.names.contains(&MetricName::Nll) {
                    scores.insert("nll-token".to_string(), l.nll_token);
                    scores.insert("nll-seq".to_string(), l.nll_seq);
                }
                if cfg.names.contains(&MetricName::Ppl) {
                    scores.insert("ppl".to_string(), l.ppl);
                }
                likelihood_done = true;
            }
            MetricName::Bleu => {
                let hyps = need_hyps(metric)?;
                let refs = need_refs(metric)?;
                for n in 1..=cfg.bleu_max_n {
                    let score: f64 = match refs {
                        References::Pooled(r) => corpus_bleu(hyps, r, n, cfg)?,
                        References::Aligned(r) => {
                            aligned_corpus_bleu(hyps, &singletons(r), n, cfg)?
                        }
                    };
                    scores.insert(format!("bleu-{n}"), score);
                }
            }
            MetricName::SelfBleu => {
                let hyps = need_hyps(metric)?;
                for n in 1..=cfg.bleu_max_n {
                    scores.insert(
                        format!("self-bleu-{n}"),
                        self_bleu::<T, f64, _>(hyps, n, cfg)?,
                    );
                }
            }
            MetricName::Rouge => {
                let hyps = need_hyps(metric)?;
                let refs = need_refs(metric)?;
                for n in 1..=cfg.rouge_max_n {
                    let score: f64 = match refs {
                        References::Pooled(r) => corpus_rouge_n(hyps, r, n, cfg)?,
                        References::Aligned(r) => {
                            aligned_mean(hyps, r, cfg, |h, r| rouge_n(h, &[r], n))?
                        }
                    };
                    scores.insert(format!("rouge-{n}"), score);
                }
                let score: f64 = match refs {
                    References::Pooled(r) => corpus_rouge_l(hyps, r, cfg)?,
                    References::Aligned(r) => aligned_mean(hyps, r, cfg, |h, r| rouge_l(h, &[r]))?,
                };
                scores.insert("rouge-l".to_string(), score);
            }
            MetricName::Distinct => {
                let hyps = need_hyps(metric)?;
                for n in 1..=cfg.distinct_max_n {
                    scores.insert(format!("distinct-{n}"), distinct_n::<T, f64, _>(hyps, n)?);
                }
            }
        }
    }

    Ok(MetricReport {
        scores,
        meta: ReportMeta {
            dataset: inputs.dataset.to_string(),
            hypotheses: inputs.hyps.len(),
            config_digest: config_digest(cfg),
            notes,
        },
    })
}

fn singletons<T>(refs: &[Vec<T>]) -> Vec<[&[T]; 1]> {
    refs.iter().map(|r| [r.as_slice()]).collect()
}

fn aligned_mean<T, G>(
    hyps: &[Vec<T>],
    refs: &[Vec<T>],
    cfg: &MetricConfig,
    score: G,
) -> Result<f64, MetricError>
where
    T: Sync,
    G: Fn(&[T], &[T]) -> Result<f64, MetricError> + Sync + Send,
{
    if hyps.len() != refs.len() {
        return Err(MetricError::Misaligned {
            hyps: hyps.len(),
            refs: refs.len(),
        });
    }
    let scores = map_indexed(cfg.threads, hyps.len(), |i| score(&hyps[i], &refs[i]))?;
    Ok(order_free_mean(
        scores.into_iter().collect::<Result<Vec<_>, _>>()?,
    ))
}
