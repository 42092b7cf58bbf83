use std::collections::HashMap;

use super::{check_framed, LanguageModel, LmError};
use crate::corpus::TokenId;
use crate::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct NGramParams {
    pub order: usize,
    /// Add-δ constant, strictly positive.
    pub delta: f64,
    /// Interpolation weight per context length `0..order`; uniform when `None`.
    pub lambdas: Option<Vec<f64>>,
}

impl Default for NGramParams {
    fn default() -> Self {
        NGramParams {
            order: 3,
            delta: 0.01,
            lambdas: None,
        }
    }
}

impl NGramParams {
    pub(crate) fn resolved_lambdas(&self) -> Result<Vec<f64>, LmError> {
        if self.order == 0 {
            return Err(LmError::Config("n-gram order must be at least 1".into()));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(LmError::Config(format!(
                "delta must be positive, got {}",
                self.delta
            )));
        }
        let lambdas = match &self.lambdas {
            Some(l) => l.clone(),
            None => vec![1.0 / self.order as f64; self.order],
        };
        validate_lambdas(&lambdas, self.order)?;
        Ok(lambdas)
    }
}

pub(crate) fn validate_lambdas(lambdas: &[f64], order: usize) -> Result<(), LmError> {
    if lambdas.len() != order {
        return Err(LmError::Config(format!(
            "expected {order} interpolation weights, got {}",
            lambdas.len()
        )));
    }
    if lambdas.iter().any(|&l| !(0.0..=1.0).contains(&l)) {
        return Err(LmError::Config(format!(
            "interpolation weights must lie in [0, 1]: {lambdas:?}"
        )));
    }
    let sum: f64 = lambdas.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(LmError::Config(format!(
            "interpolation weights sum to {sum}, not 1"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub(crate) struct ContextCounts {
    pub total: u64,
    pub next: HashMap<TokenId, u64>,
}

/// Interpolated add-δ n-gram model.
///
/// For a prefix ending in context `h`, the probability of `t` is
/// `Σ_k w_k · (count(h_k, t) + δ) / (count(h_k) + δ·V)` where `h_k` is the last
/// `k` tokens of the prefix. Only context lengths the prefix can supply take
/// part; their weights are the configured lambdas renormalized over them.
#[derive(Debug, Clone, PartialEq)]
pub struct NGramModel<F> {
    order: usize,
    vocab_size: usize,
    delta: F,
    lambdas: Vec<F>,
    /// `tables[k]` maps a length-`k` context to its continuation counts.
    tables: Vec<HashMap<Vec<TokenId>, ContextCounts>>,
}

impl<F: Scalar> NGramModel<F> {
    /// Counts every (context, next token) pair for context lengths `0..order`.
    pub fn fit(
        corpus: &[Vec<TokenId>],
        vocab_size: usize,
        params: &NGramParams,
    ) -> Result<Self, LmError> {
        let lambdas = params.resolved_lambdas()?;
        if corpus.is_empty() {
            return Err(LmError::Config(
                "cannot fit a language model on an empty corpus".into(),
            ));
        }
        let mut model = Self::empty(params.order, vocab_size, params.delta, &lambdas)?;
        for seq in corpus {
            check_framed(seq, vocab_size)?;
            for i in 1..seq.len() {
                for k in 0..params.order.min(i + 1) {
                    model.add(&seq[i - k..i], seq[i], 1);
                }
            }
        }
        Ok(model)
    }

    pub(crate) fn empty(
        order: usize,
        vocab_size: usize,
        delta: f64,
        lambdas: &[f64],
    ) -> Result<Self, LmError> {
        if vocab_size == 0 {
            return Err(LmError::Config("vocabulary size must be positive".into()));
        }
        Ok(NGramModel {
            order,
            vocab_size,
            delta: F::of(delta),
            lambdas: lambdas.iter().map(|&l| F::of(l)).collect(),
            tables: vec![HashMap::new(); order],
        })
    }

    pub(crate) fn add(&mut self, context: &[TokenId], token: TokenId, count: u64) {
        let entry = self.tables[context.len()]
            .entry(context.to_vec())
            .or_default();
        entry.total += count;
        *entry.next.entry(token).or_insert(0) += count;
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn delta(&self) -> F {
        self.delta
    }

    pub fn lambdas(&self) -> &[F] {
        &self.lambdas
    }

    /// Raw count of `token` after `context`; zero for unseen pairs.
    pub fn count(&self, context: &[TokenId], token: TokenId) -> u64 {
        self.context(context)
            .and_then(|c| c.next.get(&token).copied())
            .unwrap_or(0)
    }

    /// Total continuations observed after `context`.
    pub fn context_total(&self, context: &[TokenId]) -> u64 {
        self.context(context).map_or(0, |c| c.total)
    }

    fn context(&self, context: &[TokenId]) -> Option<&ContextCounts> {
        self.tables.get(context.len())?.get(context)
    }

    /// All stored `(context, token, count)` triples in ascending order.
    pub(crate) fn sorted_triples(&self) -> Vec<(&[TokenId], TokenId, u64)> {
        let mut out: Vec<(&[TokenId], TokenId, u64)> = self
            .tables
            .iter()
            .flat_map(|table| {
                table.iter().flat_map(|(ctx, counts)| {
                    counts
                        .next
                        .iter()
                        .map(move |(&t, &c)| (ctx.as_slice(), t, c))
                })
            })
            .collect();
        out.sort_by(|a, b| (a.0.len(), a.0, a.1).cmp(&(b.0.len(), b.0, b.1)));
        out
    }

    /// Per-order weights and continuation tables usable for `prefix`.
    fn components<'m>(&'m self, prefix: &[TokenId]) -> Vec<(F, F, Option<&'m ContextCounts>)> {
        let longest = (self.order - 1).min(prefix.len());
        let mut weight_sum = self.lambdas[..=longest]
            .iter()
            .fold(F::zero(), |acc, &l| acc + l);
        let only_unigram = weight_sum <= F::zero();
        if only_unigram {
            weight_sum = F::one();
        }
        let vocab = F::of_count(self.vocab_size);
        (0..=longest)
            .map(|k| {
                let weight = if only_unigram {
                    if k == 0 {
                        F::one()
                    } else {
                        F::zero()
                    }
                } else {
                    self.lambdas[k] / weight_sum
                };
                let ctx = self.context(&prefix[prefix.len() - k..]);
                let total = F::of(ctx.map_or(0, |c| c.total) as f64);
                (weight, total + self.delta * vocab, ctx)
            })
            .collect()
    }

    fn probability(&self, components: &[(F, F, Option<&ContextCounts>)], token: TokenId) -> F {
        components
            .iter()
            .fold(F::zero(), |acc, (weight, denom, ctx)| {
                let count = ctx.and_then(|c| c.next.get(&token)).copied().unwrap_or(0);
                acc + *weight * (F::of(count as f64) + self.delta) / *denom
            })
    }
}

impl<F: Scalar> LanguageModel<F> for NGramModel<F> {
    fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    fn next_logprobs(&self, prefix: &[TokenId]) -> Vec<F> {
        let components = self.components(prefix);
        (0..self.vocab_size as TokenId)
            .map(|t| self.probability(&components, t).ln())
            .collect()
    }

    fn token_logprob(&self, prefix: &[TokenId], token: TokenId) -> F {
        self.probability(&self.components(prefix), token).ln()
    }
}
