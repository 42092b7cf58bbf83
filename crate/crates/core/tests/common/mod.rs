//! Brute-force oracles and fixtures shared by the integration tests. Nothing
//! here calls into the metric or decoding code under test.
#![allow(dead_code)]

use std::collections::HashMap;
use std::hash::{DefaultHasher, Hash, Hasher};
use std::path::PathBuf;

use genbench::corpus::{TokenId, Vocabulary};
use genbench::lm::LanguageModel;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn repo_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn random_sentences(
    rng: &mut impl Rng,
    count: usize,
    vocab: u8,
    max_len: usize,
) -> Vec<Vec<u8>> {
    (0..count)
        .map(|_| {
            let len = rng.gen_range(0..=max_len);
            (0..len).map(|_| rng.gen_range(0..vocab)).collect()
        })
        .collect()
}

/// Every length-`n` window of `seq`, in order, duplicates kept.
pub fn all_ngrams<T: Clone>(seq: &[T], n: usize) -> Vec<Vec<T>> {
    let mut out = Vec::new();
    if n == 0 || seq.len() < n {
        return out;
    }
    for start in 0..=seq.len() - n {
        let mut gram = Vec::with_capacity(n);
        for k in 0..n {
            gram.push(seq[start + k].clone());
        }
        out.push(gram);
    }
    out
}

fn occurrences<T: PartialEq>(grams: &[Vec<T>], gram: &[T]) -> usize {
    grams.iter().filter(|g| g.as_slice() == gram).count()
}

fn unique<T: PartialEq + Clone>(grams: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut out: Vec<Vec<T>> = Vec::new();
    for g in grams {
        if !out.contains(g) {
            out.push(g.clone());
        }
    }
    out
}

/// Reference length closest to `c`, ties to the shorter one.
pub fn closest_ref_len<T>(c: usize, refs: &[Vec<T>]) -> usize {
    let mut best = usize::MAX;
    for r in refs {
        let len = r.len();
        let (d, bd) = (len.abs_diff(c), best.abs_diff(c));
        if best == usize::MAX || d < bd || (d == bd && len < best) {
            best = len;
        }
    }
    best
}

/// One-hot BLEU-n with clipping against the per-reference maximum count.
pub fn oracle_bleu<T: PartialEq + Clone>(hyp: &[T], refs: &[Vec<T>], n: usize) -> f64 {
    let c = hyp.len();
    if c == 0 {
        return 0.0;
    }
    let hyp_grams = all_ngrams(hyp, n);
    if hyp_grams.is_empty() {
        return 0.0;
    }
    let ref_grams: Vec<Vec<Vec<T>>> = refs.iter().map(|r| all_ngrams(r, n)).collect();
    let mut matches = 0usize;
    for g in unique(&hyp_grams) {
        let max_ref = ref_grams
            .iter()
            .map(|rg| occurrences(rg, &g))
            .max()
            .unwrap_or(0);
        matches += occurrences(&hyp_grams, &g).min(max_ref);
    }
    let r = closest_ref_len(c, refs);
    let bp = if c >= r {
        1.0
    } else {
        (1.0 - r as f64 / c as f64).exp()
    };
    bp * (matches as f64 / hyp_grams.len() as f64)
}

fn f1(matches: usize, hyp_total: usize, ref_total: usize) -> f64 {
    if matches == 0 {
        return 0.0;
    }
    let p = matches as f64 / hyp_total as f64;
    let r = matches as f64 / ref_total as f64;
    2.0 * p * r / (p + r)
}

pub fn oracle_rouge_n<T: PartialEq + Clone>(hyp: &[T], refs: &[Vec<T>], n: usize) -> f64 {
    let hyp_grams = all_ngrams(hyp, n);
    let mut best = 0.0f64;
    for r in refs {
        let ref_grams = all_ngrams(r, n);
        let overlap: usize = unique(&hyp_grams)
            .iter()
            .map(|g| occurrences(&hyp_grams, g).min(occurrences(&ref_grams, g)))
            .sum();
        best = best.max(f1(overlap, hyp_grams.len(), ref_grams.len()));
    }
    best
}

pub fn oracle_distinct<T: PartialEq + Clone>(hyps: &[Vec<T>], n: usize) -> f64 {
    let pooled: Vec<Vec<T>> = hyps.iter().flat_map(|h| all_ngrams(h, n)).collect();
    if pooled.is_empty() {
        return 0.0;
    }
    unique(&pooled).len() as f64 / pooled.len() as f64
}

fn is_subsequence<T: PartialEq>(needle: &[T], hay: &[T]) -> bool {
    let mut it = hay.iter();
    needle.iter().all(|x| it.any(|y| y == x))
}

/// Longest common subsequence by trying every subsequence of the shorter side.
pub fn brute_lcs<T: PartialEq + Clone>(a: &[T], b: &[T]) -> usize {
    let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    assert!(short.len() <= 16, "exhaustive LCS is for short sequences");
    let mut best = 0;
    for mask in 0u32..(1 << short.len()) {
        let len = mask.count_ones() as usize;
        if len <= best {
            continue;
        }
        let sub: Vec<T> = (0..short.len())
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| short[i].clone())
            .collect();
        if is_subsequence(&sub, long) {
            best = len;
        }
    }
    best
}

pub fn oracle_rouge_l<T: PartialEq + Clone>(hyp: &[T], refs: &[Vec<T>]) -> f64 {
    refs.iter()
        .map(|r| f1(brute_lcs(hyp, r), hyp.len(), r.len()))
        .fold(0.0, f64::max)
}

/// Next-token distributions keyed by the prefix after SOS; any other prefix
/// puts all mass on EOS.
pub struct TableModel {
    vocab: usize,
    table: HashMap<Vec<TokenId>, Vec<f64>>,
}

impl TableModel {
    pub fn new(vocab: usize) -> Self {
        TableModel {
            vocab,
            table: HashMap::new(),
        }
    }

    pub fn with(mut self, prefix: &[TokenId], probs: &[(TokenId, f64)]) -> Self {
        let mut row = vec![0.0; self.vocab];
        for &(t, p) in probs {
            row[t as usize] = p;
        }
        self.table.insert(prefix.to_vec(), row);
        self
    }
}

impl LanguageModel<f64> for TableModel {
    fn vocab_size(&self) -> usize {
        self.vocab
    }

    fn next_logprobs(&self, prefix: &[TokenId]) -> Vec<f64> {
        match self.table.get(&prefix[1..]) {
            Some(row) => row.iter().map(|p| p.ln()).collect(),
            None => (0..self.vocab)
                .map(|t| {
                    if t as TokenId == Vocabulary::EOS {
                        0.0
                    } else {
                        f64::NEG_INFINITY
                    }
                })
                .collect(),
        }
    }
}

/// A random distribution for every distinct prefix, derived from a hash of
/// the prefix, so the model depends on the full history.
pub struct HashedModel {
    pub vocab: usize,
    pub seed: u64,
}

impl LanguageModel<f64> for HashedModel {
    fn vocab_size(&self) -> usize {
        self.vocab
    }

    fn next_logprobs(&self, prefix: &[TokenId]) -> Vec<f64> {
        let mut h = DefaultHasher::new();
        (self.seed, prefix).hash(&mut h);
        let mut rng = ChaCha8Rng::seed_from_u64(h.finish());
        let weights: Vec<f64> = (0..self.vocab).map(|_| rng.gen_range(0.05..1.0)).collect();
        let total: f64 = weights.iter().sum();
        weights.iter().map(|w| (w / total).ln()).collect()
    }
}

/// The most probable complete decode: sequences ending at their first EOS, or
/// cut at `max_len` generated tokens. Ties go to the smaller id sequence.
pub fn brute_force_best(model: &dyn LanguageModel<f64>, max_len: usize) -> (Vec<TokenId>, f64) {
    fn walk(
        model: &dyn LanguageModel<f64>,
        ids: &mut Vec<TokenId>,
        logprob: f64,
        max_len: usize,
        best: &mut Option<(Vec<TokenId>, f64)>,
    ) {
        let generated = ids.len() - 1;
        let done = generated == max_len || ids.last() == Some(&Vocabulary::EOS) && generated > 0;
        if done {
            let better = match best {
                None => true,
                Some((b_ids, b_lp)) => logprob > *b_lp || (logprob == *b_lp && ids[..] < b_ids[..]),
            };
            if better {
                *best = Some((ids.clone(), logprob));
            }
            return;
        }
        let lp = model.next_logprobs(ids);
        for (t, &l) in lp.iter().enumerate() {
            ids.push(t as TokenId);
            walk(model, ids, logprob + l, max_len, best);
            ids.pop();
        }
    }
    let mut best = None;
    walk(model, &mut vec![Vocabulary::SOS], 0.0, max_len, &mut best);
    best.expect("the search space is non-empty")
}
