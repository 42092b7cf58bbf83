//! Sentence BLEU with one-hot order weights, multi-reference corpus averaging
//! and Self-BLEU.
//!
//! A hypothesis of length `c` scores `BP * p_n`, where `p_n` is the clipped
//! n-gram precision (each hypothesis n-gram counts at most as often as it
//! appears in the single reference that contains it most) and
//! `BP = min(1, exp(1 - r / c))` with `r` the reference length closest to `c`.

use std::hash::Hash;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use super::ngram::{
    count_windows, ClipSource, LeaveOneOutTable, LeaveOneOutView, LengthIndex, ReferencePool,
};
use super::parallel::{map_indexed, order_free_mean};
use super::{BleuWeighting, MetricConfig, MetricError, Smoothing};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BleuOptions {
    pub smoothing: Smoothing,
    pub weighting: BleuWeighting,
}

impl From<&MetricConfig> for BleuOptions {
    fn from(cfg: &MetricConfig) -> Self {
        BleuOptions {
            smoothing: cfg.smoothing,
            weighting: cfg.weighting,
        }
    }
}

impl BleuOptions {
    fn orders(&self, n: usize) -> std::ops::RangeInclusive<usize> {
        match self.weighting {
            BleuWeighting::OneHot => n..=n,
            BleuWeighting::Geometric => 1..=n,
        }
    }
}

/// Clipped matches and total n-grams of order `k` in `hyp`.
fn clipped_matches<T: Hash + Eq, C: ClipSource<T>>(
    hyp: &[T],
    source: &C,
    k: usize,
) -> (usize, usize) {
    let counts = count_windows(hyp, k);
    let matches = counts
        .iter()
        .map(|(gram, c)| c.min(source.max_count(gram)))
        .sum();
    (matches, counts.total())
}

fn precision<F: Scalar>(matches: usize, total: usize, smoothing: Smoothing) -> F {
    if total == 0 {
        return F::zero();
    }
    let numerator = match (matches, smoothing) {
        (0, Smoothing::Epsilon(eps)) => F::of(eps),
        (m, _) => F::of_count(m),
    };
    numerator / F::of_count(total)
}

pub(crate) fn brevity_penalty<F: Scalar>(hyp_len: usize, ref_len: usize) -> F {
    if hyp_len >= ref_len {
        F::one()
    } else if hyp_len == 0 {
        F::zero()
    } else {
        (F::one() - F::of_count(ref_len) / F::of_count(hyp_len)).exp()
    }
}

pub(crate) fn score_hypothesis<T, F, C>(hyp: &[T], source: &C, n: usize, opts: BleuOptions) -> F
where
    T: Hash + Eq,
    F: Scalar,
    C: ClipSource<T>,
{
    if hyp.is_empty() {
        return F::zero();
    }
    let bp: F = brevity_penalty(hyp.len(), source.closest_len(hyp.len()));
    match opts.weighting {
        BleuWeighting::OneHot => {
            let (m, t) = clipped_matches(hyp, source, n);
            bp * precision::<F>(m, t, opts.smoothing)
        }
        BleuWeighting::Geometric => {
            let mut log_sum = F::zero();
            for k in 1..=n {
                let (m, t) = clipped_matches(hyp, source, k);
                let p: F = precision(m, t, opts.smoothing);
                if p <= F::zero() {
                    return F::zero();
                }
                log_sum = log_sum + p.ln();
            }
            bp * (log_sum / F::of_count(n)).exp()
        }
    }
}

fn check_order(n: usize) -> Result<(), MetricError> {
    if n == 0 {
        Err(MetricError::Config("BLEU order must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// One-hot BLEU-n of `hyp` against the reference set `refs`.
pub fn bleu_n<T, F, S>(
    hyp: &[T],
    refs: &[S],
    n: usize,
    smoothing: Smoothing,
) -> Result<F, MetricError>
where
    T: Hash + Eq,
    F: Scalar,
    S: AsRef<[T]>,
{
    sentence_bleu(
        hyp,
        refs,
        n,
        BleuOptions {
            smoothing,
            weighting: BleuWeighting::OneHot,
        },
    )
}

pub fn sentence_bleu<T, F, S>(
    hyp: &[T],
    refs: &[S],
    n: usize,
    opts: BleuOptions,
) -> Result<F, MetricError>
where
    T: Hash + Eq,
    F: Scalar,
    S: AsRef<[T]>,
{
    check_order(n)?;
    if refs.is_empty() {
        return Err(MetricError::EmptyReferences);
    }
    let pool = ReferencePool::build(refs, opts.orders(n));
    Ok(score_hypothesis(hyp, &pool, n, opts))
}

/// Mean sentence BLEU-n where every hypothesis is scored against the whole
/// reference set. The result does not depend on thread count or on the order of
/// either list.
pub fn corpus_bleu<T, F, H, R>(
    hyps: &[H],
    refs: &[R],
    n: usize,
    cfg: &MetricConfig,
) -> Result<F, MetricError>
where
    T: Hash + Eq + Sync,
    F: Scalar,
    H: AsRef<[T]> + Sync,
    R: AsRef<[T]> + Sync,
{
    check_order(n)?;
    if hyps.is_empty() {
        return Err(MetricError::EmptyHypotheses);
    }
    if refs.is_empty() {
        return Err(MetricError::EmptyReferences);
    }
    let opts = BleuOptions::from(cfg);
    let pool = ReferencePool::build(refs, opts.orders(n));
    let scores = map_indexed(cfg.threads, hyps.len(), |i| {
        score_hypothesis::<T, F, _>(hyps[i].as_ref(), &pool, n, opts)
    })?;
    Ok(order_free_mean(scores))
}

/// Mean BLEU-n of each hypothesis against its own reference set (`refs[i]` for
/// `hyps[i]`), as used for conditional generation.
pub fn aligned_corpus_bleu<T, F, H, R, G>(
    hyps: &[H],
    refs: &[G],
    n: usize,
    cfg: &MetricConfig,
) -> Result<F, MetricError>
where
    T: Hash + Eq + Sync,
    F: Scalar,
    H: AsRef<[T]> + Sync,
    R: AsRef<[T]> + Sync,
    G: AsRef<[R]> + Sync,
{
    check_order(n)?;
    if hyps.is_empty() {
        return Err(MetricError::EmptyHypotheses);
    }
    if hyps.len() != refs.len() {
        return Err(MetricError::Misaligned {
            hyps: hyps.len(),
            refs: refs.len(),
        });
    }
    if refs.iter().any(|r| r.as_ref().is_empty()) {
        return Err(MetricError::EmptyReferences);
    }
    let opts = BleuOptions::from(cfg);
    let scores = map_indexed(cfg.threads, hyps.len(), |i| {
        let pool = ReferencePool::build(refs[i].as_ref(), opts.orders(n));
        score_hypothesis::<T, F, _>(hyps[i].as_ref(), &pool, n, opts)
    })?;
    Ok(order_free_mean(scores))
}

/// Mean BLEU-n of each hypothesis against all the others.
///
/// With `cfg.self_bleu_sample` set, hypothesis `i` is scored against a random
/// subset of the others drawn from a generator seeded by `(seed, i)`.
pub fn self_bleu<T, F, H>(hyps: &[H], n: usize, cfg: &MetricConfig) -> Result<F, MetricError>
where
    T: Hash + Eq + Sync,
    F: Scalar,
    H: AsRef<[T]> + Sync,
{
    check_order(n)?;
    if hyps.len() < 2 {
        return Err(MetricError::TooFewHypotheses {
            needed: 2,
            got: hyps.len(),
        });
    }
    let opts = BleuOptions::from(cfg);
    let scores = match cfg.self_bleu_sample {
        Some(sample) if sample.size < hyps.len() - 1 => {
            map_indexed(cfg.threads, hyps.len(), |i| {
                let others = sample_others(hyps.len(), i, sample.size, sample.seed);
                let refs: Vec<&[T]> = others.into_iter().map(|j| hyps[j].as_ref()).collect();
                let pool = ReferencePool::build(&refs, opts.orders(n));
                score_hypothesis::<T, F, _>(hyps[i].as_ref(), &pool, n, opts)
            })?
        }
        _ => {
            let tables: Vec<LeaveOneOutTable<'_, T>> = opts
                .orders(n)
                .map(|k| LeaveOneOutTable::build(hyps, k))
                .collect();
            let lengths = LengthIndex::new(hyps.iter().map(|h| h.as_ref().len()));
            map_indexed(cfg.threads, hyps.len(), |i| {
                let hyp = hyps[i].as_ref();
                let view = LeaveOneOutView {
                    tables: &tables,
                    lengths: &lengths,
                    excluded: i,
                    excluded_len: hyp.len(),
                };
                score_hypothesis::<T, F, _>(hyp, &view, n, opts)
            })?
        }
    };
    Ok(order_free_mean(scores))
}

/// `size` distinct indices from `0..len` excluding `skip`, sorted.
fn sample_others(len: usize, skip: usize, size: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(skip as u64);
    let mut picked: Vec<usize> = index::sample(&mut rng, len - 1, size)
        .into_iter()
        .map(|j| if j >= skip { j + 1 } else { j })
        .collect();
    picked.sort_unstable();
    picked
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::tokenize;

    fn s(text: &str) -> Vec<String> {
        tokenize(text, false)
            .into_iter()
            .map(String::from)
            .collect()
    }

    fn bleu(hyp: &str, refs: &[&str], n: usize) -> f64 {
        let refs: Vec<Vec<String>> = refs.iter().map(|r| s(r)).collect();
        bleu_n(&s(hyp), &refs, n, Smoothing::None).unwrap()
    }

    #[test]
    fn identical_is_one() {
        for n in 1..=4 {
            assert_eq!(bleu("a b c d e", &["a b c d e"], n), 1.0);
        }
    }

    #[test]
    fn bigram_fixture() {
        assert_eq!(bleu("the cat sat", &["the cat ate"], 2), 0.5);
    }

    #[test]
    fn disjoint_is_zero() {
        assert_eq!(bleu("x y", &["a b"], 1), 0.0);
    }

    #[test]
    fn empty_hypothesis_and_short_hypothesis() {
        assert_eq!(bleu("", &["a b"], 1), 0.0);
        assert_eq!(bleu("a", &["a b"], 2), 0.0);
    }

    #[test]
    fn brevity_penalty_applies_to_short_hypotheses() {
        // c = 2, closest r = 4, p1 = 1
        let expected = (1.0f64 - 4.0 / 2.0).exp();
        assert!((bleu("a b", &["a b c d"], 1) - expected).abs() < 1e-15);
        // ties between 1 and 3 go to the shorter reference: BP = 1
        assert_eq!(bleu("a b", &["a", "a b c"], 1), 1.0);
    }

    #[test]
    fn clipping_uses_single_reference_maximum() {
        // "a a a" against refs with one and two a's: clipped to 2
        let v = bleu("a a a", &["a x x", "a a y"], 1);
        assert!((v - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn epsilon_smoothing_replaces_zero_matches() {
        let refs = vec![s("a b")];
        let v: f64 = bleu_n(&s("x y"), &refs, 1, Smoothing::Epsilon(1e-9)).unwrap();
        assert!((v - 0.5e-9).abs() < 1e-24);
    }

    #[test]
    fn geometric_weighting() {
        let refs = vec![s("the cat ate")];
        let opts = BleuOptions {
            smoothing: Smoothing::None,
            weighting: BleuWeighting::Geometric,
        };
        let v: f64 = sentence_bleu(&s("the cat sat"), &refs, 2, opts).unwrap();
        let expected = ((2.0f64 / 3.0).ln() / 2.0 + 0.5f64.ln() / 2.0).exp();
        assert!((v - expected).abs() < 1e-15);
    }

    #[test]
    fn errors() {
        let refs: Vec<Vec<String>> = vec![];
        assert!(matches!(
            bleu_n::<_, f64, _>(&s("a"), &refs, 1, Smoothing::None),
            Err(MetricError::EmptyReferences)
        ));
        assert!(bleu_n::<_, f64, _>(&s("a"), &[s("a")], 0, Smoothing::None).is_err());
        let cfg = MetricConfig::default();
        let none: Vec<Vec<String>> = vec![];
        assert!(matches!(
            corpus_bleu::<String, f64, _, _>(&none, &[s("a")], 1, &cfg),
            Err(MetricError::EmptyHypotheses)
        ));
        assert!(matches!(
            self_bleu::<String, f64, _>(&[s("a")], 1, &cfg),
            Err(MetricError::TooFewHypotheses { got: 1, .. })
        ));
    }

    #[test]
    fn corpus_fixture() {
        let hyps = vec![s("the cat sat"), s("the cat ate")];
        let refs = vec![s("the cat ate")];
        let cfg = MetricConfig::default();
        let v: f64 = corpus_bleu(&hyps, &refs, 2, &cfg).unwrap();
        assert_eq!(v, 0.75);
        let single: f64 = corpus_bleu(&refs, &refs, 2, &cfg).unwrap();
        assert_eq!(single, 1.0);
    }

    #[test]
    fn aligned_corpus() {
        let hyps = vec![s("the cat sat"), s("a b")];
        let refs = vec![vec![s("the cat ate")], vec![s("a b")]];
        let v: f64 = aligned_corpus_bleu(&hyps, &refs, 2, &MetricConfig::default()).unwrap();
        assert_eq!(v, 0.75);
        assert!(aligned_corpus_bleu::<String, f64, _, _, _>(
            &hyps,
            &refs[..1],
            2,
            &MetricConfig::default()
        )
        .is_err());
    }

    #[test]
    fn self_bleu_examples() {
        let cfg = MetricConfig::default();
        let same = vec![s("a b c"); 3];
        assert_eq!(self_bleu::<_, f64, _>(&same, 2, &cfg).unwrap(), 1.0);
        let disjoint = vec![s("a b"), s("c d")];
        assert_eq!(self_bleu::<_, f64, _>(&disjoint, 1, &cfg).unwrap(), 0.0);
    }

    #[test]
    fn sampled_self_bleu_with_full_sample_is_exact() {
        let hyps = vec![s("a b c"), s("a b d"), s("a e f"), s("b c d e")];
        let exact: f64 = self_bleu(&hyps, 1, &MetricConfig::default()).unwrap();
        let mut cfg = MetricConfig::default();
        cfg.self_bleu_sample = Some(crate::metrics::SelfBleuSample { size: 3, seed: 1 });
        assert_eq!(self_bleu::<_, f64, _>(&hyps, 1, &cfg).unwrap(), exact);
        cfg.self_bleu_sample = Some(crate::metrics::SelfBleuSample { size: 1, seed: 1 });
        let a: f64 = self_bleu(&hyps, 1, &cfg).unwrap();
        let b: f64 = self_bleu(&hyps, 1, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sample_others_skips_self() {
        for skip in 0..6 {
            let picked = sample_others(6, skip, 3, 9);
            assert_eq!(picked.len(), 3);
            assert!(!picked.contains(&skip));
            assert!(picked.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn f32_agrees_with_f64() {
        let refs = vec![s("the cat ate"), s("a cat sat down")];
        let a: f32 = bleu_n(&s("the cat sat"), &refs, 1, Smoothing::None).unwrap();
        let b: f64 = bleu_n(&s("the cat sat"), &refs, 1, Smoothing::None).unwrap();
        assert!((a as f64 - b).abs() < 1e-6);
    }
}
