use std::hash::Hash;

use super::ngram::{count_windows, NGramMultiset};
use super::parallel::{map_indexed, order_free_mean};
use super::{MetricConfig, MetricError};
use crate::Scalar;

fn f1<F: Scalar>(matches: usize, hyp_total: usize, ref_total: usize) -> F {
    if matches == 0 {
        return F::zero();
    }
    let p = F::of_count(matches) / F::of_count(hyp_total);
    let r = F::of_count(matches) / F::of_count(ref_total);
    F::of(2.0) * p * r / (p + r)
}

fn best_f1<T: Hash + Eq, F: Scalar>(
    hyp: &NGramMultiset<'_, T>,
    refs: &[NGramMultiset<'_, T>],
) -> F {
    refs.iter()
        .fold(F::zero(), |best, r| best.max(overlap_f1(hyp, r)))
}

fn overlap_f1<T: Hash + Eq, F: Scalar>(
    hyp: &NGramMultiset<'_, T>,
    reference: &NGramMultiset<'_, T>,
) -> F {
    f1(hyp.overlap(reference), hyp.total(), reference.total())
}

/// ROUGE-n F1: clipped n-gram overlap, best reference wins.
pub fn rouge_n<T, F, S>(hyp: &[T], refs: &[S], n: usize) -> Result<F, MetricError>
where
    T: Hash + Eq,
    F: Scalar,
    S: AsRef<[T]>,
{
    if n == 0 {
        return Err(MetricError::Config("ROUGE order must be at least 1".into()));
    }
    if refs.is_empty() {
        return Err(MetricError::EmptyReferences);
    }
    let hyp_counts = count_windows(hyp, n);
    Ok(refs.iter().fold(F::zero(), |best, r| {
        best.max(overlap_f1(&hyp_counts, &count_windows(r.as_ref(), n)))
    }))
}

/// Length of the longest common subsequence, in O(|a|·|b|) time and O(|b|) space.
pub fn lcs_len<T: Eq>(a: &[T], b: &[T]) -> usize {
    let mut row = vec![0usize; b.len() + 1];
    for x in a {
        let mut diag = 0;
        for (j, y) in b.iter().enumerate() {
            let up = row[j + 1];
            row[j + 1] = if x == y { diag + 1 } else { up.max(row[j]) };
            diag = up;
        }
    }
    row[b.len()]
}

/// ROUGE-L F1 from the longest common subsequence, best reference wins.
pub fn rouge_l<T, F, S>(hyp: &[T], refs: &[S]) -> Result<F, MetricError>
where
    T: Eq,
    F: Scalar,
    S: AsRef<[T]>,
{
    if refs.is_empty() {
        return Err(MetricError::EmptyReferences);
    }
    Ok(refs.iter().fold(F::zero(), |best, r| {
        let r = r.as_ref();
        best.max(f1(lcs_len(hyp, r), hyp.len(), r.len()))
    }))
}

/// Mean ROUGE-n over hypotheses, each against the full reference pool.
pub fn corpus_rouge_n<T, F, H, R>(
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
    if n == 0 {
        return Err(MetricError::Config("ROUGE order must be at least 1".into()));
    }
    if hyps.is_empty() {
        return Err(MetricError::EmptyHypotheses);
    }
    if refs.is_empty() {
        return Err(MetricError::EmptyReferences);
    }
    let ref_counts: Vec<NGramMultiset<'_, T>> =
        refs.iter().map(|r| count_windows(r.as_ref(), n)).collect();
    let scores = map_indexed(cfg.threads, hyps.len(), |i| {
        best_f1::<T, F>(&count_windows(hyps[i].as_ref(), n), &ref_counts)
    })?;
    Ok(order_free_mean(scores))
}

/// Mean ROUGE-L over hypotheses, each against the full reference pool.
pub fn corpus_rouge_l<T, F, H, R>(
    hyps: &[H],
    refs: &[R],
    cfg: &MetricConfig,
) -> Result<F, MetricError>
where
    T: Eq + Sync,
    F: Scalar,
    H: AsRef<[T]> + Sync,
    R: AsRef<[T]> + Sync,
{
    if hyps.is_empty() {
        return Err(MetricError::EmptyHypotheses);
    }
    let scores = map_indexed(cfg.threads, hyps.len(), |i| {
        rouge_l::<T, F, R>(hyps[i].as_ref(), refs)
    })?;
    Ok(order_free_mean(
        scores.into_iter().collect::<Result<Vec<F>, _>>()?,
    ))
}
