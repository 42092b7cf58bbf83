use std::collections::HashSet;
use std::hash::Hash;

use super::MetricError;
use crate::Scalar;

/// Distinct n-grams over total n-grams, pooled across all hypotheses.
pub fn distinct_n<T, F, S>(hyps: &[S], n: usize) -> Result<F, MetricError>
where
    T: Hash + Eq,
    F: Scalar,
    S: AsRef<[T]>,
{
    if n == 0 {
        return Err(MetricError::Config(
            "Distinct order must be at least 1".into(),
        ));
    }
    if hyps.is_empty() {
        return Err(MetricError::EmptyHypotheses);
    }
    let mut seen: HashSet<&[T]> = HashSet::new();
    let mut total = 0usize;
    for hyp in hyps {
        for gram in hyp.as_ref().windows(n) {
            seen.insert(gram);
            total += 1;
        }
    }
    if total == 0 {
        return Ok(F::zero());
    }
    Ok(F::of_count(seen.len()) / F::of_count(total))
}
