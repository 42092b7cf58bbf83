use std::cmp::Ordering;

use rayon::prelude::*;

use super::MetricError;
use crate::Scalar;

/// Evaluates `f(0..len)` on a pool of `threads` workers. Results come back in
/// index order regardless of scheduling.
pub(crate) fn map_indexed<R, F>(threads: usize, len: usize, f: F) -> Result<Vec<R>, MetricError>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    if threads == 1 {
        return Ok((0..len).map(f).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| MetricError::Config(format!("cannot start {threads} worker threads: {e}")))?;
    Ok(pool.install(|| (0..len).into_par_iter().map(f).collect()))
}

/// Mean of `scores`, summed in ascending order so the result depends only on the
/// multiset of values, not on their positions.
pub(crate) fn order_free_mean<F: Scalar>(mut scores: Vec<F>) -> F {
    if scores.is_empty() {
        return F::zero();
    }
    scores.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    let n = F::of_count(scores.len());
    scores.into_iter().fold(F::zero(), |acc, s| acc + s) / n
}
