use std::collections::{BTreeMap, HashMap};
use std::hash::Hash;

use super::MetricError;

/// Counted bag of the n-grams of one sequence. Keys borrow from the sequence.
#[derive(Debug, Clone)]
pub struct NGramMultiset<'a, T> {
    n: usize,
    total: usize,
    counts: HashMap<&'a [T], usize>,
}

impl<'a, T: Hash + Eq> NGramMultiset<'a, T> {
    pub fn order(&self) -> usize {
        self.n
    }

    /// Number of n-gram occurrences, `max(0, len - n + 1)`.
    pub fn total(&self) -> usize {
        self.total
    }

    /// Number of distinct n-grams.
    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn get(&self, gram: &[T]) -> usize {
        self.counts.get(gram).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&'a [T], usize)> + '_ {
        self.counts.iter().map(|(g, c)| (*g, *c))
    }

    /// Occurrences of `self` that are also present in `other`, clipped per n-gram.
    pub fn overlap(&self, other: &NGramMultiset<'_, T>) -> usize {
        self.counts.iter().map(|(g, &c)| c.min(other.get(g))).sum()
    }
}

/// Sliding-window n-gram counts of `seq`.
pub fn ngram_counts<T: Hash + Eq>(
    seq: &[T],
    n: usize,
) -> Result<NGramMultiset<'_, T>, MetricError> {
    if n == 0 {
        return Err(MetricError::Config(
            "n-gram order must be at least 1".into(),
        ));
    }
    Ok(count_windows(seq, n))
}

pub(crate) fn count_windows<T: Hash + Eq>(seq: &[T], n: usize) -> NGramMultiset<'_, T> {
    let mut counts: HashMap<&[T], usize> = HashMap::new();
    for window in seq.windows(n) {
        *counts.entry(window).or_insert(0) += 1;
    }
    NGramMultiset {
        n,
        total: seq.len().saturating_sub(n - 1),
        counts,
    }
}

/// Where clipping counts and the brevity-penalty reference length come from.
pub(crate) trait ClipSource<T> {
    /// Largest count of `gram` in any single reference.
    fn max_count(&self, gram: &[T]) -> usize;
    /// Reference length closest to `hyp_len`; ties go to the shorter one.
    fn closest_len(&self, hyp_len: usize) -> usize;
}

/// Multiset of reference lengths.
#[derive(Debug, Clone, Default)]
pub(crate) struct LengthIndex {
    counts: BTreeMap<usize, usize>,
}

impl LengthIndex {
    pub fn new(lengths: impl IntoIterator<Item = usize>) -> Self {
        let mut counts = BTreeMap::new();
        for len in lengths {
            *counts.entry(len).or_insert(0) += 1;
        }
        LengthIndex { counts }
    }

    /// Closest length to `target`, with one occurrence of `excluded` removed.
    pub fn closest(&self, target: usize, excluded: Option<usize>) -> Option<usize> {
        let available = |(&len, &count): (&usize, &usize)| {
            let removed = usize::from(excluded == Some(len));
            (count > removed).then_some(len)
        };
        let below = self.counts.range(..=target).rev().find_map(available);
        let above = self.counts.range(target + 1..).find_map(available);
        match (below, above) {
            (Some(b), Some(a)) => Some(if target - b <= a - target { b } else { a }),
            (b, a) => b.or(a),
        }
    }
}

/// Per-order maximum reference counts over a fixed reference pool.
pub(crate) struct ReferenceTable<'a, T> {
    order: usize,
    max_counts: HashMap<&'a [T], usize>,
}

impl<'a, T: Hash + Eq> ReferenceTable<'a, T> {
    pub fn build<S: AsRef<[T]>>(refs: impl IntoIterator<Item = &'a S>, order: usize) -> Self
    where
        S: 'a,
    {
        let mut max_counts: HashMap<&'a [T], usize> = HashMap::new();
        for r in refs {
            for (gram, count) in count_windows(r.as_ref(), order).counts {
                let slot = max_counts.entry(gram).or_insert(0);
                *slot = (*slot).max(count);
            }
        }
        ReferenceTable { order, max_counts }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn max_count(&self, gram: &[T]) -> usize {
        self.max_counts.get(gram).copied().unwrap_or(0)
    }
}

/// Reference tables for orders `1..=max_order` plus the length index.
pub(crate) struct ReferencePool<'a, T> {
    tables: Vec<ReferenceTable<'a, T>>,
    lengths: LengthIndex,
}

impl<'a, T: Hash + Eq> ReferencePool<'a, T> {
    pub fn build<S: AsRef<[T]>>(refs: &'a [S], orders: impl IntoIterator<Item = usize>) -> Self {
        let tables = orders
            .into_iter()
            .map(|k| ReferenceTable::build(refs.iter(), k))
            .collect();
        ReferencePool {
            tables,
            lengths: LengthIndex::new(refs.iter().map(|r| r.as_ref().len())),
        }
    }

    pub fn table(&self, order: usize) -> &ReferenceTable<'a, T> {
        self.tables
            .iter()
            .find(|t| t.order() == order)
            .expect("reference table built for every requested order")
    }

    pub fn closest_len(&self, hyp_len: usize) -> usize {
        self.lengths
            .closest(hyp_len, None)
            .expect("reference pool is non-empty")
    }
}

/// The two best per-reference counts of one n-gram, remembering who holds the best.
#[derive(Debug, Clone, Copy)]
struct TopTwo {
    best: usize,
    holder: usize,
    second: usize,
}

/// Maximum counts over "every sequence except one", for leave-one-out scoring.
pub(crate) struct LeaveOneOutTable<'a, T> {
    order: usize,
    top: HashMap<&'a [T], TopTwo>,
}

impl<'a, T: Hash + Eq> LeaveOneOutTable<'a, T> {
    pub fn build<S: AsRef<[T]>>(seqs: &'a [S], order: usize) -> Self {
        let mut top: HashMap<&'a [T], TopTwo> = HashMap::new();
        for (idx, s) in seqs.iter().enumerate() {
            for (gram, count) in count_windows(s.as_ref(), order).counts {
                let entry = top.entry(gram).or_insert(TopTwo {
                    best: 0,
                    holder: usize::MAX,
                    second: 0,
                });
                if count > entry.best {
                    entry.second = entry.best;
                    entry.best = count;
                    entry.holder = idx;
                } else if count > entry.second {
                    entry.second = count;
                }
            }
        }
        LeaveOneOutTable { order, top }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn max_count_excluding(&self, gram: &[T], excluded: usize) -> usize {
        match self.top.get(gram) {
            Some(t) if t.holder == excluded => t.second,
            Some(t) => t.best,
            None => 0,
        }
    }
}

impl<T: Hash + Eq> ClipSource<T> for ReferencePool<'_, T> {
    fn max_count(&self, gram: &[T]) -> usize {
        self.table(gram.len()).max_count(gram)
    }

    fn closest_len(&self, hyp_len: usize) -> usize {
        ReferencePool::closest_len(self, hyp_len)
    }
}

/// Leave-one-out tables and lengths with one sequence excluded.
pub(crate) struct LeaveOneOutView<'p, 'a, T> {
    pub tables: &'p [LeaveOneOutTable<'a, T>],
    pub lengths: &'p LengthIndex,
    pub excluded: usize,
    pub excluded_len: usize,
}

impl<T: Hash + Eq> ClipSource<T> for LeaveOneOutView<'_, '_, T> {
    fn max_count(&self, gram: &[T]) -> usize {
        self.tables
            .iter()
            .find(|t| t.order() == gram.len())
            .expect("leave-one-out table built for every requested order")
            .max_count_excluding(gram, self.excluded)
    }

    fn closest_len(&self, hyp_len: usize) -> usize {
        self.lengths
            .closest(hyp_len, Some(self.excluded_len))
            .expect("at least one other sequence remains")
    }
}
