use super::{CorpusError, TokenId, Vocabulary};

/// Rectangular block of encoded sequences padded with PAD.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Batch {
    pub ids: Vec<Vec<TokenId>>,
    /// Unpadded length of each row.
    pub lengths: Vec<usize>,
}

impl Batch {
    pub fn from_sequences(seqs: &[Vec<TokenId>]) -> Self {
        let width = seqs.iter().map(Vec::len).max().unwrap_or(0);
        let ids = seqs
            .iter()
            .map(|s| {
                let mut row = s.clone();
                row.resize(width, Vocabulary::PAD);
                row
            })
            .collect();
        Batch {
            ids,
            lengths: seqs.iter().map(Vec::len).collect(),
        }
    }

    pub fn width(&self) -> usize {
        self.ids.first().map_or(0, Vec::len)
    }

    pub fn rows(&self) -> usize {
        self.ids.len()
    }

    /// The unpadded part of row `i`.
    pub fn row(&self, i: usize) -> &[TokenId] {
        &self.ids[i][..self.lengths[i]]
    }
}

/// Iterator over consecutive groups of at most `batch_size` sequences.
pub struct Batches<'a> {
    data: &'a [Vec<TokenId>],
    batch_size: usize,
    cursor: usize,
}

impl Iterator for Batches<'_> {
    type Item = Batch;

    fn next(&mut self) -> Option<Batch> {
        if self.cursor >= self.data.len() {
            return None;
        }
        let end = (self.cursor + self.batch_size).min(self.data.len());
        let batch = Batch::from_sequences(&self.data[self.cursor..end]);
        self.cursor = end;
        Some(batch)
    }
}

/// Groups `data` into padded batches, preserving order. The last batch may be short.
pub fn batches<'a>(
    data: &'a [Vec<TokenId>],
    batch_size: usize,
    _vocab: &Vocabulary,
) -> Result<Batches<'a>, CorpusError> {
    if batch_size == 0 {
        return Err(CorpusError::Config("batch_size must be at least 1".into()));
    }
    Ok(Batches {
        data,
        batch_size,
        cursor: 0,
    })
}
