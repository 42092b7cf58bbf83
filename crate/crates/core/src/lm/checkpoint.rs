//! Binary checkpoint for [`NGramModel`].
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! "NGLM" | version u32 | order u32 | vocab_size u32 | delta f64 | lambda f64 × order
//! | triple_count u64 | triple_count × (context_len u32, context u32 × len, token u32, count u64)
//! ```
//!
//! Triples are sorted by (context length, context, token), so equal models
//! produce identical files.

use std::fs;
use std::path::Path;

use super::ngram::{validate_lambdas, NGramModel};
use super::LmError;
use crate::corpus::TokenId;
use crate::Scalar;

pub const MAGIC: &[u8; 4] = b"NGLM";
pub const FORMAT_VERSION: u32 = 1;

impl<F: Scalar> NGramModel<F> {
    pub fn to_bytes(&self) -> Vec<u8> {
        let triples = self.sorted_triples();
        let mut out = Vec::with_capacity(32 + triples.len() * 24);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&(self.order() as u32).to_le_bytes());
        out.extend_from_slice(&(super::LanguageModel::<F>::vocab_size(self) as u32).to_le_bytes());
        out.extend_from_slice(&self.delta().to_f64_lossy().to_le_bytes());
        for l in self.lambdas() {
            out.extend_from_slice(&l.to_f64_lossy().to_le_bytes());
        }
        out.extend_from_slice(&(triples.len() as u64).to_le_bytes());
        for (ctx, token, count) in triples {
            out.extend_from_slice(&(ctx.len() as u32).to_le_bytes());
            for id in ctx {
                out.extend_from_slice(&id.to_le_bytes());
            }
            out.extend_from_slice(&token.to_le_bytes());
            out.extend_from_slice(&count.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8], path: &Path) -> Result<Self, LmError> {
        let mut reader = Reader {
            bytes,
            pos: 0,
            path,
            version: None,
        };
        if reader.take(4)? != MAGIC {
            return Err(reader.error("missing NGLM magic header"));
        }
        let version = reader.u32()?;
        reader.version = Some(version);
        if version != FORMAT_VERSION {
            return Err(reader.error("unsupported format version"));
        }
        let order = reader.u32()? as usize;
        let vocab_size = reader.u32()? as usize;
        if order == 0 || vocab_size == 0 {
            return Err(reader.error("order and vocabulary size must be positive"));
        }
        let delta = reader.f64()?;
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(reader.error("delta must be positive"));
        }
        let lambdas = (0..order)
            .map(|_| reader.f64())
            .collect::<Result<Vec<_>, _>>()?;
        validate_lambdas(&lambdas, order).map_err(|e| reader.error(&e.to_string()))?;
        let mut model = NGramModel::empty(order, vocab_size, delta, &lambdas)
            .map_err(|e| reader.error(&e.to_string()))?;

        let count = reader.u64()?;
        let mut previous: Option<(Vec<TokenId>, TokenId)> = None;
        for _ in 0..count {
            let len = reader.u32()? as usize;
            if len >= order {
                return Err(reader.error("context longer than the model order"));
            }
            let ctx = (0..len)
                .map(|_| reader.u32())
                .collect::<Result<Vec<_>, _>>()?;
            let token = reader.u32()?;
            let n = reader.u64()?;
            if n == 0 {
                return Err(reader.error("zero count stored"));
            }
            if ctx
                .iter()
                .chain([&token])
                .any(|&id| id as usize >= vocab_size)
            {
                return Err(reader.error("token id outside the vocabulary"));
            }
            let key = (ctx, token);
            if let Some(prev) = &previous {
                if (prev.0.len(), &prev.0, prev.1) >= (key.0.len(), &key.0, key.1) {
                    return Err(reader.error("entries are not strictly sorted"));
                }
            }
            model.add(&key.0, key.1, n);
            previous = Some(key);
        }
        if reader.pos != bytes.len() {
            return Err(reader.error("trailing bytes after the last entry"));
        }
        Ok(model)
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
    path: &'a Path,
    version: Option<u32>,
}

impl<'a> Reader<'a> {
    fn error(&self, reason: &str) -> LmError {
        LmError::Checkpoint {
            path: self.path.to_owned(),
            expected: FORMAT_VERSION,
            found: self.version,
            reason: reason.to_owned(),
        }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], LmError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        match end {
            Some(end) => {
                let slice = &self.bytes[self.pos..end];
                self.pos = end;
                Ok(slice)
            }
            None => Err(self.error("file is truncated")),
        }
    }

    fn u32(&mut self) -> Result<u32, LmError> {
        Ok(u32::from_le_bytes(
            self.take(4)?.try_into().expect("4 bytes"),
        ))
    }

    fn u64(&mut self) -> Result<u64, LmError> {
        Ok(u64::from_le_bytes(
            self.take(8)?.try_into().expect("8 bytes"),
        ))
    }

    fn f64(&mut self) -> Result<f64, LmError> {
        Ok(f64::from_le_bytes(
            self.take(8)?.try_into().expect("8 bytes"),
        ))
    }
}

pub fn save<F: Scalar>(model: &NGramModel<F>, path: &Path) -> Result<(), LmError> {
    fs::write(path, model.to_bytes()).map_err(|source| LmError::Io {
        path: path.to_owned(),
        source,
    })
}

pub fn load<F: Scalar>(path: &Path) -> Result<NGramModel<F>, LmError> {
    let bytes = fs::read(path).map_err(|source| LmError::Io {
        path: path.to_owned(),
        source,
    })?;
    NGramModel::from_bytes(&bytes, path)
}
