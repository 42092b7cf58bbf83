//! Data pipeline: raw text lines to tokens, vocabulary, splits and padded batches.
//!
//! Two dataset layouts are supported. A *single* dataset holds one sequence per
//! line; a *paired* dataset holds line-aligned source and target files.

mod batch;
mod io;
mod split;
mod vocab;

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

pub use batch::{batches, Batch, Batches};
pub use io::{load_paired, load_single, read_lines};
pub use split::{split, SplitRatio};
pub use vocab::{build_vocabulary, decode, encode, TokenId, Vocabulary};

/// A single whitespace-free text unit.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Token(String);

impl Token {
    /// Returns `None` for empty strings or strings containing whitespace.
    pub fn new(surface: impl Into<String>) -> Option<Self> {
        let surface = surface.into();
        if surface.is_empty() || surface.chars().any(char::is_whitespace) {
            None
        } else {
            Some(Token(surface))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for Token {
    type Error = CorpusError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        Token::new(value.clone()).ok_or(CorpusError::InvalidToken(value))
    }
}

impl From<Token> for String {
    fn from(token: Token) -> Self {
        token.0
    }
}

impl fmt::Debug for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for Token {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

pub type TokenSequence = Vec<Token>;

/// Source/target pair from line-aligned files. `index` is the shared line number.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairedExample {
    pub index: usize,
    pub source: TokenSequence,
    pub target: TokenSequence,
}

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("invalid token {0:?}: tokens are non-empty and contain no whitespace")]
    InvalidToken(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("token id {id} out of range for vocabulary of size {size}")]
    IdOutOfRange { id: TokenId, size: usize },
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: invalid UTF-8")]
    Utf8 { path: PathBuf, line: usize },
    #[error("paired files are not line-aligned: {src_path} has {src_lines} lines, {tgt_path} has {tgt_lines}")]
    Alignment {
        src_path: PathBuf,
        tgt_path: PathBuf,
        src_lines: usize,
        tgt_lines: usize,
    },
    #[error("cannot split {len} examples with ratio {ratio}: every part would need at least one example")]
    Split { len: usize, ratio: SplitRatio },
}

/// Splits `text` on runs of Unicode whitespace, lowercasing first when asked.
pub fn tokenize(text: &str, lowercase: bool) -> TokenSequence {
    let split =
        |s: &str| -> TokenSequence { s.split_whitespace().map(|w| Token(w.to_owned())).collect() };
    if lowercase {
        split(&text.to_lowercase())
    } else {
        split(text)
    }
}

/// Joins tokens with single spaces; the inverse of [`tokenize`] without lowercasing.
pub fn detokenize<T: AsRef<str>>(tokens: &[T]) -> String {
    let mut out = String::new();
    for (i, token) in tokens.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(token.as_ref());
    }
    out
}
