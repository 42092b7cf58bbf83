use std::fs;
use std::path::Path;

use super::{tokenize, CorpusError, PairedExample, TokenSequence};

/// Reads a UTF-8 file as lines. Accepts LF or CRLF endings; a trailing newline
/// does not produce an extra empty line, but blank lines inside the file are kept.
pub fn read_lines(path: &Path) -> Result<Vec<String>, CorpusError> {
    let bytes = fs::read(path).map_err(|source| CorpusError::Io {
        path: path.to_owned(),
        source,
    })?;
    let mut body: &[u8] = &bytes;
    if body.last() == Some(&b'\n') {
        body = &body[..body.len() - 1];
    }
    if bytes.is_empty() {
        return Ok(Vec::new());
    }
    body.split(|b| *b == b'\n')
        .enumerate()
        .map(|(i, raw)| {
            let raw = raw.strip_suffix(b"\r").unwrap_or(raw);
            std::str::from_utf8(raw)
                .map(str::to_owned)
                .map_err(|_| CorpusError::Utf8 {
                    path: path.to_owned(),
                    line: i + 1,
                })
        })
        .collect()
}

/// One token sequence per line, in file order.
pub fn load_single(path: &Path, lowercase: bool) -> Result<Vec<TokenSequence>, CorpusError> {
    Ok(read_lines(path)?
        .iter()
        .map(|line| tokenize(line, lowercase))
        .collect())
}

/// Pairs line `i` of `src_path` with line `i` of `tgt_path`.
pub fn load_paired(
    src_path: &Path,
    tgt_path: &Path,
    lowercase: bool,
) -> Result<Vec<PairedExample>, CorpusError> {
    let sources = load_single(src_path, lowercase)?;
    let targets = load_single(tgt_path, lowercase)?;
    if sources.len() != targets.len() {
        return Err(CorpusError::Alignment {
            src_path: src_path.to_owned(),
            tgt_path: tgt_path.to_owned(),
            src_lines: sources.len(),
            tgt_lines: targets.len(),
        });
    }
    Ok(sources
        .into_iter()
        .zip(targets)
        .enumerate()
        .map(|(index, (source, target))| PairedExample {
            index,
            source,
            target,
        })
        .collect())
}
