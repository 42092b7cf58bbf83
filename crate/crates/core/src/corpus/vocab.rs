use std::collections::HashMap;

use super::{CorpusError, Token, TokenSequence};

pub type TokenId = u32;

/// Bidirectional token/id map. Ids 0..4 are reserved for the special tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    id_of: HashMap<Token, TokenId>,
    token_of: Vec<Token>,
}

impl Vocabulary {
    pub const PAD: TokenId = 0;
    pub const UNK: TokenId = 1;
    pub const SOS: TokenId = 2;
    pub const EOS: TokenId = 3;
    pub const SPECIALS: [&'static str; 4] = ["<pad>", "<unk>", "<sos>", "<eos>"];

    /// Vocabulary holding only the four special tokens.
    pub fn specials_only() -> Self {
        let token_of: Vec<Token> = Self::SPECIALS
            .iter()
            .map(|s| Token::new(*s).expect("special surfaces are valid tokens"))
            .collect();
        let id_of = token_of
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as TokenId))
            .collect();
        Vocabulary { id_of, token_of }
    }

    /// Builds from an ordered token list; specials are prepended and duplicates skipped.
    pub fn from_tokens<I: IntoIterator<Item = Token>>(tokens: I) -> Self {
        let mut vocab = Self::specials_only();
        for token in tokens {
            vocab.push(token);
        }
        vocab
    }

    fn push(&mut self, token: Token) {
        if !self.id_of.contains_key(&token) {
            let id = self.token_of.len() as TokenId;
            self.id_of.insert(token.clone(), id);
            self.token_of.push(token);
        }
    }

    pub fn len(&self) -> usize {
        self.token_of.len()
    }

    /// Always false: the specials are always present.
    pub fn is_empty(&self) -> bool {
        self.token_of.is_empty()
    }

    pub fn id(&self, token: &Token) -> Option<TokenId> {
        self.id_of.get(token).copied()
    }

    pub fn id_or_unk(&self, token: &Token) -> TokenId {
        self.id(token).unwrap_or(Self::UNK)
    }

    pub fn token(&self, id: TokenId) -> Option<&Token> {
        self.token_of.get(id as usize)
    }

    pub fn is_special(id: TokenId) -> bool {
        id <= Self::EOS
    }

    /// Tokens in id order, specials included.
    pub fn tokens(&self) -> &[Token] {
        &self.token_of
    }

    /// One token per line in id order.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for token in &self.token_of {
            out.push_str(token.as_str());
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, CorpusError> {
        let mut lines = text.lines();
        for special in Self::SPECIALS {
            match lines.next() {
                Some(line) if line == special => {}
                other => {
                    return Err(CorpusError::Config(format!(
                        "vocabulary file must start with the special tokens; expected {special:?}, found {other:?}"
                    )))
                }
            }
        }
        let mut vocab = Self::specials_only();
        for line in lines {
            let token =
                Token::new(line).ok_or_else(|| CorpusError::InvalidToken(line.to_owned()))?;
            if vocab.id_of.contains_key(&token) {
                return Err(CorpusError::Config(format!(
                    "duplicate vocabulary entry {line:?}"
                )));
            }
            vocab.push(token);
        }
        Ok(vocab)
    }
}

/// Counts token frequencies and keeps those with `count >= min_freq`, most frequent
/// first. Equal counts are ordered by first occurrence in the corpus. `max_size`
/// includes the four specials.
pub fn build_vocabulary(
    sequences: &[TokenSequence],
    max_size: Option<usize>,
    min_freq: usize,
) -> Result<Vocabulary, CorpusError> {
    if sequences.is_empty() {
        return Err(CorpusError::Config(
            "cannot build a vocabulary from an empty corpus".into(),
        ));
    }
    if min_freq == 0 {
        return Err(CorpusError::Config("min_freq must be at least 1".into()));
    }
    if let Some(max) = max_size {
        if max < Vocabulary::SPECIALS.len() {
            return Err(CorpusError::Config(format!(
                "max_vocab {max} is smaller than the {} special tokens",
                Vocabulary::SPECIALS.len()
            )));
        }
    }

    let specials = Vocabulary::specials_only();
    // token -> (count, first occurrence)
    let mut stats: HashMap<&Token, (usize, usize)> = HashMap::new();
    let mut position = 0usize;
    for token in sequences.iter().flatten() {
        if specials.id(token).is_none() {
            stats.entry(token).or_insert((0, position)).0 += 1;
        }
        position += 1;
    }

    let mut ranked: Vec<(&Token, usize, usize)> = stats
        .into_iter()
        .filter(|(_, (count, _))| *count >= min_freq)
        .map(|(t, (count, first))| (t, count, first))
        .collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.2.cmp(&b.2)));
    if let Some(max) = max_size {
        ranked.truncate(max - Vocabulary::SPECIALS.len());
    }

    Ok(Vocabulary::from_tokens(
        ranked.into_iter().map(|(t, _, _)| t.clone()),
    ))
}

/// Maps tokens to ids, unknown tokens to UNK; optionally frames with SOS/EOS.
pub fn encode(vocab: &Vocabulary, seq: &[Token], add_bos_eos: bool) -> Vec<TokenId> {
    let mut ids = Vec::with_capacity(seq.len() + 2);
    if add_bos_eos {
        ids.push(Vocabulary::SOS);
    }
    ids.extend(seq.iter().map(|t| vocab.id_or_unk(t)));
    if add_bos_eos {
        ids.push(Vocabulary::EOS);
    }
    ids
}

/// Maps ids back to tokens, dropping specials.
pub fn decode(vocab: &Vocabulary, ids: &[TokenId]) -> Result<TokenSequence, CorpusError> {
    let mut out = Vec::with_capacity(ids.len());
    for &id in ids {
        let token = vocab.token(id).ok_or(CorpusError::IdOutOfRange {
            id,
            size: vocab.len(),
        })?;
        if !Vocabulary::is_special(id) {
            out.push(token.clone());
        }
    }
    Ok(out)
}
