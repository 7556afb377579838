use std::collections::HashMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::text::{join_words, split_words};

use super::TokenId;

/// Fixed word-level vocabulary used by the local models.
///
/// Tokenization splits on whitespace and peels edge punctuation into separate
/// tokens (see [`crate::text::split_words`]). Lookup tries the exact piece and
/// then its lowercase form; anything else maps to the unknown id. Detokenizing
/// joins pieces with single spaces, so `detokenize(tokenize(s))` reproduces `s`
/// up to whitespace collapsing and spacing around punctuation.
#[derive(Debug, Clone)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, TokenId>,
    eos: TokenId,
    unk: TokenId,
    pad: Option<TokenId>,
}

pub const DEFAULT_EOS: &str = "</s>";
pub const DEFAULT_UNK: &str = "<unk>";

impl Vocabulary {
    /// Builds a vocabulary from explicit token strings. Duplicate strings keep
    /// their first id.
    pub fn new(tokens: Vec<String>, eos: TokenId, unk: TokenId) -> Result<Self> {
        let size = tokens.len();
        for id in [eos, unk] {
            if id as usize >= size {
                return Err(Error::UnknownTokenId { id, size });
            }
        }
        let mut index = HashMap::with_capacity(size);
        for (i, t) in tokens.iter().enumerate() {
            index.entry(t.clone()).or_insert(i as TokenId);
        }
        Ok(Self {
            tokens,
            index,
            eos,
            unk,
            pad: None,
        })
    }

    /// Builds a vocabulary with `</s>` at id 0 and `<unk>` at id 1 followed by
    /// the given words in first-seen order.
    pub fn from_words<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut tokens = vec![DEFAULT_EOS.to_string(), DEFAULT_UNK.to_string()];
        let mut seen: std::collections::HashSet<String> = tokens.iter().cloned().collect();
        for w in words {
            let w = w.as_ref();
            if seen.insert(w.to_string()) {
                tokens.push(w.to_string());
            }
        }
        Self::new(tokens, 0, 1).expect("special ids in range")
    }

    /// Parses the vocabulary file format: an optional header of `#key=value`
    /// lines (`#eos=<id>`, `#unk=<id>`, `#pad=<id>`), then one token per line
    /// where the id is the line index counted from the first token line.
    pub fn parse(src: &str, origin: &str) -> Result<Self> {
        let mut eos = None;
        let mut unk = None;
        let mut pad = None;
        let mut tokens = Vec::new();
        let mut in_header = true;
        for (lineno, line) in src.lines().enumerate() {
            if in_header {
                if let Some(rest) = line.strip_prefix('#') {
                    let (key, value) = rest.split_once('=').ok_or_else(|| {
                        Error::parse(origin, lineno + 1, "header must be #key=value")
                    })?;
                    let id: TokenId = value.trim().parse().map_err(|_| {
                        Error::parse(origin, lineno + 1, format!("bad id {value:?}"))
                    })?;
                    match key.trim() {
                        "eos" => eos = Some(id),
                        "unk" => unk = Some(id),
                        "pad" => pad = Some(id),
                        other => {
                            return Err(Error::parse(
                                origin,
                                lineno + 1,
                                format!("unknown header key {other:?}"),
                            ))
                        }
                    }
                    continue;
                }
                in_header = false;
            }
            tokens.push(line.to_string());
        }
        let eos = eos.ok_or_else(|| Error::parse(origin, 1, "missing #eos header"))?;
        let unk = unk.ok_or_else(|| Error::parse(origin, 1, "missing #unk header"))?;
        let mut vocab = Self::new(tokens, eos, unk)?;
        if let Some(p) = pad {
            if p as usize >= vocab.len() {
                return Err(Error::UnknownTokenId {
                    id: p,
                    size: vocab.len(),
                });
            }
            vocab.pad = Some(p);
        }
        Ok(vocab)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let src = std::fs::read_to_string(path)?;
        Self::parse(&src, &path.display().to_string())
    }

    /// Serializes to the vocabulary file format.
    pub fn to_file_string(&self) -> String {
        let mut out = format!("#eos={}\n#unk={}\n", self.eos, self.unk);
        if let Some(p) = self.pad {
            out.push_str(&format!("#pad={p}\n"));
        }
        for t in &self.tokens {
            out.push_str(t);
            out.push('\n');
        }
        out
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn eos(&self) -> TokenId {
        self.eos
    }

    pub fn unk(&self) -> TokenId {
        self.unk
    }

    pub fn pad(&self) -> Option<TokenId> {
        self.pad
    }

    pub fn token(&self, id: TokenId) -> Option<&str> {
        self.tokens.get(id as usize).map(String::as_str)
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// Exact lookup, then lowercase lookup.
    pub fn id(&self, piece: &str) -> Option<TokenId> {
        self.index
            .get(piece)
            .or_else(|| self.index.get(&piece.to_lowercase()))
            .copied()
    }

    pub fn tokenize(&self, text: &str) -> Vec<TokenId> {
        split_words(text)
            .into_iter()
            .map(|w| self.id(w).unwrap_or(self.unk))
            .collect()
    }

    /// Detokenizes, dropping the eos marker.
    pub fn detokenize(&self, ids: &[TokenId]) -> String {
        let pieces: Vec<&str> = ids
            .iter()
            .filter(|&&id| id != self.eos)
            .map(|&id| self.token(id).unwrap_or(DEFAULT_UNK))
            .collect();
        join_words(&pieces)
    }
}
