use crate::error::Result;
use crate::model::{LanguageModel, TokenId};
use crate::scalar::Scalar;

/// Function words that never start or extend a content span.
pub const STOPWORDS: [&str; 120] = [
    "a", "about", "above", "after", "again", "against", "all", "an", "and", "any", "are", "as",
    "at", "be", "because", "been", "before", "being", "below", "between", "both", "but", "by",
    "can", "could", "did", "do", "does", "down", "during", "each", "few", "for", "from", "further",
    "had", "has", "have", "having", "he", "her", "here", "hers", "herself", "him", "himself",
    "his", "how", "i", "if", "in", "into", "is", "it", "its", "itself", "just", "me", "more",
    "most", "my", "myself", "no", "nor", "not", "now", "of", "off", "on", "once", "only", "or",
    "other", "our", "ours", "out", "over", "own", "same", "she", "should", "so", "some", "such",
    "than", "that", "the", "their", "theirs", "them", "then", "there", "these", "they", "this",
    "those", "through", "to", "too", "under", "until", "up", "very", "was", "we", "were", "what",
    "when", "where", "which", "while", "who", "whom", "why", "will", "with", "would", "you",
    "your", "yours",
];

/// Greedy look-ahead steps used by the verifier.
pub const DEFAULT_LOOKAHEAD: usize = 8;

pub fn is_stopword(word: &str) -> bool {
    let lower = word.to_lowercase();
    STOPWORDS.contains(&lower.as_str())
}

/// A content word is nonempty, purely alphabetic and not a stopword.
pub fn is_content_word(word: &str) -> bool {
    !word.is_empty() && word.chars().all(char::is_alphabetic) && !is_stopword(word)
}

/// Candidate entity found by greedy look-ahead.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Span {
    pub ids: Vec<TokenId>,
    pub text: String,
}

impl Span {
    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

/// First maximal run of content tokens in `surfaces`, as a token index range.
pub fn content_run<S: AsRef<str>>(surfaces: &[S]) -> std::ops::Range<usize> {
    let start = surfaces
        .iter()
        .position(|s| is_content_word(s.as_ref().trim()))
        .unwrap_or(surfaces.len());
    let len = surfaces[start..]
        .iter()
        .take_while(|s| is_content_word(s.as_ref().trim()))
        .count();
    start..start + len
}

/// Greedily continues `ctx` for up to `max_steps` tokens and returns the
/// first content span of the continuation: leading stopwords and
/// punctuation are skipped, then the maximal run of content tokens is taken.
/// The span is empty when the continuation holds no content word.
pub fn lookahead_span<S: Scalar>(
    model: &dyn LanguageModel<S>,
    ctx: &[TokenId],
    max_steps: usize,
) -> Result<Span> {
    let mut ids = model.greedy_continue(ctx, max_steps.max(1))?;
    if ids.last() == Some(&model.eos_id()) {
        ids.pop();
    }
    let surfaces = ids
        .iter()
        .map(|&id| model.token_text(id))
        .collect::<Result<Vec<_>>>()?;
    let run = content_run(&surfaces);
    let span_ids = ids[run.clone()].to_vec();
    let text = if span_ids.is_empty() {
        String::new()
    } else {
        model.detokenize(&span_ids)?
    };
    Ok(Span {
        ids: span_ids,
        text,
    })
}
