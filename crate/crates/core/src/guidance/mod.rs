//! Guidance sources: verifier spans, top-k query tokens, generated example
//! phrases and knowledge base oracles, plus the token trie they compile to.

mod cache;
mod query;
mod span;
mod step;
mod textual;
mod trie;

pub use cache::{read_cache, write_cache, CachedExamples};
pub use query::{
    binary_verify, topk_guidance, verifier_guidance, QueryKind, QueryTemplate, CANDIDATE_SLOT,
    DEFAULT_K_CONSTRAINT, DEFAULT_K_TOPIC, ENTITY_SLOT,
};
pub use span::{
    content_run, is_content_word, is_stopword, lookahead_span, Span, DEFAULT_LOOKAHEAD, STOPWORDS,
};
pub use step::{GuidanceStep, Polarity};
pub use textual::{generate_textual_examples, parse_examples, TextualOptions};
pub use trie::{CursorMove, GuidanceTrie, TrieCursor};
