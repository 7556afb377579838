use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::LanguageModel;
use crate::scalar::Scalar;

use super::query::QueryTemplate;

/// Sampling settings for example generation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TextualOptions {
    /// Total tokens across all beams.
    pub budget: usize,
    pub top_p: f64,
    pub temperature: f64,
    pub beams: usize,
    pub seed: u64,
}

impl Default for TextualOptions {
    fn default() -> Self {
        Self {
            budget: 200,
            top_p: 0.9,
            temperature: 1.0,
            beams: 4,
            seed: 0,
        }
    }
}

/// Samples example phrases for `entity` from the example query. The budget
/// is split across `beams` independent top-p continuations with distinct
/// seeds; their text is pooled and parsed with [`parse_examples`].
pub fn generate_textual_examples<S: Scalar>(
    model: &dyn LanguageModel<S>,
    entity: &str,
    opts: &TextualOptions,
) -> Result<Vec<String>> {
    if opts.budget == 0 || opts.beams == 0 {
        return Err(Error::InvalidArgument(
            "textual guidance needs a positive budget and beam count".into(),
        ));
    }
    let ctx = model.tokenize(&QueryTemplate::example().render(entity, None))?;
    let beams = opts.beams.min(opts.budget);
    let per_beam = opts.budget / beams;
    let mut pooled = Vec::with_capacity(beams);
    for b in 0..beams {
        let seed = opts.seed.wrapping_add(b as u64);
        let ids = model.sample_continue(
            &ctx,
            per_beam,
            S::lit(opts.top_p),
            S::lit(opts.temperature),
            seed,
        )?;
        pooled.push(model.detokenize(&ids)?);
    }
    Ok(parse_examples(&pooled.join("\n")))
}

/// Splits generated text into candidate phrases: newlines, commas,
/// semicolons and standalone `-` list markers separate phrases; leading
/// markers and trailing periods are stripped; empties are dropped; duplicates
/// are removed case-insensitively, keeping the first occurrence.
pub fn parse_examples(text: &str) -> Vec<String> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for piece in text.split(['\n', ',', ';']) {
        let mut current: Vec<&str> = Vec::new();
        let mut flush = |words: &mut Vec<&str>| {
            let phrase = words.join(" ");
            words.clear();
            let phrase = phrase
                .trim_start_matches(['-', '*', '•', ' '])
                .trim_end_matches(['.', ' '])
                .trim();
            if !phrase.is_empty() && seen.insert(phrase.to_lowercase()) {
                out.push(phrase.to_string());
            }
        };
        for w in piece.split_whitespace() {
            if w.chars().all(|c| c == '-') {
                flush(&mut current);
            } else {
                current.push(w);
            }
        }
        flush(&mut current);
    }
    out
}
