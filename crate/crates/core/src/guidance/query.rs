use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{LanguageModel, TokenId};
use crate::scalar::Scalar;

use super::span::lookahead_span;
use super::step::{GuidanceStep, Polarity};

pub const CANDIDATE_SLOT: &str = "[candidate]";
pub const ENTITY_SLOT: &str = "[entity]";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QueryKind {
    Verifier,
    Example,
}

/// Natural-language query sent to the guidance model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryTemplate {
    pub kind: QueryKind,
    pub pattern: String,
}

impl QueryTemplate {
    pub fn new(kind: QueryKind, pattern: impl Into<String>) -> Result<Self> {
        let pattern = pattern.into();
        let ok = pattern.contains(ENTITY_SLOT)
            && (kind == QueryKind::Example || pattern.contains(CANDIDATE_SLOT));
        if !ok {
            return Err(Error::InvalidArgument(format!(
                "{kind:?} query pattern {pattern:?} is missing a slot"
            )));
        }
        Ok(Self { kind, pattern })
    }

    pub fn verifier() -> Self {
        Self {
            kind: QueryKind::Verifier,
            pattern: "Is [candidate] a type of [entity]?".to_string(),
        }
    }

    pub fn example() -> Self {
        Self {
            kind: QueryKind::Example,
            pattern: "What are some examples of [entity]?".to_string(),
        }
    }

    pub fn render(&self, entity: &str, candidate: Option<&str>) -> String {
        let out = self.pattern.replace(ENTITY_SLOT, entity.trim());
        match candidate {
            Some(c) => out.replace(CANDIDATE_SLOT, c.trim()),
            None => out,
        }
    }
}

/// Single-token ids of the answer words, trying the space-prefixed form
/// first (the natural continuation after a question mark for BPE models).
fn answer_id<S: Scalar>(model: &dyn LanguageModel<S>, word: &str) -> Result<TokenId> {
    for form in [format!(" {word}"), word.to_string()] {
        let ids = model.tokenize(&form)?;
        if let [id] = ids[..] {
            if model.unk_id() != Some(id) {
                return Ok(id);
            }
        }
    }
    Err(Error::TokenizerMissingYesNo(word.to_string()))
}

/// Asks the guidance model whether `candidate` is a type of `entity`; true
/// iff P(yes) is strictly greater than P(no) after the query.
pub fn binary_verify<S: Scalar>(
    model: &dyn LanguageModel<S>,
    candidate: &str,
    entity: &str,
) -> Result<bool> {
    if candidate.trim().is_empty() || entity.trim().is_empty() {
        return Err(Error::InvalidArgument(
            "verifier needs a nonempty candidate and entity".into(),
        ));
    }
    let yes = answer_id(model, "yes")?;
    let no = answer_id(model, "no")?;
    let query = QueryTemplate::verifier().render(entity, Some(candidate));
    let ctx = model.tokenize(&query)?;
    let probs = model.next_logits(&ctx)?.softmax();
    Ok(probs[yes as usize] > probs[no as usize])
}

/// One verifier step: look ahead greedily with the generation model, and if
/// the guidance model confirms the resulting span, guide on its tokens.
pub fn verifier_guidance<S: Scalar>(
    gen: &dyn LanguageModel<S>,
    guide: &dyn LanguageModel<S>,
    ctx: &[TokenId],
    entity: &str,
    polarity: Polarity,
    lookahead: usize,
) -> Result<GuidanceStep> {
    let span = lookahead_span(gen, ctx, lookahead)?;
    if span.is_empty() || !binary_verify(guide, &span.text, entity)? {
        return Ok(GuidanceStep::empty(polarity));
    }
    GuidanceStep::new(span.ids, polarity, gen.vocab_size())
}

pub const DEFAULT_K_TOPIC: usize = 20;
pub const DEFAULT_K_CONSTRAINT: usize = 40;

/// Top-k next tokens after the example query for `entity`, ties to the
/// lowest id. The same set is used at every step.
pub fn topk_guidance<S: Scalar>(
    model: &dyn LanguageModel<S>,
    entity: &str,
    k: usize,
    polarity: Polarity,
) -> Result<GuidanceStep> {
    let size = model.vocab_size();
    if k == 0 || k > size {
        return Err(Error::InvalidArgument(format!(
            "k must be in 1..={size}, got {k}"
        )));
    }
    let ctx = model.tokenize(&QueryTemplate::example().render(entity, None))?;
    let ids = model.next_logits(&ctx)?.top_k(k);
    GuidanceStep::new(ids, polarity, size)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{TableModel, Vocabulary};
    use std::collections::BTreeSet;

    fn vocab() -> Vocabulary {
        Vocabulary::from_words(
            "is a type of wine what are some examples yes no pinot noir merlot the ?".split(' '),
        )
    }

    fn model_with_answer(yes: f64, no: f64) -> TableModel<f64> {
        let v = vocab();
        let y = v.id("yes").unwrap();
        let n = v.id("no").unwrap();
        let the = v.id("the").unwrap();
        let q = v.id("?").unwrap();
        let mut m = TableModel::uniform(v);
        m.add_rule(vec![q], &[(y, yes), (n, no), (the, 1.0 - yes - no)])
            .unwrap();
        m
    }

    #[test]
    fn query_wording() {
        let q = QueryTemplate::verifier().render("wine", Some("pinot noir"));
        assert_eq!(q, "Is pinot noir a type of wine?");
        assert_eq!(
            QueryTemplate::example().render("wine", None),
            "What are some examples of wine?"
        );
        assert!(QueryTemplate::new(QueryKind::Verifier, "Is [entity]?").is_err());
        assert!(QueryTemplate::new(QueryKind::Example, "[entity]").is_ok());
    }

    #[test]
    fn verify_compares_yes_no() {
        let m = model_with_answer(0.7, 0.1);
        assert!(binary_verify(&m, "pinot noir", "wine").unwrap());
        let tie = model_with_answer(0.3, 0.3);
        assert!(!binary_verify(&tie, "pinot noir", "wine").unwrap());
    }

    #[test]
    fn missing_yes_no_is_an_error() {
        let m = TableModel::<f64>::uniform(Vocabulary::from_words(["wine", "is"]));
        assert!(matches!(
            binary_verify(&m, "wine", "wine"),
            Err(Error::TokenizerMissingYesNo(_))
        ));
    }

    #[test]
    fn verified_span_becomes_guidance_set() {
        let mut m = model_with_answer(0.7, 0.1);
        let v = m.vocab().clone();
        let id = |w: &str| v.id(w).unwrap();
        // Continuation "pinot pinot noir is a ..." has a repeated token.
        m.set_default(&[(id("pinot"), 1.0)]).unwrap();
        m.add_rule(vec![id("pinot")], &[(id("pinot"), 1.0)])
            .unwrap();
        m.add_rule(vec![id("pinot"), id("pinot")], &[(id("noir"), 1.0)])
            .unwrap();
        m.add_rule(vec![id("noir")], &[(id("is"), 1.0)]).unwrap();
        m.add_rule(vec![id("is")], &[(id("a"), 1.0)]).unwrap();
        m.add_rule(vec![id("a")], &[(id("pinot"), 1.0)]).unwrap();
        let step = verifier_guidance(&m, &m, &[], "wine", Polarity::Constraint, 8).unwrap();
        let want: BTreeSet<TokenId> = [id("pinot"), id("noir")].into_iter().collect();
        assert_eq!(step.ids, want);

        let no = model_with_answer(0.1, 0.7);
        let step = verifier_guidance(&m, &no, &[], "wine", Polarity::Constraint, 8).unwrap();
        assert!(step.is_empty());
    }

    #[test]
    fn topk_ranking_and_bounds() {
        let v = vocab();
        let n = v.len();
        let q = v.id("?").unwrap();
        let mut m = TableModel::<f64>::uniform(v);
        m.add_rule(vec![q], &[(5, 0.5), (2, 0.3), (9, 0.2)])
            .unwrap();
        let s = topk_guidance(&m, "wine", 2, Polarity::Topic).unwrap();
        assert_eq!(s.ids, [2, 5].into_iter().collect());
        let all = topk_guidance(&m, "wine", n, Polarity::Topic).unwrap();
        assert_eq!(all.len(), n);
        assert!(topk_guidance(&m, "wine", n + 1, Polarity::Topic).is_err());
    }
}
