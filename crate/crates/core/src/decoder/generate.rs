use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::guidance::{
    generate_textual_examples, topk_guidance, verifier_guidance, CachedExamples, GuidanceStep,
    GuidanceTrie, Polarity, TextualOptions, TrieCursor,
};
use crate::knowledge::{EntityRef, KnowledgeBase};
use crate::model::{LanguageModel, TokenId};
use crate::scalar::Scalar;

use super::config::{GuidanceConfig, Strategy};
use super::step::guided_step;

/// What to generate: the rendered instruction plus the entity names used in
/// guidance queries. Example lists, when present, replace model-generated
/// examples (textual) and are required for the oracle strategy.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DecodeRequest {
    pub prompt: String,
    pub topic: String,
    pub constraint: String,
    pub topic_examples: Option<Vec<String>>,
    pub constraint_examples: Option<Vec<String>>,
    /// Added to the textual sampling seed so instances draw different
    /// examples.
    pub seed: u64,
}

impl DecodeRequest {
    pub fn new(
        prompt: impl Into<String>,
        topic: impl Into<String>,
        constraint: impl Into<String>,
    ) -> Self {
        Self {
            prompt: prompt.into(),
            topic: topic.into(),
            constraint: constraint.into(),
            ..Self::default()
        }
    }

    pub fn with_examples(mut self, topic: Vec<String>, constraint: Vec<String>) -> Self {
        self.topic_examples = Some(topic);
        self.constraint_examples = Some(constraint);
        self
    }
}

/// Knowledge base example sets for the oracle strategy: every leaf name below
/// a hierarchy node, or every person name of a property pair.
pub fn oracle_examples(
    kb: &KnowledgeBase,
    topic: &EntityRef,
    constraint: &EntityRef,
) -> Result<(Vec<String>, Vec<String>)> {
    Ok((
        kb.surface_forms(topic)?.into_iter().collect(),
        kb.surface_forms(constraint)?.into_iter().collect(),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepTrace {
    pub chosen: TokenId,
    pub base_argmax: TokenId,
    pub topic_size: usize,
    pub constraint_size: usize,
    /// Cursor resets so far, both tries combined.
    pub resets: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodeTrace {
    pub steps: Vec<StepTrace>,
    /// Notes on degraded guidance, e.g. a textual fallback to top-k.
    pub notes: Vec<String>,
}

impl DecodeTrace {
    /// Steps where guidance changed the greedy choice.
    pub fn interventions(&self) -> usize {
        self.steps
            .iter()
            .filter(|s| s.chosen != s.base_argmax)
            .count()
    }

    pub fn resets(&self) -> usize {
        self.steps.last().map_or(0, |s| s.resets)
    }

    pub fn summary(&self) -> TraceSummary {
        let n = self.steps.len().max(1) as f64;
        TraceSummary {
            steps: self.steps.len(),
            interventions: self.interventions(),
            resets: self.resets(),
            mean_topic_size: self.steps.iter().map(|s| s.topic_size).sum::<usize>() as f64 / n,
            mean_constraint_size: self.steps.iter().map(|s| s.constraint_size).sum::<usize>()
                as f64
                / n,
            notes: self.notes.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub steps: usize,
    pub interventions: usize,
    pub resets: usize,
    pub mean_topic_size: f64,
    pub mean_constraint_size: f64,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Generation {
    pub text: String,
    /// Emitted tokens; a final eos is included when decoding stopped on it.
    pub tokens: Vec<TokenId>,
    pub trace: DecodeTrace,
    /// Example phrases the tries were built from (trie strategies only).
    pub examples: Option<(Vec<String>, Vec<String>)>,
}

/// Per-polarity guidance source during one decode.
enum Source<'t> {
    Fixed(BTreeSet<TokenId>),
    Trie(TrieCursor<'t>),
    Verifier,
}

/// Guided greedy decoder over a generation model and a guidance model. The
/// two may be the same model.
pub struct Decoder<'m, S: Scalar> {
    pub gen: &'m dyn LanguageModel<S>,
    pub guide: &'m dyn LanguageModel<S>,
    pub config: GuidanceConfig<S>,
}

impl<'m, S: Scalar> Decoder<'m, S> {
    pub fn new(
        gen: &'m dyn LanguageModel<S>,
        guide: &'m dyn LanguageModel<S>,
        config: GuidanceConfig<S>,
    ) -> Result<Self> {
        config.validate()?;
        Ok(Self { gen, guide, config })
    }

    fn textual_options(&self, seed: u64) -> TextualOptions {
        TextualOptions {
            seed: self.config.textual.seed.wrapping_add(seed),
            ..self.config.textual
        }
    }

    /// Samples textual examples for both entities.
    pub fn textual_examples(&self, id: &str, req: &DecodeRequest) -> Result<CachedExamples> {
        let opts = self.textual_options(req.seed);
        let topic = generate_textual_examples(self.guide, &req.topic, &opts)?;
        let constraint = generate_textual_examples(
            self.guide,
            &req.constraint,
            &TextualOptions {
                seed: opts.seed.wrapping_add(1 << 32),
                ..opts
            },
        )?;
        Ok(CachedExamples {
            id: id.to_string(),
            topic,
            constraint,
        })
    }

    fn topk(&self, entity: &str, polarity: Polarity) -> Result<BTreeSet<TokenId>> {
        if self.guide.vocab_size() != self.gen.vocab_size() {
            return Err(Error::InvalidArgument(
                "top-k guidance needs the generation and guidance models to share a vocabulary"
                    .into(),
            ));
        }
        let k = match polarity {
            Polarity::Topic => self.config.k_topic,
            Polarity::Constraint => self.config.k_constraint,
        };
        Ok(topk_guidance(self.guide, entity, k.min(self.guide.vocab_size()), polarity)?.ids)
    }

    fn example_lists(
        &self,
        req: &DecodeRequest,
        notes: &mut Vec<String>,
    ) -> Result<(Vec<String>, Vec<String>)> {
        match (&req.topic_examples, &req.constraint_examples) {
            (Some(t), Some(c)) => Ok((t.clone(), c.clone())),
            _ if self.config.strategy == Strategy::Oracle => Err(Error::GuidanceUnavailable(
                "oracle guidance needs knowledge base example sets".into(),
            )),
            _ => {
                let ex = self.textual_examples("", req)?;
                if ex.topic.is_empty() || ex.constraint.is_empty() {
                    notes.push("textual examples were empty for at least one side".into());
                }
                Ok((ex.topic, ex.constraint))
            }
        }
    }

    pub fn generate(&self, req: &DecodeRequest) -> Result<Generation> {
        let cfg = &self.config;
        let gen = self.gen;
        let eos = gen.eos_id();
        let mut trace = DecodeTrace::default();

        let mut examples = None;
        let tries: Option<(GuidanceTrie, GuidanceTrie)> = if cfg.strategy.uses_examples() {
            let (t, c) = self.example_lists(req, &mut trace.notes)?;
            let tries = (
                GuidanceTrie::from_examples(&t, gen)?,
                GuidanceTrie::from_examples(&c, gen)?,
            );
            examples = Some((t, c));
            Some(tries)
        } else {
            None
        };

        let mut sources = Vec::with_capacity(2);
        for (polarity, entity) in [
            (Polarity::Topic, &req.topic),
            (Polarity::Constraint, &req.constraint),
        ] {
            let source = match cfg.strategy {
                Strategy::None => Source::Fixed(BTreeSet::new()),
                Strategy::Topk => Source::Fixed(self.topk(entity, polarity)?),
                Strategy::Verifier => {
                    if polarity == Polarity::Constraint || cfg.verifier_topic {
                        Source::Verifier
                    } else {
                        Source::Fixed(BTreeSet::new())
                    }
                }
                Strategy::Textual | Strategy::Oracle => {
                    let (tt, ct) = tries.as_ref().expect("tries built for example strategies");
                    let trie = match polarity {
                        Polarity::Topic => tt,
                        Polarity::Constraint => ct,
                    };
                    if trie.is_empty() && cfg.strategy == Strategy::Textual {
                        trace.notes.push(format!(
                            "{polarity}: no textual examples, fell back to top-k"
                        ));
                        Source::Fixed(self.topk(entity, polarity)?)
                    } else if cfg.use_trie {
                        Source::Trie(trie.cursor())
                    } else {
                        Source::Fixed(trie.all_tokens())
                    }
                }
            };
            sources.push((polarity, entity, source));
        }

        let mut ctx = gen.tokenize(&req.prompt)?;
        let mut tokens = Vec::with_capacity(cfg.max_tokens);
        let mut last: Option<TokenId> = None;
        for _ in 0..cfg.max_tokens {
            let base = gen.next_logits(&ctx)?;
            let mut sets = Vec::with_capacity(2);
            let mut resets = 0;
            for (polarity, entity, source) in sources.iter_mut() {
                let mut ids = match source {
                    Source::Fixed(ids) => ids.clone(),
                    Source::Trie(cursor) => {
                        let (ids, _) = cursor.step(last);
                        resets += cursor.resets();
                        ids
                    }
                    Source::Verifier => {
                        verifier_guidance(gen, self.guide, &ctx, entity, *polarity, cfg.lookahead)?
                            .ids
                    }
                };
                ids.remove(&eos);
                sets.push(GuidanceStep::new(ids, *polarity, gen.vocab_size())?);
            }
            let out = guided_step(&base, &sets[0], &sets[1], cfg.alpha, cfg.beta)?;
            trace.steps.push(StepTrace {
                chosen: out.chosen,
                base_argmax: base.argmax().expect("nonempty logits"),
                topic_size: sets[0].len(),
                constraint_size: sets[1].len(),
                resets,
            });
            tokens.push(out.chosen);
            if out.chosen == eos {
                break;
            }
            ctx.push(out.chosen);
            last = Some(out.chosen);
        }
        let text = gen.detokenize(&tokens)?;
        Ok(Generation {
            text,
            tokens,
            trace,
            examples,
        })
    }
}

/// Convenience wrapper: decode `req` with `gen` guiding itself.
pub fn generate<S: Scalar>(
    gen: &dyn LanguageModel<S>,
    guide: &dyn LanguageModel<S>,
    req: &DecodeRequest,
    config: &GuidanceConfig<S>,
) -> Result<Generation> {
    Decoder::new(gen, guide, config.clone())?.generate(req)
}
