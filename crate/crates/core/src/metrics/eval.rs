use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::benchmark::InstructionInstance;
use crate::error::{Error, Result};
use crate::knowledge::{KbKind, KnowledgeBase};
use crate::model::LanguageModel;
use crate::scalar::Scalar;
use crate::text::split_words;

use super::scores::{copy_bleu, perplexity, rep_n};

/// A generated text to score. Extra fields in generation files are ignored.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratedText {
    pub id: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceResult {
    pub id: String,
    pub kb_kind: KbKind,
    /// Root name (hierarchy) or property of the topic.
    pub topic_category: String,
    pub constraint_category: String,
    pub on_topic: bool,
    pub violated: bool,
    pub copy_bleu: f64,
    /// `None` when the text is shorter than the n-gram order.
    pub rep1: Option<f64>,
    pub rep2: Option<f64>,
    pub ppl: Option<f64>,
}

impl InstanceResult {
    pub fn conforms(&self) -> bool {
        self.on_topic && !self.violated
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct EvalOptions {
    /// Score only the first sentence of each generation.
    pub first_sentence: bool,
}

/// Text up to and including the first sentence-final `.`, `!` or `?`.
pub fn first_sentence(text: &str) -> &str {
    match text.find(['.', '!', '?']) {
        Some(i) => &text[..=i],
        None => text,
    }
}

/// Scores one generation against its instance.
pub fn evaluate_instance<S: Scalar>(
    instance: &InstructionInstance,
    text: &str,
    kb: &KnowledgeBase,
    scorer: Option<&dyn LanguageModel<S>>,
    opts: EvalOptions,
) -> Result<InstanceResult> {
    let text = if opts.first_sentence {
        first_sentence(text)
    } else {
        text
    };
    let words = split_words(text);
    let demos: Vec<&str> = instance
        .demonstrations
        .iter()
        .map(|d| d.text.as_str())
        .collect();
    let ppl = match scorer {
        Some(s) if !words.is_empty() => match perplexity(s, text) {
            Ok(p) => Some(p),
            Err(Error::EmptyText) => None,
            Err(e) => return Err(e),
        },
        _ => None,
    };
    Ok(InstanceResult {
        id: instance.id.clone(),
        kb_kind: instance.kb_kind,
        topic_category: kb.category(&instance.topic.entity)?,
        constraint_category: kb.category(&instance.constraint.entity)?,
        on_topic: kb.on_topic(text, &instance.topic.entity)?,
        violated: kb.violates(text, &instance.constraint.entity)?,
        copy_bleu: if words.is_empty() {
            0.0
        } else {
            copy_bleu(text, &demos)
        },
        rep1: rep_n(&words, 1).ok(),
        rep2: rep_n(&words, 2).ok(),
        ppl,
    })
}

/// Scores every generation. Generations must cover exactly the instance ids,
/// in any order; results follow instance order. Runs on the current rayon
/// pool.
pub fn evaluate_results<S: Scalar>(
    generations: &[GeneratedText],
    instances: &[InstructionInstance],
    kbs: &[KnowledgeBase],
    scorer: Option<&dyn LanguageModel<S>>,
    opts: EvalOptions,
) -> Result<Vec<InstanceResult>> {
    if generations.len() != instances.len() {
        return Err(Error::MisalignedIds(format!(
            "{} generations for {} instances",
            generations.len(),
            instances.len()
        )));
    }
    let mut by_id: HashMap<&str, &str> = HashMap::with_capacity(generations.len());
    for g in generations {
        if by_id.insert(&g.id, &g.text).is_some() {
            return Err(Error::MisalignedIds(format!(
                "duplicate generation id {}",
                g.id
            )));
        }
    }
    let pairs = instances
        .iter()
        .map(|inst| {
            let text = by_id
                .get(inst.id.as_str())
                .ok_or_else(|| Error::MisalignedIds(format!("no generation for {}", inst.id)))?;
            let kb = kbs
                .iter()
                .find(|kb| kb.kind() == inst.kb_kind)
                .ok_or_else(|| {
                    Error::InvalidArgument(format!("no {:?} knowledge base loaded", inst.kb_kind))
                })?;
            Ok((inst, *text, kb))
        })
        .collect::<Result<Vec<_>>>()?;
    pairs
        .into_par_iter()
        .map(|(inst, text, kb)| evaluate_instance(inst, text, kb, scorer, opts))
        .collect()
}

/// Aggregate rates over a group of results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rates {
    pub count: usize,
    pub ic: f64,
    pub on_topic: f64,
    pub violation: f64,
}

impl Rates {
    pub fn of<'a>(results: impl IntoIterator<Item = &'a InstanceResult>) -> Self {
        let (mut n, mut ic, mut on, mut vi) = (0usize, 0usize, 0usize, 0usize);
        for r in results {
            n += 1;
            ic += usize::from(r.conforms());
            on += usize::from(r.on_topic);
            vi += usize::from(r.violated);
        }
        let rate = |k: usize| if n == 0 { 0.0 } else { k as f64 / n as f64 };
        Self {
            count: n,
            ic: rate(ic),
            on_topic: rate(on),
            violation: rate(vi),
        }
    }
}

/// One row of the per-category breakdown.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryRow {
    pub kb_kind: KbKind,
    /// `topic` or `constraint`: which side of the instance the category
    /// was read from.
    pub side: String,
    pub category: String,
    #[serde(flatten)]
    pub rates: Rates,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    #[serde(flatten)]
    pub overall: Rates,
    pub copy_bleu: f64,
    pub rep1: Option<f64>,
    pub rep2: Option<f64>,
    pub ppl: Option<f64>,
    pub categories: Vec<CategoryRow>,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

impl EvalReport {
    pub fn from_results(results: &[InstanceResult]) -> Result<Self> {
        if results.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let mut groups: BTreeMap<(String, &str, &str), Vec<&InstanceResult>> = BTreeMap::new();
        for r in results {
            let kind = format!("{:?}", r.kb_kind);
            groups
                .entry((kind.clone(), "topic", &r.topic_category))
                .or_default()
                .push(r);
            if r.kb_kind == KbKind::Property {
                groups
                    .entry((kind, "constraint", &r.constraint_category))
                    .or_default()
                    .push(r);
            }
        }
        let categories = groups
            .into_iter()
            .map(|((_, side, category), rs)| CategoryRow {
                kb_kind: rs[0].kb_kind,
                side: side.to_string(),
                category: category.to_string(),
                rates: Rates::of(rs.iter().copied()),
            })
            .collect();
        Ok(Self {
            overall: Rates::of(results),
            copy_bleu: mean(results.iter().map(|r| r.copy_bleu)).unwrap_or(0.0),
            rep1: mean(results.iter().filter_map(|r| r.rep1)),
            rep2: mean(results.iter().filter_map(|r| r.rep2)),
            ppl: mean(results.iter().filter_map(|r| r.ppl)),
            categories,
        })
    }
}

/// Scores a dataset and aggregates the results.
pub fn evaluate_dataset<S: Scalar>(
    generations: &[GeneratedText],
    instances: &[InstructionInstance],
    kbs: &[KnowledgeBase],
    scorer: Option<&dyn LanguageModel<S>>,
    opts: EvalOptions,
) -> Result<(Vec<InstanceResult>, EvalReport)> {
    let results = evaluate_results(generations, instances, kbs, scorer, opts)?;
    let report = EvalReport::from_results(&results)?;
    Ok((results, report))
}
