//! Instance samplers for both knowledge bases.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

use crate::error::{Error, Result};
use crate::knowledge::{EntityRef, HierarchyKb, KbKind, NormalizedText, PropertyKb};
use crate::model::LanguageModel;
use crate::scalar::Scalar;

use super::instance::{
    ConstraintSource, Demonstration, InstructionInstance, NamedEntity, NUM_DEMONSTRATIONS,
};

/// Tokens of scorer continuation used to pick a tempting constraint.
pub const SCORER_CONTINUATION_TOKENS: usize = 32;

fn scorer_prompt(topic: &str, demos: &[Demonstration]) -> String {
    let mut s = format!("Examples of {topic}:");
    for d in demos {
        s.push_str("\n- ");
        s.push_str(&d.text);
    }
    s.push_str("\n-");
    s
}

fn continuation<S: Scalar>(scorer: &dyn LanguageModel<S>, prompt: &str) -> Result<NormalizedText> {
    let ctx = scorer.tokenize(prompt)?;
    let keep = scorer
        .max_context()
        .saturating_sub(SCORER_CONTINUATION_TOKENS);
    let ctx = &ctx[ctx.len().saturating_sub(keep)..];
    let ids = scorer.greedy_continue(ctx, SCORER_CONTINUATION_TOKENS)?;
    Ok(NormalizedText::new(&scorer.detokenize(&ids)?))
}

/// Samples a hierarchy instance: an internal topic node with at least three
/// leaves, three distinct demonstration leaves under it, and a strict
/// descendant as constraint. With a scorer, the constraint is the descendant
/// mentioned earliest in the scorer's continuation of the demonstrations;
/// otherwise (or if none is mentioned) a uniform descendant.
pub fn sample_hierarchy_instance<S: Scalar, R: Rng + ?Sized>(
    kb: &HierarchyKb,
    scorer: Option<&dyn LanguageModel<S>>,
    rng: &mut R,
) -> Result<InstructionInstance> {
    let eligible: Vec<usize> = (0..kb.len())
        .filter(|&i| !kb.node(i).is_leaf() && kb.leaf_indices(i).len() >= NUM_DEMONSTRATIONS)
        .collect();
    let &topic = eligible
        .choose(rng)
        .ok_or_else(|| Error::KbTooSmall("no internal node with at least three leaves".into()))?;
    let leaves = kb.leaf_indices(topic);
    let demonstrations: Vec<Demonstration> = leaves
        .choose_multiple(rng, NUM_DEMONSTRATIONS)
        .map(|&i| Demonstration {
            name: kb.node(i).name.clone(),
            text: kb.leaf_text(i).unwrap_or_default().to_string(),
        })
        .collect();
    let descendants = kb.descendants(topic);

    let topic_name = kb.node(topic).name.clone();
    let (constraint, source) = match scorer {
        Some(model) => {
            let text = continuation(model, &scorer_prompt(&topic_name, &demonstrations))?;
            let best = descendants
                .iter()
                .filter_map(|&d| text.find_mention(&kb.node(d).name).map(|pos| (pos, d)))
                .min_by_key(|&(pos, d)| (pos, std::cmp::Reverse(kb.node(d).name.len())));
            match best {
                Some((_, d)) => (d, ConstraintSource::Scorer),
                None => (
                    *descendants.choose(rng).expect("internal node"),
                    ConstraintSource::Fallback,
                ),
            }
        }
        None => (
            *descendants.choose(rng).expect("internal node"),
            ConstraintSource::Uniform,
        ),
    };

    Ok(InstructionInstance {
        id: String::new(),
        kb_kind: KbKind::Hierarchy,
        topic: NamedEntity {
            entity: EntityRef::node(&kb.node(topic).id),
            name: topic_name,
        },
        constraint: NamedEntity {
            entity: EntityRef::node(&kb.node(constraint).id),
            name: kb.node(constraint).name.clone(),
        },
        demonstrations,
        template_id: None,
        rendered: String::new(),
        constraint_source: source,
    })
}

/// Samples a property instance: a topic pair, three names from its set, and
/// a constraint pair of a different property. With a scorer, the constraint
/// is the cross-property pair with the most names mentioned in the scorer's
/// continuation; otherwise (or if none is mentioned) a uniform choice among
/// cross-property pairs sharing a name with the topic.
pub fn sample_property_instance<S: Scalar, R: Rng + ?Sized>(
    kb: &PropertyKb,
    scorer: Option<&dyn LanguageModel<S>>,
    rng: &mut R,
) -> Result<InstructionInstance> {
    let overlapping = |t: usize| -> Vec<usize> {
        let tp = kb.pair(t);
        (0..kb.len())
            .filter(|&c| {
                let cp = kb.pair(c);
                cp.property != tp.property && cp.names.iter().any(|n| tp.names.contains(n))
            })
            .collect()
    };
    let eligible: Vec<usize> = (0..kb.len())
        .filter(|&t| kb.pair(t).names.len() >= NUM_DEMONSTRATIONS && !overlapping(t).is_empty())
        .collect();
    let &topic = eligible.choose(rng).ok_or_else(|| {
        Error::KbTooSmall("no pair has a cross-property pair sharing a name".into())
    })?;
    let tp = kb.pair(topic);
    let demonstrations: Vec<Demonstration> = tp
        .names
        .choose_multiple(rng, NUM_DEMONSTRATIONS)
        .map(|n| Demonstration {
            name: n.clone(),
            text: kb.person_text(n).unwrap_or_default().to_string(),
        })
        .collect();
    let tempting = overlapping(topic);

    let (constraint, source) = match scorer {
        Some(model) => {
            let text = continuation(model, &scorer_prompt(&tp.display_name(), &demonstrations))?;
            let best = (0..kb.len())
                .filter(|&c| kb.pair(c).property != tp.property)
                .map(|c| {
                    let hits = kb.pair(c).names.iter().filter(|n| text.mentions(n)).count();
                    (hits, c)
                })
                .filter(|&(hits, _)| hits > 0)
                .max_by_key(|&(hits, c)| (hits, std::cmp::Reverse(c)));
            match best {
                Some((_, c)) => (c, ConstraintSource::Scorer),
                None => (
                    *tempting.choose(rng).expect("eligible topic"),
                    ConstraintSource::Fallback,
                ),
            }
        }
        None => (
            *tempting.choose(rng).expect("eligible topic"),
            ConstraintSource::Uniform,
        ),
    };
    let cp = kb.pair(constraint);

    Ok(InstructionInstance {
        id: String::new(),
        kb_kind: KbKind::Property,
        topic: NamedEntity {
            entity: EntityRef::pair(tp.property, &tp.value),
            name: tp.display_name(),
        },
        constraint: NamedEntity {
            entity: EntityRef::pair(cp.property, &cp.value),
            name: cp.display_name(),
        },
        demonstrations,
        template_id: None,
        rendered: String::new(),
        constraint_source: source,
    })
}

/// Shuffles a copy of `items` with `rng`.
pub(crate) fn shuffled<T: Clone, R: Rng + ?Sized>(items: &[T], rng: &mut R) -> Vec<T> {
    let mut v = items.to_vec();
    v.shuffle(rng);
    v
}
