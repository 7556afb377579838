//! In-repo fixture data: both knowledge bases, the 35 instruction templates,
//! and a deterministic generation model over their vocabulary.

use std::collections::BTreeSet;

use crate::benchmark::{parse_templates, Template};
use crate::guidance::{QueryTemplate, STOPWORDS};
use crate::knowledge::{HierarchyKb, KnowledgeBase, PropertyKb};
use crate::model::{normalize_weights, TableModel, TokenId, Vocabulary};
use crate::scalar::Scalar;
use crate::text::split_words;

pub const HIERARCHY_KB: &str = include_str!("../data/hierarchy.kb");
pub const PROPERTY_KB: &str = include_str!("../data/property.kb");
pub const TEMPLATES: &str = include_str!("../data/templates.txt");

pub fn hierarchy() -> HierarchyKb {
    HierarchyKb::parse(HIERARCHY_KB, "fixtures/hierarchy.kb").expect("fixture hierarchy parses")
}

pub fn property() -> PropertyKb {
    PropertyKb::parse(PROPERTY_KB, "fixtures/property.kb").expect("fixture property KB parses")
}

pub fn templates() -> Vec<Template> {
    parse_templates(TEMPLATES, "fixtures/templates.txt").expect("fixture templates parse")
}

/// Every surface form in a knowledge base: node names and leaf texts, or
/// pair display names, person names and texts.
fn kb_texts(kb: &KnowledgeBase) -> Vec<String> {
    match kb {
        KnowledgeBase::Hierarchy(h) => h
            .nodes()
            .iter()
            .enumerate()
            .flat_map(|(i, n)| [Some(n.name.clone()), h.leaf_text(i).map(str::to_string)])
            .flatten()
            .collect(),
        KnowledgeBase::Property(p) => {
            let mut out = Vec::new();
            for pair in p.pairs() {
                out.push(pair.display_name());
                for n in &pair.names {
                    out.push(n.clone());
                    out.extend(p.person_text(n).map(str::to_string));
                }
            }
            out
        }
    }
}

/// Word vocabulary covering both fixture KBs, the templates, the guidance
/// queries, the stopword list and a few list-formatting tokens.
pub fn vocabulary() -> Vocabulary {
    let kbs = [
        KnowledgeBase::Hierarchy(hierarchy()),
        KnowledgeBase::Property(property()),
    ];
    let mut texts: Vec<String> = kbs.iter().flat_map(kb_texts).collect();
    for t in templates() {
        texts.push(t.topic_pattern.replace("[topic]", ""));
        texts.push(t.constraint_pattern.replace("[constraint]", ""));
    }
    texts.push(QueryTemplate::verifier().pattern);
    texts.push(QueryTemplate::example().pattern);
    texts.push("yes no - : , . ?".to_string());
    texts.extend(STOPWORDS.iter().map(|s| s.to_string()));
    let mut words = Vec::new();
    let mut seen = BTreeSet::new();
    for t in &texts {
        for w in split_words(t) {
            if w.starts_with('[') || w.ends_with(']') {
                continue;
            }
            if seen.insert(w.to_string()) {
                words.push(w.to_string());
            }
        }
    }
    Vocabulary::from_words(words)
}

/// Filler tokens the fixture model prefers when nothing else applies.
const FILLER: [(&str, f64); 6] = [
    ("the", 24.0),
    ("and", 12.0),
    ("of", 10.0),
    ("a", 8.0),
    (",", 6.0),
    ("is", 5.0),
];

/// Deterministic generation model over [`vocabulary`].
///
/// The default distribution puts most mass on a handful of filler words and a
/// small, uneven weight on every other token, so unguided greedy decoding
/// rambles without naming entities while a topic boost can still lift any
/// token to the top. For every consecutive word pair inside a multi-word KB
/// name there is a rule that raises the second word after the first, which
/// gives the model some entity knowledge without making it dominate.
pub fn generation_model<S: Scalar>() -> TableModel<S> {
    let vocab = vocabulary();
    let n = vocab.len();
    let unk = vocab.unk();
    let eos = vocab.eos();
    let base: Vec<f64> = (0..n as TokenId)
        .map(|id| {
            if id == unk {
                0.0
            } else if id == eos {
                0.2
            } else {
                1.0 + f64::from((id.wrapping_mul(7919)) % 1000) / 1000.0
            }
        })
        .collect();
    let mut default = base.clone();
    for (w, weight) in FILLER {
        if let Some(id) = vocab.id(w) {
            default[id as usize] = weight;
        }
    }

    let mut follow: std::collections::BTreeMap<TokenId, BTreeSet<TokenId>> = Default::default();
    for kb in [
        KnowledgeBase::Hierarchy(hierarchy()),
        KnowledgeBase::Property(property()),
    ] {
        let names: Vec<String> = match &kb {
            KnowledgeBase::Hierarchy(h) => h.nodes().iter().map(|n| n.name.clone()).collect(),
            KnowledgeBase::Property(p) => p.all_names().into_iter().map(str::to_string).collect(),
        };
        for name in names {
            let ids = vocab.tokenize(&name);
            for w in ids.windows(2) {
                follow.entry(w[0]).or_default().insert(w[1]);
            }
        }
    }

    let dense = |weights: &[f64]| -> Vec<(TokenId, S)> {
        let mut e: Vec<(TokenId, S)> = weights
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0.0)
            .map(|(i, &w)| (i as TokenId, S::lit(w)))
            .collect();
        normalize_weights(&mut e);
        e
    };

    let mut model = TableModel::uniform(vocab);
    model
        .set_default(&dense(&default))
        .expect("default distribution valid");
    for (prev, nexts) in follow {
        let mut w = default.clone();
        for next in nexts {
            w[next as usize] += 30.0;
        }
        model
            .add_rule(vec![prev], &dense(&w))
            .expect("rule distribution valid");
    }
    model
}
