use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::knowledge::{EntityRef, KbKind, KnowledgeBase};

use super::template::Template;

pub const NUM_DEMONSTRATIONS: usize = 3;

/// An entity together with the name it is verbalized by.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NamedEntity {
    #[serde(flatten)]
    pub entity: EntityRef,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Demonstration {
    /// Leaf or person the text describes.
    pub name: String,
    pub text: String,
}

/// How the constraint entity was chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintSource {
    /// Matched in a scorer model's continuation.
    Scorer,
    /// A scorer was configured but its continuation named no candidate.
    Fallback,
    /// No scorer configured.
    Uniform,
}

/// One benchmark example. `rendered` is empty and `template_id` absent until
/// a template is applied.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstructionInstance {
    pub id: String,
    pub kb_kind: KbKind,
    pub topic: NamedEntity,
    pub constraint: NamedEntity,
    pub demonstrations: Vec<Demonstration>,
    pub template_id: Option<u32>,
    pub rendered: String,
    pub constraint_source: ConstraintSource,
}

impl InstructionInstance {
    pub fn render_with(&self, template: &Template) -> Self {
        let demos: Vec<&str> = self
            .demonstrations
            .iter()
            .map(|d| d.text.as_str())
            .collect();
        Self {
            template_id: Some(template.id),
            rendered: template.render(&self.topic.name, &self.constraint.name, &demos),
            ..self.clone()
        }
    }

    /// Checks the structural invariants against the knowledge base: three
    /// demonstrations drawn from the topic, topic distinct from the
    /// constraint, and for hierarchy instances the topic a strict ancestor of
    /// the constraint.
    pub fn validate(&self, kb: &KnowledgeBase) -> Result<()> {
        let bad = |msg: String| {
            Err(Error::InvalidArgument(format!(
                "instance {}: {msg}",
                self.id
            )))
        };
        if self.kb_kind != kb.kind() {
            return bad("knowledge base kind mismatch".into());
        }
        if self.demonstrations.len() != NUM_DEMONSTRATIONS {
            return bad(format!("{} demonstrations", self.demonstrations.len()));
        }
        if self.topic.entity == self.constraint.entity {
            return bad("topic equals constraint".into());
        }
        let topic_forms = kb.surface_forms(&self.topic.entity)?;
        kb.surface_forms(&self.constraint.entity)?;
        if let Some(d) = self
            .demonstrations
            .iter()
            .find(|d| !topic_forms.contains(&d.name))
        {
            return bad(format!("demonstration {:?} is not under the topic", d.name));
        }
        match (kb, &self.topic.entity, &self.constraint.entity) {
            (KnowledgeBase::Hierarchy(h), EntityRef::Node { id: t }, EntityRef::Node { id: c }) => {
                if !h.is_strict_ancestor(h.index(t)?, h.index(c)?) {
                    return bad("topic is not a strict ancestor of the constraint".into());
                }
            }
            (
                KnowledgeBase::Property(_),
                EntityRef::Pair { property: tp, .. },
                EntityRef::Pair { property: cp, .. },
            ) => {
                if tp == cp {
                    return bad("topic and constraint share a property".into());
                }
            }
            _ => return bad("entity kinds do not match the knowledge base".into()),
        }
        Ok(())
    }
}

/// Writes one JSON object per line.
pub fn write_jsonl<T: Serialize, W: Write>(items: &[T], mut out: W) -> Result<()> {
    for item in items {
        serde_json::to_writer(&mut out, item)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_jsonl<T: for<'de> Deserialize<'de>, R: BufRead>(
    input: R,
    origin: &str,
) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line).map_err(|e| Error::parse(origin, i + 1, e.to_string()))?,
        );
    }
    Ok(out)
}

pub fn save_dataset(path: impl AsRef<Path>, instances: &[InstructionInstance]) -> Result<()> {
    let f = std::fs::File::create(path)?;
    write_jsonl(instances, std::io::BufWriter::new(f))
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Vec<InstructionInstance>> {
    let path = path.as_ref();
    let f = std::fs::File::open(path)?;
    read_jsonl(std::io::BufReader::new(f), &path.display().to_string())
}
