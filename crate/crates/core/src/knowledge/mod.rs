//! Knowledge bases and the surface-level topic / constraint checkers.
//!
//! Sign convention: [`KnowledgeBase::violates`] is true when a forbidden
//! entity is mentioned (bad). Conformance is its negation, and an instance
//! counts towards instruction conformance when it is on topic and does not
//! violate.

mod hierarchy;
mod mention;
mod property;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use hierarchy::{HierarchyKb, Node};
pub use mention::{mention_match, NormalizedText};
pub use property::{Property, PropertyKb, PropertyPair, MIN_NAMES_PER_PAIR};

/// A topic or constraint entity.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EntityRef {
    /// A node of the hierarchy, by id.
    Node { id: String },
    /// A (property, value) pair of the property KB.
    Pair { property: Property, value: String },
}

impl EntityRef {
    pub fn node(id: impl Into<String>) -> Self {
        EntityRef::Node { id: id.into() }
    }

    pub fn pair(property: Property, value: impl Into<String>) -> Self {
        EntityRef::Pair {
            property,
            value: value.into(),
        }
    }
}

impl fmt::Display for EntityRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EntityRef::Node { id } => write!(f, "node:{id}"),
            EntityRef::Pair { property, value } => write!(f, "{property}={value}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KbKind {
    Hierarchy,
    Property,
}

/// Either knowledge base behind one interface.
#[derive(Debug, Clone)]
pub enum KnowledgeBase {
    Hierarchy(HierarchyKb),
    Property(PropertyKb),
}

impl KnowledgeBase {
    pub fn kind(&self) -> KbKind {
        match self {
            KnowledgeBase::Hierarchy(_) => KbKind::Hierarchy,
            KnowledgeBase::Property(_) => KbKind::Property,
        }
    }

    /// Surface strings whose mention makes a text "about" the entity:
    /// `leafs(e)` for hierarchy nodes, the name set for property pairs.
    pub fn surface_forms(&self, entity: &EntityRef) -> Result<BTreeSet<String>> {
        match (self, entity) {
            (KnowledgeBase::Hierarchy(kb), EntityRef::Node { id }) => kb
                .leafs(id)
                .map_err(|_| Error::UnknownEntity(entity.to_string())),
            (KnowledgeBase::Property(kb), EntityRef::Pair { property, value }) => kb
                .name_set(*property, value)
                .map_err(|_| Error::UnknownEntity(entity.to_string())),
            _ => Err(Error::UnknownEntity(entity.to_string())),
        }
    }

    /// Name used when verbalizing the entity in instructions and queries.
    pub fn display_name(&self, entity: &EntityRef) -> Result<String> {
        match (self, entity) {
            (KnowledgeBase::Hierarchy(kb), EntityRef::Node { id }) => kb
                .index(id)
                .map(|i| kb.node(i).name.clone())
                .map_err(|_| Error::UnknownEntity(entity.to_string())),
            (KnowledgeBase::Property(kb), EntityRef::Pair { property, value }) => {
                let i = kb.pair_index(*property, value)?;
                Ok(kb.pair(i).display_name())
            }
            _ => Err(Error::UnknownEntity(entity.to_string())),
        }
    }

    /// Breakdown category: the root name for hierarchy nodes, the property
    /// for pairs.
    pub fn category(&self, entity: &EntityRef) -> Result<String> {
        match (self, entity) {
            (KnowledgeBase::Hierarchy(kb), EntityRef::Node { id }) => {
                let i = kb
                    .index(id)
                    .map_err(|_| Error::UnknownEntity(entity.to_string()))?;
                Ok(kb.node(kb.root_of(i)).name.clone())
            }
            (KnowledgeBase::Property(_), EntityRef::Pair { property, .. }) => {
                self.surface_forms(entity)?;
                Ok(property.to_string())
            }
            _ => Err(Error::UnknownEntity(entity.to_string())),
        }
    }

    /// True iff any surface form of `constraint` is mentioned in `text`.
    pub fn violates(&self, text: &str, constraint: &EntityRef) -> Result<bool> {
        let forms = self.surface_forms(constraint)?;
        Ok(any_mentioned(&forms, &NormalizedText::new(text)))
    }

    /// True iff any surface form of `topic` is mentioned in `text`.
    pub fn on_topic(&self, text: &str, topic: &EntityRef) -> Result<bool> {
        let forms = self.surface_forms(topic)?;
        Ok(any_mentioned(&forms, &NormalizedText::new(text)))
    }
}

fn any_mentioned(forms: &BTreeSet<String>, text: &NormalizedText) -> bool {
    forms.iter().any(|s| text.mentions(s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn violates_on_constraint_leaf() {
        let kb = KnowledgeBase::Hierarchy(fixtures::hierarchy());
        let wine = EntityRef::node("wine");
        assert!(kb.violates("a glass of merlot please", &wine).unwrap());
        assert!(!kb.violates("a glass of water please", &wine).unwrap());
    }

    #[test]
    fn safety_car_is_on_topic_for_motor_vehicle() {
        let kb = KnowledgeBase::Hierarchy(fixtures::hierarchy());
        let mv = EntityRef::node("motor_vehicle");
        assert!(kb
            .on_topic("behind a safety car, or a pace car", &mv)
            .unwrap());
        assert!(!kb.on_topic("", &mv).unwrap());
        let car = EntityRef::node("car");
        assert!(!kb.violates("behind a safety car", &car).unwrap());
    }

    #[test]
    fn property_checkers_use_name_sets() {
        let kb = KnowledgeBase::Property(fixtures::property());
        let uk = EntityRef::pair(Property::Citizenship, "United Kingdom");
        assert!(kb.on_topic("Winston Churchill gave a speech", &uk).unwrap());
        let politician = EntityRef::pair(Property::Occupation, "politician");
        assert!(kb.violates("winston churchill", &politician).unwrap());
        assert!(!kb.violates("Isaac Newton", &politician).unwrap());
    }

    #[test]
    fn mismatched_kind_is_unknown_entity() {
        let kb = KnowledgeBase::Property(fixtures::property());
        assert!(matches!(
            kb.violates("x", &EntityRef::node("wine")),
            Err(Error::UnknownEntity(_))
        ));
    }

    #[test]
    fn entity_json_shape() {
        let e = EntityRef::pair(Property::Citizenship, "United Kingdom");
        let s = serde_json::to_string(&e).unwrap();
        assert_eq!(
            s,
            r#"{"kind":"pair","property":"citizenship","value":"United Kingdom"}"#
        );
        let n: EntityRef = serde_json::from_str(r#"{"kind":"node","id":"wine"}"#).unwrap();
        assert_eq!(n, EntityRef::node("wine"));
    }
}
