use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::TokenId;

/// Which side of the guided step a token set acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Topic,
    Constraint,
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Polarity::Topic => "topic",
            Polarity::Constraint => "constraint",
        })
    }
}

/// Token set boosted (topic) or suppressed (constraint) at one decoding step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GuidanceStep {
    pub ids: BTreeSet<TokenId>,
    pub polarity: Polarity,
}

impl GuidanceStep {
    pub fn empty(polarity: Polarity) -> Self {
        Self {
            ids: BTreeSet::new(),
            polarity,
        }
    }

    /// Builds a step, rejecting ids outside `[0, vocab_size)`.
    pub fn new(
        ids: impl IntoIterator<Item = TokenId>,
        polarity: Polarity,
        vocab_size: usize,
    ) -> Result<Self> {
        let ids: BTreeSet<TokenId> = ids.into_iter().collect();
        if let Some(&bad) = ids.iter().find(|&&id| id as usize >= vocab_size) {
            return Err(Error::UnknownTokenId {
                id: bad,
                size: vocab_size,
            });
        }
        Ok(Self { ids, polarity })
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn contains(&self, id: TokenId) -> bool {
        self.ids.contains(&id)
    }

    /// Copy of this step with `id` removed.
    pub fn without(mut self, id: TokenId) -> Self {
        self.ids.remove(&id);
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_out_of_range() {
        assert!(GuidanceStep::new([0, 4], Polarity::Topic, 4).is_err());
        let s = GuidanceStep::new([3, 1, 3], Polarity::Constraint, 4).unwrap();
        assert_eq!(s.len(), 2);
    }
}
