use std::collections::{BTreeMap, BTreeSet};

use crate::error::Result;
use crate::model::{LanguageModel, TokenId};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Default)]
struct TrieNode {
    children: BTreeMap<TokenId, usize>,
    terminal: bool,
}

/// Token-sequence trie over guidance example phrases.
#[derive(Debug, Clone)]
pub struct GuidanceTrie {
    nodes: Vec<TrieNode>,
}

const ROOT: usize = 0;

impl Default for GuidanceTrie {
    fn default() -> Self {
        Self {
            nodes: vec![TrieNode::default()],
        }
    }
}

impl GuidanceTrie {
    /// Builds a trie whose root-to-terminal paths are exactly the given
    /// nonempty sequences.
    pub fn from_sequences<I, T>(sequences: I) -> Self
    where
        I: IntoIterator<Item = T>,
        T: AsRef<[TokenId]>,
    {
        let mut trie = Self::default();
        for seq in sequences {
            trie.insert(seq.as_ref());
        }
        trie
    }

    /// Tokenizes each example with `model` and builds the trie. Examples
    /// that tokenize to nothing or contain the unknown token are skipped.
    pub fn from_examples<S: Scalar, E: AsRef<str>>(
        examples: &[E],
        model: &dyn LanguageModel<S>,
    ) -> Result<Self> {
        let unk = model.unk_id();
        let mut seqs = Vec::with_capacity(examples.len());
        for e in examples {
            let ids = model.tokenize(e.as_ref())?;
            if !ids.is_empty() && unk.is_none_or(|u| !ids.contains(&u)) {
                seqs.push(ids);
            }
        }
        Ok(Self::from_sequences(seqs))
    }

    pub fn insert(&mut self, seq: &[TokenId]) {
        if seq.is_empty() {
            return;
        }
        let mut cur = ROOT;
        for &tok in seq {
            cur = match self.nodes[cur].children.get(&tok) {
                Some(&next) => next,
                None => {
                    let next = self.nodes.len();
                    self.nodes.push(TrieNode::default());
                    self.nodes[cur].children.insert(tok, next);
                    next
                }
            };
        }
        self.nodes[cur].terminal = true;
    }

    /// Whether `seq` is exactly one of the inserted sequences.
    pub fn contains(&self, seq: &[TokenId]) -> bool {
        !seq.is_empty() && self.walk(seq).is_some_and(|n| self.nodes[n].terminal)
    }

    fn walk(&self, seq: &[TokenId]) -> Option<usize> {
        seq.iter()
            .try_fold(ROOT, |cur, tok| self.nodes[cur].children.get(tok).copied())
    }

    pub fn is_empty(&self) -> bool {
        self.nodes[ROOT].children.is_empty()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn root_children(&self) -> BTreeSet<TokenId> {
        self.nodes[ROOT].children.keys().copied().collect()
    }

    /// Every distinct token anywhere in the trie (the bag-of-tokens view).
    pub fn all_tokens(&self) -> BTreeSet<TokenId> {
        self.nodes
            .iter()
            .flat_map(|n| n.children.keys().copied())
            .collect()
    }

    /// All root-to-terminal sequences, in token order.
    pub fn sequences(&self) -> Vec<Vec<TokenId>> {
        let mut out = Vec::new();
        let mut stack = vec![(ROOT, Vec::new())];
        while let Some((n, path)) = stack.pop() {
            if self.nodes[n].terminal {
                out.push(path.clone());
            }
            for (&tok, &child) in self.nodes[n].children.iter().rev() {
                let mut p = path.clone();
                p.push(tok);
                stack.push((child, p));
            }
        }
        out
    }

    pub fn cursor(&self) -> TrieCursor<'_> {
        TrieCursor {
            trie: self,
            node: ROOT,
            resets: 0,
        }
    }
}

/// Tracks guidance progress through a trie across decoding steps.
#[derive(Debug, Clone)]
pub struct TrieCursor<'a> {
    trie: &'a GuidanceTrie,
    node: usize,
    resets: usize,
}

/// What a cursor step did.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CursorMove {
    Start,
    Descend,
    /// Completed an example (terminal node without children).
    Complete,
    /// The token left the trie.
    Reset,
}

impl<'a> TrieCursor<'a> {
    pub fn at_root(&self) -> bool {
        self.node == ROOT
    }

    /// Number of times a mismatch sent the cursor back to the root.
    pub fn resets(&self) -> usize {
        self.resets
    }

    /// Advances with the last emitted token and returns the tokens allowed
    /// next. A child of the current node descends and yields the new node's
    /// children; reaching a childless node, or any token that is not a
    /// child, goes back to the root and yields the root's children. `None`
    /// (sequence start) yields the root's children.
    pub fn step(&mut self, last: Option<TokenId>) -> (BTreeSet<TokenId>, CursorMove) {
        let mv = match last {
            None => {
                self.node = ROOT;
                CursorMove::Start
            }
            Some(tok) => match self.trie.nodes[self.node].children.get(&tok) {
                Some(&child) if !self.trie.nodes[child].children.is_empty() => {
                    self.node = child;
                    CursorMove::Descend
                }
                Some(_) => {
                    self.node = ROOT;
                    CursorMove::Complete
                }
                None => {
                    if self.node != ROOT {
                        self.resets += 1;
                    }
                    self.node = ROOT;
                    CursorMove::Reset
                }
            },
        };
        (
            self.trie.nodes[self.node]
                .children
                .keys()
                .copied()
                .collect(),
            mv,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // merlot=1 cabernet=2 pinot=3 noir=4 gris=5
    fn wine() -> GuidanceTrie {
        GuidanceTrie::from_sequences([vec![1], vec![2], vec![3, 4], vec![3, 5]])
    }

    fn set(ids: &[TokenId]) -> BTreeSet<TokenId> {
        ids.iter().copied().collect()
    }

    #[test]
    fn wine_trie_shape() {
        let t = wine();
        assert_eq!(t.root_children(), set(&[1, 2, 3]));
        let mut c = t.cursor();
        assert_eq!(c.step(None).0, set(&[1, 2, 3]));
        assert_eq!(c.step(Some(3)), (set(&[4, 5]), CursorMove::Descend));
        assert_eq!(c.step(Some(4)), (set(&[1, 2, 3]), CursorMove::Complete));
    }

    #[test]
    fn mismatch_resets_to_root() {
        let t = wine();
        let mut c = t.cursor();
        c.step(Some(3));
        assert_eq!(c.step(Some(9)), (set(&[1, 2, 3]), CursorMove::Reset));
        assert_eq!(c.resets(), 1);
        assert!(c.at_root());
        // A miss at the root is not counted as a reset.
        c.step(Some(9));
        assert_eq!(c.resets(), 1);
    }

    #[test]
    fn single_token_example() {
        let t = GuidanceTrie::from_sequences([vec![7]]);
        assert_eq!(t.root_children(), set(&[7]));
        assert!(t.contains(&[7]));
        assert_eq!(t.node_count(), 2);
    }

    #[test]
    fn empty_trie_guides_nothing() {
        let t = GuidanceTrie::from_sequences(Vec::<Vec<TokenId>>::new());
        let mut c = t.cursor();
        assert!(c.step(None).0.is_empty());
        assert!(c.step(Some(1)).0.is_empty());
        assert!(t.is_empty());
    }

    #[test]
    fn prefix_example_is_terminal_with_children() {
        let t = GuidanceTrie::from_sequences([vec![3], vec![3, 4]]);
        assert!(t.contains(&[3]));
        assert!(t.contains(&[3, 4]));
        assert!(!t.contains(&[4]));
        let mut c = t.cursor();
        assert_eq!(c.step(Some(3)).0, set(&[4]));
    }

    #[test]
    fn sequences_roundtrip() {
        let mut seqs = vec![vec![1], vec![2], vec![3, 4], vec![3, 5]];
        let mut got = wine().sequences();
        seqs.sort();
        got.sort();
        assert_eq!(got, seqs);
    }
}
