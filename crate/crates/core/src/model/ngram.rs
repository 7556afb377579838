use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::{
    vocab_tokenizer, LanguageModel, LogitVector, TokenId, Vocabulary, DEFAULT_MAX_CONTEXT,
};

/// Count-based n-gram model with additive smoothing.
///
/// `P(w | h) = (c(h, w) + k) / (c(h) + k * |seen|)` where `h` is the last
/// `min(len, n - 1)` context tokens and `seen` is the set of distinct tokens
/// in the training data. Vocabulary entries never seen in training get zero
/// probability. Contexts never seen in training fall back to the uniform
/// distribution over `seen`, which is what the formula gives with zero counts.
#[derive(Debug, Clone)]
pub struct NGramModel<S> {
    vocab: Vocabulary,
    order: usize,
    smoothing: S,
    /// One table per history length `0..order`.
    counts: Vec<HashMap<Vec<TokenId>, HashMap<TokenId, u64>>>,
    totals: Vec<HashMap<Vec<TokenId>, u64>>,
    seen: Vec<TokenId>,
    max_context: usize,
}

impl<S: Scalar> NGramModel<S> {
    pub fn new(vocab: Vocabulary, order: usize, smoothing: S) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidArgument("n-gram order must be >= 1".into()));
        }
        if smoothing.partial_cmp(&S::zero()) != Some(std::cmp::Ordering::Greater)
            || !smoothing.is_finite()
        {
            return Err(Error::InvalidArgument(
                "additive smoothing must be positive".into(),
            ));
        }
        Ok(Self {
            vocab,
            order,
            smoothing,
            counts: vec![HashMap::new(); order],
            totals: vec![HashMap::new(); order],
            seen: Vec::new(),
            max_context: DEFAULT_MAX_CONTEXT,
        })
    }

    /// Counts every n-gram (for all history lengths below the order) in each
    /// sequence. Sequences are counted as given; callers append eos if they
    /// want end-of-sequence modeled.
    pub fn fit<I, T>(mut self, sequences: I) -> Result<Self>
    where
        I: IntoIterator<Item = T>,
        T: AsRef<[TokenId]>,
    {
        let size = self.vocab.len();
        let mut seen: BTreeSet<TokenId> = self.seen.iter().copied().collect();
        for seq in sequences {
            let seq = seq.as_ref();
            if let Some(&id) = seq.iter().find(|&&id| id as usize >= size) {
                return Err(Error::UnknownTokenId { id, size });
            }
            for (j, &w) in seq.iter().enumerate() {
                seen.insert(w);
                for h in 0..self.order.min(j + 1) {
                    let history = seq[j - h..j].to_vec();
                    *self.counts[h]
                        .entry(history.clone())
                        .or_default()
                        .entry(w)
                        .or_default() += 1;
                    *self.totals[h].entry(history).or_default() += 1;
                }
            }
        }
        self.seen = seen.into_iter().collect();
        Ok(self)
    }

    /// Trains on lines of text, appending eos to each line.
    pub fn fit_text(self, corpus: &str) -> Result<Self> {
        let eos = self.vocab.eos();
        let seqs: Vec<Vec<TokenId>> = corpus
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                let mut ids = self.vocab.tokenize(l);
                ids.push(eos);
                ids
            })
            .collect();
        self.fit(seqs)
    }

    pub fn with_max_context(mut self, max_context: usize) -> Self {
        self.max_context = max_context;
        self
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn seen_tokens(&self) -> &[TokenId] {
        &self.seen
    }

    /// Conditional probability of `next` after `ctx`.
    pub fn prob(&self, ctx: &[TokenId], next: TokenId) -> S {
        self.distribution(ctx)[next as usize]
    }

    pub fn distribution(&self, ctx: &[TokenId]) -> Vec<S> {
        let n = self.vocab.len();
        if self.seen.is_empty() {
            let p = S::one() / S::from_usize(n).expect("size fits scalar");
            return vec![p; n];
        }
        let h = ctx.len().min(self.order - 1);
        let history = &ctx[ctx.len() - h..];
        let counts = self.counts[h].get(history);
        let total = self.totals[h].get(history).copied().unwrap_or(0);
        let k = self.smoothing;
        let denom = S::from_u64(total).expect("count fits scalar")
            + k * S::from_usize(self.seen.len()).expect("size fits scalar");
        let mut probs = vec![S::zero(); n];
        for &w in &self.seen {
            let c = counts.and_then(|m| m.get(&w)).copied().unwrap_or(0);
            probs[w as usize] = (S::from_u64(c).expect("count fits scalar") + k) / denom;
        }
        probs
    }
}

impl<S: Scalar> LanguageModel<S> for NGramModel<S> {
    vocab_tokenizer!();

    fn compute_logits(&self, ctx: &[TokenId]) -> Result<LogitVector<S>> {
        Ok(LogitVector::from_probs(&self.distribution(ctx)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn abab() -> NGramModel<f64> {
        let vocab = Vocabulary::from_words(["a", "b"]);
        let seq = vocab.tokenize("a b a b");
        NGramModel::new(vocab, 2, 1.0).unwrap().fit([seq]).unwrap()
    }

    #[test]
    fn bigram_add_one_hand_count() {
        // c(a,b) = 2, c(a) = 2, two distinct tokens seen: (2 + 1) / (2 + 2) = 0.75
        let m = abab();
        let a = m.vocab().id("a").unwrap();
        let b = m.vocab().id("b").unwrap();
        assert!((m.prob(&[a], b) - 0.75).abs() < 1e-12);
        assert!((m.prob(&[a], a) - 0.25).abs() < 1e-12);
        let p = m.next_logits(&[a]).unwrap().softmax();
        assert!((p[b as usize] - 0.75).abs() < 1e-9);
    }

    #[test]
    fn distributions_sum_to_one() {
        let m = abab();
        let b = m.vocab().id("b").unwrap();
        for ctx in [vec![], vec![b], vec![b, b, b]] {
            let s: f64 = m.distribution(&ctx).iter().sum();
            assert!((s - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn seen_probabilities_in_unit_interval() {
        let m = abab();
        for &w in m.seen_tokens() {
            let p = m.prob(&[], w);
            assert!(p > 0.0 && p <= 1.0);
        }
    }

    #[test]
    fn rejects_bad_params() {
        let v = Vocabulary::from_words(["a"]);
        assert!(NGramModel::<f64>::new(v.clone(), 0, 1.0).is_err());
        assert!(NGramModel::<f64>::new(v, 2, 0.0).is_err());
    }
}
