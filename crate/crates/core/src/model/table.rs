use std::collections::HashMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::{
    vocab_tokenizer, LanguageModel, LogitVector, TokenId, Vocabulary, DEFAULT_MAX_CONTEXT,
};

const SUM_TOLERANCE: f64 = 1e-9;

/// One context-suffix rule of a [`TableModel`].
#[derive(Debug, Clone)]
pub struct TableRule<S> {
    pub suffix: Vec<TokenId>,
    pub probs: Vec<S>,
}

/// Deterministic lookup-table language model.
///
/// The next-token distribution for a context is the one stored under the
/// longest rule suffix that matches the end of the context, or the default
/// distribution when no rule matches.
#[derive(Debug, Clone)]
pub struct TableModel<S> {
    vocab: Vocabulary,
    rules: Vec<TableRule<S>>,
    by_last: HashMap<TokenId, Vec<usize>>,
    default: Vec<S>,
    max_context: usize,
}

impl<S: Scalar> TableModel<S> {
    /// A model whose default is uniform over the vocabulary.
    pub fn uniform(vocab: Vocabulary) -> Self {
        let n = vocab.len();
        let p = S::one() / S::from_usize(n).expect("vocabulary size fits scalar");
        Self {
            vocab,
            rules: Vec::new(),
            by_last: HashMap::new(),
            default: vec![p; n],
            max_context: DEFAULT_MAX_CONTEXT,
        }
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn with_max_context(mut self, max_context: usize) -> Self {
        self.max_context = max_context;
        self
    }

    pub fn set_default(&mut self, entries: &[(TokenId, S)]) -> Result<()> {
        self.default = self.dense(entries, "DEFAULT")?;
        Ok(())
    }

    /// Adds a rule. A later rule with the same suffix replaces the earlier one.
    pub fn add_rule(&mut self, suffix: Vec<TokenId>, entries: &[(TokenId, S)]) -> Result<()> {
        let last = *suffix
            .last()
            .ok_or_else(|| Error::InvalidArgument("rule suffix must be nonempty".into()))?;
        for &id in &suffix {
            self.check_id(id)?;
        }
        let probs = self.dense(entries, "RULE")?;
        let bucket = self.by_last.entry(last).or_default();
        if let Some(&i) = bucket.iter().find(|&&i| self.rules[i].suffix == suffix) {
            self.rules[i].probs = probs;
        } else {
            bucket.push(self.rules.len());
            self.rules.push(TableRule { suffix, probs });
        }
        Ok(())
    }

    pub fn rules(&self) -> &[TableRule<S>] {
        &self.rules
    }

    /// Distribution used for `ctx`.
    pub fn distribution(&self, ctx: &[TokenId]) -> &[S] {
        let Some(last) = ctx.last() else {
            return &self.default;
        };
        let mut best: Option<&TableRule<S>> = None;
        for &i in self.by_last.get(last).into_iter().flatten() {
            let rule = &self.rules[i];
            if ctx.ends_with(&rule.suffix)
                && best.is_none_or(|b| rule.suffix.len() > b.suffix.len())
            {
                best = Some(rule);
            }
        }
        best.map_or(&self.default, |r| &r.probs)
    }

    fn check_id(&self, id: TokenId) -> Result<()> {
        if (id as usize) < self.vocab.len() {
            Ok(())
        } else {
            Err(Error::UnknownTokenId {
                id,
                size: self.vocab.len(),
            })
        }
    }

    fn dense(&self, entries: &[(TokenId, S)], what: &str) -> Result<Vec<S>> {
        let mut probs = vec![S::zero(); self.vocab.len()];
        for &(id, p) in entries {
            self.check_id(id)?;
            if !(p >= S::zero() && p <= S::one()) {
                return Err(Error::InvalidArgument(format!(
                    "{what}: probability {p} out of range"
                )));
            }
            probs[id as usize] = probs[id as usize] + p;
        }
        let total: S = probs.iter().copied().sum();
        if (total - S::one()).abs().to_f64_lossy()
            > SUM_TOLERANCE.max(S::epsilon().to_f64_lossy() * 16.0)
        {
            return Err(Error::InvalidArgument(format!(
                "{what}: distribution sums to {total}, expected 1"
            )));
        }
        Ok(probs)
    }

    /// Parses the rule file format:
    ///
    /// ```text
    /// RULE <suffix tokens...> -> <token>:<prob> ...
    /// DEFAULT -> <token>:<prob> ...
    /// ```
    ///
    /// Blank lines and lines starting with `#` are ignored. Without a
    /// `DEFAULT` line the default distribution is uniform.
    pub fn parse(vocab: Vocabulary, src: &str, origin: &str) -> Result<Self> {
        let mut model = Self::uniform(vocab);
        for (lineno, raw) in src.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: String| Error::parse(origin, lineno + 1, msg);
            let (head, tail) = line
                .split_once("->")
                .ok_or_else(|| err("expected '->'".into()))?;
            let mut entries = Vec::new();
            for item in tail.split_whitespace() {
                let (tok, p) = item
                    .rsplit_once(':')
                    .ok_or_else(|| err(format!("expected token:prob, got {item:?}")))?;
                let id = model
                    .vocab
                    .id(tok)
                    .ok_or_else(|| err(format!("token {tok:?} not in vocabulary")))?;
                let p: f64 = p
                    .parse()
                    .map_err(|_| err(format!("bad probability {p:?}")))?;
                entries.push((id, S::lit(p)));
            }
            let mut head = head.split_whitespace();
            match head.next() {
                Some("DEFAULT") => model
                    .set_default(&entries)
                    .map_err(|e| err(e.to_string()))?,
                Some("RULE") => {
                    let suffix = head
                        .map(|t| {
                            model
                                .vocab
                                .id(t)
                                .ok_or_else(|| err(format!("token {t:?} not in vocabulary")))
                        })
                        .collect::<Result<Vec<_>>>()?;
                    model
                        .add_rule(suffix, &entries)
                        .map_err(|e| err(e.to_string()))?;
                }
                other => return Err(err(format!("unknown directive {other:?}"))),
            }
        }
        Ok(model)
    }

    pub fn load(vocab: Vocabulary, path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let src = std::fs::read_to_string(path)?;
        Self::parse(vocab, &src, &path.display().to_string())
    }
}

/// Scales nonnegative weights to sum to one.
pub fn normalize_weights<S: Scalar>(entries: &mut [(TokenId, S)]) {
    let total: S = entries.iter().map(|e| e.1).sum();
    if total > S::zero() {
        for e in entries.iter_mut() {
            e.1 = e.1 / total;
        }
    }
}

impl<S: Scalar> LanguageModel<S> for TableModel<S> {
    vocab_tokenizer!();

    fn compute_logits(&self, ctx: &[TokenId]) -> Result<LogitVector<S>> {
        Ok(LogitVector::from_probs(self.distribution(ctx)))
    }
}
