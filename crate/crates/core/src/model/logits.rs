use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::TokenId;

/// Pre-softmax scores over the vocabulary, one per token id.
#[derive(Debug, Clone, PartialEq)]
pub struct LogitVector<S> {
    values: Vec<S>,
}

impl<S: Scalar> LogitVector<S> {
    pub fn new(values: Vec<S>) -> Self {
        Self { values }
    }

    /// Builds logits whose softmax is `probs`. Zero probabilities map to
    /// [`ZERO_PROB_LOGIT`] so every entry stays finite.
    pub fn from_probs(probs: &[S]) -> Self {
        let floor = S::lit(ZERO_PROB_LOGIT);
        Self {
            values: probs
                .iter()
                .map(|&p| {
                    if p > S::zero() {
                        p.ln().max(floor)
                    } else {
                        floor
                    }
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [S] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<S> {
        self.values
    }

    pub fn get(&self, id: TokenId) -> Option<S> {
        self.values.get(id as usize).copied()
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.values.iter().position(|v| !v.is_finite()) {
            Some(i) => Err(Error::NonFiniteLogits(i as TokenId)),
            None => Ok(()),
        }
    }

    pub fn softmax(&self) -> Vec<S> {
        softmax(&self.values)
    }

    pub fn log_softmax(&self) -> Vec<S> {
        log_softmax(&self.values)
    }

    /// Index of the largest entry; ties go to the lowest id.
    pub fn argmax(&self) -> Option<TokenId> {
        argmax(&self.values)
    }

    /// Ids of the `k` largest entries in descending score order; ties go to
    /// the lowest id. Returns all ids when `k >= len`.
    pub fn top_k(&self, k: usize) -> Vec<TokenId> {
        let mut order: Vec<TokenId> = (0..self.values.len() as TokenId).collect();
        order.sort_by(|&a, &b| descending(self.values[a as usize], self.values[b as usize], a, b));
        order.truncate(k);
        order
    }
}

/// Logit assigned to tokens with probability exactly zero.
pub const ZERO_PROB_LOGIT: f64 = -1.0e4;

pub(crate) fn descending<S: Scalar>(va: S, vb: S, a: TokenId, b: TokenId) -> Ordering {
    vb.partial_cmp(&va)
        .unwrap_or(Ordering::Equal)
        .then(a.cmp(&b))
}

pub fn argmax<S: Scalar>(values: &[S]) -> Option<TokenId> {
    let mut best: Option<(usize, S)> = None;
    for (i, &v) in values.iter().enumerate() {
        match best {
            Some((_, b)) if v <= b => {}
            _ => best = Some((i, v)),
        }
    }
    best.map(|(i, _)| i as TokenId)
}

pub fn softmax<S: Scalar>(values: &[S]) -> Vec<S> {
    if values.is_empty() {
        return Vec::new();
    }
    let max = values.iter().copied().fold(S::neg_infinity(), S::max);
    let exps: Vec<S> = values.iter().map(|&v| (v - max).exp()).collect();
    let total: S = exps.iter().copied().sum();
    exps.into_iter().map(|e| e / total).collect()
}

pub fn log_softmax<S: Scalar>(values: &[S]) -> Vec<S> {
    if values.is_empty() {
        return Vec::new();
    }
    let max = values.iter().copied().fold(S::neg_infinity(), S::max);
    let log_total = values.iter().map(|&v| (v - max).exp()).sum::<S>().ln() + max;
    values.iter().map(|&v| v - log_total).collect()
}
