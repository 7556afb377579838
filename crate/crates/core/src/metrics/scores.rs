use std::collections::{HashMap, HashSet};

use crate::error::{Error, Result};
use crate::model::LanguageModel;
use crate::scalar::Scalar;
use crate::text::split_words;

pub const MAX_BLEU_ORDER: usize = 4;

/// Fraction of `(on_topic, violated)` pairs that are on topic and not
/// violated.
pub fn instruction_conformance(results: &[(bool, bool)]) -> Result<f64> {
    if results.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let hits = results.iter().filter(|(t, v)| *t && !*v).count();
    Ok(hits as f64 / results.len() as f64)
}

fn ngram_counts<'a>(words: &'a [&'a str], n: usize) -> HashMap<&'a [&'a str], usize> {
    let mut out: HashMap<&[&str], usize> = HashMap::new();
    for g in words.windows(n) {
        *out.entry(g).or_default() += 1;
    }
    out
}

/// Sentence BLEU of `candidate` against one reference, over word tokens.
///
/// Clipped n-gram precisions for n = 1..=4; orders 2-4 add one to both
/// matches and totals while unigrams are unsmoothed, so a candidate sharing
/// no word with the reference scores 0. Brevity penalty `exp(1 - r/c)` when
/// the candidate is shorter than the reference.
pub fn sentence_bleu(candidate: &str, reference: &str) -> f64 {
    let c = split_words(candidate);
    let r = split_words(reference);
    if c.is_empty() || r.is_empty() {
        return 0.0;
    }
    let mut log_sum = 0.0;
    for n in 1..=MAX_BLEU_ORDER {
        let cand = ngram_counts(&c, n);
        let refc = ngram_counts(&r, n);
        let total: usize = cand.values().sum();
        let matched: usize = cand
            .iter()
            .map(|(g, &k)| k.min(refc.get(g).copied().unwrap_or(0)))
            .sum();
        let p = if n == 1 {
            matched as f64 / total as f64
        } else {
            (matched + 1) as f64 / (total + 1) as f64
        };
        if p == 0.0 {
            return 0.0;
        }
        log_sum += p.ln();
    }
    let (cl, rl) = (c.len() as f64, r.len() as f64);
    let bp = if cl < rl { (1.0 - rl / cl).exp() } else { 1.0 };
    bp * (log_sum / MAX_BLEU_ORDER as f64).exp()
}

/// Highest sentence BLEU between `generation` and any demonstration.
pub fn copy_bleu<D: AsRef<str>>(generation: &str, demonstrations: &[D]) -> f64 {
    demonstrations
        .iter()
        .map(|d| sentence_bleu(generation, d.as_ref()))
        .fold(0.0, f64::max)
}

/// `1 - unique / total` over the n-grams of `tokens`.
pub fn rep_n<T: Eq + std::hash::Hash>(tokens: &[T], n: usize) -> Result<f64> {
    if n == 0 || tokens.len() < n {
        return Err(Error::TooShort {
            len: tokens.len(),
            n,
        });
    }
    let total = tokens.len() - n + 1;
    let unique: HashSet<&[T]> = tokens.windows(n).collect();
    Ok(1.0 - unique.len() as f64 / total as f64)
}

/// `exp(-mean log p)` of `text` under `scorer`. Text beyond the scorer's
/// context window is cut off.
pub fn perplexity<S: Scalar>(scorer: &dyn LanguageModel<S>, text: &str) -> Result<f64> {
    let mut ids = scorer.tokenize(text)?;
    if ids.is_empty() {
        return Err(Error::EmptyText);
    }
    ids.truncate(scorer.max_context());
    let lps = scorer.score_sequence(&ids)?;
    let mean = lps.iter().map(|lp| lp.to_f64_lossy()).sum::<f64>() / lps.len() as f64;
    Ok((-mean).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{TableModel, Vocabulary};

    #[test]
    fn ic_hand_cases() {
        let r = [(true, false), (true, true), (false, false), (true, false)];
        assert_eq!(instruction_conformance(&r).unwrap(), 0.5);
        assert_eq!(instruction_conformance(&[(true, false); 3]).unwrap(), 1.0);
        assert_eq!(
            instruction_conformance(&[(false, false), (false, true)]).unwrap(),
            0.0
        );
        assert!(instruction_conformance(&[]).is_err());
    }

    #[test]
    fn bleu_hand_computed() {
        // p1 = 3/4, p2 = (1+1)/(3+1), p3 = (0+1)/(2+1), p4 = (0+1)/(1+1).
        let want = (0.75f64 * 0.5 * (1.0 / 3.0) * 0.5).powf(0.25);
        assert!((sentence_bleu("a b c d", "a b x c") - want).abs() < 1e-12);
        assert_eq!(copy_bleu("the cat sat", &["x", "the cat sat"]), 1.0);
        assert_eq!(copy_bleu("the cat sat", &["a dog ran"]), 0.0);
    }

    #[test]
    fn bleu_brevity_penalty() {
        let got = sentence_bleu("a b", "a b c d");
        let want = (1.0f64 - 2.0).exp();
        assert!((got - want).abs() < 1e-12);
    }

    #[test]
    fn rep_hand_counts() {
        assert_eq!(rep_n(&["a", "a", "a", "a"], 1).unwrap(), 0.75);
        assert_eq!(rep_n(&["a", "b", "a", "b", "a"], 2).unwrap(), 0.5);
        assert_eq!(rep_n(&[1, 2, 3], 2).unwrap(), 0.0);
        assert!(rep_n(&[1], 2).is_err());
    }

    #[test]
    fn uniform_perplexity_is_vocab_size() {
        let m = TableModel::<f64>::uniform(Vocabulary::from_words(["a", "b"]));
        let ppl = perplexity(&m, "a b a a b").unwrap();
        assert!((ppl - 4.0).abs() < 1e-9);
        assert!(matches!(perplexity(&m, " "), Err(Error::EmptyText)));
    }
}
