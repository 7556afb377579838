//! Uniform interface over autoregressive language models.
//!
//! Implementors provide tokenization and raw next-token logits; context
//! validation, greedy continuation, sampling and sequence scoring are shared
//! default methods.

mod logits;
mod ngram;
mod remote;
mod sampling;
mod table;
mod vocab;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub use logits::{argmax, log_softmax, softmax, LogitVector, ZERO_PROB_LOGIT};
pub use ngram::NGramModel;
pub use remote::{BridgeOptions, RemoteModel};
pub use sampling::sample_top_p;
pub use table::{normalize_weights, TableModel, TableRule};
pub use vocab::{Vocabulary, DEFAULT_EOS, DEFAULT_UNK};

pub type TokenId = u32;

/// An autoregressive language model: `p(x_j | x_<j)` behind a tokenizer.
///
/// Models are immutable once built and may be shared across threads.
pub trait LanguageModel<S: Scalar>: Send + Sync {
    fn vocab_size(&self) -> usize;

    fn eos_id(&self) -> TokenId;

    /// Id that unrecognized words map to, if the tokenizer has one.
    fn unk_id(&self) -> Option<TokenId> {
        None
    }

    fn max_context(&self) -> usize;

    fn tokenize(&self, text: &str) -> Result<Vec<TokenId>>;

    fn detokenize(&self, ids: &[TokenId]) -> Result<String>;

    /// Surface string of a single token.
    fn token_text(&self, id: TokenId) -> Result<String> {
        self.detokenize(&[id])
    }

    /// Logits for an already validated context.
    fn compute_logits(&self, ctx: &[TokenId]) -> Result<LogitVector<S>>;

    fn check_context(&self, ctx: &[TokenId]) -> Result<()> {
        if ctx.len() > self.max_context() {
            return Err(Error::ContextTooLong {
                len: ctx.len(),
                max: self.max_context(),
            });
        }
        let size = self.vocab_size();
        if let Some(&id) = ctx.iter().find(|&&id| id as usize >= size) {
            return Err(Error::UnknownTokenId { id, size });
        }
        Ok(())
    }

    /// Next-token logits; the softmax of the result is the model's
    /// next-token distribution.
    fn next_logits(&self, ctx: &[TokenId]) -> Result<LogitVector<S>> {
        self.check_context(ctx)?;
        let logits = self.compute_logits(ctx)?;
        if logits.len() != self.vocab_size() {
            return Err(Error::InvalidArgument(format!(
                "model returned {} logits for a vocabulary of {}",
                logits.len(),
                self.vocab_size()
            )));
        }
        logits.check_finite()?;
        Ok(logits)
    }

    /// Appends up to `steps` argmax tokens. Stops early after emitting eos,
    /// which is included as the final token.
    fn greedy_continue(&self, ctx: &[TokenId], steps: usize) -> Result<Vec<TokenId>> {
        let mut buf = ctx.to_vec();
        let mut out = Vec::with_capacity(steps);
        for _ in 0..steps {
            let next = self
                .next_logits(&buf)?
                .argmax()
                .ok_or_else(|| Error::InvalidArgument("empty vocabulary".into()))?;
            out.push(next);
            if next == self.eos_id() {
                break;
            }
            buf.push(next);
        }
        Ok(out)
    }

    /// Draws up to `max_tokens` tokens with nucleus sampling from a ChaCha
    /// stream seeded by `seed`. Stops after eos.
    fn sample_continue(
        &self,
        ctx: &[TokenId],
        max_tokens: usize,
        top_p: S,
        temperature: S,
        seed: u64,
    ) -> Result<Vec<TokenId>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut buf = ctx.to_vec();
        let mut out = Vec::with_capacity(max_tokens);
        for _ in 0..max_tokens {
            let logits = self.next_logits(&buf)?;
            let next = sample_top_p(&logits, top_p, temperature, &mut rng);
            out.push(next);
            if next == self.eos_id() {
                break;
            }
            buf.push(next);
        }
        Ok(out)
    }

    /// `log p(x_j | x_<j)` for every position; the first token is scored
    /// against the empty context.
    fn score_sequence(&self, tokens: &[TokenId]) -> Result<Vec<S>> {
        if tokens.is_empty() {
            return Err(Error::EmptyText);
        }
        let mut out = Vec::with_capacity(tokens.len());
        for j in 0..tokens.len() {
            let lp = self.next_logits(&tokens[..j])?.log_softmax();
            out.push(lp[tokens[j] as usize]);
        }
        Ok(out)
    }
}

impl<S: Scalar, M: LanguageModel<S> + ?Sized> LanguageModel<S> for &M {
    fn vocab_size(&self) -> usize {
        (**self).vocab_size()
    }
    fn eos_id(&self) -> TokenId {
        (**self).eos_id()
    }
    fn unk_id(&self) -> Option<TokenId> {
        (**self).unk_id()
    }
    fn max_context(&self) -> usize {
        (**self).max_context()
    }
    fn tokenize(&self, text: &str) -> Result<Vec<TokenId>> {
        (**self).tokenize(text)
    }
    fn detokenize(&self, ids: &[TokenId]) -> Result<String> {
        (**self).detokenize(ids)
    }
    fn token_text(&self, id: TokenId) -> Result<String> {
        (**self).token_text(id)
    }
    fn compute_logits(&self, ctx: &[TokenId]) -> Result<LogitVector<S>> {
        (**self).compute_logits(ctx)
    }
    fn sample_continue(
        &self,
        ctx: &[TokenId],
        max_tokens: usize,
        top_p: S,
        temperature: S,
        seed: u64,
    ) -> Result<Vec<TokenId>> {
        (**self).sample_continue(ctx, max_tokens, top_p, temperature, seed)
    }
    fn score_sequence(&self, tokens: &[TokenId]) -> Result<Vec<S>> {
        (**self).score_sequence(tokens)
    }
}

/// Shared tokenizer plumbing for the local models backed by a [`Vocabulary`].
macro_rules! vocab_tokenizer {
    () => {
        fn vocab_size(&self) -> usize {
            self.vocab.len()
        }
        fn eos_id(&self) -> TokenId {
            self.vocab.eos()
        }
        fn unk_id(&self) -> Option<TokenId> {
            Some(self.vocab.unk())
        }
        fn max_context(&self) -> usize {
            self.max_context
        }
        fn tokenize(&self, text: &str) -> Result<Vec<TokenId>> {
            Ok(self.vocab.tokenize(text))
        }
        fn detokenize(&self, ids: &[TokenId]) -> Result<String> {
            let size = self.vocab.len();
            if let Some(&id) = ids.iter().find(|&&id| id as usize >= size) {
                return Err(Error::UnknownTokenId { id, size });
            }
            Ok(self.vocab.detokenize(ids))
        }
        fn token_text(&self, id: TokenId) -> Result<String> {
            self.vocab
                .token(id)
                .map(str::to_string)
                .ok_or(Error::UnknownTokenId {
                    id,
                    size: self.vocab.len(),
                })
        }
    };
}
pub(crate) use vocab_tokenizer;

/// Default context limit for the local models.
pub const DEFAULT_MAX_CONTEXT: usize = 4096;
