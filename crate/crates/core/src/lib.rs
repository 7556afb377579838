//! Knowledge-guided constrained decoding.
//!
//! A generation model's next-token logits are shifted each step by two sparse
//! indicator vectors: tokens that keep the text on topic are boosted by
//! `alpha`, tokens that would mention a forbidden entity are suppressed by
//! `beta`. Guidance comes from a verifier, from top-k next tokens of an
//! example query, from generated example phrases compiled into token tries, or
//! from a knowledge base oracle. The crate also carries the benchmark side:
//! knowledge bases, instance sampling, instruction templates, checkers and
//! metrics.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix it to `f64`.

pub mod benchmark;
pub mod decoder;
pub mod error;
pub mod fixtures;
pub mod guidance;
pub mod knowledge;
pub mod metrics;
pub mod model;
pub mod scalar;
pub mod text;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Logits = model::LogitVector<f64>;
pub type Table = model::TableModel<f64>;
pub type NGram = model::NGramModel<f64>;
pub type Remote = model::RemoteModel<f64>;
pub type Config = decoder::GuidanceConfig<f64>;
pub type DynModel = dyn model::LanguageModel<f64>;

pub type TableF32 = model::TableModel<f32>;
pub type ConfigF32 = decoder::GuidanceConfig<f32>;
