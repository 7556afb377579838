//! Guided greedy decoding.

mod config;
mod generate;
mod step;

pub use config::{GuidanceConfig, Strategy, DEFAULT_ALPHA, DEFAULT_BETA, DEFAULT_MAX_TOKENS};
pub use generate::{
    generate, oracle_examples, DecodeRequest, DecodeTrace, Decoder, Generation, StepTrace,
    TraceSummary,
};
pub use step::{guided_step, StepOutput};
