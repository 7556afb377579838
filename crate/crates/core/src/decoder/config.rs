use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::guidance::{TextualOptions, DEFAULT_K_CONSTRAINT, DEFAULT_K_TOPIC, DEFAULT_LOOKAHEAD};
use crate::scalar::Scalar;

pub const DEFAULT_ALPHA: f64 = 5.0;
pub const DEFAULT_BETA: f64 = 100.0;
pub const DEFAULT_MAX_TOKENS: usize = 64;

/// Where the topic and constraint token sets come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    None,
    Verifier,
    Topk,
    Textual,
    Oracle,
}

impl Strategy {
    pub const ALL: [Strategy; 5] = [
        Strategy::None,
        Strategy::Verifier,
        Strategy::Topk,
        Strategy::Textual,
        Strategy::Oracle,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::None => "none",
            Strategy::Verifier => "verifier",
            Strategy::Topk => "topk",
            Strategy::Textual => "textual",
            Strategy::Oracle => "oracle",
        }
    }

    /// Whether guidance is compiled into tries.
    pub fn uses_examples(self) -> bool {
        matches!(self, Strategy::Textual | Strategy::Oracle)
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown strategy {s:?}")))
    }
}

/// Decoding and guidance settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GuidanceConfig<S> {
    /// Topic boost.
    pub alpha: S,
    /// Constraint penalty.
    pub beta: S,
    pub strategy: Strategy,
    /// Trie strategies only: when false the whole example token set is used
    /// at every step instead of following the trie.
    pub use_trie: bool,
    pub max_tokens: usize,
    pub k_topic: usize,
    pub k_constraint: usize,
    pub lookahead: usize,
    /// Verifier only: also boost verified topic spans.
    pub verifier_topic: bool,
    pub textual: TextualOptions,
}

impl<S: Scalar> Default for GuidanceConfig<S> {
    fn default() -> Self {
        Self {
            alpha: S::lit(DEFAULT_ALPHA),
            beta: S::lit(DEFAULT_BETA),
            strategy: Strategy::Textual,
            use_trie: true,
            max_tokens: DEFAULT_MAX_TOKENS,
            k_topic: DEFAULT_K_TOPIC,
            k_constraint: DEFAULT_K_CONSTRAINT,
            lookahead: DEFAULT_LOOKAHEAD,
            verifier_topic: false,
            textual: TextualOptions::default(),
        }
    }
}

impl<S: Scalar> GuidanceConfig<S> {
    pub fn with_strategy(strategy: Strategy) -> Self {
        Self {
            strategy,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta)] {
            if !v.is_finite() || v < S::zero() {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be finite and nonnegative, got {v}"
                )));
            }
        }
        let positive = [
            ("max_tokens", self.max_tokens),
            ("k_topic", self.k_topic),
            ("k_constraint", self.k_constraint),
            ("lookahead", self.lookahead),
            ("trie budget", self.textual.budget),
            ("beams", self.textual.beams),
        ];
        if let Some((name, _)) = positive.iter().find(|(_, v)| *v == 0) {
            return Err(Error::InvalidArgument(format!("{name} must be at least 1")));
        }
        let t = &self.textual;
        if !(t.top_p > 0.0 && t.top_p <= 1.0) || !(t.temperature > 0.0 && t.temperature.is_finite())
        {
            return Err(Error::InvalidArgument(
                "top_p must be in (0, 1] and temperature positive".into(),
            ));
        }
        Ok(())
    }
}
