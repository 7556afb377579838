use std::marker::PhantomData;
use std::time::Duration;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use ureq::Agent;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::{LanguageModel, LogitVector, TokenId};

/// Client-side settings for the model bridge.
#[derive(Debug, Clone)]
pub struct BridgeOptions {
    pub url: String,
    /// The wire protocol does not carry special ids, so eos is configured.
    pub eos_id: TokenId,
    pub max_context: usize,
    /// Request sparse top-N logits instead of dense vectors.
    pub top_n: Option<usize>,
    pub timeout: Duration,
}

impl BridgeOptions {
    pub fn new(url: impl Into<String>) -> Self {
        Self {
            url: url.into(),
            eos_id: 50256,
            max_context: 1024,
            top_n: None,
            timeout: Duration::from_secs(60),
        }
    }
}

#[derive(Serialize)]
struct TextBody<'a> {
    text: &'a str,
}

#[derive(Serialize)]
struct IdsBody<'a> {
    ids: &'a [TokenId],
}

#[derive(Serialize)]
struct LogitsRequest<'a> {
    ids: &'a [TokenId],
    #[serde(skip_serializing_if = "Option::is_none")]
    top_n: Option<usize>,
}

#[derive(Serialize)]
struct GenerateRequest<'a> {
    ids: &'a [TokenId],
    max_tokens: usize,
    mode: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    temperature: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

#[derive(Deserialize)]
struct IdsResponse {
    ids: Vec<TokenId>,
}

#[derive(Deserialize)]
struct TextResponse {
    text: String,
}

#[derive(Deserialize)]
struct LogitsResponse {
    #[serde(default)]
    dense: Option<Vec<f64>>,
    #[serde(default)]
    sparse: Option<Vec<(TokenId, f64)>>,
}

#[derive(Deserialize)]
struct ScoreResponse {
    logprobs: Vec<f64>,
}

/// Language model served over HTTP by the bridge service.
///
/// Endpoints: `/tokenize`, `/detokenize`, `/logits`, `/generate`, `/score`,
/// all JSON over POST. Sparse logit replies are padded to the full
/// vocabulary with `min(received) - 10`, which preserves the argmax.
pub struct RemoteModel<S> {
    agent: Agent,
    base: String,
    vocab_size: usize,
    eos: TokenId,
    max_context: usize,
    top_n: Option<usize>,
    _scalar: PhantomData<fn() -> S>,
}

impl<S: Scalar> RemoteModel<S> {
    /// Connects and learns the vocabulary size from one dense `/logits` call.
    pub fn connect(opts: BridgeOptions) -> Result<Self> {
        let agent: Agent = Agent::config_builder()
            .timeout_global(Some(opts.timeout))
            .build()
            .into();
        let mut model = Self {
            agent,
            base: opts.url.trim_end_matches('/').to_string(),
            vocab_size: 0,
            eos: opts.eos_id,
            max_context: opts.max_context,
            top_n: opts.top_n,
            _scalar: PhantomData,
        };
        let probe: LogitsResponse = model.post(
            "/logits",
            &LogitsRequest {
                ids: &[opts.eos_id],
                top_n: None,
            },
        )?;
        model.vocab_size = probe
            .dense
            .map(|d| d.len())
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::Bridge("probe /logits returned no dense vector".into()))?;
        if opts.eos_id as usize >= model.vocab_size {
            return Err(Error::UnknownTokenId {
                id: opts.eos_id,
                size: model.vocab_size,
            });
        }
        Ok(model)
    }

    fn post<B: Serialize, R: DeserializeOwned>(&self, path: &str, body: &B) -> Result<R> {
        let url = format!("{}{}", self.base, path);
        let mut resp = self
            .agent
            .post(&url)
            .send_json(body)
            .map_err(|e| Error::Bridge(format!("POST {url}: {e}")))?;
        resp.body_mut()
            .read_json::<R>()
            .map_err(|e| Error::Bridge(format!("POST {url}: bad response body: {e}")))
    }

    fn to_scalars(values: &[f64]) -> Result<Vec<S>> {
        values
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                if v.is_finite() {
                    Ok(S::lit(v))
                } else {
                    Err(Error::NonFiniteLogits(i as TokenId))
                }
            })
            .collect()
    }

    /// Expands a sparse `(id, score)` list to a dense vector.
    pub fn pad_sparse(entries: &[(TokenId, f64)], vocab_size: usize) -> Result<LogitVector<S>> {
        let min = entries.iter().map(|e| e.1).fold(f64::INFINITY, f64::min);
        if !min.is_finite() {
            return Err(Error::Bridge("sparse logits empty or non-finite".into()));
        }
        let mut dense = vec![min - 10.0; vocab_size];
        for &(id, score) in entries {
            let slot = dense.get_mut(id as usize).ok_or(Error::UnknownTokenId {
                id,
                size: vocab_size,
            })?;
            *slot = score;
        }
        Ok(LogitVector::new(Self::to_scalars(&dense)?))
    }

    fn generate_remote(
        &self,
        ctx: &[TokenId],
        max_tokens: usize,
        mode: &str,
        p: Option<f64>,
        temperature: Option<f64>,
        seed: Option<u64>,
    ) -> Result<Vec<TokenId>> {
        self.check_context(ctx)?;
        let resp: IdsResponse = self.post(
            "/generate",
            &GenerateRequest {
                ids: ctx,
                max_tokens,
                mode,
                p,
                temperature,
                seed,
            },
        )?;
        let mut ids = resp.ids;
        if let Some(pos) = ids.iter().position(|&id| id == self.eos) {
            ids.truncate(pos + 1);
        }
        ids.truncate(max_tokens);
        Ok(ids)
    }
}

impl<S: Scalar> LanguageModel<S> for RemoteModel<S> {
    fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    fn eos_id(&self) -> TokenId {
        self.eos
    }

    fn max_context(&self) -> usize {
        self.max_context
    }

    fn tokenize(&self, text: &str) -> Result<Vec<TokenId>> {
        let r: IdsResponse = self.post("/tokenize", &TextBody { text })?;
        Ok(r.ids)
    }

    fn detokenize(&self, ids: &[TokenId]) -> Result<String> {
        let r: TextResponse = self.post("/detokenize", &IdsBody { ids })?;
        Ok(r.text)
    }

    fn compute_logits(&self, ctx: &[TokenId]) -> Result<LogitVector<S>> {
        let r: LogitsResponse = self.post(
            "/logits",
            &LogitsRequest {
                ids: ctx,
                top_n: self.top_n,
            },
        )?;
        match (r.dense, r.sparse) {
            (Some(d), _) => Ok(LogitVector::new(Self::to_scalars(&d)?)),
            (None, Some(s)) => Self::pad_sparse(&s, self.vocab_size),
            (None, None) => Err(Error::Bridge(
                "/logits reply has neither dense nor sparse".into(),
            )),
        }
    }

    fn greedy_continue(&self, ctx: &[TokenId], steps: usize) -> Result<Vec<TokenId>> {
        self.generate_remote(ctx, steps, "greedy", None, None, None)
    }

    fn sample_continue(
        &self,
        ctx: &[TokenId],
        max_tokens: usize,
        top_p: S,
        temperature: S,
        seed: u64,
    ) -> Result<Vec<TokenId>> {
        self.generate_remote(
            ctx,
            max_tokens,
            "top_p",
            Some(top_p.to_f64_lossy()),
            Some(temperature.to_f64_lossy()),
            Some(seed),
        )
    }

    fn score_sequence(&self, tokens: &[TokenId]) -> Result<Vec<S>> {
        if tokens.is_empty() {
            return Err(Error::EmptyText);
        }
        self.check_context(&tokens[..tokens.len() - 1])?;
        let r: ScoreResponse = self.post("/score", &IdsBody { ids: tokens })?;
        if r.logprobs.len() != tokens.len() {
            return Err(Error::Bridge(format!(
                "/score returned {} values for {} tokens",
                r.logprobs.len(),
                tokens.len()
            )));
        }
        Self::to_scalars(&r.logprobs)
    }
}
