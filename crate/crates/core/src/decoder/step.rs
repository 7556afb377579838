use crate::error::{Error, Result};
use crate::guidance::GuidanceStep;
use crate::model::{argmax, softmax, LogitVector, TokenId};
use crate::scalar::Scalar;

/// Result of one guided step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutput<S> {
    /// Adjusted logits `base + alpha*ind(topic) - beta*ind(constraint)`.
    pub logits: Vec<S>,
    pub probs: Vec<S>,
    pub chosen: TokenId,
}

/// Shifts `base` up by `alpha` on topic tokens and down by `beta` on
/// constraint tokens, then picks the argmax (ties to the lowest id).
pub fn guided_step<S: Scalar>(
    base: &LogitVector<S>,
    topic: &GuidanceStep,
    constraint: &GuidanceStep,
    alpha: S,
    beta: S,
) -> Result<StepOutput<S>> {
    base.check_finite()?;
    let n = base.len();
    if n == 0 {
        return Err(Error::InvalidArgument("empty logit vector".into()));
    }
    let mut logits = base.values().to_vec();
    for (set, delta) in [(topic, alpha), (constraint, -beta)] {
        for &id in &set.ids {
            let slot = logits
                .get_mut(id as usize)
                .ok_or(Error::UnknownTokenId { id, size: n })?;
            *slot = *slot + delta;
        }
    }
    let chosen = argmax(&logits).expect("nonempty logits");
    let probs = softmax(&logits);
    Ok(StepOutput {
        logits,
        probs,
        chosen,
    })
}
