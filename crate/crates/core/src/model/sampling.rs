use rand::Rng;

use crate::scalar::Scalar;

use super::logits::descending;
use super::{LogitVector, TokenId};

/// Nucleus sampling: keep the smallest highest-probability prefix whose mass
/// reaches `top_p`, renormalize and draw. Candidates are ordered by
/// probability then id, so the draw is reproducible for a given stream.
pub fn sample_top_p<S: Scalar, R: Rng + ?Sized>(
    logits: &LogitVector<S>,
    top_p: S,
    temperature: S,
    rng: &mut R,
) -> TokenId {
    let temperature = if temperature > S::zero() {
        temperature
    } else {
        S::one()
    };
    let scaled: Vec<S> = logits.values().iter().map(|&v| v / temperature).collect();
    let probs = super::softmax(&scaled);
    let mut order: Vec<TokenId> = (0..probs.len() as TokenId).collect();
    order.sort_by(|&a, &b| descending(probs[a as usize], probs[b as usize], a, b));

    let mut kept = Vec::new();
    let mut mass = S::zero();
    for id in order {
        kept.push(id);
        mass = mass + probs[id as usize];
        if mass >= top_p {
            break;
        }
    }
    let draw = S::lit(rng.random::<f64>()) * mass;
    let mut acc = S::zero();
    for &id in &kept {
        acc = acc + probs[id as usize];
        if draw < acc {
            return id;
        }
    }
    *kept.last().expect("non-empty vocabulary")
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    #[test]
    fn tiny_nucleus_is_argmax() {
        let l = LogitVector::new(vec![0.0f64, 4.0, 1.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            assert_eq!(sample_top_p(&l, 1e-6, 1.0, &mut rng), 1);
        }
    }

    #[test]
    fn full_nucleus_reaches_every_token() {
        let l = LogitVector::new(vec![0.0f64; 4]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut seen = [false; 4];
        for _ in 0..200 {
            seen[sample_top_p(&l, 1.0, 1.0, &mut rng) as usize] = true;
        }
        assert!(seen.iter().all(|&s| s));
    }
}
