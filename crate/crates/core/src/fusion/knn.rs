use crate::datastore::NeighborSet;
use crate::error::{Error, Result};
use crate::model::Distribution;

/// `p(v) ∝ Σ_{neighbors with value v} exp(-d² / τ)`.
///
/// Weights are shifted by the nearest distance before exponentiation; the
/// normalized result is unchanged and a tiny `tau` cannot underflow every
/// weight to zero.
pub fn knn_distribution(
    neighbors: &NeighborSet,
    tau: f64,
    vocab_size: usize,
) -> Result<Distribution> {
    let nearest = neighbors
        .nearest_distance_sq()
        .ok_or(Error::EmptyNeighbors)?;
    let mut probs = vec![0.0; vocab_size];
    let mut total = 0.0;
    for n in neighbors.iter() {
        let slot = probs
            .get_mut(n.value.index())
            .ok_or(Error::InvalidTokenId {
                id: n.value.0,
                size: vocab_size,
            })?;
        let w = (-(n.distance_sq - nearest) / tau).exp();
        *slot += w;
        total += w;
    }
    for p in probs.iter_mut() {
        *p /= total;
    }
    Ok(Distribution::from_raw(probs))
}

/// `max(0, 1 - d0² / τ)`: full trust at an exact match, none at or beyond τ.
pub fn compute_lambda(d0_sq: f64, tau: f64) -> f64 {
    if d0_sq >= tau {
        0.0
    } else {
        (1.0 - d0_sq / tau).clamp(0.0, 1.0)
    }
}

/// `λ · p_knn + (1 - λ) · p_nmt`.
pub fn fuse(p_knn: &Distribution, p_nmt: &Distribution, lambda: f64) -> Result<Distribution> {
    if p_knn.len() != p_nmt.len() {
        return Err(Error::LengthMismatch {
            left: p_knn.len(),
            right: p_nmt.len(),
        });
    }
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::config(
            "lambda",
            format!("{lambda} is outside [0, 1]"),
        ));
    }
    let mixed = p_knn
        .probs()
        .iter()
        .zip(p_nmt.probs())
        .map(|(k, n)| lambda * k + (1.0 - lambda) * n)
        .collect();
    Ok(Distribution::from_raw(mixed))
}
