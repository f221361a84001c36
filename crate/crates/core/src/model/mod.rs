//! The decoder contract used by retrieval-augmented decoding, plus a
//! deterministic toy implementation that needs no trained weights.

mod toy;
mod weights;

pub use toy::{ToyModel, ToyModelSpec};
pub use weights::{read_weight_file, write_weight_file, TensorInfo, WeightFile};

use serde::{Deserialize, Serialize};

use crate::corpus::TokenId;
use crate::error::{Error, Result};

/// Hidden representation of a decoding context.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ContextVector(Vec<f64>);

impl ContextVector {
    pub fn new(components: Vec<f64>) -> Self {
        debug_assert!(components.iter().all(|c| c.is_finite()));
        ContextVector(components)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &ContextVector) -> f64 {
        dot(&self.0, &other.0)
    }

    pub fn squared_distance(&self, other: &ContextVector) -> f64 {
        squared_distance(&self.0, &other.0)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum()
}

/// Scales `v` to unit L2 norm in place; the zero vector is left unchanged.
pub(crate) fn normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
}

pub const DISTRIBUTION_TOLERANCE: f64 = 1e-9;

/// Probability vector indexed by token id.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Distribution(Vec<f64>);

impl Distribution {
    /// Validates non-negativity and unit mass within `1e-9`.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::config(
                "distribution",
                "entries must be finite and non-negative",
            ));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > DISTRIBUTION_TOLERANCE {
            return Err(Error::config(
                "distribution",
                format!("mass {total} is not 1"),
            ));
        }
        Ok(Distribution(probs))
    }

    pub(crate) fn from_raw(probs: Vec<f64>) -> Self {
        Distribution(probs)
    }

    pub fn point_mass(size: usize, id: TokenId) -> Self {
        let mut probs = vec![0.0; size];
        probs[id.index()] = 1.0;
        Distribution(probs)
    }

    pub fn uniform(size: usize) -> Self {
        Distribution(vec![1.0 / size as f64; size])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn prob(&self, id: TokenId) -> f64 {
        self.0.get(id.index()).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    /// Highest-probability id; ties go to the lowest id.
    pub fn argmax(&self) -> Option<TokenId> {
        let mut best: Option<(usize, f64)> = None;
        for (i, p) in self.0.iter().enumerate() {
            if best.is_none_or(|(_, bp)| *p > bp) {
                best = Some((i, *p));
            }
        }
        best.map(|(i, _)| TokenId(i as u32))
    }

    pub fn max_abs_diff(&self, other: &Distribution) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelOutput {
    pub hidden: ContextVector,
    pub dist: Distribution,
}

/// A translation model as seen by the decoder.
///
/// Implementations must be pure: the same `(source_state, prefix)` always
/// yields a bit-identical hidden state. Datastore keys recorded under teacher
/// forcing are compared against decode-time queries, so any nondeterminism
/// breaks exact matching.
pub trait TranslationModel: Send + Sync {
    fn hidden_dim(&self) -> usize;

    fn vocab_size(&self) -> usize;

    fn encode_source(&self, source: &[TokenId]) -> Result<ContextVector>;

    /// Context representation for `prefix`, which must start with BOS.
    fn hidden_state(
        &self,
        source_state: &ContextVector,
        prefix: &[TokenId],
    ) -> Result<ContextVector>;

    /// Next-token distribution given a hidden state.
    fn output_distribution(&self, hidden: &ContextVector) -> Distribution;

    fn decode_step(&self, source_state: &ContextVector, prefix: &[TokenId]) -> Result<ModelOutput> {
        let hidden = self.hidden_state(source_state, prefix)?;
        let dist = self.output_distribution(&hidden);
        Ok(ModelOutput { hidden, dist })
    }
}
