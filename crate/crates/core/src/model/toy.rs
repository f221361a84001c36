use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{dot, normalize, read_weight_file, ContextVector, Distribution, TranslationModel};
use crate::corpus::TokenId;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ToyModelSpec {
    pub hidden_dim: usize,
    pub seed: u64,
    /// Per-position decay applied to earlier prefix tokens.
    pub gamma: f64,
    /// Weight of the source representation in the hidden state.
    pub alpha: f64,
    /// Logit scale.
    pub beta: f64,
}

impl Default for ToyModelSpec {
    fn default() -> Self {
        Self {
            hidden_dim: 64,
            seed: 0,
            gamma: 0.7,
            alpha: 1.0,
            beta: 10.0,
        }
    }
}

impl ToyModelSpec {
    pub fn validate(&self) -> Result<()> {
        if self.hidden_dim < 8 {
            return Err(Error::config("hidden_dim", "must be at least 8"));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::config("gamma", "must lie in (0, 1)"));
        }
        if !self.alpha.is_finite() {
            return Err(Error::config("alpha", "must be finite"));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::config("beta", "must be positive"));
        }
        Ok(())
    }

    /// Unit-norm pseudorandom embedding for `token`.
    ///
    /// Component `i` is a counter-based hash of `(seed, token, i)` mapped to
    /// `[-1, 1]`, so any single vector can be regenerated in isolation.
    pub fn token_embedding(&self, token: TokenId) -> Vec<f64> {
        let mut v: Vec<f64> = (0..self.hidden_dim)
            .map(|i| uniform_pm1(self.seed, u64::from(token.0), i as u64))
            .collect();
        normalize(&mut v);
        v
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn uniform_pm1(seed: u64, token: u64, component: u64) -> f64 {
    let h = splitmix64(splitmix64(splitmix64(seed) ^ token) ^ component);
    let unit = (h >> 11) as f64 / (1u64 << 53) as f64;
    2.0 * unit - 1.0
}

/// Untrained decoder with tied input/output embeddings.
///
/// ```text
/// source = normalize(sum of source embeddings)
/// s      = sum_i gamma^(t-1-i) * emb(prefix_i)
/// hidden = normalize(alpha * source + s)
/// p      = softmax(beta * E . hidden)
/// ```
#[derive(Clone, Debug)]
pub struct ToyModel {
    spec: ToyModelSpec,
    vocab_size: usize,
    /// Row-major `vocab_size x hidden_dim`.
    table: Vec<f64>,
}

impl ToyModel {
    pub fn new(spec: ToyModelSpec, vocab_size: usize) -> Result<Self> {
        spec.validate()?;
        let mut table = Vec::with_capacity(vocab_size * spec.hidden_dim);
        for id in 0..vocab_size {
            table.extend(spec.token_embedding(TokenId(id as u32)));
        }
        Ok(ToyModel {
            spec,
            vocab_size,
            table,
        })
    }

    /// Uses an external embedding table (tensor `"embedding"`, shape `[V, h]`).
    /// Rows are re-normalized to unit length.
    pub fn from_weight_file(spec: ToyModelSpec, path: &Path, vocab_size: usize) -> Result<Self> {
        spec.validate()?;
        let weights = read_weight_file(path)?;
        let (shape, data) = weights.tensor("embedding")?;
        if shape != [vocab_size, spec.hidden_dim] {
            return Err(Error::WeightFormat(format!(
                "embedding shape {shape:?} does not match [{vocab_size}, {}]",
                spec.hidden_dim
            )));
        }
        let mut table: Vec<f64> = data.iter().map(|x| f64::from(*x)).collect();
        for row in table.chunks_mut(spec.hidden_dim) {
            normalize(row);
        }
        Ok(ToyModel {
            spec,
            vocab_size,
            table,
        })
    }

    pub fn spec(&self) -> &ToyModelSpec {
        &self.spec
    }

    pub fn embedding(&self, token: TokenId) -> Result<&[f64]> {
        if token.index() >= self.vocab_size {
            return Err(Error::InvalidTokenId {
                id: token.0,
                size: self.vocab_size,
            });
        }
        let h = self.spec.hidden_dim;
        Ok(&self.table[token.index() * h..(token.index() + 1) * h])
    }

    pub fn token_embedding(&self, token: TokenId) -> Result<ContextVector> {
        self.embedding(token)
            .map(|e| ContextVector::new(e.to_vec()))
    }
}

impl TranslationModel for ToyModel {
    fn hidden_dim(&self) -> usize {
        self.spec.hidden_dim
    }

    fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    fn encode_source(&self, source: &[TokenId]) -> Result<ContextVector> {
        if source.is_empty() {
            return Err(Error::EmptySource);
        }
        let mut acc = vec![0.0; self.spec.hidden_dim];
        for token in source {
            for (a, e) in acc.iter_mut().zip(self.embedding(*token)?) {
                *a += e;
            }
        }
        normalize(&mut acc);
        Ok(ContextVector::new(acc))
    }

    fn hidden_state(
        &self,
        source_state: &ContextVector,
        prefix: &[TokenId],
    ) -> Result<ContextVector> {
        if prefix.first() != Some(&TokenId::BOS) {
            return Err(Error::MissingBos);
        }
        let h = self.spec.hidden_dim;
        if source_state.dim() != h {
            return Err(Error::DimensionMismatch {
                expected: h,
                actual: source_state.dim(),
            });
        }
        let mut decayed = vec![0.0; h];
        for token in prefix {
            let e = self.embedding(*token)?;
            for (s, x) in decayed.iter_mut().zip(e) {
                *s = self.spec.gamma * *s + x;
            }
        }
        let mut hidden: Vec<f64> = source_state
            .as_slice()
            .iter()
            .zip(&decayed)
            .map(|(src, s)| self.spec.alpha * src + s)
            .collect();
        normalize(&mut hidden);
        Ok(ContextVector::new(hidden))
    }

    fn output_distribution(&self, hidden: &ContextVector) -> Distribution {
        let h = self.spec.hidden_dim;
        let mut logits: Vec<f64> = self
            .table
            .chunks_exact(h)
            .map(|row| self.spec.beta * dot(row, hidden.as_slice()))
            .collect();
        let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        for l in logits.iter_mut() {
            *l = (*l - max).exp();
            total += *l;
        }
        for l in logits.iter_mut() {
            *l /= total;
        }
        Distribution::from_raw(logits)
    }
}
