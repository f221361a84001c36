//! Per-input datastore built by teacher-forcing retrieved pairs through the
//! model, with exact nearest-neighbor search over squared L2 distance.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::corpus::{PairId, SentencePair, TokenId, Vocabulary};
use crate::error::{Error, Result};
use crate::model::{ContextVector, TranslationModel};

/// Bytes per key component in the serialized key payload.
pub const KEY_COMPONENT_BYTES: usize = 4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatastoreEntry {
    pub key: ContextVector,
    pub value: TokenId,
    pub origin: Origin,
}

/// Where an entry came from: the pair and the 1-based target position it predicts.
/// Position `|target| + 1` is the end-of-sentence prediction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Origin {
    pub pair: PairId,
    pub position: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Neighbor {
    pub entry: usize,
    pub distance_sq: f64,
    pub value: TokenId,
}

/// Neighbors sorted by `(distance_sq asc, entry asc)`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NeighborSet(pub Vec<Neighbor>);

impl NeighborSet {
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Neighbor> {
        self.0.iter()
    }

    /// Squared distance of the closest neighbor.
    pub fn nearest_distance_sq(&self) -> Option<f64> {
        self.0.first().map(|n| n.distance_sq)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Footprint {
    pub entries: usize,
    pub key_bytes: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DynamicDatastore {
    entries: Vec<DatastoreEntry>,
    hidden_dim: usize,
}

impl DynamicDatastore {
    pub fn empty(hidden_dim: usize) -> Self {
        DynamicDatastore {
            entries: Vec::new(),
            hidden_dim,
        }
    }

    /// Teacher-forces each pair: for target positions `t = 1..=|y|+1` the key is
    /// the hidden state after `[BOS, y_1..y_{t-1}]` and the value is `y_t`
    /// (end-of-sentence at the last position). Entries keep pair order, then
    /// position order.
    pub fn build<'a, M, I>(model: &M, vocab: &Vocabulary, pairs: I) -> Result<Self>
    where
        M: TranslationModel + ?Sized,
        I: IntoIterator<Item = &'a SentencePair>,
    {
        let mut store = Self::empty(model.hidden_dim());
        for pair in pairs {
            let source_state = model.encode_source(&vocab.encode(&pair.source))?;
            let mut values = vocab.encode(&pair.target);
            values.push(TokenId::EOS);
            let mut prefix = Vec::with_capacity(values.len());
            prefix.push(TokenId::BOS);
            for (i, value) in values.into_iter().enumerate() {
                let key = model.hidden_state(&source_state, &prefix)?;
                store.entries.push(DatastoreEntry {
                    key,
                    value,
                    origin: Origin {
                        pair: pair.id,
                        position: i as u32 + 1,
                    },
                });
                prefix.push(value);
            }
        }
        Ok(store)
    }

    pub fn entries(&self) -> &[DatastoreEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn hidden_dim(&self) -> usize {
        self.hidden_dim
    }

    /// Exact top-`k` by squared Euclidean distance, ties broken by entry index.
    pub fn knn_search(&self, query: &ContextVector, k: usize) -> Result<NeighborSet> {
        if query.dim() != self.hidden_dim {
            return Err(Error::DimensionMismatch {
                expected: self.hidden_dim,
                actual: query.dim(),
            });
        }
        if k == 0 {
            return Err(Error::config("k", "must be at least 1"));
        }
        let mut scored: Vec<(f64, usize)> = self
            .entries
            .iter()
            .enumerate()
            .map(|(i, e)| (e.key.squared_distance(query), i))
            .collect();
        let order = |a: &(f64, usize), b: &(f64, usize)| -> Ordering {
            a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
        };
        if k < scored.len() {
            scored.select_nth_unstable_by(k - 1, order);
            scored.truncate(k);
        }
        scored.sort_unstable_by(order);
        Ok(NeighborSet(
            scored
                .into_iter()
                .map(|(distance_sq, entry)| Neighbor {
                    entry,
                    distance_sq,
                    value: self.entries[entry].value,
                })
                .collect(),
        ))
    }

    pub fn footprint(&self) -> Footprint {
        Footprint {
            entries: self.entries.len(),
            key_bytes: self.entries.len() * self.hidden_dim * KEY_COMPONENT_BYTES,
        }
    }

    /// One JSON object per line: origin, value id and surface, key.
    pub fn to_jsonl(&self, vocab: &Vocabulary) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let line = serde_json::json!({
                "pair": e.origin.pair,
                "position": e.origin.position,
                "value": e.value,
                "token": vocab.token(e.value).map(|t| t.as_str()),
                "key": e.key,
            });
            out.push_str(&line.to_string());
            out.push('\n');
        }
        out
    }
}
