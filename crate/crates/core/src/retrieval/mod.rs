//! Sentence-level retrieval: BM25 candidate search over source sides followed
//! by edit-distance re-ranking to pick the reference pairs for one input.

mod index;
mod persist;
mod rerank;

pub use index::{Bm25Params, InvertedIndex, Posting};
pub use rerank::{edit_distance, rerank_similarity};

use serde::{Deserialize, Serialize};

use crate::corpus::{PairId, ParallelCorpus, SentencePair, Token};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RetrievalConfig {
    /// BM25 candidates considered before re-ranking.
    pub top_n: usize,
    /// Reference pairs kept after re-ranking.
    pub m: usize,
    pub bm25_k1: f64,
    pub bm25_b: f64,
}

impl Default for RetrievalConfig {
    fn default() -> Self {
        Self {
            top_n: 64,
            m: 2,
            bm25_k1: 1.2,
            bm25_b: 0.75,
        }
    }
}

impl RetrievalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m < 1 {
            return Err(Error::config("m", "must be at least 1"));
        }
        if self.m > self.top_n {
            return Err(Error::config(
                "m",
                format!("{} exceeds top_n {}", self.m, self.top_n),
            ));
        }
        if self.bm25_k1.is_nan() || self.bm25_k1 <= 0.0 {
            return Err(Error::config("bm25_k1", "must be positive"));
        }
        if !(0.0..=1.0).contains(&self.bm25_b) {
            return Err(Error::config("bm25_b", "must lie in [0, 1]"));
        }
        Ok(())
    }

    pub fn bm25(&self) -> Bm25Params {
        Bm25Params {
            k1: self.bm25_k1,
            b: self.bm25_b,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoredCandidate {
    pub pair_id: PairId,
    pub bm25: f64,
    /// Re-ranking similarity; `None` until the candidate has been re-ranked.
    pub sim: Option<f64>,
}

/// Re-ranks the top BM25 candidates by edit similarity and keeps the best `m`.
///
/// Order is `(sim desc, bm25 desc, pair_id asc)`. Pairs sharing no token with
/// the query are never returned, so the result may be shorter than `m`.
pub fn rank_references(
    index: &InvertedIndex,
    corpus: &ParallelCorpus,
    query: &[Token],
    cfg: &RetrievalConfig,
) -> Vec<ScoredCandidate> {
    if index.doc_count() == 0 || query.is_empty() {
        return Vec::new();
    }
    let candidates = match index.bm25_search(query, cfg.top_n, cfg.bm25()) {
        Ok(c) => c,
        Err(_) => return Vec::new(),
    };
    let mut scored: Vec<ScoredCandidate> = candidates
        .into_iter()
        .filter_map(|mut c| {
            let pair = corpus.get(c.pair_id)?;
            c.sim = Some(rerank_similarity(query, &pair.source).ok()?);
            Some(c)
        })
        .collect();
    scored.sort_by(|a, b| {
        let (sa, sb) = (a.sim.unwrap_or(0.0), b.sim.unwrap_or(0.0));
        sb.total_cmp(&sa)
            .then(b.bm25.total_cmp(&a.bm25))
            .then(a.pair_id.cmp(&b.pair_id))
    });
    scored.truncate(cfg.m);
    scored
}

/// The reference pairs used to build a per-input datastore.
pub fn retrieve_references<'c>(
    index: &InvertedIndex,
    corpus: &'c ParallelCorpus,
    query: &[Token],
    cfg: &RetrievalConfig,
) -> Vec<&'c SentencePair> {
    rank_references(index, corpus, query, cfg)
        .into_iter()
        .filter_map(|c| corpus.get(c.pair_id))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::tokenize;

    fn corpus() -> ParallelCorpus {
        ParallelCorpus::from_text_pairs([
            ("the cat sat", "die katze sass"),
            ("the dog sat", "der hund sass"),
            ("a bird flew", "ein vogel flog"),
            ("the cat sat down", "die katze setzte sich"),
        ])
        .unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(RetrievalConfig::default().validate().is_ok());
        let bad = RetrievalConfig {
            m: 65,
            ..Default::default()
        };
        assert!(matches!(
            bad.validate(),
            Err(Error::InvalidConfig { field: "m", .. })
        ));
        let bad = RetrievalConfig {
            m: 0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = RetrievalConfig {
            bm25_k1: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = RetrievalConfig {
            bm25_b: 1.5,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn verbatim_query_ranks_first() {
        let c = corpus();
        let idx = InvertedIndex::build(&c);
        let cfg = RetrievalConfig {
            m: 1,
            ..Default::default()
        };
        let refs = retrieve_references(&idx, &c, &tokenize("the cat sat"), &cfg);
        assert_eq!(refs.len(), 1);
        assert_eq!(refs[0].id, PairId(0));
    }

    #[test]
    fn small_corpus_returns_all_overlapping_sorted_by_sim() {
        let c = corpus();
        let idx = InvertedIndex::build(&c);
        let cfg = RetrievalConfig {
            m: 10,
            top_n: 64,
            ..Default::default()
        };
        let ranked = rank_references(&idx, &c, &tokenize("the cat sat"), &cfg);
        let ids: Vec<u32> = ranked.iter().map(|c| c.pair_id.0).collect();
        // pair 2 shares no token and is dropped
        assert_eq!(ids, vec![0, 3, 1]);
        let sims: Vec<f64> = ranked.iter().map(|c| c.sim.unwrap()).collect();
        assert_eq!(sims, vec![1.0, 0.75, 1.0 - 1.0 / 3.0]);
    }

    #[test]
    fn no_overlap_and_empty_index_yield_nothing() {
        let c = corpus();
        let idx = InvertedIndex::build(&c);
        let cfg = RetrievalConfig::default();
        assert!(retrieve_references(&idx, &c, &tokenize("zzz"), &cfg).is_empty());
        let empty = ParallelCorpus::new();
        let idx = InvertedIndex::build(&empty);
        assert!(retrieve_references(&idx, &empty, &tokenize("the"), &cfg).is_empty());
    }

    #[test]
    fn repeated_calls_are_identical() {
        let c = corpus();
        let idx = InvertedIndex::build(&c);
        let cfg = RetrievalConfig {
            m: 3,
            ..Default::default()
        };
        let q = tokenize("the sat");
        let a = rank_references(&idx, &c, &q, &cfg);
        let b = rank_references(&idx, &c, &q, &cfg);
        assert_eq!(a, b);
    }
}
