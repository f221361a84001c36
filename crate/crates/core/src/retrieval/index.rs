use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::ScoredCandidate;
use crate::corpus::{PairId, ParallelCorpus, SentencePair, Token};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Posting {
    pub pair: PairId,
    /// Term frequency in the pair's source, always >= 1.
    pub tf: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Self { k1: 1.2, b: 0.75 }
    }
}

impl Bm25Params {
    /// Smoothed idf, `ln((N - df + 0.5) / (df + 0.5) + 1)`; always positive.
    pub fn idf(&self, doc_count: usize, df: usize) -> f64 {
        let n = doc_count as f64;
        let df = df as f64;
        ((n - df + 0.5) / (df + 0.5) + 1.0).ln()
    }

    pub fn term_score(&self, idf: f64, tf: u32, doc_len: u32, avg_doc_len: f64) -> f64 {
        let tf = f64::from(tf);
        let norm = 1.0 - self.b + self.b * f64::from(doc_len) / avg_doc_len;
        idf * (tf * (self.k1 + 1.0)) / (tf + self.k1 * norm)
    }
}

/// BM25 postings over the source side of a corpus.
///
/// Postings lists are kept sorted by pair id, so an index grown through
/// [`InvertedIndex::insert_pair`] is structurally equal to one built in a
/// single pass over the same pairs.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct InvertedIndex {
    pub(super) postings: HashMap<Token, Vec<Posting>>,
    pub(super) doc_length: BTreeMap<PairId, u32>,
    pub(super) total_length: u64,
}

impl InvertedIndex {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn build(corpus: &ParallelCorpus) -> Self {
        let mut index = Self::new();
        for pair in corpus.pairs() {
            index
                .insert_pair(pair)
                .expect("corpus ids are unique by construction");
        }
        index
    }

    /// Adds one pair's source side. Fails if the id is already present.
    pub fn insert_pair(&mut self, pair: &SentencePair) -> Result<()> {
        if self.doc_length.contains_key(&pair.id) {
            return Err(Error::DuplicateId(pair.id.0));
        }
        let mut counts: HashMap<&Token, u32> = HashMap::new();
        for token in &pair.source {
            *counts.entry(token).or_insert(0) += 1;
        }
        for (token, tf) in counts {
            let list = self.postings.entry(token.clone()).or_default();
            let posting = Posting { pair: pair.id, tf };
            match list.last() {
                Some(last) if last.pair > pair.id => {
                    let at = list.partition_point(|p| p.pair < pair.id);
                    list.insert(at, posting);
                }
                _ => list.push(posting),
            }
        }
        let len = pair.source.len() as u32;
        self.doc_length.insert(pair.id, len);
        self.total_length += u64::from(len);
        Ok(())
    }

    pub fn doc_count(&self) -> usize {
        self.doc_length.len()
    }

    pub fn total_length(&self) -> u64 {
        self.total_length
    }

    /// Mean source length; 0 for an empty index.
    pub fn avg_doc_length(&self) -> f64 {
        if self.doc_length.is_empty() {
            return 0.0;
        }
        self.total_length as f64 / self.doc_count() as f64
    }

    pub fn doc_length(&self, id: PairId) -> Option<u32> {
        self.doc_length.get(&id).copied()
    }

    pub fn postings(&self, token: &Token) -> &[Posting] {
        self.postings.get(token).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn df(&self, token: &Token) -> usize {
        self.postings(token).len()
    }

    pub fn term_count(&self) -> usize {
        self.postings.len()
    }

    pub fn contains(&self, id: PairId) -> bool {
        self.doc_length.contains_key(&id)
    }

    /// Okapi BM25 over every pair sharing at least one query token.
    ///
    /// Each query token occurrence contributes its term score, so repeated
    /// query tokens weigh proportionally. Results are ordered by
    /// `(bm25 desc, pair_id asc)` and truncated to `top_n`.
    pub fn bm25_search(
        &self,
        query: &[Token],
        top_n: usize,
        params: Bm25Params,
    ) -> Result<Vec<ScoredCandidate>> {
        if self.doc_count() == 0 {
            return Err(Error::EmptyIndex);
        }
        let n = self.doc_count();
        let avg = self.avg_doc_length();
        let mut scores: HashMap<PairId, f64> = HashMap::new();
        for token in query {
            let list = self.postings(token);
            if list.is_empty() {
                continue;
            }
            let idf = params.idf(n, list.len());
            for posting in list {
                let len = self.doc_length[&posting.pair];
                *scores.entry(posting.pair).or_insert(0.0) +=
                    params.term_score(idf, posting.tf, len, avg);
            }
        }
        let mut ranked: Vec<ScoredCandidate> = scores
            .into_iter()
            .map(|(pair_id, bm25)| ScoredCandidate {
                pair_id,
                bm25,
                sim: None,
            })
            .collect();
        ranked.sort_by(|a, b| b.bm25.total_cmp(&a.bm25).then(a.pair_id.cmp(&b.pair_id)));
        ranked.truncate(top_n);
        Ok(ranked)
    }
}
