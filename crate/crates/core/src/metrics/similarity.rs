use serde::{Deserialize, Serialize};

use super::render_table;
use crate::corpus::{ParallelCorpus, Token};
use crate::retrieval::{rerank_similarity, Bm25Params, InvertedIndex};

const BINS: usize = 10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimilarityBin {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
    pub percent: f64,
}

impl SimilarityBin {
    pub fn label(&self) -> String {
        let close = if self.upper >= 1.0 { ']' } else { ')' };
        format!("[{:.1}, {:.1}{close}", self.lower, self.upper)
    }
}

/// Ten equal-width bins over `[0, 1]`; the last bin is closed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimilarityHistogram {
    pub bins: Vec<SimilarityBin>,
    /// Per-sentence similarity, in input order.
    pub similarities: Vec<f64>,
}

impl SimilarityHistogram {
    pub fn from_similarities(similarities: Vec<f64>) -> Self {
        let mut counts = [0usize; BINS];
        for s in &similarities {
            counts[bin_of(*s)] += 1;
        }
        let n = similarities.len();
        let bins = counts
            .iter()
            .enumerate()
            .map(|(i, &count)| SimilarityBin {
                lower: i as f64 / BINS as f64,
                upper: (i + 1) as f64 / BINS as f64,
                count,
                percent: if n == 0 {
                    0.0
                } else {
                    100.0 * count as f64 / n as f64
                },
            })
            .collect();
        SimilarityHistogram { bins, similarities }
    }

    pub fn counts(&self) -> Vec<usize> {
        self.bins.iter().map(|b| b.count).collect()
    }

    pub fn to_table(&self) -> String {
        let rows: Vec<Vec<String>> = self
            .bins
            .iter()
            .map(|b| vec![b.label(), b.count.to_string(), format!("{:.1}%", b.percent)])
            .collect();
        render_table(&["similarity", "count", "percent"], &rows)
    }
}

/// Bin index with a small tolerance so values such as `0.7` computed as
/// `1 - 3/10` land in the bin they denote.
fn bin_of(sim: f64) -> usize {
    ((sim * BINS as f64 + 1e-9).floor().max(0.0) as usize).min(BINS - 1)
}

/// Highest re-ranking similarity between `x` and the corpus sources.
///
/// With `exhaustive` every pair is compared; otherwise only the `top_n` BM25
/// candidates are. Pairs sharing no token score 0 either way.
pub fn sentence_corpus_similarity(
    index: &InvertedIndex,
    corpus: &ParallelCorpus,
    x: &[Token],
    top_n: usize,
    exhaustive: bool,
) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    let best = |sources: &mut dyn Iterator<Item = &[Token]>| -> f64 {
        sources
            .filter_map(|s| rerank_similarity(x, s).ok())
            .fold(0.0, f64::max)
    };
    if exhaustive {
        return best(&mut corpus.pairs().iter().map(|p| p.source.as_slice()));
    }
    match index.bm25_search(x, top_n, Bm25Params::default()) {
        Ok(cands) => best(
            &mut cands
                .iter()
                .filter_map(|c| corpus.get(c.pair_id))
                .map(|p| p.source.as_slice()),
        ),
        Err(_) => 0.0,
    }
}

pub fn corpus_similarity_histogram(
    index: &InvertedIndex,
    corpus: &ParallelCorpus,
    test_sources: &[Vec<Token>],
    top_n: usize,
    exhaustive: bool,
) -> SimilarityHistogram {
    let sims = test_sources
        .iter()
        .map(|x| sentence_corpus_similarity(index, corpus, x, top_n, exhaustive))
        .collect();
    SimilarityHistogram::from_similarities(sims)
}
