//! Evaluation: corpus BLEU, ChrF, word accuracy by training frequency,
//! the R-indicator for online adaptation, and test-to-corpus similarity.

mod bleu;
mod chrf;
mod frequency;
mod rindicator;
mod similarity;

pub use bleu::{corpus_bleu, BleuStats};
pub use chrf::chrf;
pub use frequency::{
    word_accuracy_by_frequency, FrequencyBucket, FrequencyBucketTable, DEFAULT_FREQUENCY_EDGES,
};
pub use rindicator::{r_indicator, RBucket, RIndicatorReport};
pub use similarity::{
    corpus_similarity_histogram, sentence_corpus_similarity, SimilarityBin, SimilarityHistogram,
};

use serde::{Deserialize, Serialize};

use crate::corpus::Token;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub bleu: f64,
    pub chrf: f64,
}

impl MetricReport {
    pub fn compute(hyps: &[Vec<Token>], refs: &[Vec<Token>]) -> Result<Self> {
        Ok(MetricReport {
            bleu: corpus_bleu(hyps, refs)?,
            chrf: chrf(hyps, refs)?,
        })
    }
}

pub(crate) fn check_aligned(hyps: usize, refs: usize) -> Result<()> {
    if hyps != refs {
        return Err(Error::LengthMismatch {
            left: hyps,
            right: refs,
        });
    }
    if hyps == 0 {
        return Err(Error::config(
            "hypotheses",
            "at least one sentence is required",
        ));
    }
    Ok(())
}

/// Renders rows as a left-aligned text table with a header rule.
pub fn render_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: Vec<&str>| -> String {
        let padded: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect();
        padded.join("  ").trim_end().to_owned()
    };
    let mut out = line(header.to_vec());
    out.push('\n');
    out.push_str(&line(
        widths
            .iter()
            .map(|w| "-".repeat(*w))
            .collect::<Vec<_>>()
            .iter()
            .map(String::as_str)
            .collect(),
    ));
    out.push('\n');
    for row in rows {
        out.push_str(&line(row.iter().map(String::as_str).collect()));
        out.push('\n');
    }
    out
}
