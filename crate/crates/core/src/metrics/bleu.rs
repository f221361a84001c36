use std::collections::HashMap;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use super::check_aligned;
use crate::error::Result;

const MAX_ORDER: usize = 4;

/// Sufficient statistics for corpus BLEU.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BleuStats {
    pub matches: [usize; MAX_ORDER],
    pub totals: [usize; MAX_ORDER],
    pub hyp_len: usize,
    pub ref_len: usize,
}

fn ngram_counts<T: Eq + Hash>(tokens: &[T], n: usize) -> HashMap<&[T], usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for gram in tokens.windows(n) {
            *counts.entry(gram).or_insert(0) += 1;
        }
    }
    counts
}

impl BleuStats {
    pub fn add<T: Eq + Hash>(&mut self, hyp: &[T], reference: &[T]) {
        self.hyp_len += hyp.len();
        self.ref_len += reference.len();
        for n in 1..=MAX_ORDER {
            let hyp_counts = ngram_counts(hyp, n);
            let ref_counts = ngram_counts(reference, n);
            self.totals[n - 1] += hyp.len().saturating_sub(n - 1);
            self.matches[n - 1] += hyp_counts
                .iter()
                .map(|(g, c)| (*c).min(ref_counts.get(g).copied().unwrap_or(0)))
                .sum::<usize>();
        }
    }

    /// BLEU in percent. Orders for which the hypotheses contain no n-grams at
    /// all are left out of the geometric mean; any order with n-grams but no
    /// match yields 0.
    pub fn score(&self) -> f64 {
        if self.hyp_len == 0 {
            return 0.0;
        }
        let mut log_sum = 0.0;
        let mut orders = 0;
        for n in 0..MAX_ORDER {
            if self.totals[n] == 0 {
                continue;
            }
            if self.matches[n] == 0 {
                return 0.0;
            }
            log_sum += (self.matches[n] as f64 / self.totals[n] as f64).ln();
            orders += 1;
        }
        let brevity = if self.hyp_len >= self.ref_len {
            1.0
        } else {
            (1.0 - self.ref_len as f64 / self.hyp_len as f64).exp()
        };
        100.0 * brevity * (log_sum / orders as f64).exp()
    }
}

/// Single-reference corpus BLEU (1- to 4-grams, no smoothing), in percent.
pub fn corpus_bleu<T: Eq + Hash>(hyps: &[Vec<T>], refs: &[Vec<T>]) -> Result<f64> {
    check_aligned(hyps.len(), refs.len())?;
    let mut stats = BleuStats::default();
    for (h, r) in hyps.iter().zip(refs) {
        stats.add(h, r);
    }
    Ok(stats.score())
}
