use std::collections::HashMap;

use super::check_aligned;
use crate::corpus::{detokenize, Token};
use crate::error::Result;

const MAX_ORDER: usize = 6;
const BETA: f64 = 2.0;

fn char_ngrams(chars: &[char], n: usize) -> HashMap<&[char], usize> {
    let mut counts = HashMap::new();
    if chars.len() >= n {
        for gram in chars.windows(n) {
            *counts.entry(gram).or_insert(0) += 1;
        }
    }
    counts
}

/// Character n-gram statistics `(hyp, ref, matched)` per order, whitespace removed.
pub(crate) fn chrf_stats(hyp: &str, reference: &str) -> [(usize, usize, usize); MAX_ORDER] {
    let h: Vec<char> = hyp.chars().filter(|c| !c.is_whitespace()).collect();
    let r: Vec<char> = reference.chars().filter(|c| !c.is_whitespace()).collect();
    let mut out = [(0, 0, 0); MAX_ORDER];
    for (i, slot) in out.iter_mut().enumerate() {
        let n = i + 1;
        let hc = char_ngrams(&h, n);
        let rc = char_ngrams(&r, n);
        let matched = hc
            .iter()
            .map(|(g, c)| (*c).min(rc.get(g).copied().unwrap_or(0)))
            .sum();
        *slot = (
            h.len().saturating_sub(n - 1),
            r.len().saturating_sub(n - 1),
            matched,
        );
    }
    out
}

pub(crate) fn chrf_from_stats(stats: &[(usize, usize, usize); MAX_ORDER]) -> f64 {
    let factor = BETA * BETA;
    let mut total = 0.0;
    let mut orders = 0;
    for &(hyp, reference, matched) in stats {
        if hyp == 0 || reference == 0 {
            continue;
        }
        orders += 1;
        let precision = matched as f64 / hyp as f64;
        let recall = matched as f64 / reference as f64;
        let denom = factor * precision + recall;
        if denom > 0.0 {
            total += (1.0 + factor) * precision * recall / denom;
        }
    }
    if orders == 0 {
        0.0
    } else {
        100.0 * total / orders as f64
    }
}

/// Corpus ChrF (character 1- to 6-grams, β = 2), in percent.
///
/// N-gram statistics are summed over the corpus; the F-score is averaged over
/// the orders for which both sides have n-grams.
pub fn chrf(hyps: &[Vec<Token>], refs: &[Vec<Token>]) -> Result<f64> {
    check_aligned(hyps.len(), refs.len())?;
    let mut totals = [(0, 0, 0); MAX_ORDER];
    for (h, r) in hyps.iter().zip(refs) {
        let s = chrf_stats(&detokenize(h), &detokenize(r));
        for (acc, x) in totals.iter_mut().zip(s) {
            acc.0 += x.0;
            acc.1 += x.1;
            acc.2 += x.2;
        }
    }
    Ok(chrf_from_stats(&totals))
}
