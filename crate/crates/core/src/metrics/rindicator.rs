use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::render_table;
use crate::corpus::Token;
use crate::error::{Error, Result};

/// Occurrence-count ranges `[min, max)` of the five reported buckets.
const RANGES: [(usize, Option<usize>, &str); 5] = [
    (0, Some(1), "R0"),
    (1, Some(2), "R1"),
    (2, Some(5), "R2-5"),
    (5, Some(9), "R5-9"),
    (9, None, "R9+"),
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RBucket {
    pub label: String,
    pub min: usize,
    pub max: Option<usize>,
    pub matched: usize,
    pub total: usize,
    /// `None` when no reference token fell into the bucket.
    pub recall: Option<f64>,
}

impl RBucket {
    fn contains(&self, count: usize) -> bool {
        count >= self.min && self.max.is_none_or(|m| count < m)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RIndicatorReport {
    pub buckets: Vec<RBucket>,
}

impl Default for RIndicatorReport {
    fn default() -> Self {
        RIndicatorReport {
            buckets: RANGES
                .iter()
                .map(|&(min, max, label)| RBucket {
                    label: label.to_owned(),
                    min,
                    max,
                    matched: 0,
                    total: 0,
                    recall: None,
                })
                .collect(),
        }
    }
}

impl RIndicatorReport {
    pub fn bucket(&self, label: &str) -> Option<&RBucket> {
        self.buckets.iter().find(|b| b.label == label)
    }

    /// Pooled recall over every bucket with at least one prior occurrence.
    pub fn repeated_recall(&self) -> Option<f64> {
        let (m, t) = self
            .buckets
            .iter()
            .filter(|b| b.min >= 1)
            .fold((0, 0), |(m, t), b| (m + b.matched, t + b.total));
        (t > 0).then(|| m as f64 / t as f64)
    }

    /// Adds another document's counts.
    pub fn merge(&mut self, other: &RIndicatorReport) {
        for (a, b) in self.buckets.iter_mut().zip(&other.buckets) {
            a.matched += b.matched;
            a.total += b.total;
        }
        self.refresh();
    }

    fn refresh(&mut self) {
        for b in &mut self.buckets {
            b.recall = (b.total > 0).then(|| b.matched as f64 / b.total as f64);
        }
    }

    pub fn to_table(&self) -> String {
        let rows: Vec<Vec<String>> = self
            .buckets
            .iter()
            .map(|b| {
                vec![
                    b.label.clone(),
                    b.matched.to_string(),
                    b.total.to_string(),
                    b.recall.map_or("undefined".into(), |r| format!("{r:.4}")),
                ]
            })
            .collect();
        render_table(&["bucket", "matched", "total", "recall"], &rows)
    }
}

/// Recall of reference tokens grouped by how often they already occurred in
/// the earlier references of the same document.
///
/// For sentence `j`, each unique reference token with `i` prior occurrences
/// (total count over references `1..j-1`) lands in the bucket holding `i`; it
/// is matched when the hypothesis for `j` contains it.
pub fn r_indicator(doc_hyps: &[Vec<Token>], doc_refs: &[Vec<Token>]) -> Result<RIndicatorReport> {
    if doc_hyps.len() != doc_refs.len() {
        return Err(Error::LengthMismatch {
            left: doc_hyps.len(),
            right: doc_refs.len(),
        });
    }
    let mut report = RIndicatorReport::default();
    let mut seen: HashMap<&Token, usize> = HashMap::new();
    for (hyp, reference) in doc_hyps.iter().zip(doc_refs) {
        let hyp_types: HashSet<&Token> = hyp.iter().collect();
        let ref_types: HashSet<&Token> = reference.iter().collect();
        for token in ref_types {
            let prior = seen.get(token).copied().unwrap_or(0);
            if let Some(b) = report.buckets.iter_mut().find(|b| b.contains(prior)) {
                b.total += 1;
                b.matched += usize::from(hyp_types.contains(token));
            }
        }
        for token in reference {
            *seen.entry(token).or_insert(0) += 1;
        }
    }
    report.refresh();
    Ok(report)
}
