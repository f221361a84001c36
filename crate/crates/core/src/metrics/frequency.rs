use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{check_aligned, render_table};
use crate::corpus::{ParallelCorpus, Token};
use crate::error::{Error, Result};

/// Lower bucket edges by training frequency: 0, 1, 2, 3, 4, [5,10), [10,100), [100,1000), 1000+.
pub const DEFAULT_FREQUENCY_EDGES: [usize; 9] = [0, 1, 2, 3, 4, 5, 10, 100, 1000];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyBucket {
    pub min: usize,
    /// Exclusive upper bound; `None` for the last bucket.
    pub max: Option<usize>,
    pub matched: usize,
    pub total: usize,
    /// `matched / total`; `None` when the bucket holds no reference tokens.
    pub accuracy: Option<f64>,
}

impl FrequencyBucket {
    pub fn label(&self) -> String {
        match self.max {
            Some(max) if max == self.min + 1 => format!("{}", self.min),
            Some(max) => format!("[{},{})", self.min, max),
            None => format!("{}+", self.min),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyBucketTable {
    pub buckets: Vec<FrequencyBucket>,
}

impl FrequencyBucketTable {
    pub fn to_table(&self) -> String {
        let rows: Vec<Vec<String>> = self
            .buckets
            .iter()
            .map(|b| {
                vec![
                    b.label(),
                    b.matched.to_string(),
                    b.total.to_string(),
                    b.accuracy.map_or("-".into(), |a| format!("{a:.4}")),
                ]
            })
            .collect();
        render_table(&["frequency", "matched", "total", "accuracy"], &rows)
    }
}

/// Word accuracy bucketed by each reference token's target-side frequency in
/// `train`.
///
/// Bucket `i` covers `[edges[i], edges[i+1])`; frequencies below `edges[0]`
/// fall into the first bucket. Within a sentence, a reference token type
/// matches `min(count in ref, count in hyp)` times.
pub fn word_accuracy_by_frequency(
    hyps: &[Vec<Token>],
    refs: &[Vec<Token>],
    train: &ParallelCorpus,
    edges: &[usize],
) -> Result<FrequencyBucketTable> {
    check_aligned(hyps.len(), refs.len())?;
    if edges.is_empty() || edges.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::config(
            "bucket_edges",
            "must be non-empty and strictly increasing",
        ));
    }
    let mut buckets: Vec<FrequencyBucket> = edges
        .iter()
        .enumerate()
        .map(|(i, &min)| FrequencyBucket {
            min,
            max: edges.get(i + 1).copied(),
            matched: 0,
            total: 0,
            accuracy: None,
        })
        .collect();
    let bucket_of = |freq: usize| edges.partition_point(|e| *e <= freq).saturating_sub(1);

    for (hyp, reference) in hyps.iter().zip(refs) {
        let mut hyp_counts: HashMap<&Token, usize> = HashMap::new();
        for t in hyp {
            *hyp_counts.entry(t).or_insert(0) += 1;
        }
        let mut ref_counts: HashMap<&Token, usize> = HashMap::new();
        for t in reference {
            *ref_counts.entry(t).or_insert(0) += 1;
        }
        for (token, count) in ref_counts {
            let b = &mut buckets[bucket_of(train.target_frequency(token))];
            b.total += count;
            b.matched += count.min(hyp_counts.get(token).copied().unwrap_or(0));
        }
    }
    for b in &mut buckets {
        b.accuracy = (b.total > 0).then(|| b.matched as f64 / b.total as f64);
    }
    Ok(FrequencyBucketTable { buckets })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::tokenize;

    fn s(x: &str) -> Vec<Token> {
        tokenize(x)
    }

    fn train() -> ParallelCorpus {
        // target frequencies: a=3, b=2, c=1
        ParallelCorpus::from_text_pairs([("x", "a a b"), ("y", "a b c")]).unwrap()
    }

    #[test]
    fn perfect_hypotheses() {
        let refs = vec![s("a b c d"), s("b a")];
        let t = word_accuracy_by_frequency(&refs, &refs, &train(), &[0, 1, 2, 3]).unwrap();
        for b in &t.buckets {
            if b.total > 0 {
                assert_eq!(b.accuracy, Some(1.0));
            }
        }
        // "d" never occurs in training: frequency-0 bucket
        assert_eq!(t.buckets[0].total, 1);
    }

    #[test]
    fn hand_computed_table() {
        let hyps = vec![s("a a c"), s("b d"), s("z")];
        let refs = vec![s("a b c"), s("b b d d"), s("a e")];
        let t = word_accuracy_by_frequency(&hyps, &refs, &train(), &[0, 1, 2, 3]).unwrap();
        // freq 0 bucket: d (ref 2, hyp 1 -> 1), e (ref 1, hyp 0) => 1 / 3
        // freq 1 bucket: c (1/1)                                   => 1 / 1
        // freq 2 bucket: b s1 (1, hyp 0) + b s2 (2, hyp 1)         => 1 / 3
        // freq 3+ bucket: a s1 (1, hyp 2 -> 1) + a s3 (1, 0)       => 1 / 2
        let got: Vec<(usize, usize)> = t.buckets.iter().map(|b| (b.matched, b.total)).collect();
        assert_eq!(got, vec![(1, 3), (1, 1), (1, 3), (1, 2)]);
        assert_eq!(t.buckets[3].label(), "3+");
        assert!(t.to_table().contains("accuracy"));
    }

    #[test]
    fn edges_must_increase() {
        let refs = vec![s("a")];
        assert!(word_accuracy_by_frequency(&refs, &refs, &train(), &[0, 0, 1]).is_err());
        assert!(word_accuracy_by_frequency(&refs, &refs, &train(), &[]).is_err());
    }

    #[test]
    fn below_first_edge_goes_to_first_bucket() {
        let refs = vec![s("q")];
        let t = word_accuracy_by_frequency(&refs, &refs, &train(), &[1, 5]).unwrap();
        assert_eq!(t.buckets[0].total, 1);
    }
}
