use crate::error::{Error, Result};

/// Unit-cost Levenshtein distance over token sequences.
pub fn edit_distance<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut curr = vec![0; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        curr[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let substitute = prev[j] + usize::from(x != y);
            curr[j + 1] = substitute.min(prev[j + 1] + 1).min(curr[j] + 1);
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[b.len()]
}

/// `1 - dist(x, xi) / max(|x|, |xi|)`, in `[0, 1]`.
pub fn rerank_similarity<T: PartialEq>(x: &[T], xi: &[T]) -> Result<f64> {
    let longest = x.len().max(xi.len());
    if longest == 0 {
        return Err(Error::UndefinedSimilarity);
    }
    Ok(1.0 - edit_distance(x, xi) as f64 / longest as f64)
}
