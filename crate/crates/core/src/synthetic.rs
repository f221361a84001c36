//! Seeded synthetic parallel data for tests, benchmarks and demos.
//!
//! Sources draw from a lexicon `s0, s1, ...`; targets are the word-for-word
//! translation `t0, t1, ...`. Generated corpora have pairwise distinct source
//! bags, so no two pairs share an encoder representation under a bag-of-words
//! source encoder.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{ParallelCorpus, Token};
use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LexicalSpec {
    pub pairs: usize,
    pub lexicon: usize,
    pub min_len: usize,
    pub max_len: usize,
    pub seed: u64,
}

impl Default for LexicalSpec {
    fn default() -> Self {
        LexicalSpec {
            pairs: 1000,
            lexicon: 500,
            min_len: 5,
            max_len: 15,
            seed: 7,
        }
    }
}

fn src_token(i: usize) -> Token {
    Token::new(format!("s{i}")).expect("valid token")
}

fn tgt_token(i: usize) -> Token {
    Token::new(format!("t{i}")).expect("valid token")
}

fn bag_key(words: &[usize]) -> Vec<usize> {
    let mut k = words.to_vec();
    k.sort_unstable();
    k
}

fn realize(words: &[usize]) -> (Vec<Token>, Vec<Token>) {
    (
        words.iter().map(|w| src_token(*w)).collect(),
        words.iter().map(|w| tgt_token(*w)).collect(),
    )
}

/// Random word-for-word parallel corpus with unique source bags.
pub fn lexical_corpus(spec: &LexicalSpec) -> Result<ParallelCorpus> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut seen = HashSet::new();
    let mut corpus = ParallelCorpus::new();
    while corpus.len() < spec.pairs {
        let len = rng.gen_range(spec.min_len..=spec.max_len);
        let words: Vec<usize> = (0..len).map(|_| rng.gen_range(0..spec.lexicon)).collect();
        if seen.insert(bag_key(&words)) {
            let (s, t) = realize(&words);
            corpus.push(s, t)?;
        }
    }
    Ok(corpus)
}

/// Fresh sentences with bags that do not occur in `corpus`, over the same lexicon.
pub fn novel_sentences(
    corpus: &ParallelCorpus,
    spec: &LexicalSpec,
    count: usize,
    seed: u64,
) -> Vec<(Vec<Token>, Vec<Token>)> {
    let existing: HashSet<Vec<Token>> = corpus
        .pairs()
        .iter()
        .map(|p| {
            let mut s = p.source.clone();
            s.sort();
            s
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let len = rng.gen_range(spec.min_len..=spec.max_len);
        let words: Vec<usize> = (0..len).map(|_| rng.gen_range(0..spec.lexicon)).collect();
        let (s, t) = realize(&words);
        let mut key = s.clone();
        key.sort();
        if !existing.contains(&key) {
            out.push((s, t));
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TestKind {
    /// Verbatim copy of a corpus pair.
    Exact,
    /// A corpus pair with one source word and its translation replaced.
    NearDuplicate,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TestItem {
    pub source: Vec<Token>,
    pub target: Vec<Token>,
    pub kind: TestKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TemplateSpec {
    pub templates: usize,
    pub fillers: usize,
    pub slots: usize,
    pub frame_len: usize,
    pub pairs: usize,
    pub tests: usize,
    pub seed: u64,
}

impl Default for TemplateSpec {
    fn default() -> Self {
        TemplateSpec {
            templates: 20,
            fillers: 200,
            slots: 3,
            frame_len: 6,
            pairs: 1000,
            tests: 100,
            seed: 11,
        }
    }
}

/// Templated domain: every sentence is a fixed frame with a few filler slots.
pub struct TemplatedDomain {
    pub corpus: ParallelCorpus,
    pub tests: Vec<TestItem>,
}

struct Template {
    /// `None` marks a slot.
    frame: Vec<Option<usize>>,
}

impl Template {
    fn realize(&self, id: usize, fillers: &[usize]) -> (Vec<Token>, Vec<Token>) {
        let mut slot = 0;
        let mut src = Vec::with_capacity(self.frame.len());
        let mut tgt = Vec::with_capacity(self.frame.len());
        for part in &self.frame {
            match part {
                Some(w) => {
                    src.push(Token::new(format!("f{id}_{w}")).unwrap());
                    tgt.push(Token::new(format!("g{id}_{w}")).unwrap());
                }
                None => {
                    src.push(src_token(fillers[slot]));
                    tgt.push(tgt_token(fillers[slot]));
                    slot += 1;
                }
            }
        }
        (src, tgt)
    }
}

/// Corpus of templated pairs plus a test set split evenly between exact
/// duplicates and near-duplicates of corpus pairs.
pub fn templated_domain(spec: &TemplateSpec) -> Result<TemplatedDomain> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let templates: Vec<Template> = (0..spec.templates)
        .map(|_| {
            let total = spec.frame_len + spec.slots;
            let mut frame: Vec<Option<usize>> = (0..spec.frame_len).map(Some).collect();
            frame.extend(std::iter::repeat_n(None, spec.slots));
            frame.shuffle(&mut rng);
            debug_assert_eq!(frame.len(), total);
            Template { frame }
        })
        .collect();

    let mut seen: HashSet<(usize, Vec<usize>)> = HashSet::new();
    let mut instances = Vec::with_capacity(spec.pairs);
    let mut corpus = ParallelCorpus::new();
    while corpus.len() < spec.pairs {
        let t = rng.gen_range(0..spec.templates);
        let fillers: Vec<usize> = (0..spec.slots)
            .map(|_| rng.gen_range(0..spec.fillers))
            .collect();
        // distinct bags per template: unordered filler multiset must be new
        if seen.insert((t, bag_key(&fillers))) {
            let (s, g) = templates[t].realize(t, &fillers);
            corpus.push(s, g)?;
            instances.push((t, fillers));
        }
    }

    let mut tests = Vec::with_capacity(spec.tests);
    let mut used_near = HashSet::new();
    while tests.len() < spec.tests {
        let (t, fillers) = &instances[rng.gen_range(0..instances.len())];
        if tests.len() % 2 == 0 {
            let (source, target) = templates[*t].realize(*t, fillers);
            tests.push(TestItem {
                source,
                target,
                kind: TestKind::Exact,
            });
        } else {
            let mut changed = fillers.clone();
            let slot = rng.gen_range(0..spec.slots);
            changed[slot] = rng.gen_range(0..spec.fillers);
            let key = (*t, bag_key(&changed));
            if seen.contains(&key) || !used_near.insert(key) {
                continue;
            }
            let (source, target) = templates[*t].realize(*t, &changed);
            tests.push(TestItem {
                source,
                target,
                kind: TestKind::NearDuplicate,
            });
        }
    }
    Ok(TemplatedDomain { corpus, tests })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::retrieval::edit_distance;

    #[test]
    fn lexical_corpus_is_deterministic_with_unique_bags() {
        let spec = LexicalSpec {
            pairs: 200,
            lexicon: 50,
            ..Default::default()
        };
        let a = lexical_corpus(&spec).unwrap();
        let b = lexical_corpus(&spec).unwrap();
        assert_eq!(a, b);
        let bags: HashSet<Vec<Token>> = a
            .pairs()
            .iter()
            .map(|p| {
                let mut s = p.source.clone();
                s.sort();
                s
            })
            .collect();
        assert_eq!(bags.len(), 200);
        assert!(a.pairs().iter().all(|p| (5..=15).contains(&p.source.len())));
    }

    #[test]
    fn novel_sentences_avoid_corpus() {
        let spec = LexicalSpec {
            pairs: 100,
            lexicon: 30,
            ..Default::default()
        };
        let c = lexical_corpus(&spec).unwrap();
        let novel = novel_sentences(&c, &spec, 20, 3);
        assert_eq!(novel.len(), 20);
        for (s, _) in novel {
            assert!(c.pairs().iter().all(|p| p.source != s));
        }
    }

    #[test]
    fn templated_tests_are_exact_or_one_substitution() {
        let spec = TemplateSpec {
            pairs: 200,
            tests: 20,
            ..Default::default()
        };
        let d = templated_domain(&spec).unwrap();
        assert_eq!(d.corpus.len(), 200);
        assert_eq!(
            d.tests.iter().filter(|t| t.kind == TestKind::Exact).count(),
            10
        );
        for t in &d.tests {
            let best = d
                .corpus
                .pairs()
                .iter()
                .map(|p| edit_distance(&p.source, &t.source))
                .min()
                .unwrap();
            match t.kind {
                TestKind::Exact => assert_eq!(best, 0),
                TestKind::NearDuplicate => assert_eq!(best, 1),
            }
        }
    }
}
