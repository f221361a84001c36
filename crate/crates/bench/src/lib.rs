//! Fixtures shared by the criterion benches.

use skmt_core::synthetic::{lexical_corpus, novel_sentences, LexicalSpec};
use skmt_core::{InvertedIndex, ParallelCorpus, Token, ToyModel, ToyModelSpec, Vocabulary};

pub struct Fixture {
    pub corpus: ParallelCorpus,
    pub index: InvertedIndex,
    pub vocab: Vocabulary,
    pub model: ToyModel,
    /// Half verbatim corpus sources, half fresh sentences over the same lexicon.
    pub tests: Vec<Vec<Token>>,
}

impl Fixture {
    pub fn new(pairs: usize, tests: usize) -> Self {
        let spec = LexicalSpec {
            pairs,
            lexicon: (pairs / 5).max(50),
            ..Default::default()
        };
        let corpus = lexical_corpus(&spec).expect("synthetic corpus");
        let mut sentences: Vec<Vec<Token>> = corpus
            .pairs()
            .iter()
            .step_by((pairs / tests.max(1)).max(1) * 2)
            .take(tests / 2)
            .map(|p| p.source.clone())
            .collect();
        let fresh = tests - sentences.len();
        sentences.extend(
            novel_sentences(&corpus, &spec, fresh, 1)
                .into_iter()
                .map(|(s, _)| s),
        );
        let mut vocab = Vocabulary::build(&corpus);
        for s in &sentences {
            vocab.extend(s);
        }
        let model = ToyModel::new(ToyModelSpec::default(), vocab.len()).expect("toy model");
        let index = InvertedIndex::build(&corpus);
        Fixture {
            corpus,
            index,
            vocab,
            model,
            tests: sentences,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_mixes_verbatim_and_fresh_sentences() {
        let f = Fixture::new(200, 10);
        assert_eq!(f.tests.len(), 10);
        let verbatim = f
            .tests
            .iter()
            .filter(|t| f.corpus.pairs().iter().any(|p| &p.source == *t))
            .count();
        assert_eq!(verbatim, 5);
    }
}
