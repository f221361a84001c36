//! Sentence-by-sentence translation of a document where each gold pair is
//! added to the reference corpus right after its sentence is translated.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{
    parse_records, CorpusFormat, PairId, ParallelCorpus, SentencePair, Token, Tokenizer, Vocabulary,
};
use crate::error::{Error, Result};
use crate::fusion::{beam_search, DecoderConfig, FusionConfig, ReferenceStore, Translation};
use crate::metrics::{r_indicator, MetricReport, RIndicatorReport};
use crate::model::TranslationModel;
use crate::retrieval::InvertedIndex;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LengthBucket {
    #[serde(rename = "0-50")]
    UpTo50,
    #[serde(rename = "50-100")]
    UpTo100,
    #[serde(rename = "100-200")]
    UpTo200,
    #[serde(rename = "200-500")]
    UpTo500,
    #[serde(rename = "500-1000")]
    UpTo1000,
    #[serde(rename = "1000+")]
    Over1000,
}

impl LengthBucket {
    /// Half-open ranges by sentence count: `[0,50)`, `[50,100)`, ... `[1000, ∞)`.
    pub fn for_len(sentences: usize) -> Self {
        match sentences {
            0..=49 => LengthBucket::UpTo50,
            50..=99 => LengthBucket::UpTo100,
            100..=199 => LengthBucket::UpTo200,
            200..=499 => LengthBucket::UpTo500,
            500..=999 => LengthBucket::UpTo1000,
            _ => LengthBucket::Over1000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub id: Option<String>,
    pub sentences: Vec<SentencePair>,
}

impl Document {
    pub fn new(id: Option<String>, pairs: Vec<(Vec<Token>, Vec<Token>)>) -> Self {
        let sentences = pairs
            .into_iter()
            .enumerate()
            .map(|(i, (source, target))| SentencePair {
                id: PairId(i as u32),
                source,
                target,
            })
            .collect();
        Document { id, sentences }
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn bucket(&self) -> LengthBucket {
        LengthBucket::for_len(self.sentences.len())
    }

    /// Vocabulary over every token of the document.
    pub fn vocabulary(&self) -> Vocabulary {
        let mut v = Vocabulary::specials_only();
        for s in &self.sentences {
            v.extend(&s.source);
            v.extend(&s.target);
        }
        v
    }
}

/// Splits corpus text into documents by `doc_id`, in order of first
/// appearance. Lines without a `doc_id` belong to one unnamed document.
pub fn parse_documents(
    content: &str,
    format: CorpusFormat,
    tokenizer: Tokenizer,
) -> Result<Vec<Document>> {
    let mut order: HashMap<Option<String>, usize> = HashMap::new();
    let mut docs: Vec<Document> = Vec::new();
    for rec in parse_records(content, format, tokenizer)? {
        let slot = *order.entry(rec.doc_id.clone()).or_insert_with(|| {
            docs.push(Document::new(rec.doc_id.clone(), Vec::new()));
            docs.len() - 1
        });
        let doc = &mut docs[slot];
        doc.sentences.push(SentencePair {
            id: PairId(doc.sentences.len() as u32),
            source: rec.source,
            target: rec.target,
        });
    }
    Ok(docs)
}

pub fn load_documents(
    path: &Path,
    format: CorpusFormat,
    tokenizer: Tokenizer,
) -> Result<Vec<Document>> {
    let content = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_documents(&content, format, tokenizer)
}

/// Translation state that grows with user feedback. No model parameters change.
pub struct OnlineSession<'a, M: TranslationModel + ?Sized> {
    model: &'a M,
    vocab: &'a Vocabulary,
    fusion: FusionConfig,
    decoder: DecoderConfig,
    corpus: ParallelCorpus,
    index: InvertedIndex,
}

impl<'a, M: TranslationModel + ?Sized> OnlineSession<'a, M> {
    pub fn new(
        model: &'a M,
        vocab: &'a Vocabulary,
        fusion: FusionConfig,
        decoder: DecoderConfig,
    ) -> Self {
        OnlineSession {
            model,
            vocab,
            fusion,
            decoder,
            corpus: ParallelCorpus::new(),
            index: InvertedIndex::new(),
        }
    }

    /// Translates against the feedback received so far.
    pub fn translate(&self, source: &[Token]) -> Result<Translation> {
        let store = ReferenceStore {
            index: &self.index,
            corpus: &self.corpus,
        };
        beam_search(
            self.model,
            self.vocab,
            Some(store),
            source,
            &self.fusion,
            &self.decoder,
        )
    }

    /// Records a corrected pair; later translations may retrieve it.
    pub fn feedback(&mut self, source: Vec<Token>, target: Vec<Token>) -> Result<PairId> {
        let id = self.corpus.push(source, target)?;
        let pair = self.corpus.get(id).expect("just pushed");
        self.index.insert_pair(pair)?;
        Ok(id)
    }

    pub fn corpus(&self) -> &ParallelCorpus {
        &self.corpus
    }

    pub fn index(&self) -> &InvertedIndex {
        &self.index
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SentenceSummary {
    pub steps: usize,
    pub mean_lambda: f64,
    pub max_lambda: f64,
    pub references: usize,
    pub datastore_entries: usize,
}

impl SentenceSummary {
    fn from_translation(t: &Translation) -> Self {
        let lambdas: Vec<f64> = t.trace.iter().map(|s| s.lambda).collect();
        let steps = lambdas.len();
        SentenceSummary {
            steps,
            mean_lambda: if steps == 0 {
                0.0
            } else {
                lambdas.iter().sum::<f64>() / steps as f64
            },
            max_lambda: lambdas.iter().copied().fold(0.0, f64::max),
            references: t.references.len(),
            datastore_entries: t.datastore.entries,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OnlineRunResult {
    pub doc_id: Option<String>,
    pub bucket: LengthBucket,
    pub hypotheses: Vec<Vec<Token>>,
    pub summaries: Vec<SentenceSummary>,
    pub r_indicator: RIndicatorReport,
    pub metrics: MetricReport,
}

/// Translates `doc` in order, feeding back each gold pair after its sentence.
///
/// Sentence `j` only ever sees pairs `1..j-1`.
pub fn run_online<M: TranslationModel + ?Sized>(
    doc: &Document,
    model: &M,
    vocab: &Vocabulary,
    fusion: &FusionConfig,
    decoder: &DecoderConfig,
) -> Result<OnlineRunResult> {
    Ok(run_online_session(doc, model, vocab, fusion, decoder)?.0)
}

/// Like [`run_online`], also returning the final feedback index.
pub fn run_online_session<M: TranslationModel + ?Sized>(
    doc: &Document,
    model: &M,
    vocab: &Vocabulary,
    fusion: &FusionConfig,
    decoder: &DecoderConfig,
) -> Result<(OnlineRunResult, InvertedIndex)> {
    if doc.is_empty() {
        return Err(Error::config(
            "document",
            "must contain at least one sentence",
        ));
    }
    let mut session = OnlineSession::new(model, vocab, *fusion, *decoder);
    let mut hypotheses = Vec::with_capacity(doc.len());
    let mut summaries = Vec::with_capacity(doc.len());
    for pair in &doc.sentences {
        let t = session.translate(&pair.source)?;
        hypotheses.push(vocab.decode(t.output()));
        summaries.push(SentenceSummary::from_translation(&t));
        session.feedback(pair.source.clone(), pair.target.clone())?;
    }
    let refs: Vec<Vec<Token>> = doc.sentences.iter().map(|p| p.target.clone()).collect();
    let result = OnlineRunResult {
        doc_id: doc.id.clone(),
        bucket: doc.bucket(),
        r_indicator: r_indicator(&hypotheses, &refs)?,
        metrics: MetricReport::compute(&hypotheses, &refs)?,
        hypotheses,
        summaries,
    };
    Ok((result, session.index))
}
