use std::fmt;
use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context};
use serde::Serialize;
use skmt_core::{
    CorpusFormat, InvertedIndex, Mode, ParallelCorpus, Token, Tokenizer, ToyModel, Vocabulary,
};

use crate::config::RunConfig;

/// Input that parsed but is semantically unusable; exits with code 2.
#[derive(Debug)]
pub struct Invalid(pub String);

impl fmt::Display for Invalid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Invalid {}

pub fn invalid(message: impl Into<String>) -> anyhow::Error {
    Invalid(message.into()).into()
}

/// Writes through a temporary file in the destination directory, then renames.
pub fn write_atomic(path: &Path, contents: &[u8]) -> anyhow::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("creating temp file in {}", dir.display()))?;
    tmp.write_all(contents)?;
    tmp.flush()?;
    tmp.persist(path)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// Writes to `path`, or to stdout when no path is given.
pub fn emit(path: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

/// One tokenized sentence per line; blank lines stay as empty sentences.
pub fn read_sentences(path: &Path, tokenizer: Tokenizer) -> anyhow::Result<Vec<Vec<Token>>> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(text.lines().map(|l| tokenizer.tokenize(l)).collect())
}

pub fn tokenizer(cfg: &RunConfig) -> Tokenizer {
    Tokenizer {
        lowercase: cfg.lowercase,
    }
}

pub fn load_corpus(path: &Path, tokenizer: Tokenizer) -> anyhow::Result<ParallelCorpus> {
    ParallelCorpus::load(path, CorpusFormat::from_path(path), tokenizer)
        .with_context(|| format!("loading corpus {}", path.display()))
}

/// Reference corpus, index, vocabulary and model for decoding commands.
pub struct Engine {
    pub corpus: ParallelCorpus,
    pub index: Option<InvertedIndex>,
    pub vocab: Vocabulary,
    pub model: ToyModel,
}

impl Engine {
    /// The vocabulary covers the corpus (when given) and then `extra` tokens,
    /// so ids do not depend on the decoding mode.
    pub fn open(cfg: &RunConfig, extra: &[Vec<Token>]) -> anyhow::Result<Self> {
        let tok = tokenizer(cfg);
        let corpus = match &cfg.corpus {
            Some(p) => load_corpus(p, tok)?,
            None => ParallelCorpus::new(),
        };
        let index = match cfg.fusion.mode {
            Mode::Base => None,
            Mode::Skmt => {
                if cfg.corpus.is_none() {
                    bail!("skmt mode requires --corpus");
                }
                let Some(path) = &cfg.index else {
                    bail!("skmt mode requires --index (build one with `skmt index`)");
                };
                let index = InvertedIndex::load(path)
                    .with_context(|| format!("loading index {}", path.display()))?;
                if index.doc_count() != corpus.len() {
                    return Err(invalid(format!(
                        "index holds {} pairs but the corpus has {}",
                        index.doc_count(),
                        corpus.len()
                    )));
                }
                Some(index)
            }
        };
        let mut vocab = Vocabulary::build(&corpus);
        for s in extra {
            vocab.extend(s);
        }
        let model = ToyModel::new(cfg.model, vocab.len())?;
        Ok(Engine {
            corpus,
            index,
            vocab,
            model,
        })
    }

    pub fn references(&self) -> Option<skmt_core::ReferenceStore<'_>> {
        self.index.as_ref().map(|index| skmt_core::ReferenceStore {
            index,
            corpus: &self.corpus,
        })
    }
}

/// Builds a rayon pool; `None` uses the default thread count.
pub fn pool(jobs: Option<usize>) -> anyhow::Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        if n == 0 {
            return Err(invalid("invalid jobs: must be at least 1"));
        }
        builder = builder.num_threads(n);
    }
    Ok(builder.build()?)
}
