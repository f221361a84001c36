use std::path::PathBuf;

use clap::Args;
use skmt_core::metrics::corpus_similarity_histogram;
use skmt_core::{InvertedIndex, Tokenizer};

use crate::io::{invalid, load_corpus, read_sentences, write_json};

#[derive(Args, Debug)]
pub struct AnalyzeSimArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// Test sources, one per line.
    #[arg(long)]
    pub test: PathBuf,
    /// Reuse a prebuilt index instead of indexing the corpus.
    #[arg(long)]
    pub index: Option<PathBuf>,
    /// BM25 candidates compared per sentence.
    #[arg(long, default_value_t = 64)]
    pub top_n: usize,
    /// Compare against every corpus source instead of the BM25 candidates.
    #[arg(long)]
    pub exhaustive: bool,
    #[arg(long)]
    pub lowercase: bool,
    #[arg(long, value_name = "FILE")]
    pub json: Option<PathBuf>,
}

pub fn run(args: &AnalyzeSimArgs) -> anyhow::Result<()> {
    let tok = Tokenizer {
        lowercase: args.lowercase,
    };
    let corpus = load_corpus(&args.corpus, tok)?;
    let index = match &args.index {
        Some(p) => InvertedIndex::load(p)?,
        None => InvertedIndex::build(&corpus),
    };
    if index.doc_count() != corpus.len() {
        return Err(invalid(format!(
            "index holds {} pairs but the corpus has {}",
            index.doc_count(),
            corpus.len()
        )));
    }
    let tests: Vec<_> = read_sentences(&args.test, tok)?
        .into_iter()
        .filter(|s| !s.is_empty())
        .collect();
    let hist = corpus_similarity_histogram(&index, &corpus, &tests, args.top_n, args.exhaustive);
    print!("{}", hist.to_table());
    if let Some(path) = &args.json {
        write_json(path, &hist)?;
    }
    Ok(())
}
