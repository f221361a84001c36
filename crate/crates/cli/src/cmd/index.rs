use std::path::PathBuf;

use clap::Args;
use skmt_core::{InvertedIndex, Tokenizer};

use crate::io::{load_corpus, write_atomic};

#[derive(Args, Debug)]
pub struct IndexArgs {
    /// Parallel corpus (TSV or JSONL).
    #[arg(long)]
    pub corpus: PathBuf,
    /// Destination of the binary index.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub lowercase: bool,
    /// Also write a JSON dump of the postings.
    #[arg(long, value_name = "FILE")]
    pub json: Option<PathBuf>,
}

pub fn run(args: &IndexArgs) -> anyhow::Result<()> {
    let corpus = load_corpus(
        &args.corpus,
        Tokenizer {
            lowercase: args.lowercase,
        },
    )?;
    if corpus.is_empty() {
        eprintln!(
            "warning: {} contains no sentence pairs",
            args.corpus.display()
        );
    }
    let index = InvertedIndex::build(&corpus);
    write_atomic(&args.out, &index.to_bytes())?;
    if let Some(path) = &args.json {
        write_atomic(path, index.to_json().as_bytes())?;
    }
    println!("doc_count\t{}", index.doc_count());
    println!("terms\t{}", index.term_count());
    println!("source_tokens\t{}", index.total_length());
    println!("avg_doc_length\t{:.2}", index.avg_doc_length());
    Ok(())
}
