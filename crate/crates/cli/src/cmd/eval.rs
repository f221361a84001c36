use std::path::PathBuf;

use clap::Args;
use serde::Serialize;
use skmt_core::metrics::{
    word_accuracy_by_frequency, FrequencyBucketTable, DEFAULT_FREQUENCY_EDGES,
};
use skmt_core::{MetricReport, Tokenizer};

use crate::io::{load_corpus, read_sentences, write_json};

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// Hypotheses, one per line.
    #[arg(long)]
    pub hyp: PathBuf,
    /// References, one per line, aligned with the hypotheses.
    #[arg(long = "ref")]
    pub reference: PathBuf,
    /// Training corpus for word accuracy by target-side frequency.
    #[arg(long)]
    pub train: Option<PathBuf>,
    #[arg(long)]
    pub lowercase: bool,
    /// JSON report destination.
    #[arg(long, value_name = "FILE")]
    pub json: Option<PathBuf>,
}

#[derive(Serialize)]
struct EvalReport {
    sentences: usize,
    #[serde(flatten)]
    metrics: MetricReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    frequency: Option<FrequencyBucketTable>,
}

pub fn run(args: &EvalArgs) -> anyhow::Result<()> {
    let tok = Tokenizer {
        lowercase: args.lowercase,
    };
    let hyps = read_sentences(&args.hyp, tok)?;
    let refs = read_sentences(&args.reference, tok)?;
    let metrics = MetricReport::compute(&hyps, &refs)?;
    let frequency = match &args.train {
        Some(path) => {
            let train = load_corpus(path, tok)?;
            Some(word_accuracy_by_frequency(
                &hyps,
                &refs,
                &train,
                &DEFAULT_FREQUENCY_EDGES,
            )?)
        }
        None => None,
    };
    println!("BLEU\t{:.2}", metrics.bleu);
    println!("ChrF\t{:.2}", metrics.chrf);
    if let Some(table) = &frequency {
        print!("\n{}", table.to_table());
    }
    if let Some(path) = &args.json {
        write_json(
            path,
            &EvalReport {
                sentences: hyps.len(),
                metrics,
                frequency,
            },
        )?;
    }
    Ok(())
}
