use std::path::PathBuf;

use clap::Args;
use rayon::prelude::*;
use serde::Serialize;
use skmt_core::metrics::RIndicatorReport;
use skmt_core::online::load_documents;
use skmt_core::{
    detokenize, run_online, CorpusFormat, MetricReport, OnlineRunResult, Token, ToyModel,
};

use crate::config::ConfigArgs;
use crate::io::{invalid, pool, tokenizer, write_atomic, write_json};

#[derive(Args, Debug)]
pub struct OnlineArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Documents as JSONL with "src", "tgt" and optional "doc_id"; a TSV file is one document.
    #[arg(long)]
    pub docs: PathBuf,
    /// Hypotheses in document order, one per line.
    #[arg(long, value_name = "FILE")]
    pub hyps: Option<PathBuf>,
    /// JSON report destination.
    #[arg(long, value_name = "FILE")]
    pub json: Option<PathBuf>,
    /// Documents processed concurrently.
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Serialize)]
struct OnlineReport<'a> {
    documents: &'a [OnlineRunResult],
    r_indicator: RIndicatorReport,
    metrics: MetricReport,
}

pub fn run(args: &OnlineArgs) -> anyhow::Result<()> {
    let cfg = args.config.resolve()?;
    let docs = load_documents(
        &args.docs,
        CorpusFormat::from_path(&args.docs),
        tokenizer(&cfg),
    )?;
    if docs.is_empty() {
        return Err(invalid(format!(
            "{} contains no documents",
            args.docs.display()
        )));
    }
    let results = pool(args.jobs)?.install(|| {
        docs.par_iter()
            .map(|doc| {
                let vocab = doc.vocabulary();
                let model = ToyModel::new(cfg.model, vocab.len())?;
                run_online(doc, &model, &vocab, &cfg.fusion, &cfg.decoder)
            })
            .collect::<skmt_core::Result<Vec<_>>>()
    })?;

    let mut r = RIndicatorReport::default();
    for res in &results {
        r.merge(&res.r_indicator);
    }
    let hyps: Vec<Vec<Token>> = results
        .iter()
        .flat_map(|res| res.hypotheses.iter().cloned())
        .collect();
    let refs: Vec<Vec<Token>> = docs
        .iter()
        .flat_map(|d| d.sentences.iter().map(|p| p.target.clone()))
        .collect();
    let metrics = MetricReport::compute(&hyps, &refs)?;

    print!("{}", r.to_table());
    println!("\nBLEU\t{:.2}\nChrF\t{:.2}", metrics.bleu, metrics.chrf);
    if let Some(path) = &args.hyps {
        let mut text = String::new();
        for h in &hyps {
            text.push_str(&detokenize(h));
            text.push('\n');
        }
        write_atomic(path, text.as_bytes())?;
    }
    if let Some(path) = &args.json {
        write_json(
            path,
            &OnlineReport {
                documents: &results,
                r_indicator: r,
                metrics,
            },
        )?;
    }
    Ok(())
}
