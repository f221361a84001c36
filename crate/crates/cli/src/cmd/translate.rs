use std::path::{Path, PathBuf};

use clap::Args;
use rayon::prelude::*;
use serde::Serialize;
use skmt_core::{beam_search, detokenize, Token, Translation};

use crate::config::{ConfigArgs, RunConfig};
use crate::io::{emit, pool, read_sentences, tokenizer, write_atomic, Engine};

#[derive(Args, Debug)]
pub struct TranslateArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Source sentences, one per line.
    #[arg(long)]
    pub input: PathBuf,
    /// Hypothesis file; stdout when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Per-step JSONL trace (lambda, nearest distance, neighbors).
    #[arg(long, value_name = "FILE")]
    pub trace: Option<PathBuf>,
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Serialize)]
struct TraceNeighbor<'a> {
    token: &'a str,
    distance_sq: f64,
}

#[derive(Serialize)]
struct TraceLine<'a> {
    sentence: usize,
    step: usize,
    token: &'a str,
    d0: Option<f64>,
    lambda: f64,
    neighbors: Vec<TraceNeighbor<'a>>,
}

/// Decodes every sentence; empty inputs give `None`.
pub fn translate_all(
    engine: &Engine,
    cfg: &RunConfig,
    sources: &[Vec<Token>],
    jobs: Option<usize>,
) -> anyhow::Result<Vec<Option<Translation>>> {
    let refs = engine.references();
    let decode = |s: &Vec<Token>| -> skmt_core::Result<Option<Translation>> {
        if s.is_empty() {
            return Ok(None);
        }
        beam_search(
            &engine.model,
            &engine.vocab,
            refs,
            s,
            &cfg.fusion,
            &cfg.decoder,
        )
        .map(Some)
    };
    let out = pool(jobs)?.install(|| {
        sources
            .par_iter()
            .map(decode)
            .collect::<skmt_core::Result<Vec<_>>>()
    })?;
    Ok(out)
}

pub fn hypothesis_text(engine: &Engine, t: &Option<Translation>) -> String {
    t.as_ref().map_or_else(String::new, |t| {
        detokenize(&engine.vocab.decode(t.output()))
    })
}

fn trace_jsonl(engine: &Engine, translations: &[Option<Translation>]) -> anyhow::Result<String> {
    let name = |id| engine.vocab.token(id).map_or("<?>", |t: &Token| t.as_str());
    let mut out = String::new();
    for (sentence, t) in translations.iter().enumerate() {
        let Some(t) = t else { continue };
        for s in &t.trace {
            let line = TraceLine {
                sentence,
                step: s.step,
                token: name(s.chosen),
                d0: s.d0,
                lambda: s.lambda,
                neighbors: s
                    .neighbors
                    .iter()
                    .map(|&(v, d)| TraceNeighbor {
                        token: name(v),
                        distance_sq: d,
                    })
                    .collect(),
            };
            out.push_str(&serde_json::to_string(&line)?);
            out.push('\n');
        }
    }
    Ok(out)
}

pub fn run(args: &TranslateArgs) -> anyhow::Result<()> {
    let cfg = args.config.resolve()?;
    let sources = read_sentences(&args.input, tokenizer(&cfg))?;
    let engine = Engine::open(&cfg, &sources)?;
    let translations = translate_all(&engine, &cfg, &sources, args.jobs)?;
    let mut text = String::new();
    for t in &translations {
        text.push_str(&hypothesis_text(&engine, t));
        text.push('\n');
    }
    if let Some(path) = &args.trace {
        write_atomic(path, trace_jsonl(&engine, &translations)?.as_bytes())?;
    }
    emit(args.output.as_deref().map(Path::new), &text)
}
