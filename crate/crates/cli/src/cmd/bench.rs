use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use rayon::prelude::*;
use serde::Serialize;
use skmt_core::metrics::render_table;
use skmt_core::{beam_search, FusionConfig, Mode, Token, Translation};

use crate::config::{ConfigArgs, RunConfig};
use crate::io::{invalid, pool, read_sentences, tokenizer, write_json, Engine};

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Source sentences, one per line.
    #[arg(long)]
    pub test: PathBuf,
    /// Concurrent sentence workers per measurement.
    #[arg(long, default_value = "1,4,8,16", value_delimiter = ',')]
    pub widths: Vec<usize>,
    /// Timed repetitions after one warm-up pass.
    #[arg(long, default_value_t = 3)]
    pub reps: usize,
    /// Systems to time: base, skmt1, skmt2, or config (the resolved run config).
    #[arg(long, default_value = "base,skmt1,skmt2", value_delimiter = ',')]
    pub systems: Vec<String>,
    #[arg(long, value_name = "FILE")]
    pub json: Option<PathBuf>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchRow {
    pub system: String,
    pub width: usize,
    pub ms_per_sentence: f64,
    /// Base ms/sentence at the same width divided by this row's.
    pub speed: Option<f64>,
    pub mean_entries: f64,
    pub mean_key_bytes: f64,
    pub mean_retrieval_ms: f64,
}

fn system(name: &str, resolved: &FusionConfig) -> anyhow::Result<FusionConfig> {
    Ok(match name {
        "base" => FusionConfig {
            mode: Mode::Base,
            ..*resolved
        },
        "skmt1" => FusionConfig::skmt1(),
        "skmt2" => FusionConfig::skmt2(),
        "config" => *resolved,
        other => {
            return Err(invalid(format!(
                "invalid systems: unknown system {other:?}"
            )))
        }
    })
}

fn decode_all(
    engine: &Engine,
    cfg: &RunConfig,
    fusion: &FusionConfig,
    sources: &[Vec<Token>],
) -> skmt_core::Result<Vec<Translation>> {
    sources
        .par_iter()
        .map(|s| {
            beam_search(
                &engine.model,
                &engine.vocab,
                engine.references(),
                s,
                fusion,
                &cfg.decoder,
            )
        })
        .collect()
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        (xs[n / 2 - 1] + xs[n / 2]) / 2.0
    }
}

pub fn run(args: &BenchArgs) -> anyhow::Result<()> {
    if args.reps < 3 {
        return Err(invalid("invalid reps: at least 3 repetitions are required"));
    }
    if args.widths.is_empty() || args.widths.contains(&0) {
        return Err(invalid("invalid widths: must be positive"));
    }
    let mut cfg = args.config.resolve()?;
    let sources: Vec<Vec<Token>> = read_sentences(&args.test, tokenizer(&cfg))?
        .into_iter()
        .filter(|s| !s.is_empty())
        .collect();
    if sources.is_empty() {
        return Err(invalid(format!(
            "{} contains no sentences",
            args.test.display()
        )));
    }
    let systems: Vec<(String, FusionConfig)> = args
        .systems
        .iter()
        .map(|n| system(n, &cfg.fusion).map(|f| (n.clone(), f)))
        .collect::<anyhow::Result<_>>()?;
    let needs_index = systems.iter().any(|(_, f)| f.mode == Mode::Skmt);
    cfg.fusion.mode = if needs_index { Mode::Skmt } else { Mode::Base };
    // load and table construction stay outside the timed region
    let engine = Engine::open(&cfg, &sources)?;

    let n = sources.len() as f64;
    let mut rows = Vec::new();
    for &width in &args.widths {
        let workers = pool(Some(width))?;
        let mut base_ms = None;
        for (name, fusion) in &systems {
            let mut times = Vec::with_capacity(args.reps);
            let mut last = Vec::new();
            for rep in 0..=args.reps {
                let started = Instant::now();
                last = workers.install(|| decode_all(&engine, &cfg, fusion, &sources))?;
                if rep > 0 {
                    times.push(started.elapsed().as_secs_f64() * 1000.0 / n);
                }
            }
            let ms = median(times);
            if fusion.mode == Mode::Base && base_ms.is_none() {
                base_ms = Some(ms);
            }
            rows.push(BenchRow {
                system: name.clone(),
                width,
                ms_per_sentence: ms,
                speed: None,
                mean_entries: last.iter().map(|t| t.datastore.entries as f64).sum::<f64>() / n,
                mean_key_bytes: last
                    .iter()
                    .map(|t| t.datastore.key_bytes as f64)
                    .sum::<f64>()
                    / n,
                mean_retrieval_ms: last
                    .iter()
                    .map(|t| t.timing.retrieval.as_secs_f64() * 1000.0)
                    .sum::<f64>()
                    / n,
            });
        }
        if let Some(base) = base_ms {
            for row in rows.iter_mut().filter(|r| r.width == width) {
                row.speed = Some(base / row.ms_per_sentence);
            }
        }
    }

    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.system.clone(),
                r.width.to_string(),
                format!("{:.3}", r.ms_per_sentence),
                r.speed.map_or("-".into(), |s| format!("x{s:.2}")),
                format!("{:.1}", r.mean_entries),
                format!("{:.0}", r.mean_key_bytes),
                format!("{:.4}", r.mean_retrieval_ms),
            ]
        })
        .collect();
    print!(
        "{}",
        render_table(
            &[
                "system",
                "width",
                "ms/sent",
                "speed",
                "entries",
                "key bytes",
                "retrieval ms"
            ],
            &body
        )
    );
    if let Some(path) = &args.json {
        write_json(path, &rows)?;
    }
    Ok(())
}
