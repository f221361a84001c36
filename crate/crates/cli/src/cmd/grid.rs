use std::path::PathBuf;

use anyhow::Context;
use clap::Args;
use rayon::prelude::*;
use serde::Serialize;
use skmt_core::metrics::render_table;
use skmt_core::{beam_search, FusionConfig, MetricReport, Mode, Token};

use crate::config::{ConfigArgs, RunConfig};
use crate::io::{invalid, load_corpus, pool, tokenizer, write_json, Engine};

pub const DEFAULT_K: &str = "1,2,3,4";
pub const DEFAULT_M: &str = "1,2,4,8,16";
pub const DEFAULT_TAU: &str = "5,10,20,50,100,150,200";

#[derive(Args, Debug)]
pub struct GridArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Development pairs (TSV or JSONL) with references.
    #[arg(long)]
    pub dev: PathBuf,
    #[arg(long, default_value = DEFAULT_K)]
    pub k_grid: String,
    #[arg(long, default_value = DEFAULT_M)]
    pub m_grid: String,
    #[arg(long, default_value = DEFAULT_TAU)]
    pub tau_grid: String,
    /// JSON report destination.
    #[arg(long, value_name = "FILE")]
    pub json: Option<PathBuf>,
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridRow {
    pub k: usize,
    pub m: usize,
    pub tau: f64,
    pub bleu: f64,
    pub chrf: f64,
}

fn parse_list<T: std::str::FromStr>(name: &str, text: &str) -> anyhow::Result<Vec<T>>
where
    T::Err: std::error::Error + Send + Sync + 'static,
{
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<T>()
                .with_context(|| format!("invalid {name} value {s:?}"))
        })
        .collect()
}

pub fn cells(args: &GridArgs, base: &FusionConfig) -> anyhow::Result<Vec<FusionConfig>> {
    let ks: Vec<usize> = parse_list("k", &args.k_grid)?;
    let ms: Vec<usize> = parse_list("m", &args.m_grid)?;
    let taus: Vec<f64> = parse_list("tau", &args.tau_grid)?;
    if ks.is_empty() || ms.is_empty() || taus.is_empty() {
        return Err(invalid(
            "empty grid: k, m and tau each need at least one value",
        ));
    }
    let mut out = Vec::with_capacity(ks.len() * ms.len() * taus.len());
    for &k in &ks {
        for &m in &ms {
            for &tau in &taus {
                let cell = FusionConfig {
                    mode: Mode::Skmt,
                    k,
                    tau,
                    ..*base
                }
                .with_m(m);
                cell.validate()?;
                out.push(cell);
            }
        }
    }
    Ok(out)
}

fn evaluate(
    engine: &Engine,
    cfg: &RunConfig,
    cell: &FusionConfig,
    dev: &[(Vec<Token>, Vec<Token>)],
) -> anyhow::Result<GridRow> {
    let mut hyps = Vec::with_capacity(dev.len());
    for (source, _) in dev {
        let t = beam_search(
            &engine.model,
            &engine.vocab,
            engine.references(),
            source,
            cell,
            &cfg.decoder,
        )?;
        hyps.push(engine.vocab.decode(t.output()));
    }
    let refs: Vec<Vec<Token>> = dev.iter().map(|(_, t)| t.clone()).collect();
    let metrics = MetricReport::compute(&hyps, &refs)?;
    Ok(GridRow {
        k: cell.k,
        m: cell.m(),
        tau: cell.tau,
        bleu: metrics.bleu,
        chrf: metrics.chrf,
    })
}

/// Rows sorted by BLEU, then ChrF, best first; ties keep grid order.
pub fn run_grid(
    engine: &Engine,
    cfg: &RunConfig,
    cells: &[FusionConfig],
    dev: &[(Vec<Token>, Vec<Token>)],
    jobs: Option<usize>,
) -> anyhow::Result<Vec<GridRow>> {
    let mut rows = pool(jobs)?.install(|| {
        cells
            .par_iter()
            .map(|cell| evaluate(engine, cfg, cell, dev))
            .collect::<anyhow::Result<Vec<_>>>()
    })?;
    rows.sort_by(|a, b| b.bleu.total_cmp(&a.bleu).then(b.chrf.total_cmp(&a.chrf)));
    Ok(rows)
}

pub fn render(rows: &[GridRow]) -> String {
    let body: Vec<Vec<String>> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            vec![
                (i + 1).to_string(),
                r.k.to_string(),
                r.m.to_string(),
                format!("{}", r.tau),
                format!("{:.2}", r.bleu),
                format!("{:.2}", r.chrf),
            ]
        })
        .collect();
    render_table(&["rank", "k", "m", "tau", "BLEU", "ChrF"], &body)
}

pub fn run(args: &GridArgs) -> anyhow::Result<()> {
    let mut cfg = args.config.resolve()?;
    cfg.fusion.mode = Mode::Skmt;
    let cells = cells(args, &cfg.fusion)?;
    let dev = load_corpus(&args.dev, tokenizer(&cfg))?;
    if dev.is_empty() {
        return Err(invalid(format!(
            "{} contains no sentence pairs",
            args.dev.display()
        )));
    }
    let dev: Vec<(Vec<Token>, Vec<Token>)> = dev
        .pairs()
        .iter()
        .map(|p| (p.source.clone(), p.target.clone()))
        .collect();
    // same vocabulary as `translate` over the dev sources
    let sources: Vec<Vec<Token>> = dev.iter().map(|(s, _)| s.clone()).collect();
    let engine = Engine::open(&cfg, &sources)?;
    let rows = run_grid(&engine, &cfg, &cells, &dev, args.jobs)?;
    print!("{}", render(&rows));
    if let Some(path) = &args.json {
        write_json(path, &rows)?;
    }
    Ok(())
}
