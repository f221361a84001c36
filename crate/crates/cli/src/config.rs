use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::Args;
use serde::{Deserialize, Serialize};
use skmt_core::{DecoderConfig, FusionConfig, Mode, ToyModelSpec};

/// Everything a run needs, as read from `--config` and then overridden by flags.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub fusion: FusionConfig,
    pub decoder: DecoderConfig,
    pub model: ToyModelSpec,
    pub lowercase: bool,
    pub corpus: Option<PathBuf>,
    pub index: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn validate(&self) -> skmt_core::Result<()> {
        self.fusion.validate()?;
        self.decoder.validate()?;
        self.model.validate()
    }
}

#[derive(Args, Clone, Debug, Default)]
pub struct ConfigArgs {
    /// JSON run configuration; flags override its values.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Parallel corpus (TSV or JSONL) used for retrieval and the vocabulary.
    #[arg(long, value_name = "FILE")]
    pub corpus: Option<PathBuf>,
    /// Binary index built by `skmt index` over the same corpus.
    #[arg(long, value_name = "FILE")]
    pub index: Option<PathBuf>,
    #[arg(long, value_parser = ["base", "skmt"])]
    pub mode: Option<String>,
    /// Preset: skmt mode, m=2, k=1, tau=100.
    #[arg(long, conflicts_with = "skmt2")]
    pub skmt1: bool,
    /// Preset: skmt mode, m=16, k=2, tau=100.
    #[arg(long)]
    pub skmt2: bool,
    /// Reference pairs per input.
    #[arg(long)]
    pub m: Option<usize>,
    /// Neighbors per decoding step.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub top_n: Option<usize>,
    #[arg(long)]
    pub beam: Option<usize>,
    #[arg(long)]
    pub length_penalty: Option<f64>,
    #[arg(long)]
    pub max_len: Option<usize>,
    #[arg(long)]
    pub hidden_dim: Option<usize>,
    /// Seed for the toy model embedding table.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub lowercase: bool,
}

impl ConfigArgs {
    /// Defaults, then the config file, then presets, then individual flags.
    pub fn resolve(&self) -> anyhow::Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if self.skmt1 {
            cfg.fusion = FusionConfig {
                retrieval: cfg.fusion.retrieval,
                ..FusionConfig::skmt1()
            }
            .with_m(2);
        }
        if self.skmt2 {
            cfg.fusion = FusionConfig {
                retrieval: cfg.fusion.retrieval,
                ..FusionConfig::skmt2()
            }
            .with_m(16);
        }
        if let Some(mode) = &self.mode {
            cfg.fusion.mode = mode.parse::<Mode>()?;
        }
        set(&mut cfg.fusion.retrieval.m, self.m);
        set(&mut cfg.fusion.k, self.k);
        set(&mut cfg.fusion.tau, self.tau);
        set(&mut cfg.fusion.retrieval.top_n, self.top_n);
        set(&mut cfg.decoder.beam, self.beam);
        set(&mut cfg.decoder.length_penalty, self.length_penalty);
        if self.max_len.is_some() {
            cfg.decoder.max_len = self.max_len;
        }
        set(&mut cfg.model.hidden_dim, self.hidden_dim);
        set(&mut cfg.model.seed, self.seed);
        cfg.lowercase |= self.lowercase;
        if self.corpus.is_some() {
            cfg.corpus = self.corpus.clone();
        }
        if self.index.is_some() {
            cfg.index = self.index.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}
