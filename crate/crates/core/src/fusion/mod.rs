//! Distance-aware fusion of retrieval and model distributions, and the beam
//! search that drives it.

mod beam;
mod knn;

pub use beam::{
    beam_search, decode_with_datastore, fused_step, length_penalty, DecodeTiming, FusedStep,
    Hypothesis, ReferenceStore, StepTrace, Translation,
};
pub use knn::{compute_lambda, fuse, knn_distribution};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::retrieval::RetrievalConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Model-only decoding.
    Base,
    /// Retrieval-augmented decoding over a per-input datastore.
    Skmt,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "base" => Ok(Mode::Base),
            "skmt" => Ok(Mode::Skmt),
            other => Err(Error::config("mode", format!("unknown mode {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FusionConfig {
    pub mode: Mode,
    /// Neighbors retrieved per decoding step.
    pub k: usize,
    /// Temperature for the kNN softmax and the lambda cutoff.
    pub tau: f64,
    /// Sentence retrieval; `retrieval.m` is the number of reference pairs.
    pub retrieval: RetrievalConfig,
}

impl Default for FusionConfig {
    fn default() -> Self {
        Self::skmt1()
    }
}

impl FusionConfig {
    fn preset(m: usize, k: usize) -> Self {
        FusionConfig {
            mode: Mode::Skmt,
            k,
            tau: 100.0,
            retrieval: RetrievalConfig {
                m,
                ..RetrievalConfig::default()
            },
        }
    }

    /// Two references, one neighbor, temperature 100.
    pub fn skmt1() -> Self {
        Self::preset(2, 1)
    }

    /// Sixteen references, two neighbors, temperature 100.
    pub fn skmt2() -> Self {
        Self::preset(16, 2)
    }

    pub fn base() -> Self {
        FusionConfig {
            mode: Mode::Base,
            ..Self::skmt1()
        }
    }

    pub fn m(&self) -> usize {
        self.retrieval.m
    }

    pub fn with_m(mut self, m: usize) -> Self {
        self.retrieval.m = m;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(Error::config("k", "must be at least 1"));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::config("tau", "must be positive"));
        }
        self.retrieval.validate()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DecoderConfig {
    pub beam: usize,
    pub length_penalty: f64,
    /// Generated-token limit (end-of-sentence included); `None` means
    /// `2 * |source| + 16`.
    pub max_len: Option<usize>,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        Self {
            beam: 4,
            length_penalty: 0.6,
            max_len: None,
        }
    }
}

impl DecoderConfig {
    pub fn validate(&self) -> Result<()> {
        if self.beam < 1 {
            return Err(Error::config("beam", "must be at least 1"));
        }
        if self.max_len == Some(0) {
            return Err(Error::config("max_len", "must be at least 1"));
        }
        if !self.length_penalty.is_finite() {
            return Err(Error::config("length_penalty", "must be finite"));
        }
        Ok(())
    }

    pub fn max_len_for(&self, source_len: usize) -> usize {
        self.max_len.unwrap_or(2 * source_len + 16)
    }
}
