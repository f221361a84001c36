use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::{compute_lambda, fuse, knn_distribution, DecoderConfig, FusionConfig, Mode};
use crate::corpus::{PairId, ParallelCorpus, Token, TokenId, Vocabulary};
use crate::datastore::{DynamicDatastore, Footprint};
use crate::error::{Error, Result};
use crate::model::{ContextVector, Distribution, TranslationModel};
use crate::retrieval::{rank_references, InvertedIndex};

/// GNMT length penalty, `((5 + length) / 6)^alpha`.
pub fn length_penalty(length: usize, alpha: f64) -> f64 {
    ((5.0 + length as f64) / 6.0).powf(alpha)
}

/// Read-only reference corpus and its index.
#[derive(Clone, Copy, Debug)]
pub struct ReferenceStore<'a> {
    pub index: &'a InvertedIndex,
    pub corpus: &'a ParallelCorpus,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hypothesis {
    /// Starts with BOS; ends with EOS when `finished`.
    pub tokens: Vec<TokenId>,
    /// Sum of per-step log probabilities under the fused distribution.
    pub logprob: f64,
    pub finished: bool,
    /// `logprob / length_penalty(generated length)`.
    pub score: f64,
}

impl Hypothesis {
    /// Generated tokens without BOS and EOS.
    pub fn output(&self) -> &[TokenId] {
        let body = &self.tokens[1..];
        match body.last() {
            Some(&TokenId::EOS) => &body[..body.len() - 1],
            _ => body,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepTrace {
    pub step: usize,
    /// Squared distance to the nearest neighbor; absent on an empty datastore.
    pub d0: Option<f64>,
    pub lambda: f64,
    pub chosen: TokenId,
    /// `(value, squared distance)` of the retrieved neighbors, nearest first.
    pub neighbors: Vec<(TokenId, f64)>,
}

/// Fused next-token distribution for one decoding context.
#[derive(Clone, Debug, PartialEq)]
pub struct FusedStep {
    pub dist: Distribution,
    pub hidden: ContextVector,
    pub d0: Option<f64>,
    pub lambda: f64,
    pub neighbors: Vec<(TokenId, f64)>,
}

/// One decoding step: query the datastore with the context's hidden state,
/// derive lambda from the nearest distance, and mix.
///
/// The model distribution is not evaluated when lambda is exactly 1, and the
/// kNN distribution is not evaluated when lambda is 0.
pub fn fused_step<M: TranslationModel + ?Sized>(
    model: &M,
    datastore: Option<&DynamicDatastore>,
    source_state: &ContextVector,
    prefix: &[TokenId],
    cfg: &FusionConfig,
) -> Result<FusedStep> {
    let hidden = model.hidden_state(source_state, prefix)?;
    let neighbors = match datastore {
        Some(ds) if cfg.mode == Mode::Skmt && !ds.is_empty() => ds.knn_search(&hidden, cfg.k)?,
        _ => Default::default(),
    };
    let d0 = neighbors.nearest_distance_sq();
    let lambda = d0.map_or(0.0, |d| compute_lambda(d, cfg.tau));
    let dist = if lambda == 0.0 {
        model.output_distribution(&hidden)
    } else {
        let p_knn = knn_distribution(&neighbors, cfg.tau, model.vocab_size())?;
        if lambda == 1.0 {
            p_knn
        } else {
            fuse(&p_knn, &model.output_distribution(&hidden), lambda)?
        }
    };
    Ok(FusedStep {
        dist,
        hidden,
        d0,
        lambda,
        neighbors: neighbors.iter().map(|n| (n.value, n.distance_sq)).collect(),
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DecodeTiming {
    pub retrieval: Duration,
    pub datastore: Duration,
    pub search: Duration,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Translation {
    pub hypothesis: Hypothesis,
    /// One record per step along the returned hypothesis.
    pub trace: Vec<StepTrace>,
    pub references: Vec<PairId>,
    pub datastore: Footprint,
    pub timing: DecodeTiming,
}

impl Translation {
    pub fn output(&self) -> &[TokenId] {
        self.hypothesis.output()
    }
}

/// Translates one sentence.
///
/// In `skmt` mode the reference pairs are retrieved and the datastore built
/// once, then shared by every beam and step. Base mode, a missing reference
/// store, or an empty retrieval all reduce to plain model decoding.
pub fn beam_search<M: TranslationModel + ?Sized>(
    model: &M,
    vocab: &Vocabulary,
    references: Option<ReferenceStore<'_>>,
    source: &[Token],
    fcfg: &FusionConfig,
    dcfg: &DecoderConfig,
) -> Result<Translation> {
    if source.is_empty() {
        return Err(Error::EmptySource);
    }
    let mut timing = DecodeTiming::default();
    let (datastore, refs) = match (fcfg.mode, references) {
        (Mode::Skmt, Some(store)) => {
            let started = Instant::now();
            let ranked = rank_references(store.index, store.corpus, source, &fcfg.retrieval);
            timing.retrieval = started.elapsed();
            let started = Instant::now();
            let pairs = ranked.iter().filter_map(|c| store.corpus.get(c.pair_id));
            let ds = DynamicDatastore::build(model, vocab, pairs)?;
            timing.datastore = started.elapsed();
            (Some(ds), ranked.iter().map(|c| c.pair_id).collect())
        }
        _ => (None, Vec::new()),
    };
    let started = Instant::now();
    let source_ids = vocab.encode(source);
    let (hypothesis, trace) = search(model, &source_ids, datastore.as_ref(), fcfg, dcfg)?;
    timing.search = started.elapsed();
    Ok(Translation {
        hypothesis,
        trace,
        references: refs,
        datastore: datastore
            .as_ref()
            .map(DynamicDatastore::footprint)
            .unwrap_or(Footprint {
                entries: 0,
                key_bytes: 0,
            }),
        timing,
    })
}

/// Beam search against a caller-supplied datastore.
pub fn decode_with_datastore<M: TranslationModel + ?Sized>(
    model: &M,
    source: &[TokenId],
    datastore: &DynamicDatastore,
    fcfg: &FusionConfig,
    dcfg: &DecoderConfig,
) -> Result<(Hypothesis, Vec<StepTrace>)> {
    search(model, source, Some(datastore), fcfg, dcfg)
}

struct Beam {
    tokens: Vec<TokenId>,
    logprob: f64,
    trace: Vec<StepTrace>,
}

struct Candidate {
    beam: usize,
    token: TokenId,
    logprob: f64,
}

/// Highest-probability expansions, skipping BOS/PAD and zero-mass tokens.
fn top_tokens(dist: &Distribution, n: usize) -> Vec<(TokenId, f64)> {
    let mut items: Vec<(TokenId, f64)> = dist
        .probs()
        .iter()
        .enumerate()
        .filter(|(i, p)| **p > 0.0 && *i != TokenId::BOS.index() && *i != TokenId::PAD.index())
        .map(|(i, p)| (TokenId(i as u32), *p))
        .collect();
    let order = |a: &(TokenId, f64), b: &(TokenId, f64)| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0));
    if n < items.len() {
        items.select_nth_unstable_by(n - 1, order);
        items.truncate(n);
    }
    items.sort_unstable_by(order);
    items
}

fn search<M: TranslationModel + ?Sized>(
    model: &M,
    source: &[TokenId],
    datastore: Option<&DynamicDatastore>,
    fcfg: &FusionConfig,
    dcfg: &DecoderConfig,
) -> Result<(Hypothesis, Vec<StepTrace>)> {
    let width = dcfg.beam;
    let max_len = dcfg.max_len_for(source.len());
    let source_state = model.encode_source(source)?;
    let finalize = |beam: Beam, finished: bool| {
        let generated = beam.tokens.len() - 1;
        let hyp = Hypothesis {
            score: beam.logprob / length_penalty(generated.max(1), dcfg.length_penalty),
            tokens: beam.tokens,
            logprob: beam.logprob,
            finished,
        };
        (hyp, beam.trace)
    };

    let mut live = vec![Beam {
        tokens: vec![TokenId::BOS],
        logprob: 0.0,
        trace: Vec::new(),
    }];
    let mut finished: Vec<(Hypothesis, Vec<StepTrace>)> = Vec::new();

    for step in 0..max_len {
        let mut steps = Vec::with_capacity(live.len());
        let mut candidates = Vec::new();
        for (b, beam) in live.iter().enumerate() {
            let fused = fused_step(model, datastore, &source_state, &beam.tokens, fcfg)?;
            for (token, p) in top_tokens(&fused.dist, width) {
                candidates.push(Candidate {
                    beam: b,
                    token,
                    logprob: beam.logprob + p.ln(),
                });
            }
            steps.push(fused);
        }
        candidates.sort_by(|a, c| {
            c.logprob
                .total_cmp(&a.logprob)
                .then(a.beam.cmp(&c.beam))
                .then(a.token.cmp(&c.token))
        });

        let mut next = Vec::with_capacity(width);
        for (rank, cand) in candidates.iter().enumerate() {
            let is_eos = cand.token == TokenId::EOS;
            if is_eos && rank >= width {
                continue;
            }
            if !is_eos && next.len() >= width {
                continue;
            }
            let parent = &live[cand.beam];
            let fused = &steps[cand.beam];
            let mut tokens = parent.tokens.clone();
            tokens.push(cand.token);
            let mut trace = parent.trace.clone();
            trace.push(StepTrace {
                step,
                d0: fused.d0,
                lambda: fused.lambda,
                chosen: cand.token,
                neighbors: fused.neighbors.clone(),
            });
            let beam = Beam {
                tokens,
                logprob: cand.logprob,
                trace,
            };
            if is_eos {
                finished.push(finalize(beam, true));
            } else {
                next.push(beam);
            }
        }
        live = next;
        if finished.len() >= width || live.is_empty() {
            break;
        }
    }

    let pool = if finished.is_empty() {
        live.into_iter().map(|b| finalize(b, false)).collect()
    } else {
        finished
    };
    pool.into_iter()
        .reduce(|best, cand| {
            if cand.0.score > best.0.score {
                cand
            } else {
                best
            }
        })
        .ok_or(Error::EmptySource)
}
