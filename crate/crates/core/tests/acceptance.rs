//! End-to-end acceptance checks. Each test prints one PASS/FAIL line.

use std::collections::HashMap;
use std::io::Write;
use std::sync::{Mutex, MutexGuard};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use skmt_core::fusion::fused_step;
use skmt_core::metrics::{corpus_similarity_histogram, SimilarityHistogram};
use skmt_core::synthetic::{
    lexical_corpus, novel_sentences, templated_domain, LexicalSpec, TemplateSpec, TestKind,
};
use skmt_core::*;

static SERIAL: Mutex<()> = Mutex::new(());

fn serial() -> MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

fn report(id: u32, name: &str, pass: bool, detail: &str) {
    let line = format!(
        "acceptance {id:>2} {:<4} {name}: {detail}\n",
        if pass { "PASS" } else { "FAIL" }
    );
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
}

fn toks(s: &str) -> Vec<Token> {
    tokenize(s)
}

fn vocab_for<'a>(
    corpus: &ParallelCorpus,
    extra: impl IntoIterator<Item = &'a Vec<Token>>,
) -> Vocabulary {
    let mut v = Vocabulary::build(corpus);
    for t in extra {
        v.extend(t);
    }
    v
}

fn toy(vocab: &Vocabulary) -> ToyModel {
    ToyModel::new(ToyModelSpec::default(), vocab.len()).unwrap()
}

fn translate(
    model: &ToyModel,
    vocab: &Vocabulary,
    index: &InvertedIndex,
    corpus: &ParallelCorpus,
    source: &[Token],
    cfg: &FusionConfig,
) -> Vec<Token> {
    let store = ReferenceStore { index, corpus };
    let out = beam_search(
        model,
        vocab,
        Some(store),
        source,
        cfg,
        &DecoderConfig::default(),
    )
    .unwrap();
    vocab.decode(out.output())
}

#[test]
fn c01_copy_property() {
    let _g = serial();
    let started = Instant::now();
    let corpus = lexical_corpus(&LexicalSpec::default()).unwrap();
    let vocab = Vocabulary::build(&corpus);
    let model = toy(&vocab);
    let index = InvertedIndex::build(&corpus);
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let tests: Vec<&SentencePair> = corpus.pairs().choose_multiple(&mut rng, 100).collect();

    let count = |cfg: &FusionConfig| {
        tests
            .iter()
            .filter(|p| translate(&model, &vocab, &index, &corpus, &p.source, cfg) == p.target)
            .count()
    };
    let skmt = count(&FusionConfig::skmt1());
    let base = count(&FusionConfig::base());
    let secs = started.elapsed().as_secs_f64();
    let pass = skmt == 100 && base < 10 && secs < 30.0;
    report(
        1,
        "copy property",
        pass,
        &format!("SK-MT1 exact {skmt}/100, base exact {base}/100, {secs:.2}s"),
    );
    assert!(pass);
}

#[test]
fn c02_lambda_gating() {
    let _g = serial();
    let mut grid_ok = true;
    let mut cells = 0;
    for i in 0..100 {
        let tau = 0.01 * 1.1f64.powi(i);
        grid_ok &= compute_lambda(0.0, tau) == 1.0;
        for j in 0..100 {
            let d = tau * (1.0 + j as f64 * 0.37);
            grid_ok &= compute_lambda(d, tau) == 0.0;
            cells += 1;
        }
    }

    let corpus = lexical_corpus(&LexicalSpec {
        pairs: 300,
        ..Default::default()
    })
    .unwrap();
    let tests: Vec<Vec<Token>> = (0..20)
        .map(|i| {
            (0..5 + i % 7)
                .map(|j| Token::new(format!("u{}", i * 13 + j)).unwrap())
                .collect()
        })
        .collect();
    let vocab = vocab_for(&corpus, &tests);
    let model = toy(&vocab);
    let index = InvertedIndex::build(&corpus);
    let identical = tests.iter().all(|s| {
        translate(&model, &vocab, &index, &corpus, s, &FusionConfig::skmt2())
            == translate(&model, &vocab, &index, &corpus, s, &FusionConfig::base())
    });
    let pass = grid_ok && cells == 10_000 && identical;
    report(
        2,
        "lambda gating",
        pass,
        &format!(
            "grid {cells} cells ok={grid_ok}, zero-overlap skmt==base on 20 sentences: {identical}"
        ),
    );
    assert!(pass);
}

#[test]
fn c03_dynamic_equals_full_datastore() {
    let _g = serial();
    let spec = LexicalSpec {
        pairs: 50,
        lexicon: 60,
        min_len: 4,
        max_len: 10,
        seed: 3,
    };
    let dot = Token::new(".").unwrap();
    let with_dot = |mut s: Vec<Token>| {
        s.push(dot.clone());
        s
    };
    let base = lexical_corpus(&spec).unwrap();
    let corpus = ParallelCorpus::from_pairs(
        base.pairs()
            .iter()
            .map(|p| (with_dot(p.source.clone()), p.target.clone())),
    )
    .unwrap();
    let tests: Vec<(Vec<Token>, Vec<Token>)> = novel_sentences(&base, &spec, 80, 9)
        .into_iter()
        .map(|(s, t)| (with_dot(s), t))
        .collect();
    let mut vocab = Vocabulary::build(&corpus);
    for (s, t) in &tests {
        vocab.extend(s);
        vocab.extend(t);
    }
    let model = toy(&vocab);
    let index = InvertedIndex::build(&corpus);
    let full = datastore_for(&model, &vocab, corpus.pairs().iter());

    let mut steps = 0;
    let mut worst = 0.0f64;
    let mut all_refs = true;
    for (i, (source, target)) in tests.iter().enumerate() {
        let cfg = FusionConfig {
            k: 1 + i % 4,
            tau: [100.0, 1.0, 0.3][i % 3],
            ..FusionConfig::skmt1()
        }
        .with_m(50);
        let refs = retrieve_references(&index, &corpus, source, &cfg.retrieval);
        all_refs &= refs.len() == 50;
        let dynamic = datastore_for(&model, &vocab, refs.into_iter());
        let state = model.encode_source(&vocab.encode(source)).unwrap();
        let mut prefix = vec![TokenId::BOS];
        for next in vocab.encode(target).into_iter().chain([TokenId::EOS]) {
            let a = fused_step(&model, Some(&dynamic), &state, &prefix, &cfg).unwrap();
            let b = fused_step(&model, Some(&full), &state, &prefix, &cfg).unwrap();
            worst = worst
                .max(a.dist.max_abs_diff(&b.dist))
                .max((a.lambda - b.lambda).abs());
            steps += 1;
            prefix.push(next);
        }
    }
    let pass = all_refs && steps >= 500 && worst <= 1e-9;
    report(
        3,
        "dynamic m=|corpus| equals full datastore",
        pass,
        &format!("{steps} steps, max |diff| {worst:.3e}, all 50 refs retrieved: {all_refs}"),
    );
    assert!(pass);
}

fn datastore_for<'a>(
    model: &ToyModel,
    vocab: &Vocabulary,
    pairs: impl Iterator<Item = &'a SentencePair>,
) -> DynamicDatastore {
    DynamicDatastore::build(model, vocab, pairs).unwrap()
}

fn knn_oracle(neighbors: &[(u32, f64)], tau: f64, vocab: usize) -> Vec<f64> {
    let mut mass = vec![0.0; vocab];
    let mut z = 0.0;
    for &(v, d) in neighbors {
        let w = (-d / tau).exp();
        mass[v as usize] += w;
        z += w;
    }
    mass.iter().map(|m| m / z).collect()
}

#[test]
fn c04_knn_distribution() {
    let _g = serial();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let vocab = 40;
    let mut worst = 0.0f64;
    let mut worst_sum = 0.0f64;
    for _ in 0..1000 {
        let k = rng.gen_range(1..=16);
        let tau = [0.1, 1.0, 5.0, 10.0, 100.0, 200.0][rng.gen_range(0..6)];
        let raw: Vec<(u32, f64)> = (0..k)
            .map(|_| (rng.gen_range(4..vocab as u32), rng.gen_range(0.0..4.0)))
            .collect();
        let set = neighbor_set(&raw);
        let got = knn_distribution(&set, tau, vocab).unwrap();
        let want = knn_oracle(&raw, tau, vocab);
        for (g, w) in got.probs().iter().zip(&want) {
            worst = worst.max((g - w).abs());
        }
        worst_sum = worst_sum.max((got.total() - 1.0).abs());
    }

    let mut symmetric = true;
    for d in [0.0, 0.5, 3.9] {
        let set = neighbor_set(&[(5, d), (6, d), (7, d)]);
        let p = knn_distribution(&set, 10.0, vocab).unwrap();
        symmetric &=
            p.prob(TokenId(5)) == p.prob(TokenId(6)) && p.prob(TokenId(6)) == p.prob(TokenId(7));
    }
    let pass = worst <= 1e-12 && worst_sum <= 1e-9 && symmetric;
    report(
        4,
        "kNN distribution",
        pass,
        &format!(
            "1000 sets, max |diff| {worst:.3e}, max |sum-1| {worst_sum:.3e}, symmetry {symmetric}"
        ),
    );
    assert!(pass);
}

fn neighbor_set(raw: &[(u32, f64)]) -> NeighborSet {
    let mut v: Vec<Neighbor> = raw
        .iter()
        .enumerate()
        .map(|(entry, &(value, distance_sq))| Neighbor {
            entry,
            distance_sq,
            value: TokenId(value),
        })
        .collect();
    v.sort_by(|a, b| {
        a.distance_sq
            .total_cmp(&b.distance_sq)
            .then(a.entry.cmp(&b.entry))
    });
    NeighborSet(v)
}

fn edit_distance_oracle(a: &[Token], b: &[Token]) -> usize {
    let mut t = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in t.iter_mut().enumerate() {
        row[0] = i;
    }
    for (j, cell) in t[0].iter_mut().enumerate() {
        *cell = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let sub = t[i - 1][j - 1] + usize::from(a[i - 1] != b[j - 1]);
            t[i][j] = sub.min(t[i - 1][j] + 1).min(t[i][j - 1] + 1);
        }
    }
    t[a.len()][b.len()]
}

fn bm25_oracle(corpus: &ParallelCorpus, query: &[Token]) -> Vec<(u32, f64)> {
    let (k1, b) = (1.2, 0.75);
    let n = corpus.len() as f64;
    let avg = corpus.pairs().iter().map(|p| p.source.len()).sum::<usize>() as f64 / n;
    let mut df: HashMap<&Token, usize> = HashMap::new();
    for p in corpus.pairs() {
        let mut seen: Vec<&Token> = p.source.iter().collect();
        seen.sort();
        seen.dedup();
        for t in seen {
            *df.entry(t).or_default() += 1;
        }
    }
    let mut out = Vec::new();
    for p in corpus.pairs() {
        let mut score = 0.0;
        let mut hit = false;
        for q in query {
            let tf = p.source.iter().filter(|t| *t == q).count();
            if tf == 0 {
                continue;
            }
            hit = true;
            let d = df[q] as f64;
            let idf = ((n - d + 0.5) / (d + 0.5) + 1.0).ln();
            let tf = tf as f64;
            let norm = 1.0 - b + b * p.source.len() as f64 / avg;
            score += idf * (tf * (k1 + 1.0)) / (tf + k1 * norm);
        }
        if hit {
            out.push((p.id.0, score));
        }
    }
    out.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));
    out
}

#[test]
fn c05_retrieval_oracle() {
    let _g = serial();
    let spec = LexicalSpec {
        pairs: 1000,
        lexicon: 300,
        min_len: 3,
        max_len: 12,
        seed: 5,
    };
    let corpus = lexical_corpus(&spec).unwrap();
    let index = InvertedIndex::build(&corpus);
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let mut agree = 0;
    for q in 0..200 {
        let query: Vec<Token> = if q % 4 == 0 {
            corpus.pairs()[rng.gen_range(0..corpus.len())]
                .source
                .clone()
        } else {
            let len = rng.gen_range(1..=12);
            (0..len)
                .map(|_| Token::new(format!("s{}", rng.gen_range(0..330))).unwrap())
                .collect()
        };
        let m = rng.gen_range(1..=64);
        let cfg = RetrievalConfig {
            m,
            ..Default::default()
        };
        let got: Vec<(u32, f64)> = rank_references(&index, &corpus, &query, &cfg)
            .iter()
            .map(|c| (c.pair_id.0, c.sim.unwrap()))
            .collect();

        let mut want: Vec<(u32, f64, f64)> = bm25_oracle(&corpus, &query)
            .into_iter()
            .take(64)
            .map(|(id, s)| {
                let src = &corpus.pairs()[id as usize].source;
                let sim = 1.0
                    - edit_distance_oracle(&query, src) as f64 / query.len().max(src.len()) as f64;
                (id, s, sim)
            })
            .collect();
        want.sort_by(|x, y| {
            y.2.total_cmp(&x.2)
                .then(y.1.total_cmp(&x.1))
                .then(x.0.cmp(&y.0))
        });
        want.truncate(m);
        let want: Vec<(u32, f64)> = want.into_iter().map(|(id, _, sim)| (id, sim)).collect();
        agree += usize::from(got == want);
    }
    let pass = agree == 200;
    report(
        5,
        "retrieval equals brute-force pipeline",
        pass,
        &format!("{agree}/200 queries identical"),
    );
    assert!(pass);
}

#[test]
fn c06_incremental_index() {
    let _g = serial();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut agree = 0;
    for seq in 0..100u64 {
        let n = rng.gen_range(1..=200);
        let spec = LexicalSpec {
            pairs: n,
            lexicon: 80,
            min_len: 1,
            max_len: 10,
            seed: 600 + seq,
        };
        let corpus = lexical_corpus(&spec).unwrap();
        let mut order: Vec<&SentencePair> = corpus.pairs().iter().collect();
        order.shuffle(&mut rng);
        let mut grown = InvertedIndex::new();
        for p in order {
            grown.insert_pair(p).unwrap();
        }
        let rebuilt = InvertedIndex::build(&corpus);
        let mut same = grown == rebuilt && grown.to_bytes() == rebuilt.to_bytes();
        for _ in 0..10 {
            let len = rng.gen_range(1..=8);
            let q: Vec<Token> = (0..len)
                .map(|_| Token::new(format!("s{}", rng.gen_range(0..90))).unwrap())
                .collect();
            let params = RetrievalConfig::default().bm25();
            let a = grown.bm25_search(&q, 64, params).unwrap();
            let b = rebuilt.bm25_search(&q, 64, params).unwrap();
            same &= a == b;
        }
        agree += usize::from(same);
    }
    let pass = agree == 100;
    report(
        6,
        "incremental index equals rebuild",
        pass,
        &format!("{agree}/100 insertion sequences identical"),
    );
    assert!(pass);
}

#[test]
fn c07_datastore_accounting() {
    let _g = serial();
    let spec = LexicalSpec {
        pairs: 2000,
        lexicon: 800,
        min_len: 15,
        max_len: 35,
        seed: 7,
    };
    let corpus = lexical_corpus(&spec).unwrap();
    let vocab = Vocabulary::build(&corpus);
    let model = toy(&vocab);
    let index = InvertedIndex::build(&corpus);
    let h = model.hidden_dim();
    let mut rng = ChaCha8Rng::seed_from_u64(77);

    let mut counts_ok = 0;
    let mut max_bytes = 0;
    let mut m16_ok = true;
    for r in 0..100 {
        let source = &corpus.pairs()[rng.gen_range(0..corpus.len())].source;
        let m = if r % 2 == 0 {
            16
        } else {
            rng.gen_range(1..=16)
        };
        let cfg = RetrievalConfig {
            m,
            ..Default::default()
        };
        let refs = retrieve_references(&index, &corpus, source, &cfg);
        let expected: usize = refs.iter().map(|p| p.target.len() + 1).sum();
        let ds = datastore_for(&model, &vocab, refs.iter().copied());
        let fp = ds.footprint();
        counts_ok += usize::from(
            fp.entries == expected && ds.len() == expected && fp.key_bytes == expected * h * 4,
        );
        if m == 16 {
            m16_ok &= refs.len() == 16;
            max_bytes = max_bytes.max(fp.key_bytes);
        }
    }
    let mean_len = corpus.target_token_total() as f64 / corpus.len() as f64;
    let pass =
        counts_ok == 100 && m16_ok && max_bytes <= 1_000_000 && (mean_len - 25.0).abs() < 1.0;
    report(
        7,
        "datastore accounting",
        pass,
        &format!(
            "{counts_ok}/100 entry counts exact; m=16, mean target len {mean_len:.1}, h={h}: max key payload {max_bytes} bytes"
        ),
    );
    assert!(pass);
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

#[test]
fn c08_decoding_overhead() {
    let _g = serial();
    let spec = LexicalSpec {
        pairs: 10_000,
        lexicon: 2000,
        ..Default::default()
    };
    let corpus = lexical_corpus(&spec).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(88);
    let mut tests: Vec<Vec<Token>> = corpus
        .pairs()
        .choose_multiple(&mut rng, 20)
        .map(|p| p.source.clone())
        .collect();
    tests.extend(
        novel_sentences(&corpus, &spec, 20, 89)
            .into_iter()
            .map(|(s, _)| s),
    );
    let vocab = vocab_for(&corpus, &tests);
    let model = toy(&vocab);
    let index = InvertedIndex::build(&corpus);

    let ms_per_sentence = |cfg: &FusionConfig| {
        let run = || {
            let started = Instant::now();
            for s in &tests {
                translate(&model, &vocab, &index, &corpus, s, cfg);
            }
            started.elapsed().as_secs_f64() * 1000.0 / tests.len() as f64
        };
        run();
        median((0..5).map(|_| run()).collect())
    };
    let base = ms_per_sentence(&FusionConfig::base());
    let sk1 = ms_per_sentence(&FusionConfig::skmt1());
    let sk2 = ms_per_sentence(&FusionConfig::skmt2());
    let pass = sk1 <= 2.0 * base && sk1 <= sk2;
    report(
        8,
        "decoding overhead",
        pass,
        &format!(
            "ms/sentence base {base:.3}, SK-MT1 {sk1:.3} (x{:.2} speed), SK-MT2 {sk2:.3} (x{:.2} speed)",
            base / sk1,
            base / sk2
        ),
    );
    assert!(pass);
}

#[test]
fn c09_r_indicator() {
    let _g = serial();
    let refs: Vec<Vec<Token>> = ["a b c", "a b d", "a e", "a b a f", "g a b"]
        .iter()
        .map(|s| toks(s))
        .collect();
    let hyps: Vec<Vec<Token>> = ["a x", "a b", "e", "a f", "a b g"]
        .iter()
        .map(|s| toks(s))
        .collect();
    let got = r_indicator(&hyps, &refs).unwrap();
    let table: Vec<(&str, usize, usize)> = vec![
        ("R0", 4, 7),
        ("R1", 2, 2),
        ("R2-5", 2, 4),
        ("R5-9", 1, 1),
        ("R9+", 0, 0),
    ];
    let hand_ok = table.iter().all(|&(label, matched, total)| {
        let b = got.bucket(label).unwrap();
        b.matched == matched
            && b.total == total
            && b.recall == (total > 0).then(|| matched as f64 / total as f64)
    });

    // Five distinct sentences over disjoint words, each repeated four times.
    let spec = LexicalSpec {
        pairs: 5,
        lexicon: 1000,
        min_len: 6,
        max_len: 10,
        seed: 9,
    };
    let base_pairs = lexical_corpus(&spec).unwrap();
    let distinct: Vec<&SentencePair> = base_pairs.pairs().iter().collect();
    let shared: usize = {
        let mut all: Vec<&Token> = distinct.iter().flat_map(|p| p.target.iter()).collect();
        let n = all.len();
        all.sort();
        all.dedup();
        n - all.len()
    };
    let mut order: Vec<usize> = (0..20).map(|i| i % 5).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(90));
    let doc = Document::new(
        Some("repeated".into()),
        order
            .iter()
            .map(|&i| (distinct[i].source.clone(), distinct[i].target.clone()))
            .collect(),
    );
    let vocab = doc.vocabulary();
    let model = toy(&vocab);
    let dcfg = DecoderConfig::default();
    let skmt = run_online(&doc, &model, &vocab, &FusionConfig::skmt1(), &dcfg).unwrap();
    let base = run_online(&doc, &model, &vocab, &FusionConfig::base(), &dcfg).unwrap();
    let r_skmt = skmt.r_indicator.repeated_recall().unwrap();
    let r_base = base.r_indicator.repeated_recall().unwrap();
    let pass = hand_ok && shared == 0 && r_skmt == 1.0 && r_base < 0.5;
    report(
        9,
        "R-indicator",
        pass,
        &format!("hand table match {hand_ok}; repeated document R1+ recall SK-MT1 {r_skmt:.3}, base {r_base:.3}"),
    );
    assert!(pass);
}

#[test]
fn c10_metric_sanity() {
    let _g = serial();
    let a = vec![toks("the cat sat on the mat"), toks("hello world")];
    let d = vec![toks("x y z w v u"), toks("p q")];
    let bleu_same = corpus_bleu(&a, &a).unwrap();
    let chrf_same = chrf(&a, &a).unwrap();
    let bleu_disjoint = corpus_bleu(&d, &a).unwrap();
    let worked = corpus_bleu(&[toks("a b c d")], &[toks("a b c d e f")]).unwrap();
    let expected = 100.0 * (1.0f64 - 6.0 / 4.0).exp();
    let pass = (bleu_same - 100.0).abs() < 1e-9
        && (chrf_same - 100.0).abs() < 1e-9
        && bleu_disjoint == 0.0
        && (worked - 60.65).abs() < 0.01
        && (worked - expected).abs() < 1e-9;
    report(
        10,
        "metric sanity",
        pass,
        &format!(
            "BLEU identical {bleu_same:.2}, ChrF identical {chrf_same:.2}, BLEU disjoint {bleu_disjoint:.2}, worked example {worked:.4}"
        ),
    );
    assert!(pass);
}

#[test]
fn c11_similarity_histogram() {
    let _g = serial();
    let mut all_equal = true;
    let mut verbatim_top = true;
    let mut sizes = Vec::new();
    for (i, pairs) in [50usize, 200, 1000].into_iter().enumerate() {
        let spec = LexicalSpec {
            pairs,
            lexicon: 40 + pairs / 2,
            min_len: 3,
            max_len: 12,
            seed: 11 + i as u64,
        };
        let corpus = lexical_corpus(&spec).unwrap();
        let index = InvertedIndex::build(&corpus);
        let mut rng = ChaCha8Rng::seed_from_u64(110 + i as u64);
        let verbatim: Vec<Vec<Token>> = corpus
            .pairs()
            .choose_multiple(&mut rng, 30)
            .map(|p| p.source.clone())
            .collect();
        let mut tests = verbatim.clone();
        tests.extend(
            novel_sentences(&corpus, &spec, 70, 111 + i as u64)
                .into_iter()
                .map(|(s, _)| s),
        );
        for x in tests.iter_mut().skip(30).step_by(2) {
            // perturb a corpus sentence to populate middle bins
            let p = &corpus.pairs()[rng.gen_range(0..corpus.len())].source;
            *x = p.clone();
            let j = rng.gen_range(0..x.len());
            x[j] = Token::new(format!("n{}", rng.gen_range(0..5))).unwrap();
        }
        let proxy = corpus_similarity_histogram(&index, &corpus, &tests, 64, false);
        let brute = SimilarityHistogram::from_similarities(
            tests
                .iter()
                .map(|x| {
                    corpus
                        .pairs()
                        .iter()
                        .map(|p| {
                            1.0 - edit_distance_oracle(x, &p.source) as f64
                                / x.len().max(p.source.len()) as f64
                        })
                        .fold(0.0, f64::max)
                })
                .collect(),
        );
        all_equal &= proxy.counts() == brute.counts();
        let top = corpus_similarity_histogram(&index, &corpus, &verbatim, 64, false).counts();
        verbatim_top &= top[9] == verbatim.len();
        sizes.push(format!("{pairs} pairs {:?}", proxy.counts()));
    }
    let pass = all_equal && verbatim_top;
    report(
        11,
        "similarity histogram",
        pass,
        &format!(
            "top-64 proxy == brute force: {all_equal}; verbatim in [0.9,1.0]: {verbatim_top}; {}",
            sizes.join("; ")
        ),
    );
    assert!(pass);
}

#[test]
fn c12_directional_adaptation() {
    let _g = serial();
    let domain = templated_domain(&TemplateSpec::default()).unwrap();
    let targets: Vec<&Vec<Token>> = domain.tests.iter().map(|t| &t.target).collect();
    let mut vocab = vocab_for(&domain.corpus, domain.tests.iter().map(|t| &t.source));
    for t in &targets {
        vocab.extend(*t);
    }
    let model = toy(&vocab);
    let index = InvertedIndex::build(&domain.corpus);

    let evaluate = |cfg: &FusionConfig| {
        let (mut matched, mut total, mut exact_ok, mut exact_n) = (0, 0, 0, 0);
        for t in &domain.tests {
            let hyp = translate(&model, &vocab, &index, &domain.corpus, &t.source, cfg);
            matched += hyp.iter().zip(&t.target).filter(|(a, b)| a == b).count();
            total += t.target.len();
            if t.kind == TestKind::Exact {
                exact_n += 1;
                exact_ok += usize::from(hyp == t.target);
            }
        }
        (matched as f64 / total as f64, exact_ok, exact_n)
    };
    let (acc_base, _, _) = evaluate(&FusionConfig::base());
    let (acc_sk2, exact_ok, exact_n) = evaluate(&FusionConfig::skmt2());
    let (acc_scaled, exact_scaled, _) = evaluate(&FusionConfig {
        tau: 0.3,
        ..FusionConfig::skmt2()
    });
    let pass = acc_sk2 > acc_base && exact_ok == exact_n;
    report(
        12,
        "directional adaptation",
        pass,
        &format!(
            "token accuracy SK-MT2 {acc_sk2:.3} vs base {acc_base:.3}; exact-duplicate subset {exact_ok}/{exact_n} \
             (diagnostic, m=16 k=2 tau=0.3: accuracy {acc_scaled:.3}, exact {exact_scaled}/{exact_n})"
        ),
    );
    assert!(pass);
}
