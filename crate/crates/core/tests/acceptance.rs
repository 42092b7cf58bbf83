//! Acceptance checks. Each check prints one PASS/FAIL line; the test fails if
//! any check fails.

mod common;

use std::time::{Duration, Instant};

use common::*;
use genbench::corpus::{build_vocabulary, encode, load_single, TokenId, Vocabulary};
use genbench::decoding::{beam, greedy, top_k, DecodeConfig, Strategy};
use genbench::lm::{self, LanguageModel, NGramModel, NGramParams, UniformModel};
use genbench::metrics::{
    bleu_n, corpus_bleu, distinct_n, nll_ppl, rouge_l, rouge_n, self_bleu, Likelihood,
    MetricConfig, Smoothing,
};
use genbench::runner::{self, Layer, Settings};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_s: f64, what: &str) -> Result<(), String> {
    ensure(elapsed.as_secs_f64() < limit_s, || {
        format!(
            "{what} took {:.2} s, limit {limit_s} s",
            elapsed.as_secs_f64()
        )
    })
}

fn words(s: &str) -> Vec<&str> {
    s.split_whitespace().collect()
}

fn metric_oracle() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut compared = 0usize;
    let mut worst = 0.0f64;
    for case in 0..500 {
        let hyp = random_sentences(&mut rng, 1, 8, 10).pop().unwrap();
        let ref_count = rng.gen_range(1..=3);
        let refs = random_sentences(&mut rng, ref_count, 8, 10);
        let mut pooled = refs.clone();
        pooled.push(hyp.clone());
        for n in 1..=4 {
            let pairs = [
                (
                    "bleu",
                    bleu_n::<u8, f64, _>(&hyp, &refs, n, Smoothing::None).unwrap(),
                    oracle_bleu(&hyp, &refs, n),
                ),
                (
                    "rouge",
                    rouge_n::<u8, f64, _>(&hyp, &refs, n).unwrap(),
                    oracle_rouge_n(&hyp, &refs, n),
                ),
                (
                    "distinct",
                    distinct_n::<u8, f64, _>(&pooled, n).unwrap(),
                    oracle_distinct(&pooled, n),
                ),
            ];
            for (name, got, want) in pairs {
                let d = (got - want).abs();
                worst = worst.max(d);
                ensure(d <= 1e-12, || {
                    format!("case {case}: {name}-{n} = {got}, oracle {want}")
                })?;
                compared += 1;
            }
        }
    }
    within(start.elapsed(), 5.0, "500 pairs")?;
    Ok(format!(
        "{compared} comparisons, max |diff| {worst:e}, {:.2?}",
        start.elapsed()
    ))
}

fn rouge_l_oracle() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for case in 0..200 {
        let hyp = random_sentences(&mut rng, 1, 8, 8).pop().unwrap();
        let refs = random_sentences(&mut rng, 1, 8, 8);
        let got: f64 = rouge_l(&hyp, &refs).unwrap();
        let want = oracle_rouge_l(&hyp, &refs);
        ensure(got == want, || {
            format!("case {case}: rouge-l {got}, oracle {want} for {hyp:?} vs {refs:?}")
        })?;
    }
    within(start.elapsed(), 10.0, "200 pairs")?;
    Ok(format!("200 pairs exact, {:.2?}", start.elapsed()))
}

fn hand_fixtures() -> Check {
    let close = |got: f64, want: f64, what: &str| {
        ensure((got - want).abs() < 1e-12, || {
            format!("{what}: {got} != {want}")
        })
    };
    let (sat, ate) = (words("the cat sat"), words("the cat ate"));

    let want = 0.5;
    close(oracle_bleu(&sat, std::slice::from_ref(&ate), 2), want, "oracle bleu-2")?;
    close(
        bleu_n(&sat, &[&ate], 2, Smoothing::None).unwrap(),
        want,
        "bleu-2",
    )?;

    let hyps = vec![sat.clone(), ate.clone()];
    let want = 0.75;
    close(
        (oracle_bleu(&sat, std::slice::from_ref(&ate), 2) + oracle_bleu(&ate, std::slice::from_ref(&ate), 2)) / 2.0,
        want,
        "oracle corpus bleu-2",
    )?;
    close(
        corpus_bleu(&hyps, &[&ate], 2, &MetricConfig::default()).unwrap(),
        want,
        "corpus bleu-2",
    )?;

    let want = 2.0 / 3.0;
    close(
        oracle_rouge_n(&sat, std::slice::from_ref(&ate), 1),
        want,
        "oracle rouge-1",
    )?;
    close(rouge_n(&sat, &[&ate], 1).unwrap(), want, "rouge-1")?;

    let (abcd, acbd) = (words("a b c d"), words("a c b d"));
    let want = 0.75;
    close(
        oracle_rouge_l(&abcd, std::slice::from_ref(&acbd)),
        want,
        "oracle rouge-l",
    )?;
    close(rouge_l(&abcd, &[&acbd]).unwrap(), want, "rouge-l")?;

    let aaaa = vec![words("a a a a")];
    close(oracle_distinct(&aaaa, 1), 0.25, "oracle distinct-1")?;
    close(distinct_n(&aaaa, 1).unwrap(), 0.25, "distinct-1")?;
    let abab = vec![words("a b"), words("a b")];
    close(oracle_distinct(&abab, 1), 0.5, "oracle distinct-1 pooled")?;
    close(distinct_n(&abab, 1).unwrap(), 0.5, "distinct-1 pooled")?;

    let trio = vec![words("a b c"), words("a b d"), words("a e f")];
    let oracle_self: f64 = (0..trio.len())
        .map(|i| {
            let others: Vec<Vec<&str>> = trio
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, h)| h.clone())
                .collect();
            oracle_bleu(&trio[i], &others, 1)
        })
        .sum::<f64>()
        / 3.0;
    let want = 5.0 / 9.0;
    close(oracle_self, want, "oracle self-bleu-1")?;
    close(
        self_bleu(&trio, 1, &MetricConfig::default()).unwrap(),
        want,
        "self-bleu-1",
    )?;
    Ok("bleu-2, corpus bleu-2, rouge-1, rouge-l, distinct-1 x2, self-bleu-1 agree with oracle and pinned values".into())
}

fn ppl_law() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for v in [2usize, 10, 100] {
        let model = UniformModel::new(v).unwrap();
        let data: Vec<Vec<TokenId>> = (0..50)
            .map(|_| {
                (0..rng.gen_range(2..20))
                    .map(|_| rng.gen_range(0..v as TokenId))
                    .collect()
            })
            .collect();
        let l: Likelihood<f64> = nll_ppl(&model, &data).unwrap();
        let d = (l.ppl - v as f64).abs();
        worst = worst.max(d);
        ensure(d <= 1e-9, || format!("V = {v}: ppl {}", l.ppl))?;
    }
    Ok(format!("V = 2, 10, 100; max |ppl - V| {worst:e}"))
}

fn random_ngram_model(rng: &mut impl Rng) -> NGramModel<f64> {
    let vocab = rng.gen_range(6..=20usize);
    let order = rng.gen_range(1..=4usize);
    let corpus: Vec<Vec<TokenId>> = (0..rng.gen_range(3..30))
        .map(|_| {
            let mut seq = vec![Vocabulary::SOS];
            seq.extend((0..rng.gen_range(0..12)).map(|_| rng.gen_range(4..vocab as TokenId)));
            seq.push(Vocabulary::EOS);
            seq
        })
        .collect();
    let params = NGramParams {
        order,
        delta: rng.gen_range(0.001..0.5),
        lambdas: None,
    };
    NGramModel::fit(&corpus, vocab, &params).unwrap()
}

fn decoding_equivalences() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for case in 0..100 {
        let model = random_ngram_model(&mut rng);
        let cfg = |strategy| DecodeConfig {
            strategy,
            beam_size: 1,
            k: 1,
            max_len: 12,
            seed: case,
            ..DecodeConfig::default()
        };
        let g = greedy::<f64, _>(&model, &cfg(Strategy::Greedy), &[]).unwrap();
        let t = top_k::<f64, _, _>(
            &model,
            &cfg(Strategy::TopK),
            &[],
            &mut ChaCha8Rng::seed_from_u64(case),
        )
        .unwrap();
        let b = beam::<f64, _>(&model, &cfg(Strategy::Beam), &[]).unwrap();
        ensure(g.ids == t.ids && g.ids == b.ids, || {
            format!(
                "model {case}: greedy {:?}, top-1 {:?}, beam-1 {:?}",
                g.ids, t.ids, b.ids
            )
        })?;
    }

    let (a, b, c, d) = (4, 5, 6, 7);
    let trap = TableModel::new(8)
        .with(&[], &[(a, 0.6), (b, 0.4)])
        .with(&[a], &[(c, 0.5), (d, 0.5)])
        .with(&[b], &[(c, 0.9), (d, 0.1)]);
    let cfg = |beam_size| DecodeConfig {
        strategy: Strategy::Beam,
        beam_size,
        max_len: 3,
        ..DecodeConfig::default()
    };
    let g = greedy::<f64, _>(&trap, &cfg(1), &[]).unwrap();
    let bm = beam::<f64, _>(&trap, &cfg(2), &[]).unwrap();
    ensure(g.generated() == [a, c, Vocabulary::EOS], || {
        format!("greedy trap gave {:?}", g.generated())
    })?;
    ensure(bm.generated() == [b, c, Vocabulary::EOS], || {
        format!("beam trap gave {:?}", bm.generated())
    })?;
    Ok("100 models identical; trap: greedy AC, beam(2) BC".into())
}

fn beam_optimality() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for case in 0..50 {
        let model = HashedModel {
            vocab: rng.gen_range(4..=5),
            seed: case,
        };
        let max_len = rng.gen_range(1..=4);
        let exhaustive = model.vocab.pow(max_len as u32);
        let cfg = DecodeConfig {
            strategy: Strategy::Beam,
            beam_size: exhaustive,
            max_len,
            ..DecodeConfig::default()
        };
        let got = beam::<f64, _>(&model, &cfg, &[]).unwrap();
        let (ids, lp) = brute_force_best(&model, max_len);
        ensure(got.ids == ids && (got.logprob - lp).abs() < 1e-12, || {
            format!(
                "model {case} (V={}, max_len={max_len}): beam {:?} ({}), brute force {ids:?} ({lp})",
                model.vocab, got.ids, got.logprob
            )
        })?;
    }
    within(start.elapsed(), 30.0, "50 models")?;
    Ok(format!(
        "50 models match brute force, {:.2?}",
        start.elapsed()
    ))
}

/// Zipf-like synthetic sentences over `vocab` word ids.
fn zipf_sentences(seed: u64, count: usize, vocab: u32) -> Vec<Vec<u32>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            (0..rng.gen_range(5..30))
                .map(|_| {
                    let u: f64 = rng.gen_range(0.0..1.0);
                    ((vocab as f64).powf(u) - 1.0) as u32
                })
                .collect()
        })
        .collect()
}

fn thread_invariance() -> Check {
    let hyps = zipf_sentences(7, 2000, 300);
    let refs = zipf_sentences(8, 2000, 300);
    for n in 1..=4 {
        let mut seen: Option<(u64, u64)> = None;
        for threads in [1, 2, 4, 8] {
            let cfg = MetricConfig {
                threads,
                ..MetricConfig::default()
            };
            let c: f64 = corpus_bleu(&hyps, &refs, n, &cfg).unwrap();
            let s: f64 = self_bleu(&hyps, n, &cfg).unwrap();
            let bits = (c.to_bits(), s.to_bits());
            match seen {
                None => seen = Some(bits),
                Some(first) => {
                    ensure(first == bits, || {
                        format!("n = {n}, threads = {threads}: ({c}, {s}) differs from the 1-thread result")
                    })?
                }
            }
        }
    }
    Ok("corpus_bleu and self_bleu n = 1..4 bit-identical at 1, 2, 4, 8 threads".into())
}

fn performance() -> Check {
    let hyps = zipf_sentences(9, 5000, 2000);
    let refs = zipf_sentences(10, 5000, 2000);
    let time = |threads| {
        let cfg = MetricConfig {
            threads,
            ..MetricConfig::default()
        };
        let start = Instant::now();
        let score: f64 = corpus_bleu(&hyps, &refs, 4, &cfg).unwrap();
        (score, start.elapsed())
    };
    let (s1, t1) = time(1);
    let (s4, t4) = time(4);
    ensure(s1.to_bits() == s4.to_bits(), || {
        "1 and 4 threads disagree".into()
    })?;
    within(t1, 10.0, "single-threaded corpus BLEU-4")?;
    let speedup = t1.as_secs_f64() / t4.as_secs_f64();
    Ok(format!(
        "1 thread {t1:.2?}, 4 threads {t4:.2?}, speedup {speedup:.2}x (target 1.8x, not gated; {} cores available)",
        std::thread::available_parallelism().map_or(0, |n| n.get())
    ))
}

fn end_to_end() -> Check {
    let out = tempfile::tempdir().map_err(|e| e.to_string())?;
    let root = repo_root();
    let cli: Settings = [
        ("dataset", "COCO-mini"),
        ("model", "NGLM"),
        ("decoding_strategy", "topk"),
        ("seed", "17"),
    ]
    .iter()
    .map(|(k, v)| (k.to_string(), v.to_string()))
    .chain([
        (
            "data_dir".to_string(),
            root.join("data").display().to_string(),
        ),
        ("output_dir".to_string(), out.path().display().to_string()),
    ])
    .collect();
    let resolved = runner::load_config(None, None, &cli).map_err(|e| e.to_string())?;
    let a = runner::run_experiment(&resolved).map_err(|e| e.to_string())?;
    let b = runner::run_experiment(&resolved).map_err(|e| e.to_string())?;
    ensure(a.artifacts.dir != b.artifacts.dir, || {
        "runs shared an output directory".into()
    })?;
    let checkpoint_a = a
        .artifacts
        .checkpoint
        .clone()
        .ok_or("no checkpoint written")?;
    let checkpoint_b = b
        .artifacts
        .checkpoint
        .clone()
        .ok_or("no checkpoint written")?;
    for (x, y) in [
        (&a.artifacts.generated, &b.artifacts.generated),
        (&checkpoint_a, &checkpoint_b),
        (&a.artifacts.report_text, &b.artifacts.report_text),
        (&a.artifacts.report_json, &b.artifacts.report_json),
        (&a.artifacts.config, &b.artifacts.config),
        (&a.artifacts.vocab, &b.artifacts.vocab),
    ] {
        let (bx, by) = (std::fs::read(x).unwrap(), std::fs::read(y).unwrap());
        ensure(bx == by, || {
            format!(
                "{} differs between runs",
                x.file_name().unwrap().to_string_lossy()
            )
        })?;
    }

    // save -> load on a model fitted to the same corpus
    let corpus =
        load_single(&root.join("data/coco-mini/corpus.txt"), true).map_err(|e| e.to_string())?;
    let vocab = build_vocabulary(&corpus, None, 1).map_err(|e| e.to_string())?;
    let framed: Vec<Vec<TokenId>> = corpus.iter().map(|s| encode(&vocab, s, true)).collect();
    let model: NGramModel<f64> =
        NGramModel::fit(&framed, vocab.len(), &NGramParams::default()).unwrap();
    let path = out.path().join("fit.nglm");
    lm::save(&model, &path).map_err(|e| e.to_string())?;
    let loaded: NGramModel<f64> = lm::load(&path).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for i in 0..1000 {
        let mut prefix = vec![Vocabulary::SOS];
        prefix.extend((0..rng.gen_range(0..6)).map(|_| rng.gen_range(0..vocab.len() as TokenId)));
        let (x, y) = (model.next_logprobs(&prefix), loaded.next_logprobs(&prefix));
        ensure(
            x.iter().zip(&y).all(|(p, q)| p.to_bits() == q.to_bits()),
            || format!("prefix {i} {prefix:?}: next_logprobs differ after reload"),
        )?;
    }
    let reloaded: NGramModel<f64> = lm::load(&checkpoint_a).map_err(|e| e.to_string())?;
    ensure(
        reloaded.to_bytes() == std::fs::read(&checkpoint_a).unwrap(),
        || "run checkpoint does not re-save identically".into(),
    )?;
    Ok(format!(
        "2 runs byte-identical ({} hypotheses); 1000 prefixes identical after reload",
        a.report.meta.hypotheses
    ))
}

fn config_precedence() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let dataset_file = dir.path().join("dataset.yaml");
    let model_file = dir.path().join("model.yaml");
    let mut summary = Vec::new();
    for mask in 0u8..8 {
        let (in_dataset, in_model, in_cli) = (mask & 1 != 0, mask & 2 != 0, mask & 4 != 0);
        std::fs::write(
            &dataset_file,
            if in_dataset { "beam_size: 3\n" } else { "" },
        )
        .unwrap();
        std::fs::write(&model_file, if in_model { "beam_size: 4\n" } else { "" }).unwrap();
        let mut cli = Settings::new();
        cli.insert("dataset".into(), "COCO-mini".into());
        cli.insert("model".into(), "NGLM".into());
        if in_cli {
            cli.insert("beam_size".into(), "7".into());
        }
        let r = runner::load_config(Some(&dataset_file), Some(&model_file), &cli)
            .map_err(|e| e.to_string())?;
        let (want, layer) = if in_cli {
            (7, Layer::CommandLine)
        } else if in_model {
            (4, Layer::ModelFile)
        } else if in_dataset {
            (3, Layer::DatasetFile)
        } else {
            (5, Layer::Default)
        };
        let got = (r.config.decode.beam_size, r.provenance("beam_size"));
        ensure(got == (want, Some(layer)), || {
            format!("placement {mask:03b}: got {got:?}, want ({want}, {layer})")
        })?;
        summary.push(format!("{}={layer}", want));
    }
    Ok(format!("8 placements resolved: {}", summary.join(" ")))
}

#[test]
fn acceptance() {
    let checks: [(&str, fn() -> Check); 10] = [
        ("metric oracle suite", metric_oracle),
        ("rouge-l exhaustive oracle", rouge_l_oracle),
        ("hand-derived fixtures", hand_fixtures),
        ("ppl law", ppl_law),
        ("decoding equivalences", decoding_equivalences),
        ("beam optimality", beam_optimality),
        ("thread invariance", thread_invariance),
        ("performance", performance),
        ("end-to-end reproducibility", end_to_end),
        ("config precedence", config_precedence),
    ];
    let mut failed = Vec::new();
    for (name, check) in checks {
        match check() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                println!("FAIL  {name}: {why}");
                failed.push(name);
            }
        }
    }
    assert!(failed.is_empty(), "failed: {}", failed.join(", "));
}
