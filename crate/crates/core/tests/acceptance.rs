//! One PASS/FAIL line per acceptance criterion; exits non-zero if any fails.

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use spontol::baseline::{linear_retrieve, BaselineStore};
use spontol::corpus::{
    generate_synthetic, parse_corpus, serialize_corpus, SyntheticParams, SOUR_GRAPES,
};
use spontol::eval::{oracle_optimal_chunk, oracle_optimal_parse, run_eval, EvalConfig};
use spontol::model::{build, BuildParams};
use spontol::ontology::{chunk_instances, parse, ChunkConfig, Ontology};
use spontol::transform::transform;
use spontol::{FeatureBag, Statement};

use common::*;

type Check = fn() -> Outcome;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn window(text: &str) -> Vec<Statement> {
    let c = parse_corpus(&format!("story w\n{text}")).unwrap();
    c.stories[0].statements.iter().cloned().collect()
}

fn set(items: &[&str]) -> BTreeSet<String> {
    items.iter().map(|s| s.to_string()).collect()
}

fn golden_transform() -> Outcome {
    let blame = transform(&window(
        "blameFor Of3Men concCircum m33\nsameAs m33 (fail Of3Men)\nfail Of3Men\n\
         circumstances concCircum\nmen Of3Men\nincapable Of3Men\n",
    ))
    .unwrap();
    let decide = transform(&window(
        "false f36\nsameAs f36 (sour Of3Grapes)\nsameAs f35 (decide Of3Fox f36)\n\
         cause f34 f35\ndecide Of3Fox f36\n",
    ))
    .unwrap();
    let blame_ok = blame.as_set()
        == &set(&[
            "blameFor1=blameFor3.fail1",
            "circumstances1=blameFor2",
            "fail1=blameFor3.fail1",
            "fail1=blameFor1",
            "incapable1=blameFor3.fail1",
            "incapable1=blameFor1",
            "incapable1=fail1",
            "men1=blameFor3.fail1",
            "men1=blameFor1",
            "men1=fail1",
            "men1=incapable1",
        ]);
    let decide_ok = decide.as_set()
        == &set(&[
            "false1.sour1=decide2.sour1",
            "decide1=cause2.decide1",
            "decide2=cause2.decide2",
            "false1=cause2.decide2",
            "false1=decide2",
        ]);
    outcome(
        blame_ok && decide_ok,
        format!("blame {} atoms, decide {} atoms", blame.len(), decide.len()),
    )
}

fn isomorphism_invariance() -> Outcome {
    let invariant = (0..200u64)
        .filter(|&seed| {
            let w = random_window(seed, 10);
            transform(&w).unwrap() == transform(&rename_and_shuffle(&w, seed)).unwrap()
        })
        .count();
    outcome(invariant == 200, format!("{invariant}/200 windows invariant"))
}

fn goldfish() -> Outcome {
    let bag = |t: &[&str]| t.iter().copied().collect::<FeatureBag>();
    let o = Ontology::new(
        vec![("fish".into(), bag(&["breathes=no", "fins=yes", "feathers=no"]))],
        vec![],
    )
    .unwrap();
    let b = bag(&["breathes=no", "fins=yes", "feathers=no", "domestic=yes"]);
    let p = parse(&b, &o);
    outcome(
        p.dl == 2 && b.len() == 4,
        format!("parsed dl {} vs raw {}", p.dl, b.len()),
    )
}

fn oracle_checks() -> Outcome {
    let start = Instant::now();
    let (mut chunk_ok, mut parse_ok, mut lossless, mut monotone) = (0, 0, 0, 0);
    for seed in 0..500u64 {
        let bags = random_chunk_instance(seed);
        let named: Vec<(String, FeatureBag)> = bags
            .iter()
            .enumerate()
            .map(|(i, b)| (format!("n{i}"), b.clone()))
            .collect();
        let (o, trace) = chunk_instances(named, &ChunkConfig::default());
        let raw: usize = bags.iter().map(FeatureBag::len).sum();
        let best = oracle_optimal_chunk(&bags, o.concepts().len().max(3)).unwrap();
        let dl = o.description_length();
        chunk_ok += usize::from(best <= dl && dl <= raw);
        lossless += usize::from(
            o.instances()
                .iter()
                .zip(&bags)
                .all(|((_, stored), orig)| &o.expand(stored) == orig),
        );
        monotone += usize::from(trace.dl.windows(2).all(|w| w[1] < w[0]));

        let (po, b) = random_parse_instance(seed);
        let p = parse(&b, &po);
        let best = oracle_optimal_parse(&b, &po).unwrap();
        parse_ok += usize::from(best <= p.dl && p.dl <= b.len());
    }
    let elapsed = start.elapsed();
    outcome(
        chunk_ok == 500 && parse_ok == 500 && lossless == 500 && monotone == 500
            && elapsed < Duration::from_secs(60),
        format!(
            "chunk bounds {chunk_ok}/500, parse bounds {parse_ok}/500, lossless {lossless}/500, \
             monotone {monotone}/500, {:.1}s",
            elapsed.as_secs_f64()
        ),
    )
}

fn benchmark_split() -> Outcome {
    let start = Instant::now();
    let (corpus, truth) = generate_synthetic(&SyntheticParams::benchmark(), 7).unwrap();
    let sizes: Vec<usize> = corpus.stories.iter().map(|s| s.len()).collect();
    let shape_ok = corpus.len() == 126
        && sizes.iter().all(|n| (5..=124).contains(n))
        && truth.planted_schemas.len() >= 8;
    let config = EvalConfig {
        train: 100,
        test: 26,
        trials: 20,
        build: BuildParams {
            num_windows: 100,
            window_size: 20,
            theta: 0.5,
            seed: 7,
        },
        ..Default::default()
    };
    let report = run_eval(&corpus, &config).unwrap();
    let elapsed = start.elapsed();
    let a = report.comparisons.mean <= 0.3 * config.train as f64;
    let b = report.accuracy.mean >= 0.85;
    let c = report
        .trials
        .iter()
        .flat_map(|t| &t.stories)
        .all(|s| s.baseline_comparisons == 100);
    outcome(
        shape_ok && a && b && c && elapsed <= Duration::from_secs(600),
        format!(
            "(a) comparisons {:.2} ± {:.2} of 100, (b) recall {:.4} ± {:.4}, (c) baseline {}, \
             {} trials in {:.0}s",
            report.comparisons.mean,
            report.comparisons.stderr.unwrap_or(0.0),
            report.accuracy.mean,
            report.accuracy.stderr.unwrap_or(0.0),
            report.baseline_comparisons.mean,
            report.trials.len(),
            elapsed.as_secs_f64()
        ),
    )
}

/// Schemas per story held at the 126-story level; three corpora per size.
fn sublinearity() -> Outcome {
    const TEST: usize = 26;
    let sizes = [50usize, 100, 200];
    let seeds = [1u64, 2, 3];
    let mut spontol = Vec::new();
    let mut baseline = Vec::new();
    for &train in &sizes {
        let n = train + TEST;
        let (mut ours, mut theirs) = (0.0, 0.0);
        for &seed in &seeds {
            let params = SyntheticParams {
                num_stories: n,
                num_schemas: (12.0 * n as f64 / 126.0).round() as usize,
                ..SyntheticParams::benchmark()
            };
            let (corpus, _) = generate_synthetic(&params, seed).unwrap();
            let train_set = corpus.subset(corpus.stories[..train].iter().map(|s| s.name.as_str()));
            let model = build(&train_set, &BuildParams { seed, ..Default::default() }).unwrap();
            let store = BaselineStore::from_model(&model);
            for probe in &corpus.stories[train..] {
                let r = model.retrieve(probe).unwrap();
                ours += r.comparisons as f64;
                theirs += linear_retrieve(&r.story_bag, &store, 3).comparisons as f64;
            }
        }
        let probes = (TEST * seeds.len()) as f64;
        spontol.push(ours / probes);
        baseline.push(theirs / probes);
    }
    let ratios: Vec<f64> = spontol.windows(2).map(|w| w[1] / w[0]).collect();
    let base_ratios: Vec<f64> = baseline.windows(2).map(|w| w[1] / w[0]).collect();
    outcome(
        ratios.iter().all(|r| *r < 1.5) && base_ratios.iter().all(|r| *r == 2.0),
        format!(
            "mean comparisons {:.2?} (ratios {:.3?}), baseline {:?} (ratios {:?})",
            spontol, ratios, baseline, base_ratios
        ),
    )
}

fn reproducibility() -> Outcome {
    let (corpus, _) = generate_synthetic(&SyntheticParams::benchmark(), 11).unwrap();
    let run = || {
        let dir = tempfile::tempdir().unwrap();
        let model = build(&corpus, &BuildParams::default()).unwrap();
        model.save(&dir.path().join("m")).unwrap();
        let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir.path().join("m"))
            .unwrap()
            .map(|e| {
                let e = e.unwrap();
                (e.file_name().into_string().unwrap(), std::fs::read(e.path()).unwrap())
            })
            .collect();
        files.sort();
        let report = run_eval(
            &corpus,
            &EvalConfig {
                trials: 2,
                ..Default::default()
            },
        )
        .unwrap();
        (
            files,
            report.trials_csv().unwrap(),
            report.stories_csv().unwrap(),
            report.to_text(),
        )
    };
    let (first, second) = (run(), run());
    let bytes: usize = first.0.iter().map(|(_, b)| b.len()).sum();
    outcome(
        first == second,
        format!("{} model files ({bytes} bytes) and 3 reports identical", first.0.len()),
    )
}

fn corpus_round_trip() -> Outcome {
    let sour = parse_corpus(SOUR_GRAPES).unwrap();
    let mut ok = usize::from(
        parse_corpus(&serialize_corpus(&sour)).unwrap() == sour
            && serialize_corpus(&sour) == serialize_corpus(&parse_corpus(&serialize_corpus(&sour)).unwrap()),
    );
    for seed in 0..100u64 {
        let params = SyntheticParams {
            num_stories: 1 + (seed as usize % 15),
            num_schemas: seed as usize % 3,
            placements_per_schema: 1,
            ..Default::default()
        };
        let (c, _) = generate_synthetic(&params, seed).unwrap();
        let text = serialize_corpus(&c);
        let back = parse_corpus(&text).unwrap();
        ok += usize::from(back == c && serialize_corpus(&back) == text);
    }
    outcome(ok == 101, format!("{ok}/101 corpora round-trip"))
}

fn main() {
    let criteria: [(&str, Check); 8] = [
        ("1 golden transform", golden_transform),
        ("2 isomorphism invariance", isomorphism_invariance),
        ("3 goldfish parse", goldfish),
        ("4 oracle checks", oracle_checks),
        ("5 benchmark split", benchmark_split),
        ("6 sublinearity", sublinearity),
        ("7 reproducibility", reproducibility),
        ("8 corpus round-trip", corpus_round_trip),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let o = check();
        failed += usize::from(!o.pass);
        println!(
            "{} criterion {name}: {} [{:.1}s]",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
