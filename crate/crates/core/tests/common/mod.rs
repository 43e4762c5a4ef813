//! Random instances shared by the property and acceptance tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use spontol::corpus::{generate_synthetic, SyntheticParams};
use spontol::ontology::Ontology;
use spontol::rng::substream;
use spontol::windows::grab_connected_statements;
use spontol::{FeatureBag, Statement};

/// A connected window of at most `max` statements cut from a random story.
pub fn random_window(seed: u64, max: usize) -> Vec<Statement> {
    let mut rng = substream(seed, &["window"]);
    let params = SyntheticParams {
        num_stories: 1,
        min_statements: 5,
        max_statements: 14,
        num_schemas: 1,
        schema_size: 4,
        placements_per_schema: 1,
        noise_relation_vocab: 6,
        schema_relation_vocab: 4,
        labeled_fraction: 0.25,
        attach_probability: 0.8,
        ..Default::default()
    };
    let (corpus, _) = generate_synthetic(&params, rng.gen()).expect("feasible params");
    let size = rng.gen_range(1..=max);
    grab_connected_statements(&corpus.stories[0], size, &mut rng).expect("non-empty story")
}

/// Renames every entity and label bijectively and shuffles the statements.
pub fn rename_and_shuffle(window: &[Statement], seed: u64) -> Vec<Statement> {
    let mut rng = substream(seed, &["rename"]);
    let mut symbols: Vec<&str> = window.iter().flat_map(Statement::symbols).collect();
    symbols.sort();
    symbols.dedup();
    let mut fresh: Vec<usize> = (0..symbols.len()).collect();
    fresh.shuffle(&mut rng);
    let map: BTreeMap<&str, String> = symbols
        .iter()
        .zip(fresh)
        .map(|(s, i)| (*s, format!("z{i}")))
        .collect();
    let mut out: Vec<Statement> = window
        .iter()
        .map(|st| {
            let p = st.proposition();
            let args: Vec<&str> = p.args.iter().map(|a| map[a.as_str()].as_str()).collect();
            match st.label() {
                Some(l) => Statement::labeled(map[l].as_str(), p.relation.as_str(), args),
                None => Statement::plain(p.relation.as_str(), args),
            }
        })
        .collect();
    out.shuffle(&mut rng);
    out
}

fn random_bag(rng: &mut impl Rng, universe: &[&str], min: usize, max: usize) -> FeatureBag {
    let n = rng.gen_range(min..=max);
    universe.choose_multiple(rng, n).copied().collect()
}

const TOKENS: [&str; 8] = ["a", "b", "c", "d", "e", "f", "g", "h"];

/// Up to five bags over at most eight tokens.
pub fn random_chunk_instance(seed: u64) -> Vec<FeatureBag> {
    let mut rng = substream(seed, &["chunk"]);
    let n = rng.gen_range(2..=5);
    // A shared core makes compressible instances common.
    let core = random_bag(&mut rng, &TOKENS, 2, 4);
    (0..n)
        .map(|_| {
            let mut b = random_bag(&mut rng, &TOKENS, 1, 4);
            if rng.gen_bool(0.6) {
                b.extend_from(&core);
            }
            b
        })
        .collect()
}

/// An ontology of up to six concepts and a bag of at most twelve tokens.
pub fn random_parse_instance(seed: u64) -> (Ontology, FeatureBag) {
    let mut rng = substream(seed, &["parse"]);
    let universe: Vec<String> = (0..12).map(|i| format!("t{i}")).collect();
    let universe: Vec<&str> = universe.iter().map(String::as_str).collect();
    let k = rng.gen_range(0..=6);
    let concepts = (0..k)
        .map(|i| (format!("K{i}"), random_bag(&mut rng, &universe, 2, 5)))
        .collect();
    let o = Ontology::new(concepts, vec![]).expect("flat concepts");
    let b = random_bag(&mut rng, &universe, 0, 12);
    (o, b)
}

/// Two windows of at most eight statements from stories sharing a planted
/// template.
pub fn random_story_pair(seed: u64) -> (spontol::Story, spontol::Story) {
    let mut rng = substream(seed, &["pair"]);
    let params = SyntheticParams {
        num_stories: 2,
        min_statements: 4,
        max_statements: 12,
        num_schemas: 1,
        schema_size: 4,
        placements_per_schema: 2,
        noise_relation_vocab: 16,
        schema_relation_vocab: 8,
        labeled_fraction: 0.2,
        attach_probability: 0.8,
        ..Default::default()
    };
    let (corpus, _) = generate_synthetic(&params, rng.gen()).expect("feasible params");
    let mut cut = |i: usize| {
        let story = &corpus.stories[i];
        let w = grab_connected_statements(story, rng.gen_range(1..=8), &mut rng).expect("non-empty");
        spontol::Story::with_statements(story.name.clone(), w)
    };
    let a = cut(0);
    let b = cut(1);
    (a, b)
}

/// No relation occurs twice, so no statement needs lettering.
pub fn lettering_free(statements: &[Statement]) -> bool {
    let mut seen = std::collections::BTreeSet::new();
    statements.iter().all(|s| seen.insert(s.proposition().relation.clone()))
}
