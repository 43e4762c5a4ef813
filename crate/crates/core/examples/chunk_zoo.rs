//! Chunks a small zoo of animal feature bags into a concept DAG.
//!
//! `cargo run --example chunk_zoo`

use spontol::ontology::{chunk_instances, ChunkConfig};
use spontol::FeatureBag;

const ZOO: &[(&str, &[&str])] = &[
    ("trout", &["fins", "gills", "scales", "eggs", "swims"]),
    ("salmon", &["fins", "gills", "scales", "eggs", "swims", "migrates"]),
    ("shark", &["fins", "gills", "swims", "predator"]),
    ("sparrow", &["feathers", "beak", "eggs", "flies", "wings"]),
    ("eagle", &["feathers", "beak", "eggs", "flies", "wings", "predator"]),
    ("penguin", &["feathers", "beak", "eggs", "wings", "swims"]),
    ("bat", &["fur", "wings", "flies", "milk"]),
    ("wolf", &["fur", "milk", "predator", "legs"]),
    ("dog", &["fur", "milk", "legs", "domestic"]),
];

fn main() {
    let instances: Vec<(String, FeatureBag)> = ZOO
        .iter()
        .map(|(name, tokens)| (name.to_string(), tokens.iter().copied().collect()))
        .collect();
    let (ontology, trace) = chunk_instances(instances, &ChunkConfig::default());

    println!("description length by iteration: {:?}", trace.dl);
    println!("gains: {:?}\n", trace.gains);
    for c in ontology.concepts() {
        println!("{}  {}\n    closure {}", c.id, c.bag, c.closure());
    }
    println!();
    for (name, bag) in ontology.instances() {
        println!("{name:<8} {bag}");
    }
}
