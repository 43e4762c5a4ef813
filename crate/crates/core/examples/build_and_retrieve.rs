//! Builds a model on part of a synthetic corpus and retrieves analogs for
//! the held-out stories, next to the linear baseline.
//!
//! `cargo run --release --example build_and_retrieve`

use std::collections::BTreeSet;

use spontol::baseline::{linear_retrieve, BaselineStore};
use spontol::corpus::{generate_synthetic, SyntheticParams};
use spontol::model::{build, BuildParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = SyntheticParams {
        num_stories: 40,
        min_statements: 5,
        max_statements: 40,
        num_schemas: 4,
        placements_per_schema: 8,
        noise_relation_vocab: 150,
        attach_probability: 0.3,
        ..Default::default()
    };
    let (corpus, truth) = generate_synthetic(&params, 11)?;
    let (train, test) = corpus.stories.split_at(32);
    let train = corpus.subset(train.iter().map(|s| s.name.as_str()));

    let model = build(&train, &BuildParams::default())?;
    let store = BaselineStore::from_model(&model);
    println!(
        "{} window concepts, {} schema concepts over {} training stories\n",
        model.window_ontology.concepts().len(),
        model.schema_ontology.concepts().len(),
        model.stories.len()
    );

    for story in test {
        let r = model.retrieve(story)?;
        let base = linear_retrieve(&r.story_bag, &store, 3);
        let planted = &truth.placements[&story.name];
        let sharing: BTreeSet<String> = planted
            .iter()
            .flat_map(|s| truth.stories_with(s))
            .filter(|n| model.stories.iter().any(|(m, _)| m == n))
            .collect();
        println!("{} (planted {:?})", story.name, planted);
        println!(
            "  {} comparisons, {} schemas, {} stories retrieved",
            r.comparisons,
            r.schemas.len(),
            r.stories.len()
        );
        let top: Vec<&str> = base.stories.iter().map(|(n, _)| n.as_str()).collect();
        let found = top.iter().filter(|n| r.stories.contains(**n)).count();
        println!("  baseline top-3 {top:?} after {} comparisons, {found} also retrieved", base.comparisons);
        println!("  training stories sharing a planted schema: {}", sharing.len());
    }
    Ok(())
}
