//! Generates a synthetic corpus with planted schemas and prints a summary.
//!
//! `cargo run --example generate_corpus -- [seed]`

use spontol::corpus::{generate_synthetic, parse_corpus, serialize_corpus, SyntheticParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(7);
    let (corpus, truth) = generate_synthetic(&SyntheticParams::benchmark(), seed)?;

    let sizes: Vec<usize> = corpus.stories.iter().map(|s| s.len()).collect();
    println!(
        "{} stories, {}..={} statements, mean {:.1}",
        corpus.len(),
        sizes.iter().min().unwrap_or(&0),
        sizes.iter().max().unwrap_or(&0),
        corpus.mean_statements()
    );
    for schema in &truth.planted_schemas {
        println!(
            "{}  in {} stories",
            schema.id,
            truth.stories_with(&schema.id).len()
        );
        for st in &schema.template {
            println!("    {st}");
        }
    }

    let text = serialize_corpus(&corpus);
    assert_eq!(parse_corpus(&text)?, corpus);
    println!("\n{}", text.lines().take(12).collect::<Vec<_>>().join("\n"));
    Ok(())
}
