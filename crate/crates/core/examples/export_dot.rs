//! Writes both ontology levels of a small model as DOT graphs.
//!
//! `cargo run --release --example export_dot -- [out dir]`
//! then e.g. `dot -Tsvg schema.dot -o schema.svg`.

use std::path::PathBuf;

use spontol::corpus::{generate_synthetic, SyntheticParams};
use spontol::model::{build, BuildParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| ".".into()));
    let (corpus, _) = generate_synthetic(&SyntheticParams::default(), 5)?;
    let model = build(
        &corpus,
        &BuildParams {
            num_windows: 30,
            window_size: 8,
            ..Default::default()
        },
    )?;
    std::fs::create_dir_all(&dir)?;
    std::fs::write(dir.join("schema.dot"), model.schema_ontology.to_dot(true))?;
    std::fs::write(dir.join("window.dot"), model.window_ontology.to_dot(false))?;
    println!(
        "schema.dot: {} concepts, {} stories; window.dot: {} concepts",
        model.schema_ontology.concepts().len(),
        model.schema_ontology.instances().len(),
        model.window_ontology.concepts().len()
    );
    Ok(())
}
