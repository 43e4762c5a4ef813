//! Parsing a new bag against known concepts, and what the parse predicts.
//!
//! `cargo run --example goldfish`

use spontol::ontology::{parse, parse_with, unfold, Ontology, ParseOptions};
use spontol::FeatureBag;

fn bag(tokens: &[&str]) -> FeatureBag {
    tokens.iter().copied().collect()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let o = Ontology::new(
        vec![
            ("fish".into(), bag(&["breathes=no", "fins=yes", "feathers=no"])),
            ("bird".into(), bag(&["feathers=yes", "eggs=yes", "airborne=yes"])),
        ],
        vec![],
    )?;

    let goldfish = bag(&["breathes=no", "fins=yes", "feathers=no", "domestic=yes"]);
    let p = parse(&goldfish, &o);
    println!("goldfish {goldfish}");
    println!(
        "  raw dl {}, parsed dl {} = concepts {:?} + additions {} + deletions {}",
        goldfish.len(),
        p.dl,
        p.concepts_used,
        p.additions,
        p.deletions
    );
    println!("  reconstructed {}", p.reconstruct(&o)?);

    // Half a bird: the open-world parse fills in the rest.
    let sighting = bag(&["feathers=yes", "eggs=yes", "nests=yes"]);
    let options = ParseOptions {
        open_world: true,
        ..Default::default()
    };
    let p = parse_with(&sighting, &o, &options);
    let u = unfold(&p, &o)?;
    println!("sighting {sighting}");
    println!("  concepts {:?}, predicted {}", p.concepts_used, u.predicted);
    Ok(())
}
