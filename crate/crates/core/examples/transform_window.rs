//! Turns windows of the Sour Grapes story into feature bags.
//!
//! `cargo run --example transform_window`

use spontol::corpus::{parse_corpus, SOUR_GRAPES};
use spontol::rng::substream;
use spontol::transform::transform;
use spontol::windows::grab_connected_statements;
use spontol::Statement;

const WINDOWS: &str = "\
story blame
blameFor Of3Men concCircum m33
sameAs m33 (fail Of3Men)
fail Of3Men
circumstances concCircum
men Of3Men
incapable Of3Men
story decide
false f36
sameAs f36 (sour Of3Grapes)
sameAs f35 (decide Of3Fox f36)
cause f34 f35
decide Of3Fox f36
";

fn show(title: &str, window: &[Statement]) -> Result<(), Box<dyn std::error::Error>> {
    println!("{title}");
    for st in window {
        println!("    {st}");
    }
    let bag = transform(window)?;
    println!("  {} atoms", bag.len());
    for atom in bag.iter() {
        println!("    {atom}");
    }
    println!();
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for w in parse_corpus(WINDOWS)?.stories {
        show(&format!("{} window", w.name), &w.statements.iter().cloned().collect::<Vec<_>>())?;
    }

    let corpus = parse_corpus(SOUR_GRAPES)?;
    let mut rng = substream(42, &["example"]);
    for i in 0..3 {
        let w = grab_connected_statements(&corpus.stories[0], 5, &mut rng)?;
        show(&format!("random window {i}"), &w)?;
    }
    Ok(())
}
