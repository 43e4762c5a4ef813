//! The train/test speed and accuracy comparison on a synthetic corpus.
//!
//! `cargo run --release --example eval_benchmark -- [trials] [corpus seed]`

use spontol::corpus::{generate_synthetic, SyntheticParams};
use spontol::eval::{run_eval, EvalConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let trials = args.next().map(|s| s.parse()).transpose()?.unwrap_or(5);
    let seed = args.next().map(|s| s.parse()).transpose()?.unwrap_or(7);

    let (corpus, _) = generate_synthetic(&SyntheticParams::benchmark(), seed)?;
    let config = EvalConfig {
        trials,
        ..Default::default()
    };
    let report = run_eval(&corpus, &config)?;
    print!("{}", report.table());
    println!();
    print!("{}", report.to_text());
    Ok(())
}
