//! Writes a synthetic feature file and reads it back.
//!
//!     cargo run --example generate_dataset -- out.csv

use semid::dataset::{load_features, save_features};
use semid::{build_semantic_base, gen_synthetic, SyntheticParams};

fn main() -> semid::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "features.csv".into());
    let params = SyntheticParams {
        classes: 10,
        features: 64,
        per_class: 100,
        spread: 1.0,
        separation: 20.0,
        seed: 42,
    };
    let rows = gen_synthetic(&params)?;
    save_features(&path, &rows, &["synthetic clusters, seed 42".to_string()])?;

    let back = load_features(&path)?;
    let base = build_semantic_base(&back, 64)?;
    println!(
        "{path}: {} rows, N = {}, K = {}",
        back.len(),
        base.n(),
        base.k()
    );
    for e in base.elements() {
        println!("  {} ({} members)", e.name, e.member_count);
    }
    println!("base digest {}", hex::encode(base.digest()));
    Ok(())
}
