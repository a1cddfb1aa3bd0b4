//! Weights and one posterior step for a handful of distance vectors.
//!
//!     cargo run --example idw_weights

use semid::{idw_weights, update_posterior};

fn main() -> semid::Result<()> {
    for d in [
        vec![0.25, 0.75],
        vec![0.5, 0.5, 1.5],
        vec![0.0, 2.0, 0.0],
        vec![3.0, 3.0, 3.0],
    ] {
        let w = idw_weights(&d);
        let prior = vec![1.0 / d.len() as f64; d.len()];
        let post = update_posterior(&prior, &w)?;
        println!("d = {d:?}\n  w = {w:?}\n  posterior = {post:?}");
    }
    Ok(())
}
