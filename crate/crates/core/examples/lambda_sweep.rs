//! Accuracy against bit transmission ratio across the default threshold grid.
//!
//!     cargo run --release --example lambda_sweep

use semid::{
    build_semantic_base, default_lambda_grid, gen_synthetic, optimize_lambda, sweep,
    SyntheticParams,
};

fn main() -> semid::Result<()> {
    let rows = gen_synthetic(&SyntheticParams {
        classes: 10,
        features: 256,
        per_class: 50,
        spread: 1.0,
        separation: 3.0,
        seed: 1,
    })?;
    let base = build_semantic_base(&rows, 64)?;
    let table = sweep(&base, &rows, &default_lambda_grid(), 7)?;

    println!(
        "{:>6} {:>9} {:>9} {:>8}",
        "lambda", "accuracy", "packets", "BTR"
    );
    for row in &table.rows {
        let flag = if row.degenerate {
            "  (first packet decides)"
        } else {
            ""
        };
        println!(
            "{:>6.2} {:>9.4} {:>9.2} {:>8.4}{flag}",
            row.lambda, row.accuracy, row.mean_packets, row.mean_btr
        );
    }
    let opt = optimize_lambda(&table)?;
    println!(
        "best lambda {:.2}: accuracy {:.4}, BTR {:.4}",
        opt.lambda, opt.accuracy, opt.btr
    );
    Ok(())
}
