//! Plot-ready CSV tables for a sweep.
//!
//! | file           | columns                                                     |
//! |----------------|-------------------------------------------------------------|
//! | `accuracy.csv` | `lambda,accuracy,runs,saturation_rate,degenerate`           |
//! | `bits.csv`     | `lambda,mean_packets,mean_bits_semantic,bits_syntactic`     |
//! | `btr.csv`      | `lambda,mean_btr,syntactic_reference`                       |
//! | `summary.csv`  | `n,lambda_opt,accuracy,btr`                                 |
//!
//! Reals use 17 significant digits so every value parses back to the same
//! `f64`. Leading `#` lines carry the provenance passed by the caller.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::simulator::{Optimum, SweepTable};

pub const ACCURACY_FILE: &str = "accuracy.csv";
pub const BITS_FILE: &str = "bits.csv";
pub const BTR_FILE: &str = "btr.csv";
pub const SUMMARY_FILE: &str = "summary.csv";

/// Scientific notation with 17 significant digits.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn preamble(provenance: &[String]) -> String {
    provenance
        .iter()
        .map(|line| format!("# {line}\n"))
        .collect()
}

pub fn render_accuracy(table: &SweepTable, provenance: &[String]) -> String {
    let mut out = preamble(provenance);
    out.push_str("lambda,accuracy,runs,saturation_rate,degenerate\n");
    for r in &table.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            fmt_real(r.lambda),
            fmt_real(r.accuracy),
            r.runs,
            fmt_real(r.saturation_rate),
            u8::from(r.degenerate)
        );
    }
    out
}

pub fn render_bits(table: &SweepTable, provenance: &[String]) -> String {
    let mut out = preamble(provenance);
    out.push_str("lambda,mean_packets,mean_bits_semantic,bits_syntactic\n");
    for r in &table.rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            fmt_real(r.lambda),
            fmt_real(r.mean_packets),
            fmt_real(r.mean_bits_semantic),
            r.bits_syntactic
        );
    }
    out
}

pub fn render_btr(table: &SweepTable, provenance: &[String]) -> String {
    let mut out = preamble(provenance);
    out.push_str("lambda,mean_btr,syntactic_reference\n");
    for r in &table.rows {
        let _ = writeln!(
            out,
            "{},{},{}",
            fmt_real(r.lambda),
            fmt_real(r.mean_btr),
            fmt_real(1.0)
        );
    }
    out
}

pub fn render_summary(table: &SweepTable, optimum: &Optimum, provenance: &[String]) -> String {
    let mut out = preamble(provenance);
    out.push_str("n,lambda_opt,accuracy,btr\n");
    let _ = writeln!(
        out,
        "{},{},{},{}",
        table.n,
        fmt_real(optimum.lambda),
        fmt_real(optimum.accuracy),
        fmt_real(optimum.btr)
    );
    out
}

/// Writes the four tables into `dir`, creating it if needed.
pub fn write_sweep(
    dir: &Path,
    table: &SweepTable,
    optimum: &Optimum,
    provenance: &[String],
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let files = [
        (ACCURACY_FILE, render_accuracy(table, provenance)),
        (BITS_FILE, render_bits(table, provenance)),
        (BTR_FILE, render_btr(table, provenance)),
        (SUMMARY_FILE, render_summary(table, optimum, provenance)),
    ];
    let mut written = Vec::with_capacity(files.len());
    for (name, body) in files {
        let path = dir.join(name);
        fs::write(&path, body)?;
        written.push(path);
    }
    Ok(written)
}
