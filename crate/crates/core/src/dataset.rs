//! Feature file I/O.
//!
//! The feature file is UTF-8 CSV with header `label,f0,f1,...,f{N-1}` and one
//! row per message. Lines starting with `#` are comments and carry provenance.
//! Values are written in the shortest form that parses back to the same `f64`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::types::Identity;

pub fn read_features<R: Read>(reader: R) -> Result<Vec<Identity>> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::None)
        .from_reader(reader);

    let header = csv.headers()?.clone();
    let n = check_header(&header)?;

    let mut identities = Vec::new();
    for (index, row) in csv.records().enumerate() {
        let row = row?;
        if row.len() != n + 1 {
            return Err(Error::DimensionMismatch {
                index,
                expected: n,
                found: row.len().saturating_sub(1),
            });
        }
        let label = &row[0];
        if label.is_empty() {
            return Err(Error::InvalidRecord {
                index,
                reason: "empty label".into(),
            });
        }
        let features = row
            .iter()
            .skip(1)
            .enumerate()
            .map(|(position, field)| {
                field
                    .trim()
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidRecord {
                        index,
                        reason: format!("feature {position}: cannot parse {field:?}"),
                    })
            })
            .collect::<Result<Vec<_>>>()?;
        identities.push(Identity::checked(features, Some(label.to_owned()), index)?);
    }
    if identities.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(identities)
}

fn check_header(header: &csv::StringRecord) -> Result<usize> {
    let bad = |reason: String| Error::InvalidRecord { index: 0, reason };
    if header.get(0) != Some("label") {
        return Err(bad("header must start with `label`".into()));
    }
    let n = header.len() - 1;
    if n == 0 {
        return Err(bad("header has no feature columns".into()));
    }
    for (i, name) in header.iter().skip(1).enumerate() {
        if name != format!("f{i}") {
            return Err(bad(format!(
                "header column {} is {name:?}, expected f{i}",
                i + 1
            )));
        }
    }
    Ok(n)
}

pub fn load_features(path: impl AsRef<Path>) -> Result<Vec<Identity>> {
    read_features(BufReader::new(File::open(path)?))
}

/// Writes identities in the feature-file format. Each entry of `comments`
/// becomes one `# ...` line ahead of the header.
pub fn write_features<W: Write>(
    writer: W,
    identities: &[Identity],
    comments: &[String],
) -> Result<()> {
    let first = identities.first().ok_or(Error::EmptyInput)?;
    let n = first.dim();
    let mut w = BufWriter::new(writer);
    for line in comments {
        writeln!(w, "# {line}")?;
    }
    write!(w, "label")?;
    for i in 0..n {
        write!(w, ",f{i}")?;
    }
    writeln!(w)?;

    for (index, identity) in identities.iter().enumerate() {
        if identity.dim() != n {
            return Err(Error::DimensionMismatch {
                index,
                expected: n,
                found: identity.dim(),
            });
        }
        let label = identity.label().unwrap_or_default();
        if label.is_empty() || label.contains([',', '"', '\n', '\r']) || label.starts_with('#') {
            return Err(Error::InvalidRecord {
                index,
                reason: format!("label {label:?} cannot be written to a feature file"),
            });
        }
        write!(w, "{label}")?;
        for v in identity.features() {
            write!(w, ",{v:?}")?;
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_features(
    path: impl AsRef<Path>,
    identities: &[Identity],
    comments: &[String],
) -> Result<()> {
    write_features(File::create(path)?, identities, comments)
}
