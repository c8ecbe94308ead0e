//! Instance files in JSON Lines form.
//!
//! An optional first line holds a metadata object `{"n": int, "eta": real}`;
//! every other line is an array of `n` nonnegative numbers, one item per
//! line in arrival order. Ragged rows are rejected.

use std::fmt;
use std::fs;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::Deserialize;

use crate::domain::{DomainError, Instance, ValueVector};

#[derive(Debug)]
pub enum JsonlError {
    Io(io::Error),
    /// A line is neither a metadata object nor a numeric array.
    Parse {
        line: usize,
        message: String,
    },
    /// A row's length disagrees with the instance's agent count.
    RaggedRow {
        line: usize,
        expected: usize,
        got: usize,
    },
    Domain(DomainError),
    /// The file has no rows and no metadata, so `n` cannot be inferred.
    EmptyWithoutMetadata,
}

impl fmt::Display for JsonlError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Io(e) => write!(f, "io error: {e}"),
            Self::Parse { line, message } => write!(f, "line {line}: {message}"),
            Self::RaggedRow {
                line,
                expected,
                got,
            } => {
                write!(f, "line {line}: row has {got} values, expected {expected}")
            }
            Self::Domain(e) => write!(f, "invalid instance: {e}"),
            Self::EmptyWithoutMetadata => {
                write!(f, "empty file without a metadata line; agent count unknown")
            }
        }
    }
}

impl std::error::Error for JsonlError {}

impl From<io::Error> for JsonlError {
    fn from(e: io::Error) -> Self {
        Self::Io(e)
    }
}

impl From<DomainError> for JsonlError {
    fn from(e: DomainError) -> Self {
        Self::Domain(e)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Metadata {
    n: usize,
    #[serde(default)]
    eta: Option<f64>,
}

/// Reads an instance from a JSONL reader.
pub fn read_instance<R: Read>(reader: R) -> Result<Instance, JsonlError> {
    let mut n: Option<usize> = None;
    let mut eta: Option<f64> = None;
    let mut items: Vec<ValueVector> = Vec::new();

    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if idx == 0 && trimmed.starts_with('{') {
            let meta: Metadata = serde_json::from_str(trimmed).map_err(|e| JsonlError::Parse {
                line: line_no,
                message: format!("bad metadata object: {e}"),
            })?;
            n = Some(meta.n);
            eta = meta.eta;
            continue;
        }
        let row: Vec<f64> = serde_json::from_str(trimmed).map_err(|e| JsonlError::Parse {
            line: line_no,
            message: format!("expected a numeric array: {e}"),
        })?;
        if let Some(n) = n {
            if row.len() != n {
                return Err(JsonlError::RaggedRow {
                    line: line_no,
                    expected: n,
                    got: row.len(),
                });
            }
        } else {
            n = Some(row.len());
        }
        items.push(ValueVector::new(row)?);
    }

    let n = n.ok_or(JsonlError::EmptyWithoutMetadata)?;
    Ok(Instance::with_cap(n, items, eta)?)
}

/// Writes an instance in the JSONL form, always with a leading metadata line
/// so empty instances round-trip.
pub fn write_instance<W: Write>(mut writer: W, inst: &Instance) -> Result<(), JsonlError> {
    match inst.eta() {
        Some(eta) => writeln!(writer, "{{\"n\": {}, \"eta\": {}}}", inst.n(), eta)?,
        None => writeln!(writer, "{{\"n\": {}}}", inst.n())?,
    }
    for item in inst.items() {
        let row: Vec<String> = item.values().iter().map(|v| format!("{v}")).collect();
        writeln!(writer, "[{}]", row.join(", "))?;
    }
    Ok(())
}

pub fn read_instance_file<P: AsRef<Path>>(path: P) -> Result<Instance, JsonlError> {
    read_instance(fs::File::open(path)?)
}

pub fn write_instance_file<P: AsRef<Path>>(path: P, inst: &Instance) -> Result<(), JsonlError> {
    let mut file = fs::File::create(path)?;
    write_instance(&mut file, inst)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::vv;

    #[test]
    fn reads_with_metadata() {
        let text = "{\"n\": 2, \"eta\": 1.0}\n[0.5, 1.0]\n[0.0, 0.25]\n";
        let inst = read_instance(text.as_bytes()).unwrap();
        assert_eq!(inst.n(), 2);
        assert_eq!(inst.m(), 2);
        assert_eq!(inst.item(0).values(), &[0.5, 1.0]);
    }

    #[test]
    fn reads_without_metadata() {
        let text = "[0.5, 1.0, 0.0]\n[1.0, 0.0, 1.0]\n";
        let inst = read_instance(text.as_bytes()).unwrap();
        assert_eq!(inst.n(), 3);
        assert_eq!(inst.m(), 2);
        assert_eq!(inst.eta(), None);
    }

    #[test]
    fn rejects_ragged_rows() {
        let text = "[0.5, 1.0]\n[1.0]\n";
        assert!(matches!(
            read_instance(text.as_bytes()),
            Err(JsonlError::RaggedRow {
                line: 2,
                expected: 2,
                got: 1
            })
        ));
    }

    #[test]
    fn rejects_empty_without_metadata() {
        assert!(matches!(
            read_instance(&b""[..]),
            Err(JsonlError::EmptyWithoutMetadata)
        ));
    }

    #[test]
    fn empty_with_metadata_is_fine() {
        let inst = read_instance(&b"{\"n\": 3}\n"[..]).unwrap();
        assert_eq!(inst.n(), 3);
        assert!(inst.is_empty());
    }

    #[test]
    fn rejects_negative_values() {
        assert!(read_instance(&b"[0.5, -0.1]\n"[..]).is_err());
    }

    #[test]
    fn respects_declared_cap() {
        let ok = read_instance(&b"{\"n\": 2, \"eta\": 3.0}\n[2.5, 1.0]\n"[..]).unwrap();
        assert_eq!(ok.eta(), Some(3.0));
        assert!(read_instance(&b"{\"n\": 2}\n[2.5, 1.0]\n"[..]).is_err());
    }

    #[test]
    fn round_trips() {
        let inst =
            Instance::with_cap(2, vec![vv(&[0.5, 1.0]), vv(&[0.125, 0.0])], Some(1.5)).unwrap();
        let mut buf = Vec::new();
        write_instance(&mut buf, &inst).unwrap();
        let back = read_instance(&buf[..]).unwrap();
        assert_eq!(back, inst);
    }
}
