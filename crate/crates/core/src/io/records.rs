//! CSV records. Each file starts with `#` comment lines carrying the format
//! version and run metadata; the body is plain CSV with a fixed header.

use std::io::{Read, Write};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::Result;

pub const CSV_FORMAT_VERSION: u32 = 1;

/// Outcome of one estimator run. An empty `e_hat` means no escape path was
/// found (`escaped = false`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    pub algorithm: String,
    pub seconds: f64,
    pub e_hat: Option<f64>,
    pub escaped: bool,
    pub e_lower: Option<f64>,
    pub iterations: usize,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub seed: u64,
    pub seconds: f64,
    pub e_hat: Option<f64>,
    pub e_lower: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameRecord {
    pub frame: usize,
    pub scene: String,
    pub mean: Option<f64>,
    pub std: Option<f64>,
    pub n_finite: usize,
    pub n_infinite: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaRecord {
    pub gamma: f64,
    pub mean: Option<f64>,
    pub std: Option<f64>,
    pub n: usize,
}

/// One grid cell of an oracle dump; colliding cells have an empty energy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub energy: Option<f64>,
    pub goal: bool,
}

/// `None` for infinite or NaN values, which the CSV body leaves empty.
pub fn finite(value: f64) -> Option<f64> {
    value.is_finite().then_some(value)
}

/// Writes `# format_version=N`, then each comment line, then the CSV body.
pub fn write_csv<W: Write, T: Serialize>(
    mut out: W,
    comments: &[String],
    rows: &[T],
) -> Result<()> {
    writeln!(out, "# format_version={CSV_FORMAT_VERSION}")?;
    for line in comments {
        writeln!(out, "# {line}")?;
    }
    let mut writer = csv::Writer::from_writer(out);
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_csv<R: Read, T: DeserializeOwned>(input: R) -> Result<Vec<T>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(input);
    let mut rows = Vec::new();
    for row in reader.deserialize() {
        rows.push(row?);
    }
    Ok(rows)
}

/// The CSV text without its comment lines.
pub fn body(text: &str) -> String {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn run_records_round_trip() {
        let rows = vec![
            RunRecord {
                seed: 1,
                algorithm: "binary".into(),
                seconds: 1.25,
                e_hat: Some(2.943_000_000_000_1),
                escaped: true,
                e_lower: Some(0.0),
                iterations: 12,
                reason: "interval-collapsed".into(),
            },
            RunRecord {
                seed: 2,
                algorithm: "conservative".into(),
                seconds: 20.0,
                e_hat: None,
                escaped: false,
                e_lower: None,
                iterations: 20,
                reason: "budget".into(),
            },
        ];
        let mut buf = Vec::new();
        write_csv(&mut buf, &["generated 2026-01-01T00:00:00Z".into()], &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# format_version=1\n"));
        assert!(text.contains("\n2,conservative,20.0,,false,,20,budget\n"));
        let back: Vec<RunRecord> = read_csv(text.as_bytes()).unwrap();
        assert_eq!(back, rows);
    }

    #[test]
    fn body_drops_comments() {
        assert_eq!(body("# a\nx,y\n1,2\n"), "x,y\n1,2\n");
    }
}
