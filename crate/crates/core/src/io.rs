//! Reading and writing spaces as JSON or headerless CSV.
//!
//! JSON documents have the shape `{"n": 3, "labels": ["a", "b", "c"], "d": [[...], ...]}`
//! with `labels` optional. CSV files hold one matrix row per line and no header.
//! Both readers validate the metric axioms before returning.

use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{GhError, Result};
use crate::metricspace::{FiniteMetricSpace, TAU_METRIC};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpaceDocument {
    n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
    d: Vec<Vec<f64>>,
}

impl SpaceDocument {
    fn into_space(self, tolerance: f64) -> Result<FiniteMetricSpace> {
        if self.d.len() != self.n {
            return Err(GhError::Structural(format!(
                "\"n\" is {} but \"d\" has {} rows",
                self.n,
                self.d.len()
            )));
        }
        let space = FiniteMetricSpace::with_tolerance(self.d, tolerance)?;
        match self.labels {
            Some(labels) => space.with_labels(labels),
            None => Ok(space),
        }
    }
}

impl Serialize for FiniteMetricSpace {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        SpaceDocument {
            n: self.n(),
            labels: self.labels().map(<[String]>::to_vec),
            d: self.to_rows(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for FiniteMetricSpace {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let doc = SpaceDocument::deserialize(deserializer)?;
        doc.into_space(TAU_METRIC).map_err(serde::de::Error::custom)
    }
}

fn json_error(err: serde_json::Error) -> GhError {
    if err.is_data() && err.line() == 0 {
        return GhError::Parse {
            location: None,
            message: err.to_string(),
        };
    }
    GhError::Parse {
        location: Some(format!("line {}, column {}", err.line(), err.column())),
        message: err.to_string(),
    }
}

/// Parses a space from its JSON document, validating the metric axioms.
///
/// Syntax errors become [`GhError::Parse`]; a matrix that parses but is not a
/// metric keeps its structural or domain classification.
pub fn space_from_json(text: &str) -> Result<FiniteMetricSpace> {
    space_from_json_with_tolerance(text, TAU_METRIC)
}

/// As [`space_from_json`], allowing `tolerance` slack on the triangle inequality.
pub fn space_from_json_with_tolerance(text: &str, tolerance: f64) -> Result<FiniteMetricSpace> {
    let doc: SpaceDocument = serde_json::from_str(text).map_err(json_error)?;
    doc.into_space(tolerance)
}

pub fn space_to_json(space: &FiniteMetricSpace) -> String {
    serde_json::to_string_pretty(space).expect("spaces always serialize")
}

/// Parses a headerless CSV matrix, one row per line.
pub fn space_from_csv(text: &str) -> Result<FiniteMetricSpace> {
    space_from_csv_with_tolerance(text, TAU_METRIC)
}

pub fn space_from_csv_with_tolerance(text: &str, tolerance: f64) -> Result<FiniteMetricSpace> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| GhError::Parse {
            location: e.position().map(|p| format!("line {}", p.line())),
            message: e.to_string(),
        })?;
        let line = record
            .position()
            .map_or(rows.len() as u64 + 1, |p| p.line());
        let row = record
            .iter()
            .enumerate()
            .map(|(col, field)| {
                field.parse::<f64>().map_err(|e| GhError::Parse {
                    location: Some(format!("line {line}, column {}", col + 1)),
                    message: format!("{field:?} is not a number: {e}"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    FiniteMetricSpace::with_tolerance(rows, tolerance)
}

pub fn space_to_csv(space: &FiniteMetricSpace) -> String {
    let mut writer = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    for row in space.to_rows() {
        writer
            .write_record(row.iter().map(f64::to_string))
            .expect("writing to memory");
    }
    String::from_utf8(writer.into_inner().expect("writing to memory")).expect("ascii output")
}

/// Reads a space from a `.csv` file or, for any other extension, a JSON file.
pub fn read_space(path: &Path) -> Result<FiniteMetricSpace> {
    read_space_with_tolerance(path, TAU_METRIC)
}

pub fn read_space_with_tolerance(path: &Path, tolerance: f64) -> Result<FiniteMetricSpace> {
    let text = std::fs::read_to_string(path).map_err(|e| GhError::Parse {
        location: Some(path.display().to_string()),
        message: e.to_string(),
    })?;
    let is_csv = path
        .extension()
        .is_some_and(|ext| ext.eq_ignore_ascii_case("csv"));
    let parsed = if is_csv {
        space_from_csv_with_tolerance(&text, tolerance)
    } else {
        space_from_json_with_tolerance(&text, tolerance)
    };
    parsed.map_err(|e| match e {
        GhError::Parse { location, message } => GhError::Parse {
            location: Some(match location {
                Some(l) => format!("{}: {l}", path.display()),
                None => path.display().to_string(),
            }),
            message,
        },
        other => other,
    })
}
