use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::spline::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrajectoryFormat {
    Csv,
    Json,
}

impl TrajectoryFormat {
    /// Guesses from the file extension; anything but `.json` is CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => TrajectoryFormat::Json,
            _ => TrajectoryFormat::Csv,
        }
    }
}

pub fn load_trajectory(path: &Path, format: Option<TrajectoryFormat>) -> Result<Trajectory> {
    let text = std::fs::read_to_string(path)?;
    let format = format.unwrap_or_else(|| TrajectoryFormat::from_path(path));
    let parsed = match format {
        TrajectoryFormat::Csv => parse_trajectory_csv(&text),
        TrajectoryFormat::Json => parse_trajectory_json(&text),
    };
    parsed.map_err(|e| e.with_path(path))
}

/// CSV with a header row: an optional leading `t` column, then `x1..xD`.
pub fn parse_trajectory_csv(text: &str) -> Result<Trajectory> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::format(Some(1), e.to_string()))?
        .clone();
    if headers.is_empty() || headers.iter().all(|h| h.is_empty()) {
        return Err(Error::format(Some(1), "missing header row"));
    }
    if headers.iter().all(|h| h.parse::<f64>().is_ok()) {
        return Err(Error::format(Some(1), "missing header row (first line is numeric)"));
    }
    let has_time = headers.get(0) == Some("t");
    let coord_names: Vec<&str> = headers.iter().skip(usize::from(has_time)).collect();
    if coord_names.is_empty() {
        return Err(Error::format(Some(1), "header has no coordinate columns"));
    }
    for (i, name) in coord_names.iter().enumerate() {
        if *name != format!("x{}", i + 1) {
            return Err(Error::format(
                Some(1),
                format!("unexpected column {name:?}; expected optional `t` then x1..xD"),
            ));
        }
    }
    let width = headers.len();
    let mut points = Vec::new();
    let mut times = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line());
            Error::format(line, e.to_string())
        })?;
        let line = record.position().map(|p| p.line());
        if record.len() != width {
            return Err(Error::format(
                line,
                format!("expected {width} fields, found {}", record.len()),
            ));
        }
        let mut values = Vec::with_capacity(width);
        for field in record.iter() {
            let v: f64 = field
                .parse()
                .map_err(|_| Error::format(line, format!("not a number: {field:?}")))?;
            if !v.is_finite() {
                return Err(Error::format(line, format!("non-finite value {field:?}")));
            }
            values.push(v);
        }
        if has_time {
            times.push(values.remove(0));
        }
        points.push(values);
    }
    if points.len() < 3 {
        return Err(Error::Domain(format!(
            "trajectory needs at least 3 samples, got {}",
            points.len()
        )));
    }
    Trajectory::new(points, has_time.then_some(times))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TrajectoryJson {
    dim: usize,
    points: Vec<Vec<f64>>,
    #[serde(default)]
    timestamps: Option<Vec<f64>>,
}

/// `{"dim": D, "points": [[...], ...], "timestamps": [...]}` (timestamps optional).
pub fn parse_trajectory_json(text: &str) -> Result<Trajectory> {
    let doc: TrajectoryJson =
        serde_json::from_str(text).map_err(|e| Error::format(Some(e.line() as u64), e.to_string()))?;
    for (j, p) in doc.points.iter().enumerate() {
        if p.len() != doc.dim {
            return Err(Error::format(
                None,
                format!("point {j} has {} coordinates, dim is {}", p.len(), doc.dim),
            ));
        }
    }
    Trajectory::new(doc.points, doc.timestamps)
}
