use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::distance::{DistanceField, FieldQuery, UnionField};
use crate::error::{Error, Result};
use crate::spline::{QuadraticSpline, SegmentControl};

pub const FORMAT_VERSION: u32 = 1;

/// Loaded models are rebuilt from their free entries; anything further off
/// than this is reported.
const VIOLATION_WARNING: f64 = 1e-9;

/// On-disk form of one spline. `segments[i]` is `[w1, w2, w3]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub format_version: u32,
    pub dim: usize,
    pub n_segments: usize,
    pub terminal_zero_velocity: bool,
    pub segments: Vec<[Vec<f64>; 3]>,
    #[serde(default)]
    pub metadata: BTreeMap<String, Value>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct UnionFile {
    members: Vec<ModelFile>,
}

pub fn model_document(spline: &QuadraticSpline, metadata: BTreeMap<String, Value>) -> ModelFile {
    ModelFile {
        format_version: FORMAT_VERSION,
        dim: spline.dim(),
        n_segments: spline.n_segments(),
        terminal_zero_velocity: spline.terminal_zero_velocity(),
        segments: spline
            .segments()
            .iter()
            .map(|s| [s.w1.clone(), s.w2.clone(), s.w3.clone()])
            .collect(),
        metadata,
    }
}

impl ModelFile {
    /// Rebuilds the spline; also returns the largest constraint violation
    /// present in the stored control points.
    pub fn to_spline(&self) -> Result<(QuadraticSpline, f64)> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::VersionMismatch {
                found: self.format_version,
                expected: FORMAT_VERSION,
            });
        }
        if self.segments.len() != self.n_segments || self.n_segments == 0 {
            return Err(Error::format(
                None,
                format!("n_segments is {} but {} segments are stored", self.n_segments, self.segments.len()),
            ));
        }
        let mut segs = Vec::with_capacity(self.n_segments);
        for (i, [w1, w2, w3]) in self.segments.iter().enumerate() {
            if [w1, w2, w3].iter().any(|w| w.len() != self.dim) {
                return Err(Error::format(None, format!("segment {i} does not have dim {}", self.dim)));
            }
            segs.push(SegmentControl::new(w1.clone(), w2.clone(), w3.clone())?);
        }
        QuadraticSpline::from_segments(&segs, self.terminal_zero_velocity)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("model serializes");
        s.push('\n');
        s
    }
}

pub fn save_model(spline: &QuadraticSpline, metadata: BTreeMap<String, Value>, path: &Path) -> Result<()> {
    super::write_atomic(path, model_document(spline, metadata).to_json().as_bytes())
}

/// Saves several splines as one union document `{"members": [...]}`.
pub fn save_union(members: &[(QuadraticSpline, BTreeMap<String, Value>)], path: &Path) -> Result<()> {
    if members.is_empty() {
        return Err(Error::domain("union needs at least one member"));
    }
    let doc = UnionFile {
        members: members.iter().map(|(s, m)| model_document(s, m.clone())).collect(),
    };
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    super::write_atomic(path, text.as_bytes())
}

/// A single spline or a union, as read from a model file.
#[derive(Debug, Clone, PartialEq)]
pub enum FieldModel {
    Single(QuadraticSpline),
    Union(UnionField),
}

impl DistanceField for FieldModel {
    fn dim(&self) -> usize {
        match self {
            FieldModel::Single(s) => DistanceField::dim(s),
            FieldModel::Union(u) => DistanceField::dim(u),
        }
    }

    fn scale(&self) -> f64 {
        match self {
            FieldModel::Single(s) => DistanceField::scale(s),
            FieldModel::Union(u) => DistanceField::scale(u),
        }
    }

    fn locate(&self, x: &[f64]) -> (FieldQuery, &QuadraticSpline) {
        match self {
            FieldModel::Single(s) => s.locate(x),
            FieldModel::Union(u) => u.locate(x),
        }
    }

    fn splines(&self) -> &[QuadraticSpline] {
        match self {
            FieldModel::Single(s) => s.splines(),
            FieldModel::Union(u) => u.splines(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct LoadedModel {
    pub field: FieldModel,
    /// One entry per member (a single model has one).
    pub metadata: Vec<BTreeMap<String, Value>>,
    /// Largest continuity violation in the stored control points.
    pub max_violation: f64,
}

fn check_version(doc: &Value) -> Result<()> {
    let found = doc.get("format_version").and_then(Value::as_u64);
    match found {
        Some(v) if v == u64::from(FORMAT_VERSION) => Ok(()),
        Some(v) => Err(Error::VersionMismatch {
            found: u32::try_from(v).unwrap_or(u32::MAX),
            expected: FORMAT_VERSION,
        }),
        None => Err(Error::format(None, "missing integer format_version")),
    }
}

/// Parses a single-spline or union model document.
pub fn parse_field(text: &str) -> Result<LoadedModel> {
    let doc: Value = serde_json::from_str(text).map_err(|e| Error::format(Some(e.line() as u64), e.to_string()))?;
    let (files, is_union): (Vec<ModelFile>, bool) = if let Some(members) = doc.get("members") {
        let members = members
            .as_array()
            .ok_or_else(|| Error::format(None, "members must be an array"))?;
        for m in members {
            check_version(m)?;
        }
        let union: UnionFile = serde_json::from_value(doc).map_err(|e| Error::format(None, e.to_string()))?;
        if union.members.is_empty() {
            return Err(Error::format(None, "union model has no members"));
        }
        (union.members, true)
    } else {
        check_version(&doc)?;
        let single = serde_json::from_value(doc).map_err(|e| Error::format(None, e.to_string()))?;
        (vec![single], false)
    };

    let mut splines = Vec::with_capacity(files.len());
    let mut metadata = Vec::with_capacity(files.len());
    let mut max_violation: f64 = 0.0;
    for f in files {
        let (spline, violation) = f.to_spline()?;
        max_violation = max_violation.max(violation);
        splines.push(spline);
        metadata.push(f.metadata);
    }
    if max_violation > VIOLATION_WARNING {
        log::warn!(
            "model control points violate continuity by up to {max_violation:e}; rebuilt from free weights"
        );
    }
    let field = if is_union {
        FieldModel::Union(UnionField::new(splines)?)
    } else {
        FieldModel::Single(splines.pop().expect("one spline"))
    };
    Ok(LoadedModel {
        field,
        metadata,
        max_violation,
    })
}

pub fn load_field(path: &Path) -> Result<LoadedModel> {
    let text = std::fs::read_to_string(path)?;
    parse_field(&text).map_err(|e| e.with_path(path))
}

/// Loads a single-spline model; a union file with one member is accepted.
pub fn load_model(path: &Path) -> Result<QuadraticSpline> {
    match load_field(path)?.field {
        FieldModel::Single(s) => Ok(s),
        FieldModel::Union(u) if u.members().len() == 1 => Ok(u.members()[0].clone()),
        FieldModel::Union(_) => Err(Error::domain(format!(
            "{} holds a union of several splines",
            path.display()
        ))),
    }
}
