//! File formats: trajectories in, models and grids in and out.

mod grid;
mod model;
mod trajectory;

use std::io::Write;
use std::path::Path;

pub use grid::{export_field_grid, grid_to_csv, grid_to_json, GridRow, GridSpec, Slice, GRID_CSV_HEADER};
pub use model::{
    load_field, load_model, model_document, parse_field, save_model, save_union, FieldModel, LoadedModel, ModelFile,
    FORMAT_VERSION,
};
pub use trajectory::{load_trajectory, parse_trajectory_csv, parse_trajectory_json, TrajectoryFormat};

use crate::error::Result;

/// Writes `bytes` to `path` through a temporary file in the same directory,
/// so a failed write never leaves a partial file behind.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
