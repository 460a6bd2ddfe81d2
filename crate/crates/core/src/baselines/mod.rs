//! Encoding, timing and gradient-stability comparisons against other
//! movement-primitive bases and a sampled distance field.

mod basis;
mod encoding;
mod gradient_study;
mod timing;

pub use basis::{build_basis, fit_basis, reconstruction_error, BasisFamily, BasisKind};
pub use encoding::{run_encoding_benchmark, BenchReport, EncodingRow, TABLE_PARAM_COUNTS};
pub use gradient_study::{gradient_instability_study, GradientStudy, GradientStudyConfig};
pub use timing::{run_timing_benchmark, TimingConfig, TimingRow};
