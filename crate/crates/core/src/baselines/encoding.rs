use serde::{Deserialize, Serialize};

use super::basis::{build_basis, fit_basis, reconstruction_error, BasisFamily, BasisKind};
use super::timing::TimingRow;
use crate::error::{Error, Result};
use crate::par;
use crate::spline::{global_parameterize, Trajectory};

/// Parameter counts of the reference comparison table.
pub const TABLE_PARAM_COUNTS: [usize; 5] = [3, 7, 12, 17, 22];

/// One (method, K) cell aggregated over the dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodingRow {
    pub method: BasisKind,
    pub n_params: usize,
    /// Unweighted mean over shapes that fitted.
    pub mean: Option<f64>,
    /// Population standard deviation.
    pub std: Option<f64>,
    /// Per-shape errors in dataset order (`NaN` where the fit failed).
    pub errors: Vec<f64>,
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BenchReport {
    pub rows: Vec<EncodingRow>,
    pub timing: Vec<TimingRow>,
    pub notes: Vec<String>,
}

impl BenchReport {
    pub fn row(&self, method: BasisKind, n_params: usize) -> Option<&EncodingRow> {
        self.rows.iter().find(|r| r.method == method && r.n_params == n_params)
    }

    /// Long-format table `method,K,mean,std,n_shapes,n_failed`.
    pub fn encoding_csv(&self) -> String {
        let mut out = String::from("method,K,mean,std,n_shapes,n_failed\n");
        for r in &self.rows {
            let fmt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.method,
                r.n_params,
                fmt(r.mean),
                fmt(r.std),
                r.errors.iter().filter(|e| e.is_finite()).count(),
                r.failures.len()
            ));
        }
        out
    }

    /// `N,D,n_points,median_ms,min_ms`.
    pub fn timing_csv(&self) -> String {
        let mut out = String::from("N,D,n_points,median_ms,min_ms\n");
        for t in &self.timing {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                t.n_segments, t.dim, t.n_points, t.median_ms, t.min_ms
            ));
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn mean_std(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    Some((mean, var.sqrt()))
}

/// Least-squares error of one family on one trajectory.
pub(crate) fn shape_error(family: &BasisFamily, traj: &Trajectory) -> Result<f64> {
    let times = global_parameterize(traj.timestamps(), traj.len(), 1)?;
    let design = build_basis(family, &times)?;
    if design.nrows() < design.ncols() {
        return Err(Error::Underdetermined {
            samples: design.nrows(),
            params: design.ncols(),
        });
    }
    let w = fit_basis(&design, traj.points())?;
    reconstruction_error(&design, &w, traj.points())
}

/// Fits every (method, K) cell on every trajectory. Cells run in parallel;
/// a failing fit is recorded in its cell and does not abort the run.
pub fn run_encoding_benchmark(dataset: &[Trajectory], methods: &[BasisKind], param_counts: &[usize]) -> Result<BenchReport> {
    if dataset.is_empty() {
        return Err(Error::domain("encoding benchmark needs at least one trajectory"));
    }
    let cells: Vec<(BasisKind, usize)> = methods
        .iter()
        .flat_map(|&m| param_counts.iter().map(move |&k| (m, k)))
        .collect();
    let rows = par::map(&cells, |&(method, k)| {
        let mut failures = Vec::new();
        let errors: Vec<f64> = match BasisFamily::new(method, k) {
            Err(e) => {
                failures.push(e.to_string());
                vec![f64::NAN; dataset.len()]
            }
            Ok(fam) => dataset
                .iter()
                .enumerate()
                .map(|(i, traj)| match shape_error(&fam, traj) {
                    Ok(e) => e,
                    Err(err) => {
                        failures.push(format!("shape {i}: {err}"));
                        f64::NAN
                    }
                })
                .collect(),
        };
        let ok: Vec<f64> = errors.iter().copied().filter(|e| e.is_finite()).collect();
        let stats = mean_std(&ok);
        EncodingRow {
            method,
            n_params: k,
            mean: stats.map(|s| s.0),
            std: stats.map(|s| s.1),
            errors,
            failures,
        }
    });
    Ok(BenchReport {
        rows,
        timing: Vec::new(),
        notes: vec![
            "rbf: Gaussian kernels, K centres equally spaced on [0,1], bandwidth = centre spacing".into(),
            "fourier: {1, cos 2pi k t, sin 2pi k t, ...} truncated to K columns".into(),
            "piecewise_constant: K equal-width bins".into(),
            "error: ||Phi w - P||_F / M, mean and population std over shapes".into(),
        ],
    })
}
