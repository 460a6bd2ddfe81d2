use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::distance::DistanceField;
use crate::error::{Error, Result};
use crate::par;

/// Two plotted axes of a higher-dimensional field; every other coordinate is
/// held at the matching entry of `fixed` (in ascending axis order).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Slice {
    pub axes: (usize, usize),
    pub fixed: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// `[xmin, xmax, ymin, ymax]`
    pub bounds: [f64; 4],
    /// `(nx, ny)`, each at least 2.
    pub resolution: (usize, usize),
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slice: Option<Slice>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub x: f64,
    pub y: f64,
    pub distance: f64,
    pub grad_x: f64,
    pub grad_y: f64,
    pub phase: f64,
}

impl GridSpec {
    pub fn new(bounds: [f64; 4], nx: usize, ny: usize) -> Self {
        GridSpec {
            bounds,
            resolution: (nx, ny),
            slice: None,
        }
    }

    pub fn with_slice(mut self, axes: (usize, usize), fixed: Vec<f64>) -> Self {
        self.slice = Some(Slice { axes, fixed });
        self
    }

    fn axes_and_base(&self, dim: usize) -> Result<((usize, usize), Vec<f64>)> {
        let (nx, ny) = self.resolution;
        if nx < 2 || ny < 2 {
            return Err(Error::domain(format!("grid resolution must be at least 2 per axis, got {nx}x{ny}")));
        }
        let [x0, x1, y0, y1] = self.bounds;
        if !self.bounds.iter().all(|b| b.is_finite()) || x1 <= x0 || y1 <= y0 {
            return Err(Error::domain(format!("invalid grid bounds {:?}", self.bounds)));
        }
        match &self.slice {
            None if dim == 2 => Ok(((0, 1), vec![0.0; 2])),
            None => Err(Error::domain(format!(
                "field has dimension {dim}; a 2-D slice (two axes plus fixed values) is required"
            ))),
            Some(Slice { axes: (a, b), fixed }) => {
                if *a == *b || *a >= dim || *b >= dim {
                    return Err(Error::domain(format!("slice axes ({a}, {b}) invalid for dimension {dim}")));
                }
                if fixed.len() != dim - 2 {
                    return Err(Error::domain(format!(
                        "slice needs {} fixed values, got {}",
                        dim - 2,
                        fixed.len()
                    )));
                }
                let mut base = vec![0.0; dim];
                let mut rest = fixed.iter();
                for (k, slot) in base.iter_mut().enumerate() {
                    if k != *a && k != *b {
                        *slot = *rest.next().expect("length checked");
                    }
                }
                Ok(((*a, *b), base))
            }
        }
    }
}

/// Samples the field on a regular grid, row-major with `y` as the outer loop.
pub fn export_field_grid<F: DistanceField + ?Sized>(field: &F, spec: &GridSpec) -> Result<Vec<GridRow>> {
    let ((ax, ay), base) = spec.axes_and_base(field.dim())?;
    let (nx, ny) = spec.resolution;
    let [x0, x1, y0, y1] = spec.bounds;
    let coord = |lo: f64, hi: f64, i: usize, n: usize| {
        if i == n - 1 {
            hi
        } else {
            lo + (hi - lo) * i as f64 / (n - 1) as f64
        }
    };
    Ok(par::map_range(nx * ny, |idx| {
        let (j, i) = (idx / nx, idx % nx);
        let (x, y) = (coord(x0, x1, i, nx), coord(y0, y1, j, ny));
        let mut p = base.clone();
        p[ax] = x;
        p[ay] = y;
        let q = field.query_point(&p);
        GridRow {
            x,
            y,
            distance: q.distance,
            grad_x: q.gradient[ax],
            grad_y: q.gradient[ay],
            phase: q.phase,
        }
    }))
}

pub const GRID_CSV_HEADER: &str = "x,y,distance,grad_x,grad_y,phase";

pub fn grid_to_csv(rows: &[GridRow]) -> String {
    let mut out = String::with_capacity(rows.len() * 64);
    out.push_str(GRID_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(out, "{},{},{},{},{},{}", r.x, r.y, r.distance, r.grad_x, r.grad_y, r.phase);
    }
    out
}

#[derive(Serialize)]
struct GridJson<'a> {
    bounds: [f64; 4],
    resolution: (usize, usize),
    rows: &'a [GridRow],
}

pub fn grid_to_json(spec: &GridSpec, rows: &[GridRow]) -> String {
    let mut s = serde_json::to_string(&GridJson {
        bounds: spec.bounds,
        resolution: spec.resolution,
        rows,
    })
    .expect("grid serializes");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spline::{fit, FitConfig, Trajectory};

    fn unit_line() -> crate::spline::QuadraticSpline {
        let pts = (0..5).map(|j| vec![j as f64 / 4.0, 0.0]).collect();
        fit(&Trajectory::new(pts, None).unwrap(), &FitConfig::new(1)).unwrap().spline
    }

    #[test]
    fn two_by_two_over_segment() {
        let rows = export_field_grid(&unit_line(), &GridSpec::new([-1.0, 1.0, -1.0, 1.0], 2, 2)).unwrap();
        assert_eq!(rows.len(), 4);
        let s2 = std::f64::consts::SQRT_2;
        // (-1,-1) nearest (0,0); (1,-1) nearest (1,0); then y = 1 row.
        let want = [(-1.0, -1.0, s2), (1.0, -1.0, 1.0), (-1.0, 1.0, s2), (1.0, 1.0, 1.0)];
        for (r, (x, y, d)) in rows.iter().zip(want) {
            assert_eq!((r.x, r.y), (x, y));
            assert!((r.distance - d).abs() < 1e-12, "{r:?}");
        }
        assert!((rows[1].grad_x).abs() < 1e-12 && (rows[1].grad_y + 1.0).abs() < 1e-12);
    }

    #[test]
    fn counts_and_determinism() {
        let spec = GridSpec::new([-1.0, 2.0, -1.0, 1.0], 50, 50);
        let a = grid_to_csv(&export_field_grid(&unit_line(), &spec).unwrap());
        let b = grid_to_csv(&export_field_grid(&unit_line(), &spec).unwrap());
        assert_eq!(a.lines().count(), 2501);
        assert_eq!(a, b);
    }

    #[test]
    fn higher_dim_needs_slice() {
        let pts = (0..5).map(|j| vec![j as f64, 0.0, 1.0]).collect();
        let s = fit(&Trajectory::new(pts, None).unwrap(), &FitConfig::new(1)).unwrap().spline;
        let spec = GridSpec::new([0.0, 1.0, 0.0, 1.0], 3, 3);
        assert!(matches!(export_field_grid(&s, &spec), Err(Error::Domain(_))));
        let rows = export_field_grid(&s, &spec.with_slice((0, 1), vec![1.0])).unwrap();
        assert_eq!(rows.len(), 9);
        assert!((rows[0].distance).abs() < 1e-12);
    }
}
