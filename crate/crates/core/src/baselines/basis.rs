use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spline::{build_constraint_map, cubic_bernstein_row, cubic_constraint_map, locate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisKind {
    PiecewiseConstant,
    BernsteinPoly,
    Rbf,
    Fourier,
    QuadraticSpline,
    CubicSpline,
}

impl BasisKind {
    pub const ALL: [BasisKind; 6] = [
        BasisKind::PiecewiseConstant,
        BasisKind::BernsteinPoly,
        BasisKind::Rbf,
        BasisKind::Fourier,
        BasisKind::QuadraticSpline,
        BasisKind::CubicSpline,
    ];

    /// The five families compared at equal parameter counts.
    pub const TABLE: [BasisKind; 5] = [
        BasisKind::PiecewiseConstant,
        BasisKind::BernsteinPoly,
        BasisKind::Rbf,
        BasisKind::Fourier,
        BasisKind::QuadraticSpline,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BasisKind::PiecewiseConstant => "piecewise_constant",
            BasisKind::BernsteinPoly => "bernstein_poly",
            BasisKind::Rbf => "rbf",
            BasisKind::Fourier => "fourier",
            BasisKind::QuadraticSpline => "quadratic_spline",
            BasisKind::CubicSpline => "cubic_spline",
        }
    }
}

impl fmt::Display for BasisKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BasisKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BasisKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::domain(format!("unknown basis family {s:?}")))
    }
}

/// A basis family with `n_params` columns per dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisFamily {
    pub kind: BasisKind,
    pub n_params: usize,
}

impl BasisFamily {
    pub fn new(kind: BasisKind, n_params: usize) -> Result<Self> {
        let fam = BasisFamily { kind, n_params };
        fam.validate()?;
        Ok(fam)
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.n_params;
        if k < 1 {
            return Err(Error::domain("a basis needs at least one function"));
        }
        match self.kind {
            BasisKind::QuadraticSpline if k < 3 => Err(Error::domain(format!(
                "quadratic spline has N+2 parameters, so K >= 3 (got {k})"
            ))),
            BasisKind::CubicSpline if k < 4 || !k.is_multiple_of(2) => Err(Error::domain(format!(
                "C1 cubic spline has 2N+2 parameters, so K must be even and >= 4 (got {k})"
            ))),
            _ => Ok(()),
        }
    }

    /// Segment count for the spline families.
    pub fn segments(&self) -> Option<usize> {
        match self.kind {
            BasisKind::QuadraticSpline => Some(self.n_params - 2),
            BasisKind::CubicSpline => Some((self.n_params - 2) / 2),
            _ => None,
        }
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `M × K` design matrix of `family` at parameters `times ⊂ [0, 1]`.
///
/// Conventions: piecewise-constant uses `K` equal-width bins; RBF uses
/// Gaussians centred on `K` equally spaced points with bandwidth equal to
/// the centre spacing; Fourier is `{1, cos 2πt, sin 2πt, cos 4πt, ...}`
/// truncated to `K` columns.
pub fn build_basis(family: &BasisFamily, times: &[f64]) -> Result<DMatrix<f64>> {
    family.validate()?;
    if let Some(t) = times.iter().find(|t| !(0.0..=1.0).contains(*t)) {
        return Err(Error::domain(format!("basis parameter {t} outside [0, 1]")));
    }
    let k = family.n_params;
    let m = times.len();
    let mut phi = DMatrix::zeros(m, k);
    match family.kind {
        BasisKind::PiecewiseConstant => {
            for (r, &t) in times.iter().enumerate() {
                let bin = ((t * k as f64).floor() as usize).min(k - 1);
                phi[(r, bin)] = 1.0;
            }
        }
        BasisKind::BernsteinPoly => {
            let deg = k - 1;
            let coeffs: Vec<f64> = (0..k).map(|i| binomial(deg, i)).collect();
            for (r, &t) in times.iter().enumerate() {
                for (i, c) in coeffs.iter().enumerate() {
                    phi[(r, i)] = c * t.powi(i as i32) * (1.0 - t).powi((deg - i) as i32);
                }
            }
        }
        BasisKind::Rbf => {
            let (centers, width): (Vec<f64>, f64) = if k == 1 {
                (vec![0.5], 1.0)
            } else {
                let h = 1.0 / (k - 1) as f64;
                ((0..k).map(|i| i as f64 * h).collect(), h)
            };
            for (r, &t) in times.iter().enumerate() {
                for (i, c) in centers.iter().enumerate() {
                    let z = (t - c) / width;
                    phi[(r, i)] = (-0.5 * z * z).exp();
                }
            }
        }
        BasisKind::Fourier => {
            for (r, &t) in times.iter().enumerate() {
                for i in 0..k {
                    phi[(r, i)] = if i == 0 {
                        1.0
                    } else {
                        let freq = 2.0 * PI * i.div_ceil(2) as f64;
                        if i % 2 == 1 {
                            (freq * t).cos()
                        } else {
                            (freq * t).sin()
                        }
                    };
                }
            }
        }
        BasisKind::QuadraticSpline => {
            let n = family.segments().unwrap();
            let sys = build_constraint_map(n, false)?;
            let params: Vec<f64> = times.iter().map(|t| t * n as f64).collect();
            phi = sys.design_matrix(&params)?;
        }
        BasisKind::CubicSpline => {
            let n = family.segments().unwrap();
            let c = cubic_constraint_map(n)?;
            for (r, &t) in times.iter().enumerate() {
                let (seg, local) = locate(t * n as f64, n)?;
                let b = cubic_bernstein_row(local)?;
                for col in 0..k {
                    phi[(r, col)] = (0..4).map(|j| b[j] * c[(4 * seg + j, col)]).sum();
                }
            }
        }
    }
    Ok(phi)
}

/// Least squares through a truncated SVD pseudoinverse (never fails on rank).
pub fn fit_basis(design: &DMatrix<f64>, points: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if design.nrows() != points.nrows() {
        return Err(Error::domain(format!(
            "design has {} rows but there are {} points",
            design.nrows(),
            points.nrows()
        )));
    }
    let svd = design.clone().svd(true, true);
    let tol = design.nrows().max(design.ncols()) as f64 * f64::EPSILON * svd.singular_values.max();
    svd.solve(points, tol).map_err(|e| Error::domain(e.to_string()))
}

/// Average reconstruction error `‖Φw − P‖_F / M`.
pub fn reconstruction_error(design: &DMatrix<f64>, weights: &DMatrix<f64>, points: &DMatrix<f64>) -> Result<f64> {
    if design.ncols() != weights.nrows() || design.nrows() != points.nrows() || weights.ncols() != points.ncols() {
        return Err(Error::domain(format!(
            "shape mismatch: design {:?}, weights {:?}, points {:?}",
            design.shape(),
            weights.shape(),
            points.shape()
        )));
    }
    let m = points.nrows();
    if m == 0 {
        return Err(Error::domain("no points"));
    }
    Ok((design * weights - points).norm() / m as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_match_conventions() {
        let pc = build_basis(&BasisFamily::new(BasisKind::PiecewiseConstant, 2).unwrap(), &[0.3]).unwrap();
        assert_eq!(pc.row(0).iter().copied().collect::<Vec<_>>(), vec![1.0, 0.0]);
        let bp = build_basis(&BasisFamily::new(BasisKind::BernsteinPoly, 3).unwrap(), &[0.5]).unwrap();
        assert_eq!(bp.row(0).iter().copied().collect::<Vec<_>>(), vec![0.25, 0.5, 0.25]);
        let f = build_basis(&BasisFamily::new(BasisKind::Fourier, 3).unwrap(), &[0.0]).unwrap();
        assert_eq!(f.row(0).iter().copied().collect::<Vec<_>>(), vec![1.0, 1.0, 0.0]);
        let f = build_basis(&BasisFamily::new(BasisKind::Fourier, 5).unwrap(), &[0.125]).unwrap();
        let want = [1.0, (PI / 4.0).cos(), (PI / 4.0).sin(), (PI / 2.0).cos(), (PI / 2.0).sin()];
        for (a, b) in f.row(0).iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
        let rbf = build_basis(&BasisFamily::new(BasisKind::Rbf, 3).unwrap(), &[0.5]).unwrap();
        assert!((rbf[(0, 1)] - 1.0).abs() < 1e-15);
        assert!((rbf[(0, 0)] - (-0.5f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn parameter_count_rules() {
        assert!(BasisFamily::new(BasisKind::QuadraticSpline, 2).is_err());
        assert!(BasisFamily::new(BasisKind::CubicSpline, 7).is_err());
        assert!(BasisFamily::new(BasisKind::CubicSpline, 2).is_err());
        assert!(BasisFamily::new(BasisKind::Rbf, 0).is_err());
        assert_eq!(BasisFamily::new(BasisKind::QuadraticSpline, 12).unwrap().segments(), Some(10));
        assert_eq!(BasisFamily::new(BasisKind::CubicSpline, 12).unwrap().segments(), Some(5));
        let t: Vec<f64> = (0..30).map(|j| j as f64 / 29.0).collect();
        for kind in BasisKind::ALL {
            for k in [4, 8, 12] {
                let d = build_basis(&BasisFamily::new(kind, k).unwrap(), &t).unwrap();
                assert_eq!(d.shape(), (30, k));
            }
        }
        assert!(build_basis(&BasisFamily::new(BasisKind::Rbf, 3).unwrap(), &[1.2]).is_err());
    }

    #[test]
    fn quadratic_spline_k3_equals_bernstein_k3() {
        let t: Vec<f64> = (0..101).map(|j| j as f64 / 100.0).collect();
        let a = build_basis(&BasisFamily::new(BasisKind::QuadraticSpline, 3).unwrap(), &t).unwrap();
        let b = build_basis(&BasisFamily::new(BasisKind::BernsteinPoly, 3).unwrap(), &t).unwrap();
        assert!((a - b).amax() < 1e-15);
    }

    #[test]
    fn error_formula() {
        let design = DMatrix::<f64>::identity(100, 2);
        let w = DMatrix::zeros(2, 1);
        let mut p = DMatrix::zeros(100, 1);
        p[(0, 0)] = 6.0;
        p[(1, 0)] = 8.0;
        assert!((reconstruction_error(&design, &w, &p).unwrap() - 0.1).abs() < 1e-15);
        assert!(reconstruction_error(&design, &DMatrix::zeros(3, 1), &p).is_err());

        // hand computation on a small instance
        let design = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 1.0, 1.0, 0.0, 2.0]);
        let w = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, 0.5, 2.0]);
        let p = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 2.0, 1.0, 0.0, 3.0]);
        // residual rows: (0,-1), (-0.5,0), (1,1)
        let want = (1.0f64 + 0.25 + 1.0 + 1.0).sqrt() / 3.0;
        assert!((reconstruction_error(&design, &w, &p).unwrap() - want).abs() < 1e-15);
    }

    #[test]
    fn exact_fit_has_zero_error() {
        let t: Vec<f64> = (0..40).map(|j| j as f64 / 39.0).collect();
        let d = build_basis(&BasisFamily::new(BasisKind::BernsteinPoly, 4).unwrap(), &t).unwrap();
        let p = DMatrix::from_fn(40, 2, |r, c| (t[r] * (c + 1) as f64).powi(3) - t[r]);
        let w = fit_basis(&d, &p).unwrap();
        assert!(reconstruction_error(&d, &w, &p).unwrap() < 1e-12);
    }
}
