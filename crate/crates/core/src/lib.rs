//! Trajectory encoding with C¹ quadratic Bézier splines, exact distance
//! fields derived from them, and a stable autonomous dynamical system that
//! tracks the encoded trajectory.
//!
//! ```
//! use splinefield::spline::{fit, FitConfig, Trajectory};
//!
//! let pts: Vec<Vec<f64>> = (0..50)
//!     .map(|j| {
//!         let t = j as f64 / 49.0;
//!         vec![t, (3.0 * t).sin()]
//!     })
//!     .collect();
//! let traj = Trajectory::new(pts, None).unwrap();
//! let fitted = fit(&traj, &FitConfig::new(4)).unwrap();
//! let q = fitted.spline.query(&[0.5, 1.5]);
//! assert!(q.distance > 0.0);
//! ```

pub mod baselines;
pub mod distance;
pub mod dynamics;
pub mod error;
pub mod io;
pub mod par;
pub mod roots;
pub mod service;
pub mod spline;
pub mod synthetic;

pub use distance::{batch_query, DistanceField, FieldQuery, UnionField};
pub use dynamics::{DynamicalSystem, DynamicsConfig, Integrator, RolloutTrace};
pub use error::{Error, Result};
pub use spline::{fit, FitConfig, QuadraticSpline, SegmentControl, Trajectory};
