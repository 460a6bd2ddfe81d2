use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::distance::batch_query_sequential;
use crate::error::{Error, Result};
use crate::synthetic::{random_points_around, random_spline};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingConfig {
    pub segment_counts: Vec<usize>,
    pub dims: Vec<usize>,
    pub n_points: usize,
    /// Timed repetitions per configuration (at least 5); one extra warm-up run is discarded.
    pub repetitions: usize,
    pub seed: u64,
}

impl Default for TimingConfig {
    fn default() -> Self {
        TimingConfig {
            segment_counts: vec![1, 5, 10, 20, 50, 100],
            dims: vec![2, 3, 7, 10],
            n_points: 2500,
            repetitions: 5,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub n_segments: usize,
    pub dim: usize,
    pub n_points: usize,
    pub median_ms: f64,
    pub min_ms: f64,
}

/// Wall-clock time of a single-threaded batch query (distance, gradient,
/// projection and phase) per `(N, D)` configuration.
pub fn run_timing_benchmark(config: &TimingConfig) -> Result<Vec<TimingRow>> {
    if config.n_points == 0 || config.segment_counts.contains(&0) || config.dims.contains(&0) {
        return Err(Error::domain("timing sizes must be positive"));
    }
    let reps = config.repetitions.max(5);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut rows = Vec::new();
    for &n in &config.segment_counts {
        for &d in &config.dims {
            let spline = random_spline(&mut rng, n, d, false);
            let points = random_points_around(&mut rng, &spline, config.n_points, 0.25);
            std::hint::black_box(batch_query_sequential(&spline, &points));
            let mut times: Vec<f64> = (0..reps)
                .map(|_| {
                    let start = Instant::now();
                    std::hint::black_box(batch_query_sequential(&spline, std::hint::black_box(&points)));
                    start.elapsed().as_secs_f64() * 1e3
                })
                .collect();
            times.sort_by(|a, b| a.total_cmp(b));
            rows.push(TimingRow {
                n_segments: n,
                dim: d,
                n_points: config.n_points,
                median_ms: times[reps / 2],
                min_ms: times[0],
            });
        }
    }
    Ok(rows)
}
