//! Exact Gaussian RBF kernel evaluation and brute-force similarity scoring.
//!
//! The kernel here is the squared-exponential
//! `k(x, y) = exp(-||x - y||^2 / (2 sigma^2))`, the reference every
//! approximate feature map in this crate is measured against. [`exact_score`]
//! averages the kernel over a dataset and is the ground-truth score: it costs
//! O(n) per query, which is exactly what the feature-map route avoids, so it
//! only appears in tests, calibration, and small-data sanity checks.

use crate::error::{ExposeError, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Gaussian RBF kernel with bandwidth `sigma` in input-space units.
///
/// Satisfies `k(x, x) = 1`, `0 < k(x, y) <= 1` and symmetry for all finite
/// inputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RbfKernel {
    sigma: f64,
}

impl RbfKernel {
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(ExposeError::InvalidBandwidth(sigma));
        }
        Ok(Self { sigma })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        rbf_eval(x, y, self.sigma)
    }
}

fn check_vector(x: &[f64]) -> Result<()> {
    if x.is_empty() {
        return Err(ExposeError::Empty("input vector"));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(ExposeError::NonFinite);
    }
    Ok(())
}

/// Squared Euclidean distance by direct summation of squared differences.
///
/// Deliberately not the `||x||^2 - 2<x,y> + ||y||^2` expansion, which
/// cancels catastrophically for nearby points.
fn squared_distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| {
            let d = a - b;
            d * d
        })
        .sum()
}

/// Evaluates `exp(-||x - y||^2 / (2 sigma^2))`.
pub fn rbf_eval(x: &[f64], y: &[f64], sigma: f64) -> Result<f64> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(ExposeError::InvalidBandwidth(sigma));
    }
    if x.len() != y.len() {
        return Err(ExposeError::DimensionMismatch {
            expected: x.len(),
            actual: y.len(),
        });
    }
    check_vector(x)?;
    check_vector(y)?;
    Ok((-squared_distance(x, y) / (2.0 * sigma * sigma)).exp())
}

/// Brute-force expected similarity of `z` under the empirical distribution
/// of `data`: the mean of `k(z, x_i)` over all points.
pub fn exact_score(z: &[f64], data: &[Vec<f64>], sigma: f64) -> Result<f64> {
    if data.is_empty() {
        return Err(ExposeError::Empty("data"));
    }
    let mut total = 0.0;
    for x in data {
        total += rbf_eval(z, x, sigma)?;
    }
    Ok(total / data.len() as f64)
}

/// Median-heuristic bandwidth: the median pairwise Euclidean distance over
/// a seeded subsample of at most `max_points` rows.
///
/// Errors if fewer than two distinct points are available, or if the median
/// distance is zero (all sampled points identical).
pub fn median_heuristic(data: &[Vec<f64>], max_points: usize, seed: u64) -> Result<f64> {
    if data.len() < 2 {
        return Err(ExposeError::InvalidParameter {
            name: "data",
            reason: "median heuristic needs at least two points".into(),
        });
    }
    for row in data {
        check_vector(row)?;
        if row.len() != data[0].len() {
            return Err(ExposeError::DimensionMismatch {
                expected: data[0].len(),
                actual: row.len(),
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let keep = max_points.max(2).min(data.len());
    let sample: Vec<&Vec<f64>> = if keep == data.len() {
        data.iter().collect()
    } else {
        rand::seq::index::sample(&mut rng, data.len(), keep)
            .into_iter()
            .map(|i| &data[i])
            .collect()
    };

    let mut dists = Vec::with_capacity(keep * (keep - 1) / 2);
    for i in 0..sample.len() {
        for j in (i + 1)..sample.len() {
            dists.push(squared_distance(sample[i], sample[j]).sqrt());
        }
    }
    dists.sort_by(|a, b| a.total_cmp(b));
    let mid = dists.len() / 2;
    let median = if dists.len() % 2 == 1 {
        dists[mid]
    } else {
        0.5 * (dists[mid - 1] + dists[mid])
    };
    if median <= 0.0 {
        return Err(ExposeError::InvalidBandwidth(median));
    }
    Ok(median)
}
