//! Random kitchen sinks: Monte Carlo feature map for the RBF kernel.

use crate::error::{ExposeError, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Random spectral projection approximating the Gaussian RBF kernel.
///
/// Holds an `r x d` frequency matrix with entries drawn i.i.d. from
/// `N(0, 1/sigma^2)`, the spectral measure of `exp(-||x-y||^2/(2 sigma^2))`.
/// The complex exponential features are realized as paired real coordinates,
/// so [`RksProjection::map`] returns the `2r`-vector
///
/// ```text
/// (1/sqrt(r)) [cos(z_1.x), sin(z_1.x), ..., cos(z_r.x), sin(z_r.x)]
/// ```
///
/// which has unit Euclidean norm and satisfies
/// `<phi(x), phi(y)> = (1/r) sum_i cos(z_i.(x - y))`, an unbiased estimate
/// of the kernel. Frequencies are regenerated deterministically from
/// `(d, r, sigma, seed)`, so persisting those four numbers persists the map.
#[derive(Debug, Clone)]
pub struct RksProjection {
    frequencies: Vec<f64>, // row-major, r rows of length d
    input_dim: usize,
    expansions: usize,
    sigma: f64,
    seed: u64,
}

impl RksProjection {
    /// Samples a projection with `r` kernel expansions for `d`-dimensional
    /// input. Deterministic for a given `(d, r, sigma, seed)`.
    pub fn fit(input_dim: usize, expansions: usize, sigma: f64, seed: u64) -> Result<Self> {
        if input_dim == 0 {
            return Err(ExposeError::InvalidParameter {
                name: "input_dim",
                reason: "must be at least 1".into(),
            });
        }
        if expansions == 0 {
            return Err(ExposeError::InvalidParameter {
                name: "expansions",
                reason: "must be at least 1".into(),
            });
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(ExposeError::InvalidBandwidth(sigma));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spectral = Normal::new(0.0, 1.0 / sigma).expect("validated std");
        let frequencies = (0..input_dim * expansions)
            .map(|_| spectral.sample(&mut rng))
            .collect();
        Ok(Self {
            frequencies,
            input_dim,
            expansions,
            sigma,
            seed,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    /// Number of sampled frequencies `r`; the feature dimension is `2r`.
    pub fn expansions(&self) -> usize {
        self.expansions
    }

    pub fn feature_dim(&self) -> usize {
        2 * self.expansions
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Row-major `r x d` frequency matrix.
    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    /// Maps an input vector to its `2r`-dimensional feature vector.
    pub fn map(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim {
            return Err(ExposeError::DimensionMismatch {
                expected: self.input_dim,
                actual: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(ExposeError::NonFinite);
        }
        let scale = 1.0 / (self.expansions as f64).sqrt();
        let mut out = Vec::with_capacity(self.feature_dim());
        for row in self.frequencies.chunks_exact(self.input_dim) {
            let phase: f64 = row.iter().zip(x).map(|(z, v)| z * v).sum();
            let (sin, cos) = phase.sin_cos();
            out.push(cos * scale);
            out.push(sin * scale);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{dot, norm};
    use crate::kernels::rbf_eval;
    use rand::Rng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn deterministic_for_seed() {
        let a = RksProjection::fit(4, 16, 1.5, 99).unwrap();
        let b = RksProjection::fit(4, 16, 1.5, 99).unwrap();
        assert_eq!(a.frequencies(), b.frequencies());
        let c = RksProjection::fit(4, 16, 1.5, 100).unwrap();
        assert_ne!(a.frequencies(), c.frequencies());
    }

    #[test]
    fn minimal_shape() {
        let p = RksProjection::fit(1, 1, 1.0, 0).unwrap();
        assert_eq!(p.frequencies().len(), 1);
        assert_eq!(p.feature_dim(), 2);
    }

    #[test]
    fn sampler_standard_deviation() {
        // 50k entries at sigma = 1: sample std should sit well inside 2%.
        let p = RksProjection::fit(10, 5000, 1.0, 7).unwrap();
        let z = p.frequencies();
        let mean: f64 = z.iter().sum::<f64>() / z.len() as f64;
        let var: f64 = z.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / z.len() as f64;
        let std = var.sqrt();
        assert!(
            (0.98..=1.02).contains(&std),
            "sample std {std} outside [0.98, 1.02]"
        );
    }

    #[test]
    fn features_have_unit_norm() {
        let p = RksProjection::fit(6, 37, 0.7, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            let x: Vec<f64> = (0..6).map(|_| rng.random_range(-4.0..4.0)).collect();
            let f = p.map(&x).unwrap();
            assert_eq!(f.len(), 74);
            assert!((norm(&f) - 1.0).abs() <= 1e-12);
            assert!((dot(&f, &f) - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn inner_products_approximate_kernel() {
        let d = 10;
        let sigma = 1.0;
        let p = RksProjection::fit(d, 2000, sigma, 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut total_err = 0.0;
        let pairs = 200;
        for _ in 0..pairs {
            let x: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
            let y: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
            let approx = dot(&p.map(&x).unwrap(), &p.map(&y).unwrap());
            let exact = rbf_eval(&x, &y, sigma).unwrap();
            assert!((-1.0..=1.0).contains(&approx));
            total_err += (approx - exact).abs();
        }
        assert!(total_err / pairs as f64 <= 0.03);
    }

    #[test]
    fn more_expansions_reduce_error() {
        let d = 10;
        let sigma = 1.0;
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let pairs: Vec<(Vec<f64>, Vec<f64>)> = (0..100)
            .map(|_| {
                (
                    (0..d).map(|_| rng.random_range(-1.0..1.0)).collect(),
                    (0..d).map(|_| rng.random_range(-1.0..1.0)).collect(),
                )
            })
            .collect();
        let mean_err = |r: usize| {
            let p = RksProjection::fit(d, r, sigma, 12).unwrap();
            pairs
                .iter()
                .map(|(x, y)| {
                    let approx = dot(&p.map(x).unwrap(), &p.map(y).unwrap());
                    (approx - rbf_eval(x, y, sigma).unwrap()).abs()
                })
                .sum::<f64>()
                / pairs.len() as f64
        };
        assert!(mean_err(2000) < mean_err(50));
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(RksProjection::fit(0, 4, 1.0, 0).is_err());
        assert!(RksProjection::fit(4, 0, 1.0, 0).is_err());
        assert!(RksProjection::fit(4, 4, 0.0, 0).is_err());
        let p = RksProjection::fit(3, 4, 1.0, 0).unwrap();
        assert!(matches!(
            p.map(&[1.0, 2.0]),
            Err(ExposeError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            p.map(&[1.0, f64::INFINITY, 0.0]),
            Err(ExposeError::NonFinite)
        ));
    }
}
