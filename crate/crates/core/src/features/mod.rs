//! Approximate explicit feature maps.
//!
//! Both maps produce a finite feature vector `phi(x)` whose inner products
//! approximate the Gaussian RBF kernel: `<phi(x), phi(y)> ~ k(x, y)`. That
//! turns the O(n)-per-query expected-similarity score into a single dot
//! product against a precomputed mean vector.
//!
//! * [`RksProjection`]: random kitchen sinks, a Monte Carlo spectral
//!   approximation. Data independent, ideal for streams.
//! * [`NystroemMap`]: eigenexpansion over sampled landmarks. Usually needs
//!   fewer features but degrades when the data distribution drifts away
//!   from the landmarks, so it is the batch-mode choice.

mod nystroem;
mod rks;

pub use nystroem::NystroemMap;
pub use rks::RksProjection;

use crate::error::Result;

/// A fitted feature map, ready to turn input vectors into feature vectors.
#[derive(Debug, Clone)]
pub enum FeatureMap {
    Rks(RksProjection),
    Nystroem(NystroemMap),
}

impl FeatureMap {
    /// Expected input dimension `d`.
    pub fn input_dim(&self) -> usize {
        match self {
            FeatureMap::Rks(p) => p.input_dim(),
            FeatureMap::Nystroem(m) => m.input_dim(),
        }
    }

    /// Length of produced feature vectors.
    pub fn feature_dim(&self) -> usize {
        match self {
            FeatureMap::Rks(p) => p.feature_dim(),
            FeatureMap::Nystroem(m) => m.feature_dim(),
        }
    }

    /// Kernel bandwidth the map was fitted for.
    pub fn sigma(&self) -> f64 {
        match self {
            FeatureMap::Rks(p) => p.sigma(),
            FeatureMap::Nystroem(m) => m.sigma(),
        }
    }

    pub fn map(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            FeatureMap::Rks(p) => p.map(x),
            FeatureMap::Nystroem(m) => m.map(x),
        }
    }
}

/// Dot product of two equal-length slices.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Euclidean norm.
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
