//! Expected-similarity anomaly scoring for batch and streaming data.
//!
//! The estimator represents "normal" as the mean feature vector of the data
//! seen so far, under a feature map whose inner products approximate a
//! Gaussian RBF kernel. A query's score is then a single dot product
//! against that mean: training is one pass, scoring and model updates are
//! constant time, and memory is independent of the data size.
//!
//! ```
//! use expose::features::{FeatureMap, RksProjection};
//! use expose::model::ExposeModel;
//!
//! let data: Vec<Vec<f64>> = (0..200)
//!     .map(|i| vec![(i % 17) as f64 * 0.1, (i % 11) as f64 * 0.1])
//!     .collect();
//! let map = FeatureMap::Rks(RksProjection::fit(2, 256, 1.0, 7).unwrap());
//! let model = ExposeModel::fit_batch(map, &data).unwrap();
//!
//! let near = model.score(&[0.5, 0.5], false).unwrap().raw;
//! let far = model.score(&[40.0, 40.0], false).unwrap().raw;
//! assert!(near > far);
//! ```
//!
//! Streaming models ([`model::ExposeModel::streaming`]) keep the same score
//! path but update in place: exact running mean, sliding window, or
//! geometric decay for drifting streams. [`evalstats`] holds the metrics
//! and the multi-algorithm comparison statistics; [`streamgen`] builds
//! synthetic drifting streams; [`cli`] is the command-line surface.

pub mod cli;
pub mod error;
pub mod evalstats;
pub mod features;
pub mod io;
pub mod kernels;
pub mod linalg;
pub mod model;
pub mod persist;
pub mod streamgen;

pub use error::{ExposeError, Result};
pub use features::FeatureMap;
pub use model::{ExposeModel, Label, Mode, ScoredInstance};
