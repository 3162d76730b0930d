//! Nystroem feature map: eigenexpansion of the kernel matrix over landmarks.

use crate::error::{ExposeError, Result};
use crate::kernels::rbf_eval;
use crate::linalg::jacobi_eigh;

/// Data-dependent feature map built from `r` landmark points.
///
/// Fitting forms the landmark kernel matrix `K_ij = k(x_i, x_j)`, takes its
/// full symmetric eigendecomposition and keeps the pairs with eigenvalue
/// above a drop tolerance. The i-th feature of a query is
///
/// ```text
/// phi_i(x) = (1/sqrt(lambda_i)) sum_j u_ji k(x_j, x)
/// ```
///
/// On the landmarks themselves the map is exact: the reconstructed Gram
/// matrix `<phi(x_a), phi(x_b)>` equals `K` up to the dropped spectrum.
#[derive(Debug, Clone)]
pub struct NystroemMap {
    landmarks: Vec<Vec<f64>>,
    sigma: f64,
    eigenvalues: Vec<f64>,     // kept, descending
    eigenvectors: Vec<Vec<f64>>, // eigenvectors[i][j] = u_ji, length = landmark count
}

impl NystroemMap {
    /// Fits the map, keeping eigenpairs with `lambda > drop_tol`.
    pub fn fit(landmarks: Vec<Vec<f64>>, sigma: f64, drop_tol: f64) -> Result<Self> {
        if !(drop_tol.is_finite() && drop_tol >= 0.0) {
            return Err(ExposeError::InvalidParameter {
                name: "drop_tol",
                reason: format!("must be a nonnegative finite number, got {drop_tol}"),
            });
        }
        Self::fit_impl(landmarks, sigma, |_| drop_tol)
    }

    /// Fits with the default relative tolerance `1e-10 * lambda_max`, which
    /// suppresses the numerically negative tail of the spectrum.
    pub fn fit_auto(landmarks: Vec<Vec<f64>>, sigma: f64) -> Result<Self> {
        Self::fit_impl(landmarks, sigma, |lambda_max| 1e-10 * lambda_max)
    }

    fn fit_impl(
        landmarks: Vec<Vec<f64>>,
        sigma: f64,
        drop_tol: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        if landmarks.is_empty() {
            return Err(ExposeError::Empty("landmarks"));
        }
        let r = landmarks.len();
        let mut gram = vec![vec![0.0; r]; r];
        for i in 0..r {
            for j in i..r {
                let k = rbf_eval(&landmarks[i], &landmarks[j], sigma)?;
                gram[i][j] = k;
                gram[j][i] = k;
            }
        }
        let eig = jacobi_eigh(&gram)?;
        let tol = drop_tol(eig.values[0]);
        let kept = eig.values.iter().take_while(|&&l| l > tol).count();
        if kept == 0 {
            return Err(ExposeError::InvalidParameter {
                name: "drop_tol",
                reason: "drops the entire spectrum".into(),
            });
        }
        Ok(Self {
            landmarks,
            sigma,
            eigenvalues: eig.values[..kept].to_vec(),
            eigenvectors: eig.vectors[..kept].to_vec(),
        })
    }

    /// Reassembles a map from stored parts, revalidating the invariants.
    pub fn from_parts(
        landmarks: Vec<Vec<f64>>,
        sigma: f64,
        eigenvalues: Vec<f64>,
        eigenvectors: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if landmarks.is_empty() {
            return Err(ExposeError::Empty("landmarks"));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(ExposeError::InvalidBandwidth(sigma));
        }
        let r = landmarks.len();
        if eigenvalues.is_empty() || eigenvalues.len() > r {
            return Err(ExposeError::InvalidParameter {
                name: "eigenvalues",
                reason: format!("expected between 1 and {r} kept values"),
            });
        }
        if eigenvectors.len() != eigenvalues.len() {
            return Err(ExposeError::DimensionMismatch {
                expected: eigenvalues.len(),
                actual: eigenvectors.len(),
            });
        }
        for v in &eigenvectors {
            if v.len() != r {
                return Err(ExposeError::DimensionMismatch {
                    expected: r,
                    actual: v.len(),
                });
            }
        }
        if eigenvalues.windows(2).any(|w| w[0] < w[1]) || eigenvalues.iter().any(|&l| l <= 0.0) {
            return Err(ExposeError::InvalidParameter {
                name: "eigenvalues",
                reason: "must be positive and sorted descending".into(),
            });
        }
        Ok(Self {
            landmarks,
            sigma,
            eigenvalues,
            eigenvectors,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.landmarks[0].len()
    }

    /// Number of kept eigenpairs; the feature dimension.
    pub fn feature_dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn landmarks(&self) -> &[Vec<f64>] {
        &self.landmarks
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Kept eigenvectors over the landmarks; `eigenvectors()[i][j]` is the
    /// j-th component of the i-th eigenvector.
    pub fn eigenvectors(&self) -> &[Vec<f64>] {
        &self.eigenvectors
    }

    pub fn map(&self, x: &[f64]) -> Result<Vec<f64>> {
        let kx: Vec<f64> = self
            .landmarks
            .iter()
            .map(|l| rbf_eval(l, x, self.sigma))
            .collect::<Result<_>>()?;
        Ok(self
            .eigenvalues
            .iter()
            .zip(&self.eigenvectors)
            .map(|(lambda, u)| {
                let proj: f64 = u.iter().zip(&kx).map(|(a, b)| a * b).sum();
                proj / lambda.sqrt()
            })
            .collect())
    }
}
