//! Dense symmetric eigendecomposition via the cyclic Jacobi method.
//!
//! Jacobi is slower than QR-based solvers for large matrices but is simple,
//! unconditionally stable for real symmetric input, and produces orthonormal
//! eigenvectors to near machine precision. The kernel matrices decomposed
//! here are small (landmark counts in the hundreds), so the O(n^3)-per-sweep
//! cost is acceptable.

// Indexed loops mirror the textbook rotation formulas.
#![allow(clippy::needless_range_loop)]

use crate::error::{ExposeError, Result};

const MAX_SWEEPS: usize = 100;

/// Eigendecomposition `A = V diag(values) V^T` of a symmetric matrix.
///
/// `values` are sorted descending; `vectors[i]` is the unit eigenvector for
/// `values[i]`, so `vectors[i][j]` is its j-th component.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

fn check_square_symmetric(a: &[Vec<f64>]) -> Result<usize> {
    let n = a.len();
    if n == 0 {
        return Err(ExposeError::Empty("matrix"));
    }
    let mut max_abs = 0.0f64;
    for row in a {
        if row.len() != n {
            return Err(ExposeError::DimensionMismatch {
                expected: n,
                actual: row.len(),
            });
        }
        for &v in row {
            if !v.is_finite() {
                return Err(ExposeError::NonFinite);
            }
            max_abs = max_abs.max(v.abs());
        }
    }
    let tol = 1e-10 * max_abs.max(1.0);
    for i in 0..n {
        for j in (i + 1)..n {
            if (a[i][j] - a[j][i]).abs() > tol {
                return Err(ExposeError::NotSymmetric);
            }
        }
    }
    Ok(n)
}

fn off_diagonal_norm(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            s += 2.0 * a[i][j] * a[i][j];
        }
    }
    s.sqrt()
}

fn frobenius_norm(a: &[Vec<f64>]) -> f64 {
    a.iter()
        .flat_map(|row| row.iter())
        .map(|v| v * v)
        .sum::<f64>()
        .sqrt()
}

/// Full eigendecomposition of a symmetric matrix by cyclic-by-row Jacobi
/// rotations (Golub & Van Loan, sec. 8.5).
///
/// Errors if the input is not symmetric to `1e-10` (scaled by the largest
/// entry) or if the off-diagonal norm has not dropped below `1e-12 ||A||_F`
/// after 100 sweeps.
pub fn jacobi_eigh(a: &[Vec<f64>]) -> Result<SymmetricEigen> {
    let n = check_square_symmetric(a)?;
    let mut m: Vec<Vec<f64>> = a.to_vec();
    // Symmetrize exactly so rotations preserve symmetry bit-for-bit.
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (m[i][j] + m[j][i]);
            m[i][j] = avg;
            m[j][i] = avg;
        }
    }
    // v[row][col]: columns accumulate the eigenvectors.
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }

    let frob = frobenius_norm(&m);
    let target = 1e-12 * frob;
    let mut converged = frob == 0.0 || n == 1;

    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&m) <= target {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let apq = m[p][q];
                if apq == 0.0 {
                    continue;
                }
                // Symmetric Schur decomposition of the 2x2 pivot block.
                let tau = (m[q][q] - m[p][p]) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                for k in 0..n {
                    let mkp = m[k][p];
                    let mkq = m[k][q];
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p][k];
                    let mqk = m[q][k];
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[k][p];
                    let vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    if !converged && off_diagonal_norm(&m) > target {
        return Err(ExposeError::NoConvergence(MAX_SWEEPS));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[j][j].total_cmp(&m[i][i]));

    let values: Vec<f64> = order.iter().map(|&i| m[i][i]).collect();
    let vectors: Vec<Vec<f64>> = order
        .iter()
        .map(|&col| (0..n).map(|row| v[row][col]).collect())
        .collect();
    Ok(SymmetricEigen { values, vectors })
}
