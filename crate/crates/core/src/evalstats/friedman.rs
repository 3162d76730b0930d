//! Friedman test, Iman-Davenport correction and Nemenyi critical difference.

use super::metrics::average_ranks;
use crate::error::{ExposeError, Result};

/// Upper critical values of the studentized range statistic divided by
/// sqrt(2), for k = 2..=10 compared algorithms at the infinite-degrees-of-
/// freedom limit. Generated with scipy 1.16:
/// `studentized_range.ppf(1 - alpha, k, 1e8) / sqrt(2)`, and matching the
/// two-tailed Nemenyi tables in common use (Demsar, JMLR 7, 2006).
const NEMENYI_Q_05: [f64; 9] = [
    1.959964, 2.343701, 2.569032, 2.727774, 2.849705, 2.948320, 3.030878, 3.101730, 3.163684,
];
const NEMENYI_Q_10: [f64; 9] = [
    1.644854, 2.052293, 2.291341, 2.459516, 2.588521, 2.692732, 2.779884, 2.854606, 2.919889,
];

/// Significance level with a tabulated critical value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Alpha {
    /// alpha = 0.05
    FivePercent,
    /// alpha = 0.10
    TenPercent,
}

impl Alpha {
    pub fn from_value(alpha: f64) -> Result<Self> {
        if (alpha - 0.05).abs() < 1e-9 {
            Ok(Alpha::FivePercent)
        } else if (alpha - 0.10).abs() < 1e-9 {
            Ok(Alpha::TenPercent)
        } else {
            Err(ExposeError::InvalidParameter {
                name: "alpha",
                reason: format!("critical values tabulated for 0.05 and 0.10 only, got {alpha}"),
            })
        }
    }

    pub fn value(&self) -> f64 {
        match self {
            Alpha::FivePercent => 0.05,
            Alpha::TenPercent => 0.10,
        }
    }

    fn table(&self) -> &'static [f64; 9] {
        match self {
            Alpha::FivePercent => &NEMENYI_Q_05,
            Alpha::TenPercent => &NEMENYI_Q_10,
        }
    }
}

/// Per-dataset ranks of k algorithms over m datasets.
///
/// Row `i` ranks the algorithms on dataset `i`, rank 1 best, ties averaged,
/// so every row sums to `k(k+1)/2` exactly.
#[derive(Debug, Clone)]
pub struct RankMatrix {
    ranks: Vec<Vec<f64>>,
}

impl RankMatrix {
    /// Ranks a raw m x k metric matrix where higher values are better.
    pub fn from_metrics(metrics: &[Vec<f64>]) -> Result<Self> {
        let m = metrics.len();
        if m < 2 {
            return Err(ExposeError::InvalidParameter {
                name: "metric matrix",
                reason: "need at least 2 datasets (rows)".into(),
            });
        }
        let k = metrics[0].len();
        if k < 2 {
            return Err(ExposeError::InvalidParameter {
                name: "metric matrix",
                reason: "need at least 2 algorithms (columns)".into(),
            });
        }
        let mut ranks = Vec::with_capacity(m);
        for row in metrics {
            if row.len() != k {
                return Err(ExposeError::DimensionMismatch {
                    expected: k,
                    actual: row.len(),
                });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(ExposeError::NonFinite);
            }
            ranks.push(average_ranks(row, true));
        }
        Ok(Self { ranks })
    }

    pub fn datasets(&self) -> usize {
        self.ranks.len()
    }

    pub fn algorithms(&self) -> usize {
        self.ranks[0].len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.ranks
    }

    /// Column means: the average rank of each algorithm.
    pub fn average_ranks(&self) -> Vec<f64> {
        let m = self.datasets() as f64;
        let k = self.algorithms();
        let mut avg = vec![0.0; k];
        for row in &self.ranks {
            for (a, r) in avg.iter_mut().zip(row) {
                *a += r;
            }
        }
        for a in &mut avg {
            *a /= m;
        }
        avg
    }
}

/// Friedman test outcome, with the Iman-Davenport corrected statistic.
#[derive(Debug, Clone)]
pub struct FriedmanOutcome {
    /// Friedman chi-squared statistic.
    pub chi2_f: f64,
    /// Iman-Davenport F statistic, F-distributed with (df1, df2) degrees of
    /// freedom under the null.
    pub f_f: f64,
    pub df1: usize,
    pub df2: usize,
    pub ranks: RankMatrix,
}

/// Runs the Friedman test on an m x k metric matrix (rows = datasets,
/// columns = algorithms, higher metric better).
///
/// `chi2_F = 12m/(k(k+1)) (sum_j rbar_j^2 - k(k+1)^2/4)` and
/// `F_F = (m-1) chi2_F / (m(k-1) - chi2_F)`. The corrected statistic is
/// reported because the raw chi-squared form is undesirably conservative.
/// When the ranking is perfectly consistent, `chi2_F = m(k-1)` and the
/// correction's denominator vanishes; that is flagged as a saturated
/// statistic rather than returning infinity.
pub fn friedman(metrics: &[Vec<f64>]) -> Result<FriedmanOutcome> {
    let ranks = RankMatrix::from_metrics(metrics)?;
    let m = ranks.datasets() as f64;
    let k = ranks.algorithms() as f64;
    let avg = ranks.average_ranks();
    let sum_sq: f64 = avg.iter().map(|r| r * r).sum();
    let chi2_f = 12.0 * m / (k * (k + 1.0)) * (sum_sq - k * (k + 1.0) * (k + 1.0) / 4.0);
    let denom = m * (k - 1.0) - chi2_f;
    if denom <= 0.0 {
        return Err(ExposeError::SaturatedStatistic);
    }
    let f_f = (m - 1.0) * chi2_f / denom;
    Ok(FriedmanOutcome {
        chi2_f,
        f_f,
        df1: ranks.algorithms() - 1,
        df2: (ranks.algorithms() - 1) * (ranks.datasets() - 1),
        ranks,
    })
}

/// Nemenyi critical difference `CD = q_alpha sqrt(k(k+1)/(6m))`.
///
/// Two algorithms perform significantly differently at level `alpha` when
/// their average ranks differ by at least this much.
pub fn nemenyi_cd(k: usize, m: usize, alpha: Alpha) -> Result<f64> {
    if !(2..=10).contains(&k) {
        return Err(ExposeError::OutsideTable { k });
    }
    if m < 2 {
        return Err(ExposeError::InvalidParameter {
            name: "m",
            reason: "need at least 2 datasets".into(),
        });
    }
    let q = alpha.table()[k - 2];
    Ok(q * ((k * (k + 1)) as f64 / (6.0 * m as f64)).sqrt())
}

/// Data behind a critical difference diagram: average ranks plus the
/// maximal groups of algorithms whose ranks are not significantly different.
#[derive(Debug, Clone)]
pub struct CdDiagram {
    pub average_ranks: Vec<f64>,
    pub cd: f64,
    /// Each group lists algorithm indices, ordered by average rank. These
    /// are the sets a diagram would connect with a bar.
    pub groups: Vec<Vec<usize>>,
}

/// Computes average ranks and the maximal cliques of mutually
/// non-significant algorithms (pairwise rank gap below the critical
/// difference).
pub fn cd_diagram_data(ranks: &RankMatrix, alpha: Alpha) -> Result<CdDiagram> {
    let avg = ranks.average_ranks();
    let cd = nemenyi_cd(ranks.algorithms(), ranks.datasets(), alpha)?;
    let mut order: Vec<usize> = (0..avg.len()).collect();
    order.sort_by(|&i, &j| avg[i].total_cmp(&avg[j]));

    // On a line, "all pairwise gaps < cd" is just "max - min < cd", so the
    // maximal cliques are maximal windows over the sorted ranks.
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut last_end = 0;
    for start in 0..order.len() {
        let mut end = start + 1;
        while end < order.len() && avg[order[end]] - avg[order[start]] < cd {
            end += 1;
        }
        if end > last_end {
            groups.push(order[start..end].to_vec());
            last_end = end;
        }
    }
    Ok(CdDiagram {
        average_ranks: avg,
        cd,
        groups,
    })
}
