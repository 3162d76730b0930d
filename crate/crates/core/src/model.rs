//! The expected-similarity estimator: a mean vector in feature space.
//!
//! The model is the running estimate `w` of the mean feature vector of
//! normal data. Scoring a query `z` is the inner product `<phi(z), w>`,
//! optionally divided by `||w||^2` so that streaming scores stay comparable
//! while `w` keeps moving. Four update disciplines are supported:
//!
//! * batch: mergeable partial sums, parallelizable over chunks;
//! * online: exact running mean, `w_t = w_{t-1} + (phi(x_t) - w_{t-1})/t`,
//!   identical to the batch mean over the same sequence;
//! * window: mean of the last `l` features via a ring buffer,
//!   `w_t = w_{t-1} + phi(x_t)/l - phi(x_{t-l})/l` once warm;
//! * decay: geometric forgetting, `w_t = gamma phi(x_t) + (1-gamma) w_{t-1}`.

use std::collections::VecDeque;
use std::fmt;

use crate::error::{ExposeError, Result};
use crate::features::{dot, FeatureMap};

/// Class label for an observation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Normal,
    Anomaly,
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Normal => write!(f, "normal"),
            Label::Anomaly => write!(f, "anomaly"),
        }
    }
}

impl std::str::FromStr for Label {
    type Err = ExposeError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "normal" => Ok(Label::Normal),
            "anomaly" => Ok(Label::Anomaly),
            other => Err(ExposeError::Parse(format!(
                "unknown label {other:?}, expected \"normal\" or \"anomaly\""
            ))),
        }
    }
}

/// Update discipline of a model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mode {
    Batch,
    Online,
    Window { len: usize },
    Decay { gamma: f64 },
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Batch => "batch",
            Mode::Online => "online",
            Mode::Window { .. } => "window",
            Mode::Decay { .. } => "decay",
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Mode::Window { len: 0 } => Err(ExposeError::InvalidParameter {
                name: "window length",
                reason: "must be at least 1".into(),
            }),
            Mode::Decay { gamma } if !(gamma.is_finite() && (0.0..1.0).contains(&gamma)) => {
                Err(ExposeError::InvalidParameter {
                    name: "gamma",
                    reason: format!("must lie in [0, 1), got {gamma}"),
                })
            }
            _ => Ok(()),
        }
    }
}

/// Unnormalized feature-vector sum over a chunk of observations.
///
/// Partial sums can be computed independently on disjoint chunks (no shared
/// state) and merged in any order; accumulation is Kahan-compensated so the
/// merge order does not matter beyond ~1e-10 relative even for millions of
/// rows.
#[derive(Debug, Clone)]
pub struct PartialSum {
    sum: Vec<f64>,
    compensation: Vec<f64>,
    count: u64,
}

fn kahan_add(sum: &mut f64, compensation: &mut f64, value: f64) {
    let y = value - *compensation;
    let t = *sum + y;
    *compensation = (t - *sum) - y;
    *sum = t;
}

impl PartialSum {
    /// Maps every vector in `chunk` and sums the features.
    pub fn fit(map: &FeatureMap, chunk: &[Vec<f64>]) -> Result<Self> {
        if chunk.is_empty() {
            return Err(ExposeError::Empty("chunk"));
        }
        let dim = map.feature_dim();
        let mut sum = vec![0.0; dim];
        let mut compensation = vec![0.0; dim];
        for x in chunk {
            let f = map.map(x)?;
            for i in 0..dim {
                kahan_add(&mut sum[i], &mut compensation[i], f[i]);
            }
        }
        Ok(Self {
            sum,
            compensation,
            count: chunk.len() as u64,
        })
    }

    /// Combines two partial sums; commutative and associative up to rounding.
    pub fn merge(mut self, other: &PartialSum) -> Result<PartialSum> {
        if self.sum.len() != other.sum.len() {
            return Err(ExposeError::DimensionMismatch {
                expected: self.sum.len(),
                actual: other.sum.len(),
            });
        }
        for i in 0..self.sum.len() {
            kahan_add(&mut self.sum[i], &mut self.compensation[i], other.sum[i]);
            kahan_add(
                &mut self.sum[i],
                &mut self.compensation[i],
                -other.compensation[i],
            );
        }
        self.count += other.count;
        Ok(self)
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn sum(&self) -> &[f64] {
        &self.sum
    }
}

/// A scored query: raw inner product and, when defined, the normalized form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredInstance {
    /// `<phi(z), w>`.
    pub raw: f64,
    /// `raw / ||w||^2`; present only when requested and `||w|| > 0`.
    pub normalized: Option<f64>,
    pub label: Option<Label>,
}

impl ScoredInstance {
    /// The value thresholding applies to: normalized when present, else raw.
    pub fn decision_score(&self) -> f64 {
        self.normalized.unwrap_or(self.raw)
    }
}

/// Thresholds a score: strictly above `theta` is normal, everything else
/// (including exact equality) is an anomaly.
pub fn classify(scored: &ScoredInstance, theta: f64) -> Label {
    if scored.decision_score() > theta {
        Label::Normal
    } else {
        Label::Anomaly
    }
}

/// The fitted estimator: a feature map plus the weight vector `w`.
#[derive(Debug, Clone)]
pub struct ExposeModel {
    map: FeatureMap,
    weights: Vec<f64>,
    count: u64,
    mode: Mode,
    window: VecDeque<Vec<f64>>,
    normalize_default: bool,
}

impl ExposeModel {
    /// Finalizes batch fitting: `w` is the grand mean over all partial sums.
    pub fn from_partial_sums(map: FeatureMap, parts: &[PartialSum]) -> Result<Self> {
        if parts.is_empty() {
            return Err(ExposeError::Empty("partial sums"));
        }
        let mut total = parts[0].clone();
        for part in &parts[1..] {
            total = total.merge(part)?;
        }
        if total.sum.len() != map.feature_dim() {
            return Err(ExposeError::DimensionMismatch {
                expected: map.feature_dim(),
                actual: total.sum.len(),
            });
        }
        let n = total.count as f64;
        let weights = total.sum.iter().map(|s| s / n).collect();
        Ok(Self {
            map,
            weights,
            count: total.count,
            mode: Mode::Batch,
            window: VecDeque::new(),
            normalize_default: false,
        })
    }

    /// Single-chunk batch fit.
    pub fn fit_batch(map: FeatureMap, data: &[Vec<f64>]) -> Result<Self> {
        let part = PartialSum::fit(&map, data)?;
        Self::from_partial_sums(map, &[part])
    }

    /// Fresh streaming model with zero observations.
    pub fn streaming(map: FeatureMap, mode: Mode) -> Result<Self> {
        if mode == Mode::Batch {
            return Err(ExposeError::WrongMode {
                expected: "online, window or decay",
                actual: "batch",
            });
        }
        mode.validate()?;
        let dim = map.feature_dim();
        Ok(Self {
            map,
            weights: vec![0.0; dim],
            count: 0,
            mode,
            window: VecDeque::new(),
            normalize_default: true,
        })
    }

    /// Rebuilds a model from persisted parts. Used by the model-file loader.
    pub fn from_raw_parts(
        map: FeatureMap,
        weights: Vec<f64>,
        count: u64,
        mode: Mode,
        window: Vec<Vec<f64>>,
        normalize_default: bool,
    ) -> Result<Self> {
        mode.validate()?;
        if weights.len() != map.feature_dim() {
            return Err(ExposeError::DimensionMismatch {
                expected: map.feature_dim(),
                actual: weights.len(),
            });
        }
        match mode {
            Mode::Window { len } => {
                let expected = (count as usize).min(len);
                if window.len() != expected {
                    return Err(ExposeError::ModelFile(format!(
                        "window buffer holds {} features, expected {expected}",
                        window.len()
                    )));
                }
                if window.iter().any(|f| f.len() != map.feature_dim()) {
                    return Err(ExposeError::ModelFile(
                        "window buffer feature dimension mismatch".into(),
                    ));
                }
            }
            _ if !window.is_empty() => {
                return Err(ExposeError::ModelFile(
                    "window buffer present on a non-window model".into(),
                ));
            }
            _ => {}
        }
        Ok(Self {
            map,
            weights,
            count,
            mode,
            window: window.into(),
            normalize_default,
        })
    }

    pub fn map(&self) -> &FeatureMap {
        &self.map
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Features currently held by a window-mode model, oldest first.
    pub fn window_buffer(&self) -> impl Iterator<Item = &[f64]> {
        self.window.iter().map(|f| f.as_slice())
    }

    /// Whether scores should be normalized by default: on for streaming
    /// modes, off for batch (a batch model no longer changes when queried).
    pub fn normalize_default(&self) -> bool {
        self.normalize_default
    }

    fn wrong_mode(&self, expected: &'static str) -> ExposeError {
        ExposeError::WrongMode {
            expected,
            actual: self.mode.name(),
        }
    }

    /// Exact incremental mean update. Equivalent to refitting the batch
    /// mean over the whole sequence.
    pub fn update_online(&mut self, x: &[f64]) -> Result<()> {
        let f = self.map.map(x)?;
        self.update_online_feature(f)
    }

    /// Online update fed a precomputed feature vector.
    pub fn update_online_feature(&mut self, f: Vec<f64>) -> Result<()> {
        if self.mode != Mode::Online {
            return Err(self.wrong_mode("online"));
        }
        self.check_feature(&f)?;
        self.count += 1;
        if self.count == 1 {
            self.weights = f;
        } else {
            let t = self.count as f64;
            for (w, fi) in self.weights.iter_mut().zip(&f) {
                *w += (fi - *w) / t;
            }
        }
        Ok(())
    }

    /// Sliding-window update: running mean during warm-up, then the
    /// constant-time slide over the ring buffer.
    pub fn update_window(&mut self, x: &[f64]) -> Result<()> {
        let f = self.map.map(x)?;
        self.update_window_feature(f)
    }

    /// Window update fed a precomputed feature vector.
    pub fn update_window_feature(&mut self, f: Vec<f64>) -> Result<()> {
        let len = match self.mode {
            Mode::Window { len } => len,
            _ => return Err(self.wrong_mode("window")),
        };
        self.check_feature(&f)?;
        self.count += 1;
        if self.window.len() < len {
            // Warm-up: mean of everything seen so far.
            let t = self.window.len() as f64 + 1.0;
            if self.window.is_empty() {
                self.weights.copy_from_slice(&f);
            } else {
                for (w, fi) in self.weights.iter_mut().zip(&f) {
                    *w += (fi - *w) / t;
                }
            }
        } else {
            let oldest = self.window.pop_front().expect("buffer full");
            let l = len as f64;
            for ((w, fi), oi) in self.weights.iter_mut().zip(&f).zip(&oldest) {
                *w += (fi - oi) / l;
            }
        }
        self.window.push_back(f);
        Ok(())
    }

    /// Geometric-forgetting update; `gamma = 0` freezes the model after the
    /// first observation.
    pub fn update_decay(&mut self, x: &[f64]) -> Result<()> {
        let f = self.map.map(x)?;
        self.update_decay_feature(f)
    }

    /// Decay update fed a precomputed feature vector.
    pub fn update_decay_feature(&mut self, f: Vec<f64>) -> Result<()> {
        let gamma = match self.mode {
            Mode::Decay { gamma } => gamma,
            _ => return Err(self.wrong_mode("decay")),
        };
        self.check_feature(&f)?;
        self.count += 1;
        if self.count == 1 {
            self.weights = f;
        } else {
            for (w, fi) in self.weights.iter_mut().zip(&f) {
                *w = gamma * fi + (1.0 - gamma) * *w;
            }
        }
        Ok(())
    }

    /// Dispatches to the update rule matching the model's mode.
    pub fn update(&mut self, x: &[f64]) -> Result<()> {
        match self.mode {
            Mode::Batch => Err(self.wrong_mode("online, window or decay")),
            Mode::Online => self.update_online(x),
            Mode::Window { .. } => self.update_window(x),
            Mode::Decay { .. } => self.update_decay(x),
        }
    }

    fn check_feature(&self, f: &[f64]) -> Result<()> {
        if f.len() != self.weights.len() {
            return Err(ExposeError::DimensionMismatch {
                expected: self.weights.len(),
                actual: f.len(),
            });
        }
        Ok(())
    }

    /// Scores a query. `raw` is always computed; the normalized form is
    /// attached when `normalize` is set and errors if `||w|| = 0`.
    pub fn score(&self, z: &[f64], normalize: bool) -> Result<ScoredInstance> {
        let f = self.map.map(z)?;
        self.score_feature(&f, normalize)
    }

    /// Scores a precomputed feature vector.
    pub fn score_feature(&self, f: &[f64], normalize: bool) -> Result<ScoredInstance> {
        if self.count == 0 {
            return Err(ExposeError::Unfitted);
        }
        self.check_feature(f)?;
        let raw = dot(f, &self.weights);
        let normalized = if normalize {
            let norm_sq = dot(&self.weights, &self.weights);
            if norm_sq == 0.0 {
                return Err(ExposeError::ZeroNormWeights);
            }
            Some(raw / norm_sq)
        } else {
            None
        };
        Ok(ScoredInstance {
            raw,
            normalized,
            label: None,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{norm, NystroemMap, RksProjection};
    use crate::kernels::{exact_score, rbf_eval};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rks_map(d: usize, r: usize, seed: u64) -> FeatureMap {
        FeatureMap::Rks(RksProjection::fit(d, r, 1.0, seed).unwrap())
    }

    /// Feature dimension 1: the sole feature of a query is k(landmark, x).
    fn scalar_map() -> FeatureMap {
        FeatureMap::Nystroem(NystroemMap::fit(vec![vec![0.0]], 1.0, 0.0).unwrap())
    }

    fn random_data(n: usize, d: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| (0..d).map(|_| rng.random_range(-2.0..2.0)).collect())
            .collect()
    }

    fn max_rel_diff(a: &[f64], b: &[f64]) -> f64 {
        let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        a.iter()
            .zip(b)
            .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
            / scale
    }

    #[test]
    fn partial_sum_singleton() {
        let map = rks_map(3, 8, 0);
        let x = vec![0.5, -1.0, 2.0];
        let part = PartialSum::fit(&map, std::slice::from_ref(&x)).unwrap();
        assert_eq!(part.count(), 1);
        let f = map.map(&x).unwrap();
        assert_eq!(part.sum(), f.as_slice());
    }

    #[test]
    fn partial_sum_repeated_point_is_linear() {
        let map = rks_map(2, 8, 1);
        let x = vec![0.3, 0.7];
        let chunk = vec![x.clone(); 5];
        let part = PartialSum::fit(&map, &chunk).unwrap();
        let f = map.map(&x).unwrap();
        for (s, fi) in part.sum().iter().zip(&f) {
            assert!((s - 5.0 * fi).abs() <= 1e-12);
        }
    }

    #[test]
    fn merge_matches_concatenation() {
        let map = rks_map(4, 32, 2);
        let a = random_data(37, 4, 10);
        let b = random_data(23, 4, 11);
        let joined: Vec<Vec<f64>> = a.iter().chain(&b).cloned().collect();
        let merged = PartialSum::fit(&map, &a)
            .unwrap()
            .merge(&PartialSum::fit(&map, &b).unwrap())
            .unwrap();
        let single = PartialSum::fit(&map, &joined).unwrap();
        assert_eq!(merged.count(), single.count());
        assert!(max_rel_diff(merged.sum(), single.sum()) <= 1e-12);
    }

    #[test]
    fn merge_commutes() {
        let map = rks_map(3, 16, 3);
        let a = PartialSum::fit(&map, &random_data(10, 3, 20)).unwrap();
        let b = PartialSum::fit(&map, &random_data(15, 3, 21)).unwrap();
        let ab = a.clone().merge(&b).unwrap();
        let ba = b.merge(&a).unwrap();
        assert!(max_rel_diff(ab.sum(), ba.sum()) <= 1e-12);
    }

    #[test]
    fn merge_rejects_mismatched_dims() {
        let a = PartialSum::fit(&rks_map(2, 4, 0), &random_data(3, 2, 0)).unwrap();
        let b = PartialSum::fit(&rks_map(2, 8, 0), &random_data(3, 2, 0)).unwrap();
        assert!(matches!(
            a.merge(&b),
            Err(ExposeError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn four_chunk_merge_equals_single_pass() {
        let map = rks_map(5, 16, 4);
        let data = random_data(100, 5, 30);
        let parts: Vec<PartialSum> = data
            .chunks(25)
            .map(|c| PartialSum::fit(&map, c).unwrap())
            .collect();
        let merged = ExposeModel::from_partial_sums(map.clone(), &parts).unwrap();
        let single = ExposeModel::fit_batch(map, &data).unwrap();
        assert_eq!(merged.count(), 100);
        assert!(max_rel_diff(merged.weights(), single.weights()) <= 1e-12);
    }

    #[test]
    fn online_matches_batch() {
        let map = rks_map(4, 64, 5);
        let data = random_data(1000, 4, 40);
        let batch = ExposeModel::fit_batch(map.clone(), &data).unwrap();
        let mut online = ExposeModel::streaming(map, Mode::Online).unwrap();
        for x in &data {
            online.update_online(x).unwrap();
        }
        assert_eq!(online.count(), 1000);
        assert!(max_rel_diff(online.weights(), batch.weights()) <= 1e-9);
    }

    #[test]
    fn online_scalar_running_mean() {
        let mut model = ExposeModel::streaming(scalar_map(), Mode::Online).unwrap();
        model.update_online_feature(vec![1.0]).unwrap();
        assert_eq!(model.weights(), &[1.0]);
        model.update_online_feature(vec![2.0]).unwrap();
        assert_eq!(model.weights(), &[1.5]);
        model.update_online_feature(vec![3.0]).unwrap();
        assert_eq!(model.weights(), &[2.0]);
    }

    #[test]
    fn window_of_one_tracks_last_feature() {
        let mut model =
            ExposeModel::streaming(scalar_map(), Mode::Window { len: 1 }).unwrap();
        for x in [[0.1], [1.2], [-0.4]] {
            model.update_window(&x).unwrap();
            let f = model.map().map(&x).unwrap();
            // The slide computes w + (f - old), which rounds in the last ulp.
            for (w, fi) in model.weights().iter().zip(&f) {
                assert!((w - fi).abs() <= 1e-15);
            }
        }
    }

    #[test]
    fn window_constant_stream_is_constant() {
        let map = rks_map(2, 8, 6);
        let mut model = ExposeModel::streaming(map.clone(), Mode::Window { len: 4 }).unwrap();
        let x = vec![0.2, -0.9];
        let f = map.map(&x).unwrap();
        for _ in 0..10 {
            model.update_window(&x).unwrap();
            for (w, fi) in model.weights().iter().zip(&f) {
                assert!((w - fi).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn window_matches_buffer_mean() {
        let map = rks_map(3, 16, 7);
        let data = random_data(100, 3, 50);
        let l = 10;
        let mut model = ExposeModel::streaming(map.clone(), Mode::Window { len: l }).unwrap();
        for (t, x) in data.iter().enumerate() {
            model.update_window(x).unwrap();
            let expected_len = (t + 1).min(l);
            assert_eq!(model.window_buffer().count(), expected_len);
            // Brute-force mean over the buffered features.
            let mut mean = vec![0.0; map.feature_dim()];
            for f in model.window_buffer() {
                for (m, fi) in mean.iter_mut().zip(f) {
                    *m += fi;
                }
            }
            for m in &mut mean {
                *m /= expected_len as f64;
            }
            assert!(
                max_rel_diff(model.weights(), &mean) <= 1e-10,
                "diverged at t={t}"
            );
        }
    }

    #[test]
    fn decay_zero_gamma_freezes() {
        let mut model =
            ExposeModel::streaming(scalar_map(), Mode::Decay { gamma: 0.0 }).unwrap();
        model.update_decay_feature(vec![0.8]).unwrap();
        assert_eq!(model.weights(), &[0.8]);
        model.update_decay_feature(vec![0.1]).unwrap();
        model.update_decay_feature(vec![0.9]).unwrap();
        assert_eq!(model.weights(), &[0.8]);
    }

    #[test]
    fn decay_scalar_blend() {
        let mut model =
            ExposeModel::streaming(scalar_map(), Mode::Decay { gamma: 0.5 }).unwrap();
        model.update_decay_feature(vec![1.0]).unwrap();
        assert_eq!(model.weights(), &[1.0]);
        model.update_decay_feature(vec![0.0]).unwrap();
        assert_eq!(model.weights(), &[0.5]);
    }

    #[test]
    fn decay_matches_closed_form() {
        let map = rks_map(2, 8, 8);
        let gamma = 0.2;
        let data = random_data(50, 2, 60);
        let feats: Vec<Vec<f64>> = data.iter().map(|x| map.map(x).unwrap()).collect();
        let mut model = ExposeModel::streaming(map.clone(), Mode::Decay { gamma }).unwrap();
        for x in &data {
            model.update_decay(x).unwrap();
        }
        // w_t = (1-g)^{t-1} f_1 + sum_{i=2..t} g (1-g)^{t-i} f_i
        let t = feats.len();
        let mut expected = vec![0.0; map.feature_dim()];
        for (i, f) in feats.iter().enumerate() {
            let coeff = if i == 0 {
                (1.0 - gamma).powi(t as i32 - 1)
            } else {
                gamma * (1.0 - gamma).powi((t - 1 - i) as i32)
            };
            for (e, fi) in expected.iter_mut().zip(f) {
                *e += coeff * fi;
            }
        }
        assert!(max_rel_diff(model.weights(), &expected) <= 1e-10);
    }

    #[test]
    fn update_mode_mismatch_errors() {
        let map = rks_map(2, 4, 9);
        let x = vec![0.0, 0.0];
        let mut window = ExposeModel::streaming(map.clone(), Mode::Window { len: 2 }).unwrap();
        assert!(matches!(
            window.update_online(&x),
            Err(ExposeError::WrongMode { .. })
        ));
        assert!(matches!(
            window.update_decay(&x),
            Err(ExposeError::WrongMode { .. })
        ));
        let mut batch = ExposeModel::fit_batch(map.clone(), &random_data(5, 2, 0)).unwrap();
        assert!(matches!(
            batch.update(&x),
            Err(ExposeError::WrongMode { .. })
        ));
        assert!(ExposeModel::streaming(map.clone(), Mode::Batch).is_err());
        assert!(ExposeModel::streaming(map.clone(), Mode::Decay { gamma: 1.0 }).is_err());
        assert!(ExposeModel::streaming(map, Mode::Window { len: 0 }).is_err());
    }

    #[test]
    fn score_single_point_model_is_kernel() {
        // Single-landmark map + single-point model: raw score is exactly
        // k(z, x1) because the lone feature is the kernel against the
        // landmark placed at x1.
        let x1 = vec![0.0];
        let map = FeatureMap::Nystroem(NystroemMap::fit(vec![x1.clone()], 1.0, 0.0).unwrap());
        let model = ExposeModel::fit_batch(map, std::slice::from_ref(&x1)).unwrap();
        for z in [[0.3], [1.0], [-2.0]] {
            let got = model.score(&z, false).unwrap().raw;
            let want = rbf_eval(&z, &x1, 1.0).unwrap();
            assert!((got - want).abs() <= 1e-12);
        }
    }

    #[test]
    fn normalized_score_of_mean_direction() {
        // If phi(z) = w / ||w||, then <phi(z), w> / ||w||^2 = 1 / ||w||.
        let map = rks_map(3, 16, 10);
        let model = ExposeModel::fit_batch(map, &random_data(20, 3, 70)).unwrap();
        let w = model.weights().to_vec();
        let n = norm(&w);
        let unit: Vec<f64> = w.iter().map(|v| v / n).collect();
        let scored = model.score_feature(&unit, true).unwrap();
        assert!((scored.normalized.unwrap() - 1.0 / n).abs() <= 1e-12);
    }

    #[test]
    fn raw_score_tracks_exact_kernel_mean() {
        let d = 3;
        let sigma = 1.0;
        let data = random_data(500, d, 80);
        let map = FeatureMap::Rks(RksProjection::fit(d, 2000, sigma, 11).unwrap());
        let model = ExposeModel::fit_batch(map, &data).unwrap();
        let queries = random_data(100, d, 81);
        for z in &queries {
            let raw = model.score(z, false).unwrap().raw;
            let exact = exact_score(z, &data, sigma).unwrap();
            assert!((raw - exact).abs() <= 0.03, "{raw} vs {exact}");
        }
    }

    #[test]
    fn score_errors() {
        let map = rks_map(2, 4, 12);
        let fresh = ExposeModel::streaming(map.clone(), Mode::Online).unwrap();
        assert!(matches!(
            fresh.score(&[0.0, 0.0], true),
            Err(ExposeError::Unfitted)
        ));
        let model = ExposeModel::fit_batch(map, &random_data(5, 2, 90)).unwrap();
        assert!(matches!(
            model.score(&[0.0], false),
            Err(ExposeError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn zero_norm_weights_rejected_when_normalizing() {
        let mut model = ExposeModel::streaming(scalar_map(), Mode::Online).unwrap();
        model.update_online_feature(vec![0.0]).unwrap();
        assert!(matches!(
            model.score_feature(&[1.0], true),
            Err(ExposeError::ZeroNormWeights)
        ));
        // Raw score still fine.
        assert_eq!(model.score_feature(&[1.0], false).unwrap().raw, 0.0);
    }

    #[test]
    fn classify_threshold_rule() {
        let scored = |v: f64| ScoredInstance {
            raw: v,
            normalized: None,
            label: None,
        };
        assert_eq!(classify(&scored(0.9), 0.5), Label::Normal);
        assert_eq!(classify(&scored(0.5), 0.5), Label::Anomaly); // strict >
        assert_eq!(classify(&scored(0.1), 0.5), Label::Anomaly);
        assert_eq!(classify(&scored(-3.0), f64::MIN), Label::Normal);
        // Normalized score takes precedence when present.
        let s = ScoredInstance {
            raw: 0.1,
            normalized: Some(0.9),
            label: None,
        };
        assert_eq!(classify(&s, 0.5), Label::Normal);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        /// Any partitioning and merge order of the same rows lands on the
        /// same weights.
        #[test]
        fn merge_order_irrelevant(seed in 0u64..500, split_a in 1usize..59, split_b in 60usize..99) {
            let map = rks_map(3, 16, 99);
            let data = random_data(100, 3, seed);
            let sequential = ExposeModel::fit_batch(map.clone(), &data).unwrap();

            let (left, rest) = data.split_at(split_a);
            let (mid, right) = rest.split_at(split_b - split_a);
            let pl = PartialSum::fit(&map, left).unwrap();
            let pm = PartialSum::fit(&map, mid).unwrap();
            let pr = PartialSum::fit(&map, right).unwrap();

            // (l + m) + r
            let a = pl.clone().merge(&pm).unwrap().merge(&pr).unwrap();
            // r + (m + l)
            let b = pr.clone().merge(&pm.clone().merge(&pl.clone()).unwrap()).unwrap();
            let ma = ExposeModel::from_partial_sums(map.clone(), &[a]).unwrap();
            let mb = ExposeModel::from_partial_sums(map, &[b]).unwrap();
            prop_assert!(max_rel_diff(ma.weights(), sequential.weights()) <= 1e-10);
            prop_assert!(max_rel_diff(mb.weights(), sequential.weights()) <= 1e-10);
        }

        /// Normalization is a positive scalar transform, so score order is
        /// preserved exactly.
        #[test]
        fn normalization_preserves_order(seed in 0u64..500) {
            let map = rks_map(2, 32, 13);
            let model = ExposeModel::fit_batch(map, &random_data(30, 2, seed)).unwrap();
            let queries = random_data(20, 2, seed.wrapping_add(1));
            let mut raw: Vec<(usize, f64)> = Vec::new();
            let mut normalized: Vec<(usize, f64)> = Vec::new();
            for (i, z) in queries.iter().enumerate() {
                let s = model.score(z, true).unwrap();
                raw.push((i, s.raw));
                normalized.push((i, s.normalized.unwrap()));
            }
            raw.sort_by(|a, b| a.1.total_cmp(&b.1));
            normalized.sort_by(|a, b| a.1.total_cmp(&b.1));
            let order_raw: Vec<usize> = raw.iter().map(|p| p.0).collect();
            let order_norm: Vec<usize> = normalized.iter().map(|p| p.0).collect();
            prop_assert_eq!(order_raw, order_norm);
        }
    }
}
