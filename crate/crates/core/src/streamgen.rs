//! Synthetic labeled streams with controlled concept drift.
//!
//! A [`StreamSpec`] chains Gaussian-mixture concepts, switches between them
//! either suddenly at a boundary or smoothly through a sigmoid-mixed
//! Bernoulli choice, and replaces a fixed fraction of draws with anomalies
//! sampled uniformly from a box enclosing every concept. While a smooth
//! transition is in progress, draws from both concepts count as normal data;
//! only the box draws are labeled anomalous.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{ExposeError, Result};
use crate::model::Label;

/// Isotropic Gaussian mixture component.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GaussianComponent {
    pub mean: Vec<f64>,
    pub std_dev: f64,
}

/// One stationary concept: draws pick a component uniformly, then sample
/// `N(mean, std_dev^2 I)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Concept {
    pub components: Vec<GaussianComponent>,
}

/// Transition behavior between two consecutive concepts. The changeover
/// point is the boundary implied by the concept lengths.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Drift {
    /// Hard switch at the boundary.
    Sudden,
    /// Bernoulli mixing with probability following a sigmoid centered on
    /// the boundary; `width` is the length of the drift interval.
    Smooth { width: usize },
}

/// Uniform sampler over an axis-aligned box, used for anomalies.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UniformBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl UniformBox {
    fn sample(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(&lo, &hi)| rng.random_range(lo..=hi))
            .collect()
    }
}

/// Description of a synthetic stream; fully determined by its seed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StreamSpec {
    pub concepts: Vec<Concept>,
    /// Instances generated per concept; boundaries are the running totals.
    pub lengths: Vec<usize>,
    /// One transition per consecutive concept pair.
    pub drifts: Vec<Drift>,
    /// Probability that a draw is replaced by a box anomaly.
    pub anomaly_rate: f64,
    /// Anomaly sampler; when absent, a box enclosing all component means
    /// plus/minus six standard deviations is derived.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anomaly_box: Option<UniformBox>,
    pub seed: u64,
}

/// One generated observation.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledInstance {
    pub values: Vec<f64>,
    pub label: Label,
    /// Concept the instance was drawn from (anomalies inherit the concept
    /// active at their position).
    pub concept_id: usize,
}

/// Sigmoid mixing weight of the *later* concept at step `t` for a smooth
/// transition centered at `t0`: `s(t) = 1 / (1 + exp(-4 (t - t0) / width))`.
///
/// The slope constant 4/width makes the transition occupy roughly
/// `[t0 - width/2, t0 + width/2]`; at `t = t0` both concepts are equally
/// likely, and three widths away the mix is over 99% one-sided.
pub fn smooth_mix_probability(t: usize, t0: usize, width: usize) -> f64 {
    let delta = t as f64 - t0 as f64;
    1.0 / (1.0 + (-4.0 * delta / width as f64).exp())
}

impl StreamSpec {
    pub fn validate(&self) -> Result<()> {
        if self.concepts.is_empty() {
            return Err(ExposeError::InvalidSpec("no concepts".into()));
        }
        if self.lengths.len() != self.concepts.len() {
            return Err(ExposeError::InvalidSpec(format!(
                "{} concepts but {} lengths",
                self.concepts.len(),
                self.lengths.len()
            )));
        }
        if self.lengths.contains(&0) {
            return Err(ExposeError::InvalidSpec("concept lengths must be positive".into()));
        }
        if self.drifts.len() + 1 != self.concepts.len() {
            return Err(ExposeError::InvalidSpec(format!(
                "{} concepts need {} drifts, got {}",
                self.concepts.len(),
                self.concepts.len() - 1,
                self.drifts.len()
            )));
        }
        for drift in &self.drifts {
            if let Drift::Smooth { width: 0 } = drift {
                return Err(ExposeError::InvalidSpec("smooth drift width must be >= 1".into()));
            }
        }
        if !(self.anomaly_rate.is_finite() && (0.0..0.5).contains(&self.anomaly_rate)) {
            return Err(ExposeError::InvalidSpec(format!(
                "anomaly_rate must lie in [0, 0.5), got {}",
                self.anomaly_rate
            )));
        }
        let d = self.dimension();
        if d == 0 {
            return Err(ExposeError::InvalidSpec("zero-dimensional concept".into()));
        }
        for concept in &self.concepts {
            if concept.components.is_empty() {
                return Err(ExposeError::InvalidSpec("concept without components".into()));
            }
            for c in &concept.components {
                if c.mean.len() != d {
                    return Err(ExposeError::InvalidSpec(
                        "component dimensions are inconsistent".into(),
                    ));
                }
                if c.mean.iter().any(|v| !v.is_finite()) || !c.std_dev.is_finite() || c.std_dev <= 0.0 {
                    return Err(ExposeError::InvalidSpec(
                        "component mean/std must be finite and std positive".into(),
                    ));
                }
            }
        }
        if let Some(b) = &self.anomaly_box {
            if b.lower.len() != d || b.upper.len() != d {
                return Err(ExposeError::InvalidSpec("anomaly box dimension mismatch".into()));
            }
            if b.lower.iter().zip(&b.upper).any(|(lo, hi)| lo >= hi) {
                return Err(ExposeError::InvalidSpec(
                    "anomaly box bounds must satisfy lower < upper".into(),
                ));
            }
        }
        Ok(())
    }

    /// Input dimension, taken from the first component.
    pub fn dimension(&self) -> usize {
        self.concepts
            .first()
            .and_then(|c| c.components.first())
            .map(|c| c.mean.len())
            .unwrap_or(0)
    }

    /// Total stream length.
    pub fn total_length(&self) -> usize {
        self.lengths.iter().sum()
    }

    /// Concept boundaries: `boundaries()[i]` is the first index of concept
    /// `i + 1` and the center of transition `i`.
    pub fn boundaries(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.lengths.len().saturating_sub(1));
        let mut acc = 0;
        for &l in &self.lengths[..self.lengths.len().saturating_sub(1)] {
            acc += l;
            out.push(acc);
        }
        out
    }

    /// Nominal concept at position `t` by the length boundaries (ignoring
    /// transition mixing); used to pick the active holdout set.
    pub fn concept_at(&self, t: usize) -> usize {
        let mut acc = 0;
        for (i, &l) in self.lengths.iter().enumerate() {
            acc += l;
            if t < acc {
                return i;
            }
        }
        self.concepts.len() - 1
    }

    /// Box enclosing every component mean plus/minus six standard
    /// deviations in each coordinate.
    pub fn default_anomaly_box(&self) -> UniformBox {
        let d = self.dimension();
        let mut lower = vec![f64::INFINITY; d];
        let mut upper = vec![f64::NEG_INFINITY; d];
        for concept in &self.concepts {
            for comp in &concept.components {
                for i in 0..d {
                    lower[i] = lower[i].min(comp.mean[i] - 6.0 * comp.std_dev);
                    upper[i] = upper[i].max(comp.mean[i] + 6.0 * comp.std_dev);
                }
            }
        }
        UniformBox { lower, upper }
    }

    /// Concept index generating position `t`, consuming one Bernoulli draw
    /// during smooth transitions.
    fn draw_concept(&self, t: usize, boundaries: &[usize], rng: &mut ChaCha8Rng) -> usize {
        if boundaries.is_empty() {
            return 0;
        }
        // Only the nearest transition influences a position; spacing between
        // boundaries keeps the others saturated.
        let nearest = boundaries
            .iter()
            .enumerate()
            .min_by_key(|(_, &b)| t.abs_diff(b))
            .map(|(i, _)| i)
            .expect("nonempty boundaries");
        let t0 = boundaries[nearest];
        match self.drifts[nearest] {
            Drift::Sudden => {
                if t >= t0 {
                    nearest + 1
                } else {
                    nearest
                }
            }
            Drift::Smooth { width } => {
                let p_later = smooth_mix_probability(t, t0, width);
                if rng.random::<f64>() < p_later {
                    nearest + 1
                } else {
                    nearest
                }
            }
        }
    }

    fn sample_concept(&self, concept: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let components = &self.concepts[concept].components;
        let comp = &components[rng.random_range(0..components.len())];
        comp.mean
            .iter()
            .map(|&m| m + comp.std_dev * rng.sample::<f64, _>(StandardNormal))
            .collect()
    }

    /// Generates the full stream; byte-identical for identical specs.
    pub fn generate(&self) -> Result<Vec<LabeledInstance>> {
        self.validate()?;
        let boundaries = self.boundaries();
        let anomaly_box = self
            .anomaly_box
            .clone()
            .unwrap_or_else(|| self.default_anomaly_box());
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut out = Vec::with_capacity(self.total_length());
        for t in 0..self.total_length() {
            let concept_id = self.draw_concept(t, &boundaries, &mut rng);
            let is_anomaly = self.anomaly_rate > 0.0 && rng.random::<f64>() < self.anomaly_rate;
            let (values, label) = if is_anomaly {
                (anomaly_box.sample(&mut rng), Label::Anomaly)
            } else {
                (self.sample_concept(concept_id, &mut rng), Label::Normal)
            };
            out.push(LabeledInstance {
                values,
                label,
                concept_id,
            });
        }
        Ok(out)
    }

    /// Fresh labeled test set for one concept: `n_normal` draws from the
    /// concept's mixture and `n_anomaly` draws from the anomaly box,
    /// independent of the stream.
    pub fn holdout_for_concept(
        &self,
        concept_id: usize,
        n_normal: usize,
        n_anomaly: usize,
        seed: u64,
    ) -> Result<Vec<(Vec<f64>, Label)>> {
        self.validate()?;
        if concept_id >= self.concepts.len() {
            return Err(ExposeError::InvalidSpec(format!(
                "concept {concept_id} out of range ({} concepts)",
                self.concepts.len()
            )));
        }
        let anomaly_box = self
            .anomaly_box
            .clone()
            .unwrap_or_else(|| self.default_anomaly_box());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(n_normal + n_anomaly);
        for _ in 0..n_normal {
            out.push((self.sample_concept(concept_id, &mut rng), Label::Normal));
        }
        for _ in 0..n_anomaly {
            out.push((anomaly_box.sample(&mut rng), Label::Anomaly));
        }
        Ok(out)
    }
}

/// Convenience spec: one isotropic unit-variance Gaussian per concept.
pub fn gaussian_concept(mean: Vec<f64>, std_dev: f64) -> Concept {
    Concept {
        components: vec![GaussianComponent { mean, std_dev }],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_concept_spec() -> StreamSpec {
        StreamSpec {
            concepts: vec![
                gaussian_concept(vec![0.0, 0.0], 1.0),
                gaussian_concept(vec![8.0, 0.0], 1.0),
            ],
            lengths: vec![1000, 1000],
            drifts: vec![Drift::Smooth { width: 100 }],
            anomaly_rate: 0.01,
            anomaly_box: None,
            seed: 42,
        }
    }

    #[test]
    fn sigmoid_midpoint_and_tails() {
        assert_eq!(smooth_mix_probability(500, 500, 100), 0.5);
        // Three widths before the midpoint the earlier concept dominates.
        let p_later = smooth_mix_probability(200, 500, 100);
        assert!(1.0 - p_later > 0.99);
        let p_later = smooth_mix_probability(800, 500, 100);
        assert!(p_later > 0.99);
    }

    #[test]
    fn width_one_crosses_in_one_step() {
        assert!(smooth_mix_probability(499, 500, 1) < 0.5);
        assert_eq!(smooth_mix_probability(500, 500, 1), 0.5);
        assert!(smooth_mix_probability(501, 500, 1) > 0.98);
    }

    #[test]
    fn deterministic_for_seed() {
        let spec = two_concept_spec();
        let a = spec.generate().unwrap();
        let b = spec.generate().unwrap();
        assert_eq!(a, b);
        let mut other = spec.clone();
        other.seed = 43;
        assert_ne!(other.generate().unwrap(), a);
    }

    #[test]
    fn anomaly_rate_concentrates() {
        let spec = StreamSpec {
            concepts: vec![gaussian_concept(vec![0.0], 1.0)],
            lengths: vec![100_000],
            drifts: vec![],
            anomaly_rate: 0.01,
            anomaly_box: None,
            seed: 7,
        };
        let stream = spec.generate().unwrap();
        let anomalies = stream.iter().filter(|i| i.label == Label::Anomaly).count();
        // Six-sigma binomial interval around 1000.
        assert!(
            (800..=1200).contains(&anomalies),
            "anomaly count {anomalies}"
        );
    }

    #[test]
    fn concept_marginals_match_means() {
        let spec = StreamSpec {
            concepts: vec![gaussian_concept(vec![2.0, -1.0, 0.5], 1.0)],
            lengths: vec![10_000],
            drifts: vec![],
            anomaly_rate: 0.0,
            anomaly_box: None,
            seed: 3,
        };
        let stream = spec.generate().unwrap();
        let n = stream.len() as f64;
        for dim in 0..3 {
            let mean: f64 = stream.iter().map(|i| i.values[dim]).sum::<f64>() / n;
            let expect = [2.0, -1.0, 0.5][dim];
            // 5 sigma / sqrt(n) tolerance.
            assert!(
                (mean - expect).abs() <= 5.0 / n.sqrt(),
                "dim {dim}: {mean} vs {expect}"
            );
        }
    }

    #[test]
    fn smooth_transition_mixes_both_concepts() {
        let spec = two_concept_spec();
        let stream = spec.generate().unwrap();
        // Around the boundary both concepts appear among normals.
        let around: Vec<&LabeledInstance> = stream[950..1050]
            .iter()
            .filter(|i| i.label == Label::Normal)
            .collect();
        assert!(around.iter().any(|i| i.concept_id == 0));
        assert!(around.iter().any(|i| i.concept_id == 1));
        // Labels during the drift interval are still normal.
        assert!(around.iter().all(|i| i.label == Label::Normal));
        // Far from the boundary the nominal concept dominates completely.
        assert!(stream[..500].iter().all(|i| i.concept_id == 0));
        assert!(stream[1500..].iter().all(|i| i.concept_id == 1));
    }

    #[test]
    fn sudden_drift_switches_at_boundary() {
        let mut spec = two_concept_spec();
        spec.drifts = vec![Drift::Sudden];
        let stream = spec.generate().unwrap();
        assert!(stream[..1000].iter().all(|i| i.concept_id == 0));
        assert!(stream[1000..].iter().all(|i| i.concept_id == 1));
    }

    #[test]
    fn holdout_composition_and_determinism() {
        let spec = two_concept_spec();
        let set = spec.holdout_for_concept(1, 500, 500, 9).unwrap();
        assert_eq!(set.len(), 1000);
        assert_eq!(set.iter().filter(|(_, l)| *l == Label::Normal).count(), 500);
        assert_eq!(set.iter().filter(|(_, l)| *l == Label::Anomaly).count(), 500);
        assert_eq!(set, spec.holdout_for_concept(1, 500, 500, 9).unwrap());
        // Normals come from concept 1 (mean 8 in the first coordinate).
        let mean0: f64 = set
            .iter()
            .filter(|(_, l)| *l == Label::Normal)
            .map(|(v, _)| v[0])
            .sum::<f64>()
            / 500.0;
        assert!((mean0 - 8.0).abs() < 0.5);

        let single = spec.holdout_for_concept(0, 10, 0, 1).unwrap();
        assert_eq!(single.len(), 10);
        assert!(single.iter().all(|(_, l)| *l == Label::Normal));

        assert!(spec.holdout_for_concept(5, 1, 1, 0).is_err());
    }

    #[test]
    fn default_box_encloses_means() {
        let spec = two_concept_spec();
        let b = spec.default_anomaly_box();
        assert_eq!(b.lower, vec![-6.0, -6.0]);
        assert_eq!(b.upper, vec![14.0, 6.0]);
    }

    #[test]
    fn concept_at_boundaries() {
        let spec = two_concept_spec();
        assert_eq!(spec.concept_at(0), 0);
        assert_eq!(spec.concept_at(999), 0);
        assert_eq!(spec.concept_at(1000), 1);
        assert_eq!(spec.concept_at(5000), 1);
    }

    #[test]
    fn validation_rejects_bad_specs() {
        let mut spec = two_concept_spec();
        spec.anomaly_rate = 0.5;
        assert!(spec.validate().is_err());
        let mut spec = two_concept_spec();
        spec.drifts = vec![];
        assert!(spec.validate().is_err());
        let mut spec = two_concept_spec();
        spec.lengths = vec![1000];
        assert!(spec.validate().is_err());
        let mut spec = two_concept_spec();
        spec.drifts = vec![Drift::Smooth { width: 0 }];
        assert!(spec.validate().is_err());
        let mut spec = two_concept_spec();
        spec.concepts[1] = gaussian_concept(vec![0.0], 1.0);
        assert!(spec.validate().is_err());
    }

    #[test]
    fn spec_json_round_trip() {
        let spec = two_concept_spec();
        let json = serde_json::to_string(&spec).unwrap();
        let back: StreamSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back.generate().unwrap(), spec.generate().unwrap());
    }
}
