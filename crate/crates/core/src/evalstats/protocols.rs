//! Stream evaluation drivers: prequential and periodic holdout.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use crate::error::{ExposeError, Result};
use crate::model::{classify, ExposeModel, Label, Mode};

/// How an evaluation figure was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Protocol {
    /// Score each instance on arrival, then learn from it.
    Prequential,
    /// Periodic measurement on a dedicated concept-matched test set.
    Holdout,
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Protocol::Prequential => write!(f, "prequential"),
            Protocol::Holdout => write!(f, "holdout"),
        }
    }
}

/// One evaluation measurement at a position in the stream.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalRecord {
    /// Stream position (number of instances seen when measured).
    pub index: usize,
    pub protocol: Protocol,
    pub metric: String,
    pub value: f64,
}

/// Balanced accuracy over a set of (predicted, actual) decisions, averaging
/// whichever of the two class rates are defined. Anomalies are the positive
/// class: a true positive is a correctly flagged anomaly.
fn trailing_balanced_accuracy(decisions: &VecDeque<(Label, Label)>) -> f64 {
    let (mut tp, mut fn_, mut tn, mut fp) = (0u64, 0u64, 0u64, 0u64);
    for &(pred, actual) in decisions {
        match (pred, actual) {
            (Label::Anomaly, Label::Anomaly) => tp += 1,
            (Label::Normal, Label::Anomaly) => fn_ += 1,
            (Label::Normal, Label::Normal) => tn += 1,
            (Label::Anomaly, Label::Normal) => fp += 1,
        }
    }
    let mut rates = Vec::with_capacity(2);
    if tp + fn_ > 0 {
        rates.push(tp as f64 / (tp + fn_) as f64);
    }
    if tn + fp > 0 {
        rates.push(tn as f64 / (tn + fp) as f64);
    }
    rates.iter().sum::<f64>() / rates.len() as f64
}

/// Prequential evaluation with the default 100-decision trailing window.
pub fn prequential_eval(
    stream: &[(Vec<f64>, Label)],
    model: &mut ExposeModel,
    theta: f64,
) -> Result<Vec<EvalRecord>> {
    prequential_eval_windowed(stream, model, theta, 100)
}

/// Prequential evaluation: each instance is scored against the current
/// model, classified at `theta` on the normalized score, recorded, and only
/// then used to update the model. Emits the trailing balanced accuracy over
/// the last `window` decisions after every decision.
///
/// The first instance of a fresh model cannot be scored and only trains.
pub fn prequential_eval_windowed(
    stream: &[(Vec<f64>, Label)],
    model: &mut ExposeModel,
    theta: f64,
    window: usize,
) -> Result<Vec<EvalRecord>> {
    if model.mode() == Mode::Batch {
        return Err(ExposeError::WrongMode {
            expected: "online, window or decay",
            actual: "batch",
        });
    }
    if window == 0 {
        return Err(ExposeError::InvalidParameter {
            name: "window",
            reason: "must be at least 1".into(),
        });
    }
    let mut records = Vec::new();
    let mut decisions: VecDeque<(Label, Label)> = VecDeque::with_capacity(window);
    for (index, (x, actual)) in stream.iter().enumerate() {
        if model.count() > 0 {
            let scored = model.score(x, true)?;
            let predicted = classify(&scored, theta);
            if decisions.len() == window {
                decisions.pop_front();
            }
            decisions.push_back((predicted, *actual));
            records.push(EvalRecord {
                index,
                protocol: Protocol::Prequential,
                metric: "balanced_accuracy".into(),
                value: trailing_balanced_accuracy(&decisions),
            });
        }
        model.update(x)?;
    }
    Ok(records)
}

/// Holdout evaluation: the model trains on every stream instance; after
/// every `every` updates the holdout set of the instance's concept is scored
/// and its AUC recorded (plus balanced accuracy at `theta` when given).
///
/// `stream` pairs each instance with the concept active at that position so
/// the matching holdout set can be selected.
pub fn holdout_eval(
    stream: &[(Vec<f64>, usize)],
    model: &mut ExposeModel,
    holdouts: &HashMap<usize, Vec<(Vec<f64>, Label)>>,
    every: usize,
    theta: Option<f64>,
) -> Result<Vec<EvalRecord>> {
    if every == 0 {
        return Err(ExposeError::InvalidParameter {
            name: "every",
            reason: "must be at least 1".into(),
        });
    }
    let mut records = Vec::new();
    for (index, (x, concept)) in stream.iter().enumerate() {
        model.update(x)?;
        if (index + 1) % every != 0 {
            continue;
        }
        let holdout = holdouts
            .get(concept)
            .ok_or(ExposeError::MissingHoldout(*concept))?;
        let mut scores = Vec::with_capacity(holdout.len());
        let mut labels = Vec::with_capacity(holdout.len());
        let (mut tp, mut fn_, mut tn, mut fp) = (0u64, 0u64, 0u64, 0u64);
        for (h, label) in holdout {
            let scored = model.score(h, true)?;
            scores.push(scored.decision_score());
            labels.push(*label);
            if let Some(theta) = theta {
                match (classify(&scored, theta), label) {
                    (Label::Anomaly, Label::Anomaly) => tp += 1,
                    (Label::Normal, Label::Anomaly) => fn_ += 1,
                    (Label::Normal, Label::Normal) => tn += 1,
                    (Label::Anomaly, Label::Normal) => fp += 1,
                }
            }
        }
        records.push(EvalRecord {
            index: index + 1,
            protocol: Protocol::Holdout,
            metric: "auc".into(),
            value: super::auc(&scores, &labels)?,
        });
        if theta.is_some() {
            records.push(EvalRecord {
                index: index + 1,
                protocol: Protocol::Holdout,
                metric: "balanced_accuracy".into(),
                value: super::balanced_accuracy(tp, fn_, tn, fp)?,
            });
        }
    }
    Ok(records)
}
