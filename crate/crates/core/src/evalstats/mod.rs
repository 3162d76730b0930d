//! Evaluation metrics and multi-algorithm statistical comparison.
//!
//! Ranking metrics ([`auc`], [`balanced_accuracy`]), the Friedman test with
//! the Iman-Davenport correction, the post-hoc Nemenyi critical difference,
//! and the two stream evaluation protocols (prequential and holdout).

mod friedman;
mod metrics;
mod protocols;

pub use friedman::{
    cd_diagram_data, friedman, nemenyi_cd, Alpha, CdDiagram, FriedmanOutcome, RankMatrix,
};
pub use metrics::{auc, balanced_accuracy};
pub use protocols::{
    holdout_eval, prequential_eval, prequential_eval_windowed, EvalRecord, Protocol,
};
