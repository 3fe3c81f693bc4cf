//! The collaborate-then-train composition shared by the in-process runner
//! and the networked coordinator. Keeping one implementation here is what
//! makes the two execution paths bitwise comparable.

use serde::{Deserialize, Serialize};

use crate::collaboration::{build_collaboration, transform_test, CollaborationTransform};
use crate::error::{Error, Result};
use crate::learner::{predict, train, LabelMatrix, LearnerSpec, TrainedModel};
use crate::matrix::Matrix;

/// Everything the aggregation side holds after training: the alignment, the
/// pooled representation, and the fitted model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollaborationOutcome {
    pub transform: CollaborationTransform,
    pub x_hat: Matrix,
    pub model: TrainedModel,
    pub pooled_labels: LabelMatrix,
}

/// Align the parties' representations, pool them in party order, and fit the
/// learner. Inputs are, per party: the mapped anchor, the mapped training
/// block, and the training labels.
pub fn collaborate_and_train(
    anchors_tilde: &[Matrix],
    trains_tilde: &[Matrix],
    labels: &[LabelMatrix],
    ell: usize,
    learner: LearnerSpec,
) -> Result<CollaborationOutcome> {
    if labels.len() != trains_tilde.len() {
        return Err(Error::Dimension(format!(
            "{} label blocks vs {} training blocks",
            labels.len(),
            trains_tilde.len()
        )));
    }
    for (i, (l, t)) in labels.iter().zip(trains_tilde.iter()).enumerate() {
        if l.len() != t.cols() {
            return Err(Error::Dimension(format!(
                "party {i}: {} labels vs {} training columns",
                l.len(),
                t.cols()
            )));
        }
    }
    let (transform, x_hat) = build_collaboration(anchors_tilde, trains_tilde, ell)?;
    let pooled_labels = LabelMatrix::pool(labels)?;
    let model = train(&x_hat, &pooled_labels, learner)?;
    Ok(CollaborationOutcome {
        transform,
        x_hat,
        model,
        pooled_labels,
    })
}

/// Predict class names for one party's mapped test block.
pub fn predict_party(
    outcome: &CollaborationOutcome,
    party: usize,
    y_tilde: &Matrix,
) -> Result<Vec<String>> {
    let aligned = transform_test(&outcome.transform, party, y_tilde)?;
    predict(&outcome.model, &aligned)
}
