//! Phase-3 analysis on the aligned representation: a closed-form
//! least-squares/ridge classifier over one-hot targets (the reference
//! learner, invariant to the alignment's inherent nonsingular ambiguity)
//! and kNN as a contrast baseline that is not.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{lstsq, pseudoinverse, Matrix};

/// Class labels for a block of samples: an ordered class table plus one
/// class index per sample (column).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelMatrix {
    classes: Vec<String>,
    indices: Vec<usize>,
}

impl LabelMatrix {
    /// Build from per-sample label names. The class table is the sorted set
    /// of distinct names, so it does not depend on sample order.
    pub fn from_names<S: AsRef<str>>(names: &[S]) -> Result<Self> {
        if names.is_empty() {
            return Err(Error::Invalid("no labels".into()));
        }
        let mut classes: Vec<String> = names.iter().map(|s| s.as_ref().to_owned()).collect();
        classes.sort();
        classes.dedup();
        let indices = names
            .iter()
            .map(|n| classes.binary_search_by(|c| c.as_str().cmp(n.as_ref())).unwrap())
            .collect();
        Ok(Self { classes, indices })
    }

    /// Build from an explicit class table and per-sample indices.
    pub fn from_parts(classes: Vec<String>, indices: Vec<usize>) -> Result<Self> {
        if classes.is_empty() {
            return Err(Error::Invalid("empty class table".into()));
        }
        if indices.is_empty() {
            return Err(Error::Invalid("no labels".into()));
        }
        let mut seen = classes.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != classes.len() {
            return Err(Error::Invalid("duplicate class names".into()));
        }
        if let Some(bad) = indices.iter().find(|i| **i >= classes.len()) {
            return Err(Error::Invalid(format!(
                "label index {bad} out of range for {} classes",
                classes.len()
            )));
        }
        Ok(Self { classes, indices })
    }

    /// Pool label blocks from several parties: the class table becomes the
    /// sorted union, sample order follows block order.
    pub fn pool(blocks: &[LabelMatrix]) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::Invalid("no label blocks".into()));
        }
        let names: Vec<String> = blocks.iter().flat_map(|b| b.names()).collect();
        Self::from_names(&names)
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Per-sample label names.
    pub fn names(&self) -> Vec<String> {
        self.indices.iter().map(|i| self.classes[*i].clone()).collect()
    }

    /// One-hot target matrix, classes by samples.
    pub fn onehot(&self) -> Matrix {
        let l = self.classes.len();
        Matrix::from_fn(l, self.indices.len(), |i, j| {
            if self.indices[j] == i {
                1.0
            } else {
                0.0
            }
        })
        .expect("one-hot shape is valid by construction")
    }
}

/// Learner family plus hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum LearnerSpec {
    /// Closed-form `argmin ||L - W X||_F^2 + ridge ||W||_F^2`.
    LeastSquares { ridge: f64 },
    /// Majority vote over the `k` nearest training columns.
    Knn { k: usize },
}

impl LearnerSpec {
    pub fn least_squares(ridge: f64) -> Self {
        LearnerSpec::LeastSquares { ridge }
    }

    pub fn knn(k: usize) -> Self {
        LearnerSpec::Knn { k }
    }
}

impl Default for LearnerSpec {
    fn default() -> Self {
        // small ridge for numerical safety; invariance checks use 0
        LearnerSpec::LeastSquares { ridge: 1e-8 }
    }
}

/// A trained model. Immutable; prediction is pure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TrainedModel {
    LeastSquares {
        classes: Vec<String>,
        w: Matrix,
        ridge: f64,
    },
    Knn {
        classes: Vec<String>,
        k: usize,
        train: Matrix,
        labels: Vec<usize>,
    },
}

impl TrainedModel {
    pub fn classes(&self) -> &[String] {
        match self {
            TrainedModel::LeastSquares { classes, .. } => classes,
            TrainedModel::Knn { classes, .. } => classes,
        }
    }

    pub fn input_dim(&self) -> usize {
        match self {
            TrainedModel::LeastSquares { w, .. } => w.cols(),
            TrainedModel::Knn { train, .. } => train.rows(),
        }
    }
}

/// Fit a model on the aligned training block (samples as columns).
pub fn train(x_hat: &Matrix, labels: &LabelMatrix, spec: LearnerSpec) -> Result<TrainedModel> {
    if x_hat.cols() != labels.len() {
        return Err(Error::Dimension(format!(
            "{} training columns vs {} labels",
            x_hat.cols(),
            labels.len()
        )));
    }
    match spec {
        LearnerSpec::LeastSquares { ridge } => {
            if ridge < 0.0 || !ridge.is_finite() {
                return Err(Error::Invalid(format!("ridge {ridge} must be >= 0")));
            }
            let targets = labels.onehot();
            let w = if ridge == 0.0 {
                // minimal-norm least squares
                lstsq(x_hat, &targets)?
            } else {
                // W = L X^T (X X^T + ridge I)^{-1}
                let xt = x_hat.transpose();
                let mut gram = x_hat.matmul(&xt)?;
                for i in 0..gram.rows() {
                    let v = gram.get(i, i) + ridge;
                    gram.set(i, i, v);
                }
                targets.matmul(&xt)?.matmul(&pseudoinverse(&gram))?
            };
            Ok(TrainedModel::LeastSquares {
                classes: labels.classes().to_vec(),
                w,
                ridge,
            })
        }
        LearnerSpec::Knn { k } => {
            if k == 0 {
                return Err(Error::Invalid("k must be >= 1".into()));
            }
            Ok(TrainedModel::Knn {
                classes: labels.classes().to_vec(),
                k,
                train: x_hat.clone(),
                labels: labels.indices().to_vec(),
            })
        }
    }
}

/// Predict class indices for samples (columns) of `x`.
pub fn predict_indices(model: &TrainedModel, x: &Matrix) -> Result<Vec<usize>> {
    if x.rows() != model.input_dim() {
        return Err(Error::Dimension(format!(
            "model expects {} feature rows, got {}",
            model.input_dim(),
            x.rows()
        )));
    }
    match model {
        TrainedModel::LeastSquares { w, .. } => {
            let scores = w.matmul(x)?;
            Ok((0..scores.cols())
                .map(|j| {
                    let mut best = 0;
                    for i in 1..scores.rows() {
                        // strict: ties stay at the lowest class index
                        if scores.get(i, j) > scores.get(best, j) {
                            best = i;
                        }
                    }
                    best
                })
                .collect())
        }
        TrainedModel::Knn {
            k, train, labels, classes, ..
        } => {
            let k = (*k).min(train.cols());
            let mut out = Vec::with_capacity(x.cols());
            for j in 0..x.cols() {
                let probe = x.column(j);
                let mut dist: Vec<(f64, usize)> = (0..train.cols())
                    .map(|t| {
                        let d = train
                            .column(t)
                            .iter()
                            .zip(probe.iter())
                            .map(|(a, b)| (a - b) * (a - b))
                            .sum::<f64>();
                        (d, t)
                    })
                    .collect();
                dist.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
                let mut votes = vec![0usize; classes.len()];
                for (_, t) in dist.iter().take(k) {
                    votes[labels[*t]] += 1;
                }
                let mut best = 0;
                for c in 1..votes.len() {
                    if votes[c] > votes[best] {
                        best = c;
                    }
                }
                out.push(best);
            }
            Ok(out)
        }
    }
}

/// Predict class names for samples (columns) of `x`.
pub fn predict(model: &TrainedModel, x: &Matrix) -> Result<Vec<String>> {
    let classes = model.classes();
    Ok(predict_indices(model, x)?
        .into_iter()
        .map(|i| classes[i].clone())
        .collect())
}

/// Fraction of positions where the two label sequences agree.
pub fn accuracy<S: AsRef<str>, T: AsRef<str>>(predicted: &[S], truth: &[T]) -> Result<f64> {
    if predicted.is_empty() || predicted.len() != truth.len() {
        return Err(Error::Invalid(format!(
            "label sequences must be equally sized and non-empty: {} vs {}",
            predicted.len(),
            truth.len()
        )));
    }
    let hits = predicted
        .iter()
        .zip(truth.iter())
        .filter(|(p, t)| p.as_ref() == t.as_ref())
        .count();
    Ok(hits as f64 / predicted.len() as f64)
}
