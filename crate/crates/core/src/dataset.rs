//! One institution's private data: training samples, labels, and test split.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// A party's local dataset. Samples are columns; `labels[j]` names the class
/// of training column `j`, `test_labels[j]` the class of test column `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartyDataset {
    pub train: Matrix,
    pub labels: Vec<String>,
    pub test: Matrix,
    pub test_labels: Vec<String>,
}

impl PartyDataset {
    pub fn new(
        train: Matrix,
        labels: Vec<String>,
        test: Matrix,
        test_labels: Vec<String>,
    ) -> Result<Self> {
        if train.cols() != labels.len() {
            return Err(Error::Dimension(format!(
                "{} training columns vs {} labels",
                train.cols(),
                labels.len()
            )));
        }
        if test.cols() != test_labels.len() {
            return Err(Error::Dimension(format!(
                "{} test columns vs {} test labels",
                test.cols(),
                test_labels.len()
            )));
        }
        if train.rows() != test.rows() {
            return Err(Error::Dimension(format!(
                "train has {} features, test has {}",
                train.rows(),
                test.rows()
            )));
        }
        Ok(Self {
            train,
            labels,
            test,
            test_labels,
        })
    }

    pub fn features(&self) -> usize {
        self.train.rows()
    }

    pub fn train_count(&self) -> usize {
        self.train.cols()
    }

    pub fn test_count(&self) -> usize {
        self.test.cols()
    }
}
