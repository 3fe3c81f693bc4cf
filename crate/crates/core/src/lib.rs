//! Data collaboration analysis: parties reduce private datasets with private
//! maps, share only the reduced representations plus a common anchor image,
//! and a coordinator aligns everything into one joint representation for
//! supervised learning.
//!
//! Module map:
//! - [`matrix`] — dense matrices, truncated SVD, pseudoinverse, least squares
//! - [`mapper`] — per-party dimensionality-reduction maps (PCA, random projection)
//! - [`collaboration`] — anchor generation and the SVD-based alignment
//! - [`learner`] — closed-form ridge classifier and kNN, accuracy metrics
//! - [`dataset`] — one party's training/test split
//! - [`pipeline`] — the shared collaborate-then-train composition

pub mod collaboration;
pub mod dataset;
pub mod error;
pub mod learner;
pub mod mapper;
pub mod matrix;
pub mod pipeline;

pub use error::{Error, Result};
pub use matrix::{Matrix, SvdResult};
