//! Anchor-based alignment: every party maps a shared anchor matrix with its
//! private function, the coordinator stacks the mapped anchors, takes the
//! dominant left singular subspace as the common target, and solves one
//! least-squares problem per party to map its representation onto it.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{effective_rank, pseudoinverse, svd_truncated, Matrix};

/// How the anchor matrix is produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnchorGeneration {
    /// i.i.d. standard normal dummy data.
    StandardNormal,
    /// i.i.d. uniform per feature, bounds `(lo, hi)` per row.
    UniformInBox { bounds: Vec<(f64, f64)> },
    /// Caller-provided matrix (e.g. public data), passed through unchanged.
    UserSupplied { matrix: Matrix },
}

/// The shared anchor dataset: `r` samples every party maps with its own
/// function. All parties must hold bitwise-identical copies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnchorSet {
    pub x_anc: Matrix,
    pub seed: u64,
    pub generation: AnchorGeneration,
}

/// Per-party alignment maps plus diagnostics of the stacked-anchor solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollaborationTransform {
    /// `g[i]` maps party `i`'s representation (`ell_i` rows) to `ell` rows.
    pub g: Vec<Matrix>,
    /// Shared target dimension.
    pub ell: usize,
    /// Full singular value sequence of the stacked anchor matrix.
    pub sigma: Vec<f64>,
    /// Max over party pairs of the mean column-wise distance between aligned
    /// anchor images, normalized by the mean aligned anchor norm.
    pub alignment_residual: f64,
}

/// Generate the anchor matrix: `m` features by `r` samples, deterministic for
/// a fixed seed.
pub fn generate_anchor(
    m: usize,
    r: usize,
    seed: u64,
    generation: AnchorGeneration,
) -> Result<AnchorSet> {
    if m == 0 || r == 0 {
        return Err(Error::Dimension(format!(
            "anchor shape {m}x{r} must be non-empty"
        )));
    }
    let x_anc = match &generation {
        AnchorGeneration::StandardNormal => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut cols = Vec::with_capacity(r);
            for _ in 0..r {
                cols.push((0..m).map(|_| rng.sample(StandardNormal)).collect());
            }
            Matrix::from_columns(&cols)?
        }
        AnchorGeneration::UniformInBox { bounds } => {
            if bounds.len() != m {
                return Err(Error::Dimension(format!(
                    "need {m} per-feature bounds, got {}",
                    bounds.len()
                )));
            }
            for (lo, hi) in bounds {
                if !lo.is_finite() || !hi.is_finite() || lo >= hi {
                    return Err(Error::Invalid(format!("bad bound ({lo}, {hi})")));
                }
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut cols = Vec::with_capacity(r);
            for _ in 0..r {
                cols.push(
                    bounds
                        .iter()
                        .map(|(lo, hi)| rng.gen_range(*lo..*hi))
                        .collect(),
                );
            }
            Matrix::from_columns(&cols)?
        }
        AnchorGeneration::UserSupplied { matrix } => {
            if matrix.rows() != m || matrix.cols() != r {
                return Err(Error::Dimension(format!(
                    "user anchor is {}x{}, expected {m}x{r}",
                    matrix.rows(),
                    matrix.cols()
                )));
            }
            matrix.clone()
        }
    };
    Ok(AnchorSet {
        x_anc,
        seed,
        generation,
    })
}

fn check_anchor_family(anchors_tilde: &[Matrix]) -> Result<usize> {
    if anchors_tilde.is_empty() {
        return Err(Error::Invalid("need at least one party".into()));
    }
    let r = anchors_tilde[0].cols();
    for (i, a) in anchors_tilde.iter().enumerate() {
        if a.cols() != r {
            return Err(Error::Dimension(format!(
                "party {i} mapped anchor has {} columns, expected {r}",
                a.cols()
            )));
        }
        if a.rows() > r {
            return Err(Error::Dimension(format!(
                "party {i} representation dim {} exceeds anchor count {r}",
                a.rows()
            )));
        }
    }
    Ok(r)
}

/// Solve for the common target: stack the transposed mapped anchors
/// side by side into an `r x (sum ell_i)` matrix, take its `ell` dominant
/// left singular vectors `U1`, and return `Z = U1^T` together with the full
/// singular value sequence.
pub fn compute_target(anchors_tilde: &[Matrix], ell: usize) -> Result<(Matrix, Vec<f64>)> {
    let r = check_anchor_family(anchors_tilde)?;
    let total: usize = anchors_tilde.iter().map(|a| a.rows()).sum();
    if ell == 0 || ell > r.min(total) {
        return Err(Error::Dimension(format!(
            "target dim {ell} out of range 1..={}",
            r.min(total)
        )));
    }

    let blocks: Vec<Matrix> = anchors_tilde.iter().map(|a| a.transpose()).collect();
    let stacked = Matrix::hstack(&blocks)?;
    let full = svd_truncated(&stacked, r.min(total))?;

    let rank = effective_rank(&full.sigma, stacked.rows(), stacked.cols());
    if rank < ell {
        return Err(Error::RankDeficient {
            required: ell,
            rank,
            singular_values: full.sigma,
        });
    }

    let z = Matrix::from_fn(ell, r, |i, j| full.u.get(j, i))?;
    Ok((z, full.sigma))
}

/// Per-party alignment map: the least-squares minimizer of
/// `|| Z - G * anchor_tilde ||_F`, i.e. `Z * pinv(anchor_tilde)`.
pub fn compute_g(z: &Matrix, anchor_tilde: &Matrix) -> Result<Matrix> {
    if z.cols() != anchor_tilde.cols() {
        return Err(Error::Dimension(format!(
            "target has {} anchor columns, party has {}",
            z.cols(),
            anchor_tilde.cols()
        )));
    }
    z.matmul(&pseudoinverse(anchor_tilde))
}

/// Run the full alignment: target, per-party maps, aligned training block
/// `x_hat = [G_1 X~_1 | ... | G_d X~_d]`, and diagnostics.
pub fn build_collaboration(
    anchors_tilde: &[Matrix],
    trains_tilde: &[Matrix],
    ell: usize,
) -> Result<(CollaborationTransform, Matrix)> {
    if anchors_tilde.len() != trains_tilde.len() {
        return Err(Error::Dimension(format!(
            "{} anchor blocks vs {} training blocks",
            anchors_tilde.len(),
            trains_tilde.len()
        )));
    }
    for (i, (a, t)) in anchors_tilde.iter().zip(trains_tilde.iter()).enumerate() {
        if a.rows() != t.rows() {
            return Err(Error::Dimension(format!(
                "party {i}: anchor rep has {} rows, training rep has {}",
                a.rows(),
                t.rows()
            )));
        }
    }

    let (z, sigma) = compute_target(anchors_tilde, ell)?;
    let g: Vec<Matrix> = anchors_tilde
        .iter()
        .map(|a| compute_g(&z, a))
        .collect::<Result<_>>()?;

    let aligned_anchors: Vec<Matrix> = g
        .iter()
        .zip(anchors_tilde.iter())
        .map(|(gi, a)| gi.matmul(a))
        .collect::<Result<_>>()?;
    let alignment_residual = alignment_residual(&aligned_anchors);

    let aligned_trains: Vec<Matrix> = g
        .iter()
        .zip(trains_tilde.iter())
        .map(|(gi, t)| gi.matmul(t))
        .collect::<Result<_>>()?;
    let x_hat = Matrix::hstack(&aligned_trains)?;

    Ok((
        CollaborationTransform {
            g,
            ell,
            sigma,
            alignment_residual,
        },
        x_hat,
    ))
}

/// Scale-free disagreement between parties' aligned anchor images: max over
/// ordered pairs (i, j) of mean column distance, divided by party i's mean
/// column norm. Zero for a single party.
fn alignment_residual(aligned_anchors: &[Matrix]) -> f64 {
    let d = aligned_anchors.len();
    let r = aligned_anchors[0].cols();
    let mean_norm: Vec<f64> = aligned_anchors
        .iter()
        .map(|a| {
            (0..r)
                .map(|k| a.column(k).iter().map(|v| v * v).sum::<f64>().sqrt())
                .sum::<f64>()
                / r as f64
        })
        .collect();

    let mut worst = 0.0f64;
    for i in 0..d {
        for j in 0..d {
            if i == j {
                continue;
            }
            let mut mean_dist = 0.0;
            for k in 0..r {
                let ci = aligned_anchors[i].column(k);
                let cj = aligned_anchors[j].column(k);
                mean_dist += ci
                    .iter()
                    .zip(cj.iter())
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
            }
            mean_dist /= r as f64;
            // degenerate all-zero anchor images fall back to the absolute distance
            let ratio = if mean_norm[i] > 0.0 {
                mean_dist / mean_norm[i]
            } else {
                mean_dist
            };
            worst = worst.max(ratio);
        }
    }
    worst
}

/// Map one party's test representation into the collaboration space.
pub fn transform_test(
    transform: &CollaborationTransform,
    party: usize,
    y_tilde: &Matrix,
) -> Result<Matrix> {
    let g = transform
        .g
        .get(party)
        .ok_or_else(|| Error::Invalid(format!("no party {party}")))?;
    if y_tilde.rows() != g.cols() {
        return Err(Error::Dimension(format!(
            "party {party} representation has {} rows, transform expects {}",
            y_tilde.rows(),
            g.cols()
        )));
    }
    g.matmul(y_tilde)
}
