//! Per-party map functions: the private dimensionality reductions each
//! institution fits on its own data and applies to local, anchor, and test
//! samples. A mapper never leaves the party that fitted it.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{effective_rank, svd_truncated, Matrix};

/// Which family the map was fitted from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MapperKind {
    Pca,
    RandomProjection,
    LinearExplicit,
}

/// A fitted column-wise map `x -> P (x - mu)`.
///
/// Applying a mapper to a matrix equals applying it to each column
/// independently, bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mapper {
    kind: MapperKind,
    input_dim: usize,
    output_dim: usize,
    projection: Matrix,
    mean: Vec<f64>,
    seed: u64,
}

impl Mapper {
    pub fn kind(&self) -> MapperKind {
        self.kind
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    pub fn projection(&self) -> &Matrix {
        &self.projection
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Wrap an explicit projection and offset. Used for rigs where the map
    /// must be a known linear function (e.g. invertible maps in alignment
    /// checks); kept out of the configuration surface.
    pub fn linear_explicit(projection: Matrix, mean: Vec<f64>) -> Result<Self> {
        if mean.len() != projection.cols() {
            return Err(Error::Dimension(format!(
                "mean length {} does not match projection input dim {}",
                mean.len(),
                projection.cols()
            )));
        }
        if mean.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("mean must be finite".into()));
        }
        Ok(Self {
            kind: MapperKind::LinearExplicit,
            input_dim: projection.cols(),
            output_dim: projection.rows(),
            projection,
            mean,
            seed: 0,
        })
    }
}

/// Fit a PCA mapper: `mu` is the column mean of `x`, the projection rows are
/// the `out_dim` dominant principal directions of the centered data.
pub fn fit_pca(x: &Matrix, out_dim: usize) -> Result<Mapper> {
    let m = x.rows();
    let n = x.cols();
    if n < 2 {
        return Err(Error::Invalid("pca needs at least 2 samples".into()));
    }
    if out_dim == 0 || out_dim > m.min(n) {
        return Err(Error::Dimension(format!(
            "pca output dim {out_dim} out of range 1..={} for {m}x{n} data",
            m.min(n)
        )));
    }
    let mean = x.column_mean();
    let centered = x.center_columns(&mean)?;

    // rank check on the full spectrum so zero-variance data fails loudly
    let probe = svd_truncated(&centered, m.min(n))?;
    let rank = effective_rank(&probe.sigma, m, n);
    if rank < out_dim {
        return Err(Error::RankDeficient {
            required: out_dim,
            rank,
            singular_values: probe.sigma,
        });
    }

    let u = probe.u;
    let projection = Matrix::from_fn(out_dim, m, |i, j| u.get(j, i))?;
    Ok(Mapper {
        kind: MapperKind::Pca,
        input_dim: m,
        output_dim: out_dim,
        projection,
        mean,
        seed: 0,
    })
}

/// Fit a seeded random projection: i.i.d. standard normal rows, then
/// orthonormalized. No centering.
pub fn fit_random_projection(input_dim: usize, out_dim: usize, seed: u64) -> Result<Mapper> {
    if input_dim == 0 || out_dim == 0 || out_dim > input_dim {
        return Err(Error::Dimension(format!(
            "random projection dims {out_dim} -> {input_dim} invalid"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows: Vec<Vec<f64>> = (0..out_dim)
        .map(|_| (0..input_dim).map(|_| rng.sample(StandardNormal)).collect())
        .collect();

    // modified Gram-Schmidt on the rows
    for i in 0..out_dim {
        for j in 0..i {
            let proj: f64 = rows[i].iter().zip(rows[j].iter()).map(|(a, b)| a * b).sum();
            for k in 0..input_dim {
                rows[i][k] -= proj * rows[j][k];
            }
        }
        let norm: f64 = rows[i].iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm < 1e-12 {
            return Err(Error::RankDeficient {
                required: out_dim,
                rank: i,
                singular_values: vec![],
            });
        }
        for v in rows[i].iter_mut() {
            *v /= norm;
        }
    }

    Ok(Mapper {
        kind: MapperKind::RandomProjection,
        input_dim,
        output_dim: out_dim,
        projection: Matrix::from_rows(&rows)?,
        mean: vec![0.0; input_dim],
        seed,
    })
}

/// Apply a fitted mapper to a matrix of samples: `P (x - mu 1^T)`.
pub fn apply(mapper: &Mapper, x: &Matrix) -> Result<Matrix> {
    if x.rows() != mapper.input_dim {
        return Err(Error::Dimension(format!(
            "mapper expects {} input rows, got {}",
            mapper.input_dim,
            x.rows()
        )));
    }
    mapper.projection.matmul(&x.center_columns(&mapper.mean)?)
}
