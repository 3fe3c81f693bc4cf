//! Property tests for the numerical invariants: Penrose conditions,
//! orthonormality and ordering of the SVD output, pseudoinverse algebra,
//! column-wise mapper behavior, and PCA variance optimality.

use proptest::prelude::*;

use dcollab_core::mapper::{apply, fit_pca, fit_random_projection};
use dcollab_core::matrix::{pseudoinverse, svd_truncated, Matrix};

fn entry() -> impl Strategy<Value = f64> {
    (-1000i32..=1000i32).prop_map(|x| f64::from(x) / 64.0)
}

fn matrix(max_dim: usize) -> impl Strategy<Value = Matrix> {
    (1..=max_dim, 1..=max_dim).prop_flat_map(|(m, n)| {
        proptest::collection::vec(entry(), m * n)
            .prop_map(move |data| Matrix::from_vec(m, n, data).unwrap())
    })
}

/// Rank-deficient by construction: a product of thin factors.
fn low_rank_matrix(max_dim: usize) -> impl Strategy<Value = Matrix> {
    (2..=max_dim, 2..=max_dim, 1..=2usize).prop_flat_map(|(m, n, k)| {
        let k = k.min(m).min(n);
        (
            proptest::collection::vec(entry(), m * k),
            proptest::collection::vec(entry(), k * n),
        )
            .prop_map(move |(left, right)| {
                let l = Matrix::from_vec(m, k, left).unwrap();
                let r = Matrix::from_vec(k, n, right).unwrap();
                l.matmul(&r).unwrap()
            })
    })
}

fn penrose_residuals(a: &Matrix, p: &Matrix) -> [f64; 4] {
    let apa = a.matmul(p).unwrap().matmul(a).unwrap();
    let pap = p.matmul(a).unwrap().matmul(p).unwrap();
    let ap = a.matmul(p).unwrap();
    let pa = p.matmul(a).unwrap();
    let scale_a = a.frobenius_norm().max(1e-30);
    let scale_p = p.frobenius_norm().max(1e-30);
    [
        apa.sub(a).unwrap().frobenius_norm() / scale_a,
        pap.sub(p).unwrap().frobenius_norm() / scale_p,
        ap.sub(&ap.transpose()).unwrap().frobenius_norm() / 1f64.max(ap.frobenius_norm()),
        pa.sub(&pa.transpose()).unwrap().frobenius_norm() / 1f64.max(pa.frobenius_norm()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn penrose_conditions_hold(a in matrix(8)) {
        let p = pseudoinverse(&a);
        for (i, r) in penrose_residuals(&a, &p).iter().enumerate() {
            prop_assert!(*r <= 1e-10, "condition {} residual {r}", i + 1);
        }
    }

    #[test]
    fn penrose_conditions_hold_for_low_rank(a in low_rank_matrix(8)) {
        let p = pseudoinverse(&a);
        for (i, r) in penrose_residuals(&a, &p).iter().enumerate() {
            prop_assert!(*r <= 1e-10, "condition {} residual {r}", i + 1);
        }
    }

    #[test]
    fn svd_output_is_orthonormal_sorted_and_deterministic(a in matrix(8)) {
        let k = a.rows().min(a.cols());
        let svd = svd_truncated(&a, k).unwrap();

        let gram = svd.u.transpose().matmul(&svd.u).unwrap();
        let eye = Matrix::identity(k).unwrap();
        prop_assert!(gram.sub(&eye).unwrap().frobenius_norm() <= 1e-10);

        for w in svd.sigma.windows(2) {
            prop_assert!(w[0] >= w[1]);
        }
        for s in &svd.sigma {
            prop_assert!(*s >= 0.0);
        }

        let again = svd_truncated(&a, k).unwrap();
        prop_assert!(svd.u.bits_eq(&again.u));
        prop_assert!(svd.vt.bits_eq(&again.vt));
        prop_assert!(svd
            .sigma
            .iter()
            .zip(again.sigma.iter())
            .all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn svd_reconstructs_at_full_truncation(a in matrix(8)) {
        let k = a.rows().min(a.cols());
        let svd = svd_truncated(&a, k).unwrap();
        let sig = Matrix::from_fn(k, k, |i, j| if i == j { svd.sigma[i] } else { 0.0 }).unwrap();
        let rec = svd.u.matmul(&sig).unwrap().matmul(&svd.vt).unwrap();
        let err = rec.sub(&a).unwrap().frobenius_norm();
        prop_assert!(err <= 1e-8 * a.frobenius_norm().max(1.0));
    }

    #[test]
    fn mapper_apply_splits_over_columns(
        seed in 0u64..1000,
        split in 1usize..6,
        cols in 7usize..12,
    ) {
        let f = fit_random_projection(5, 3, seed).unwrap();
        let x = {
            let mut v = 0xC0FFEEu64 ^ seed;
            Matrix::from_fn(5, cols, |_, _| {
                v = v.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((v >> 33) as f64) / (1u64 << 31) as f64 - 1.0
            })
            .unwrap()
        };
        let full = apply(&f, &x).unwrap();
        let left = Matrix::from_columns(&(0..split).map(|j| x.column(j)).collect::<Vec<_>>()).unwrap();
        let right = Matrix::from_columns(&(split..cols).map(|j| x.column(j)).collect::<Vec<_>>()).unwrap();
        let glued = Matrix::hstack(&[apply(&f, &left).unwrap(), apply(&f, &right).unwrap()]).unwrap();
        prop_assert!(full.bits_eq(&glued));
    }
}

/// Full-row-rank A and invertible square C: pinv(C A) = pinv(A) inv(C).
#[test]
fn pseudoinverse_composes_with_invertible_left_factor() {
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = Matrix::from_fn(3, 9, |_, _| rng.sample(StandardNormal)).unwrap();
        let c = Matrix::from_fn(3, 3, |i, j| {
            let noise: f64 = rng.sample(StandardNormal);
            (if i == j { 1.0 } else { 0.0 }) + 0.3 * noise
        })
        .unwrap();

        let left = pseudoinverse(&c.matmul(&a).unwrap());
        let right = a_pinv_times_c_inverse(&a, &c);
        let err = left.sub(&right).unwrap().frobenius_norm();
        assert!(
            err <= 1e-8 * right.frobenius_norm().max(1.0),
            "seed {seed}: composition error {err}"
        );
    }
}

fn a_pinv_times_c_inverse(a: &Matrix, c: &Matrix) -> Matrix {
    // inverse of c via Gauss-Jordan, independent of the pinv under test
    let n = c.rows();
    let mut aug: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row: Vec<f64> = (0..n).map(|j| c.get(i, j)).collect();
            row.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            row
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&p, &q| aug[p][col].abs().partial_cmp(&aug[q][col].abs()).unwrap())
            .unwrap();
        aug.swap(col, pivot);
        let d = aug[col][col];
        for v in aug[col].iter_mut() {
            *v /= d;
        }
        for row in 0..n {
            if row != col {
                let f = aug[row][col];
                for j in 0..2 * n {
                    aug[row][j] -= f * aug[col][j];
                }
            }
        }
    }
    let c_inv =
        Matrix::from_rows(&aug.iter().map(|r| r[n..].to_vec()).collect::<Vec<_>>()).unwrap();
    pseudoinverse(a).matmul(&c_inv).unwrap()
}

/// PCA captures at least as much variance as 1000 random projections of the
/// same rank, at small scale.
#[test]
fn pca_variance_beats_random_probes() {
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    for (m, n, out_dim, seed) in [(3usize, 12usize, 1usize, 1u64), (4, 20, 2, 2), (4, 15, 3, 3)] {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = Matrix::from_fn(m, n, |_, _| rng.sample(StandardNormal)).unwrap();
        let f = fit_pca(&x, out_dim).unwrap();
        let captured = apply(&f, &x).unwrap().frobenius_norm();

        let mean = x.column_mean();
        let centered = x.center_columns(&mean).unwrap();
        let mut probe_rng = ChaCha8Rng::seed_from_u64(seed ^ 0xABCD);
        for probe in 0..1000 {
            let raw = Matrix::from_fn(m, out_dim, |_, _| probe_rng.sample(StandardNormal)).unwrap();
            let q = svd_truncated(&raw, out_dim).unwrap().u; // orthonormal columns
            let projected = q.transpose().matmul(&centered).unwrap().frobenius_norm();
            assert!(
                captured >= projected - 1e-9,
                "probe {probe} captured more variance: {projected} > {captured}"
            );
        }
    }
}
