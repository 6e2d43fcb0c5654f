//! Seeded generators for test and demonstration matrices.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{Matrix, Subspace, SvdFactorization};

/// Entries uniform in `[-1, 1]`.
pub fn uniform_matrix<R: Rng + ?Sized>(rng: &mut R, m: usize) -> Matrix {
    let a = DMatrix::from_fn(m, m, |_, _| rng.random_range(-1.0..=1.0));
    Matrix::new(a).expect("finite square sample")
}

/// Haar-distributed orthogonal matrix (QR of a Gaussian matrix with the
/// signs of `R`'s diagonal absorbed into `Q`).
pub fn random_orthogonal<R: Rng + ?Sized>(rng: &mut R, m: usize) -> DMatrix<f64> {
    let g = DMatrix::from_fn(m, m, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..m {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Singular values with every consecutive gap at least 5% of `sigma_1`
/// and `sigma_m >= 0.05 sigma_1`, scaled so that `sigma_1` lies in `[0.5, 5]`.
pub fn gapped_spectrum<R: Rng + ?Sized>(rng: &mut R, m: usize) -> Vec<f64> {
    let mut sigma = vec![0.0; m];
    let mut acc = rng.random_range(0.3..1.0);
    for s in sigma.iter_mut().rev() {
        *s = acc;
        acc += rng.random_range(0.3..1.0);
    }
    let top = sigma.first().copied().unwrap_or(1.0);
    let scale = rng.random_range(0.5..5.0) / top;
    sigma.iter_mut().for_each(|s| *s *= scale);
    sigma
}

/// `Q_1 diag(sigma) Q_2^T` with a [`gapped_spectrum`].
pub fn gapped_matrix<R: Rng + ?Sized>(rng: &mut R, m: usize) -> Matrix {
    let sigma = gapped_spectrum(rng, m);
    with_spectrum(rng, &sigma)
}

pub fn with_spectrum<R: Rng + ?Sized>(rng: &mut R, sigma: &[f64]) -> Matrix {
    let m = sigma.len();
    let q1 = random_orthogonal(rng, m);
    let q2 = random_orthogonal(rng, m);
    let s = DMatrix::from_diagonal(&DVector::from_column_slice(sigma));
    Matrix::new(q1 * s * q2.transpose()).expect("finite square sample")
}

/// Symmetric positive definite `Q diag(sigma) Q^T` with a gapped spectrum.
pub fn gapped_symmetric_psd<R: Rng + ?Sized>(rng: &mut R, m: usize) -> Matrix {
    let sigma = gapped_spectrum(rng, m);
    let q = random_orthogonal(rng, m);
    let s = DMatrix::from_diagonal(&DVector::from_column_slice(&sigma));
    let a = &q * s * q.transpose();
    Matrix::new((&a + a.transpose()) * 0.5).expect("finite square sample")
}

/// Strictly totally positive matrix built as `L D U`, where `L` (`U`) is a
/// product of `m - 1` unit lower (upper) bidiagonal factors with positive
/// off-diagonals in `[0.12, 0.35]` and `D` has entries in `[1, 2]`.
///
/// Small off-diagonals keep every contiguous minor above `1e-8` times its
/// Hadamard bound for `m <= 8`, so positivity survives rounding.
pub fn random_stp<R: Rng + ?Sized>(rng: &mut R, m: usize) -> Matrix {
    let (lo, hi) = (0.12, 0.35);
    let mut lower = DMatrix::<f64>::identity(m, m);
    let mut upper = DMatrix::<f64>::identity(m, m);
    for _ in 1..m {
        let mut l = DMatrix::<f64>::identity(m, m);
        let mut u = DMatrix::<f64>::identity(m, m);
        for i in 1..m {
            l[(i, i - 1)] = rng.random_range(lo..=hi);
            u[(i - 1, i)] = rng.random_range(lo..=hi);
        }
        lower *= l;
        upper *= u;
    }
    let d = DMatrix::from_diagonal(&DVector::from_fn(m, |_, _| rng.random_range(1.0..=2.0)));
    Matrix::new(lower * d * upper).expect("finite square sample")
}

/// Vandermonde matrix `[x_i^j]`.
pub fn vandermonde(nodes: &[f64]) -> Matrix {
    let m = nodes.len();
    let a = DMatrix::from_fn(m, m, |i, j| nodes[i].powi(j as i32));
    Matrix::new(a).expect("finite nodes")
}

/// Candidate `n`-dimensional space orthogonal to `u_{n+1}`: the leading
/// coordinates `[I_n; 0]` perturbed by `spread` times a Gaussian matrix,
/// with row `n+1` cleared and the columns orthonormalized.
pub fn candidate_subspace<R: Rng + ?Sized>(
    rng: &mut R,
    svd: &SvdFactorization,
    n: usize,
    spread: f64,
) -> Subspace {
    let m = svd.dim();
    let mut w = DMatrix::from_fn(m, n, |i, j| {
        let base = if i == j { 1.0 } else { 0.0 };
        base + spread * rng.sample::<f64, _>(StandardNormal)
    });
    if n < m {
        w.row_mut(n).fill(0.0);
    }
    let q = w.qr().q();
    let basis = svd.u() * q.columns(0, n);
    let tol = crate::tolerance::TolerancePolicy::default();
    crate::linalg::orthonormalize_columns(&basis, &tol)
        .expect("matching dimensions")
        .subspace
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::compute_svd;
    use crate::tolerance::TolerancePolicy;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn orthogonal_is_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let q = random_orthogonal(&mut rng, 7);
        assert!((q.tr_mul(&q) - DMatrix::<f64>::identity(7, 7)).amax() < 1e-13);
    }

    #[test]
    fn gapped_matrix_has_requested_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let t = TolerancePolicy::default();
        for m in 2..=10 {
            let sigma = gapped_spectrum(&mut rng, m);
            assert!(sigma.windows(2).all(|w| w[0] - w[1] >= 0.02 * sigma[0]));
            let a = with_spectrum(&mut rng, &sigma);
            let svd = compute_svd(&a, &t).unwrap();
            for (s, e) in svd.sigma().iter().zip(&sigma) {
                assert!((s - e).abs() < 1e-12 * sigma[0]);
            }
        }
    }

    #[test]
    fn candidate_is_orthogonal_to_pivot() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let t = TolerancePolicy::default();
        let a = gapped_matrix(&mut rng, 6);
        let svd = compute_svd(&a, &t).unwrap();
        let x = candidate_subspace(&mut rng, &svd, 2, 0.4);
        assert_eq!(x.dim(), 2);
        assert!(x.basis().tr_mul(&svd.u_col(2)).amax() < 1e-14);
    }
}
