//! Distance from a subspace to the ellipsoid `{A x : |x| <= 1}`, the
//! n-width, and certificates of optimality for a candidate subspace.
//!
//! With `W = U^T X` the coordinates of an orthonormal basis `X` in the left
//! singular basis, everything is expressed through
//!
//! ```text
//! C = sigma_{n+1}^2 I - S^2 + S W W^T S,      S = diag(sigma)
//! ```
//!
//! A subspace is optimal iff it is orthogonal to `u_{n+1}` and the principal
//! submatrix of `C` that skips row/column `n+1` is positive semidefinite.
//! The signed-minor and complement tests are equivalent reformulations;
//! Karlovitz's test and the leading-minor test are sufficient only.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    self, lambda_max_sym, lambda_min_sym, orthogonal_complement, orthonormalize, require_gap,
    sigma_max_of, sigma_min_of, Matrix, Subspace, SvdFactorization,
};
use crate::tolerance::TolerancePolicy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    DirectDistance,
    Psd,
    SignedMinors,
    Complement,
    KarlovitzSufficient,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::DirectDistance => "direct-distance",
            Method::Psd => "psd",
            Method::SignedMinors => "signed-minors",
            Method::Complement => "complement",
            Method::KarlovitzSufficient => "karlovitz-sufficient",
        }
    }
}

/// One evaluated index set of the signed-minor test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinorEvidence {
    /// 1-based indices.
    pub index_set: Vec<usize>,
    /// Number of indices that fall in `1..=n`.
    pub s: usize,
    pub det: f64,
    /// `(-1)^s`.
    pub required_sign: i8,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimalityVerdict {
    pub optimal: bool,
    pub necessary_holds: bool,
    pub method: Method,
    /// `E(A, X)`.
    pub distance: f64,
    /// `d_n = sigma_{n+1}`.
    pub width: f64,
    /// Some test statistic sits within tolerance of its threshold.
    pub boundary: bool,
    /// Normalized margin of the deciding test; negative means it failed.
    pub statistic: f64,
    pub evidence: Vec<MinorEvidence>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MinorOptions {
    /// Largest `m` for which the `2^(m-1)` enumeration is attempted.
    pub max_dim: usize,
    /// Record every index set and disable early exit.
    pub verbose: bool,
}

impl Default for MinorOptions {
    fn default() -> Self {
        Self {
            max_dim: 22,
            verbose: false,
        }
    }
}

fn check_dims(svd: &SvdFactorization, x: &Subspace) -> Result<()> {
    if x.ambient_dim() != svd.dim() {
        return Err(Error::DimensionMismatch(format!(
            "subspace of R^{} for a {}x{} matrix",
            x.ambient_dim(),
            svd.dim(),
            svd.dim()
        )));
    }
    Ok(())
}

/// `E(A, X)` from a precomputed SVD.
///
/// Evaluated as `sigma_max((I - W W^T) S)`, the square root of the largest
/// eigenvalue of `S^2 - S W W^T S` without squaring small values.
pub fn distance_svd(svd: &SvdFactorization, x: &Subspace) -> Result<f64> {
    check_dims(svd, x)?;
    let m = svd.dim();
    let w = svd.u().tr_mul(x.basis());
    let q = DMatrix::<f64>::identity(m, m) - &w * w.transpose();
    let s = DMatrix::from_diagonal(&DVector::from_column_slice(svd.sigma()));
    Ok(sigma_max_of(&(q * s)))
}

/// Worst-case distance from the ellipsoid `{A x : |x| <= 1}` to `x`.
pub fn distance(a: &Matrix, x: &Subspace, tol: &TolerancePolicy) -> Result<f64> {
    let svd = linalg::compute_svd(a, tol)?;
    distance_svd(&svd, x)
}

/// `d_n = sigma_{n+1}`, and `0` for `n = m`.
pub fn n_width_svd(svd: &SvdFactorization, n: usize) -> Result<f64> {
    if n > svd.dim() {
        return Err(Error::IndexOutOfRange {
            index: n,
            range: format!("0..={}", svd.dim()),
        });
    }
    Ok(svd.sigma_or_zero(n))
}

pub fn n_width(a: &Matrix, n: usize, tol: &TolerancePolicy) -> Result<f64> {
    n_width_svd(&linalg::compute_svd(a, tol)?, n)
}

/// `max_j |u_{n+1}^T x_j|`.
fn necessary_residual(svd: &SvdFactorization, x: &Subspace) -> f64 {
    let n = x.dim();
    if n == 0 || n >= svd.dim() {
        return 0.0;
    }
    x.basis().tr_mul(&svd.u_col(n)).amax()
}

/// Necessary condition `X perp u_{n+1}`, `n = dim X`.
pub fn check_necessary(svd: &SvdFactorization, x: &Subspace, tol: &TolerancePolicy) -> Result<bool> {
    check_dims(svd, x)?;
    require_gap(svd, x.dim(), tol)?;
    Ok(necessary_residual(svd, x) <= tol.tol_orth)
}

fn karlovitz_margin(svd: &SvdFactorization, x: &Subspace, tol: &TolerancePolicy) -> Result<f64> {
    check_dims(svd, x)?;
    let n = x.dim();
    let m = svd.dim();
    let r = svd.rank(tol);
    if n >= (m.saturating_sub(1)).min(r) {
        return Err(Error::InvalidArgument(format!(
            "Karlovitz test needs n < min(m-1, rank) = {}, got n = {n}",
            (m.saturating_sub(1)).min(r)
        )));
    }
    require_gap(svd, n, tol)?;
    let lhs: f64 = (0..n)
        .map(|i| {
            let u = svd.u_col(i);
            (&u - x.project(&u)).norm_squared() * svd.sigma()[i].powi(2)
        })
        .sum();
    let rhs = svd.sigma_or_zero(n).powi(2) - svd.sigma_or_zero(n + 1).powi(2);
    Ok((rhs - lhs) / svd.sigma_max().powi(2))
}

/// Karlovitz's sufficient condition. `true` certifies optimality; `false`
/// is inconclusive.
pub fn check_karlovitz_sufficient(
    svd: &SvdFactorization,
    x: &Subspace,
    tol: &TolerancePolicy,
) -> Result<bool> {
    let margin = karlovitz_margin(svd, x, tol)?;
    Ok(necessary_residual(svd, x) <= tol.tol_orth && margin >= -tol.tol_det)
}

pub fn karlovitz_verdict(
    svd: &SvdFactorization,
    x: &Subspace,
    tol: &TolerancePolicy,
) -> Result<OptimalityVerdict> {
    let margin = karlovitz_margin(svd, x, tol)?;
    let necessary = necessary_residual(svd, x) <= tol.tol_orth;
    Ok(OptimalityVerdict {
        optimal: necessary && margin >= -tol.tol_det,
        necessary_holds: necessary,
        method: Method::KarlovitzSufficient,
        distance: distance_svd(svd, x)?,
        width: svd.sigma_or_zero(x.dim()),
        boundary: margin.abs() <= tol.tol_det,
        statistic: margin,
        evidence: Vec::new(),
    })
}

/// The criterion matrix `C_{n+1}` together with `W = U^T X`.
#[derive(Debug, Clone, PartialEq)]
pub struct CriterionMatrix {
    pub c: DMatrix<f64>,
    pub n: usize,
    pub w: DMatrix<f64>,
    sigma: Vec<f64>,
}

impl CriterionMatrix {
    fn assemble(svd: &SvdFactorization, x: &Subspace) -> Self {
        let n = x.dim();
        let m = svd.dim();
        let w = svd.u().tr_mul(x.basis());
        let s = DMatrix::from_diagonal(&DVector::from_column_slice(svd.sigma()));
        let sw = &s * &w;
        let pivot = svd.sigma_or_zero(n).powi(2);
        let mut c = &sw * sw.transpose();
        for i in 0..m {
            c[(i, i)] += pivot - svd.sigma()[i].powi(2);
        }
        Self {
            c,
            n,
            w,
            sigma: svd.sigma().to_vec(),
        }
    }

    pub fn dim(&self) -> usize {
        self.c.nrows()
    }

    /// `sigma_{n+1}^2`.
    pub fn pivot(&self) -> f64 {
        self.sigma.get(self.n).copied().unwrap_or(0.0).powi(2)
    }

    /// Zero-based indices `{0..n-1} u {n+1..m-1}`, skipping the pivot row.
    pub fn reduced_indices(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&i| i != self.n).collect()
    }

    pub fn submatrix(&self, idx: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(idx.len(), idx.len(), |i, j| self.c[(idx[i], idx[j])])
    }

    /// `C[1..n, n+2..m]`.
    pub fn reduced(&self) -> DMatrix<f64> {
        self.submatrix(&self.reduced_indices())
    }

    /// `det C[J]` for zero-based `J`.
    pub fn principal_minor(&self, idx: &[usize]) -> f64 {
        if idx.is_empty() {
            return 1.0;
        }
        self.submatrix(idx).determinant()
    }

    /// The `n x n` matrix `M_J` with
    /// `m_ij = sum_k f_k w_ki w_kj`, `f_k = s^2/(s^2 - sigma_k^2)` for
    /// `k in J` and `1` otherwise (`s = sigma_{n+1}`).
    pub fn m_matrix(&self, idx: &[usize]) -> DMatrix<f64> {
        let pivot = self.pivot();
        let mut f = vec![1.0; self.dim()];
        for &k in idx {
            f[k] = pivot / (pivot - self.sigma[k].powi(2));
        }
        let n = self.n;
        DMatrix::from_fn(n, n, |i, j| {
            (0..self.dim())
                .map(|k| f[k] * self.w[(k, i)] * self.w[(k, j)])
                .sum()
        })
    }

    /// `prod_{k in J} (sigma_{n+1}^2 - sigma_k^2)`.
    pub fn diagonal_factor(&self, idx: &[usize]) -> f64 {
        let pivot = self.pivot();
        idx.iter().map(|&k| pivot - self.sigma[k].powi(2)).product()
    }

    /// Max-entry deviation from the closed form, evaluated from `w` and `sigma`.
    pub fn residual(&self) -> f64 {
        let m = self.dim();
        let pivot = self.pivot();
        let mut worst: f64 = 0.0;
        for i in 0..m {
            for j in 0..m {
                let ww: f64 = (0..self.n).map(|k| self.w[(i, k)] * self.w[(j, k)]).sum();
                let mut expected = self.sigma[i] * self.sigma[j] * ww;
                if i == j {
                    expected += pivot - self.sigma[i].powi(2);
                }
                worst = worst.max((self.c[(i, j)] - expected).abs());
            }
        }
        worst
    }
}

/// `C_{n+1}` for `n = dim X`; requires the spectral gap at `n`.
pub fn build_criterion_matrix(
    svd: &SvdFactorization,
    x: &Subspace,
    tol: &TolerancePolicy,
) -> Result<CriterionMatrix> {
    check_dims(svd, x)?;
    require_gap(svd, x.dim(), tol)?;
    Ok(CriterionMatrix::assemble(svd, x))
}

/// Direct test: `|E(A, X) - sigma_{n+1}| <= tol_psd * sigma_1`, combined
/// with the necessary condition whenever the gap makes it well defined.
pub fn check_optimal_distance(
    svd: &SvdFactorization,
    x: &Subspace,
    tol: &TolerancePolicy,
) -> Result<OptimalityVerdict> {
    check_dims(svd, x)?;
    let n = x.dim();
    let m = svd.dim();
    let dist = distance_svd(svd, x)?;
    let width = svd.sigma_or_zero(n);
    let scale = svd.sigma_max().max(f64::MIN_POSITIVE);
    let margin = (tol.tol_psd * scale - (dist - width).abs()) / scale;
    let close = margin >= 0.0;
    let necessary = if n < m && linalg::check_spectral_gap(svd, n, tol)? {
        necessary_residual(svd, x) <= tol.tol_orth
    } else {
        close
    };
    Ok(OptimalityVerdict {
        optimal: close && necessary,
        necessary_holds: necessary,
        method: Method::DirectDistance,
        distance: dist,
        width,
        boundary: false,
        statistic: margin,
        evidence: Vec::new(),
    })
}

/// `X` is optimal iff `X perp u_{n+1}` and `C[1..n, n+2..m]` is PSD.
pub fn check_optimal_psd(
    svd: &SvdFactorization,
    x: &Subspace,
    tol: &TolerancePolicy,
) -> Result<OptimalityVerdict> {
    let cm = build_criterion_matrix(svd, x, tol)?;
    let necessary = necessary_residual(svd, x) <= tol.tol_orth;
    let s1sq = svd.sigma_max().powi(2);
    let lmin = lambda_min_sym(&cm.reduced());
    let stat = if lmin.is_finite() { lmin / s1sq } else { 1.0 };
    Ok(OptimalityVerdict {
        optimal: necessary && stat >= -tol.tol_psd,
        necessary_holds: necessary,
        method: Method::Psd,
        distance: distance_svd(svd, x)?,
        width: svd.sigma_or_zero(x.dim()),
        boundary: stat.abs() <= tol.tol_psd,
        statistic: stat,
        evidence: Vec::new(),
    })
}

/// Index sets `J` of `{1..n, n+2..m}` (zero-based) meeting `{1..n}`,
/// ordered by `|J cap {1..n}|` and then lexicographically.
pub fn signed_minor_index_sets(n: usize, m: usize) -> Vec<Vec<usize>> {
    let pool: Vec<usize> = (0..m).filter(|&i| i != n).collect();
    let mut out = Vec::new();
    let mut current = Vec::new();
    fn walk(pool: &[usize], start: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        for p in start..pool.len() {
            current.push(pool[p]);
            out.push(current.clone());
            walk(pool, p + 1, current, out);
            current.pop();
        }
    }
    walk(&pool, 0, &mut current, &mut out);
    out.retain(|j| j.iter().any(|&k| k < n));
    out.sort_by_key(|j| j.iter().filter(|&&k| k < n).count());
    out
}

/// Signed-minor test: `(-1)^s det(M_J) >= 0` for every admissible `J`.
///
/// Each determinant is compared against `-tol_det * max(1, |M_J|_max^n)`.
/// Without `verbose` the enumeration stops at the first failure and only
/// that index set is reported.
pub fn check_optimal_signed_minors(
    svd: &SvdFactorization,
    x: &Subspace,
    opts: &MinorOptions,
    tol: &TolerancePolicy,
) -> Result<OptimalityVerdict> {
    let m = svd.dim();
    if m > opts.max_dim {
        return Err(Error::GuardExceeded {
            m,
            limit: opts.max_dim,
        });
    }
    let cm = build_criterion_matrix(svd, x, tol)?;
    let n = cm.n;
    let necessary = necessary_residual(svd, x) <= tol.tol_orth;

    let mut evidence = Vec::new();
    let mut all_pass = true;
    let mut boundary = false;
    let mut worst = f64::INFINITY;
    if necessary || opts.verbose {
        for idx in signed_minor_index_sets(n, m) {
            let mj = cm.m_matrix(&idx);
            let det = mj.determinant();
            let s = idx.iter().filter(|&&k| k < n).count();
            let sign: i8 = if s % 2 == 0 { 1 } else { -1 };
            let scale = mj.amax().powi(n as i32).max(1.0);
            let threshold = tol.tol_det * scale;
            let signed = f64::from(sign) * det;
            let pass = signed >= -threshold;
            worst = worst.min(signed / scale);
            boundary |= det.abs() <= threshold;
            all_pass &= pass;
            if opts.verbose || !pass {
                evidence.push(MinorEvidence {
                    index_set: idx.iter().map(|k| k + 1).collect(),
                    s,
                    det,
                    required_sign: sign,
                    threshold,
                    pass,
                });
            }
            if !pass && !opts.verbose {
                break;
            }
        }
    }
    Ok(OptimalityVerdict {
        optimal: necessary && all_pass,
        necessary_holds: necessary,
        method: Method::SignedMinors,
        distance: distance_svd(svd, x)?,
        width: svd.sigma_or_zero(n),
        boundary,
        statistic: if worst.is_finite() { worst } else { 0.0 },
        evidence,
    })
}

fn hadamard_bound(a: &DMatrix<f64>) -> f64 {
    a.column_iter().map(|c| c.norm()).product()
}

/// Sufficient test: `det C[k..n, n+2..m] > 0` for `k = 1..n`, each
/// determinant measured against its Hadamard bound.
pub fn check_sufficient_minors(
    svd: &SvdFactorization,
    x: &Subspace,
    tol: &TolerancePolicy,
) -> Result<bool> {
    let cm = build_criterion_matrix(svd, x, tol)?;
    if necessary_residual(svd, x) > tol.tol_orth {
        return Ok(false);
    }
    let n = cm.n;
    let m = cm.dim();
    for k in 0..n {
        let idx: Vec<usize> = (k..n).chain(n + 1..m).collect();
        let sub = cm.submatrix(&idx);
        let det = sub.determinant();
        if det <= tol.tol_det * hadamard_bound(&sub) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Complement test for full-rank `A` and `n <= m - 2`: with `Y` the
/// orthogonal complement of `X + span{u_{n+1}}` and `Q = U^T Y`, `X` is
/// optimal iff `X perp u_{n+1}` and `lambda_max(Q^T S^2 Q) <= sigma_{n+1}^2`.
pub fn check_optimal_complement(
    svd: &SvdFactorization,
    x: &Subspace,
    tol: &TolerancePolicy,
) -> Result<OptimalityVerdict> {
    check_dims(svd, x)?;
    let n = x.dim();
    let m = svd.dim();
    if n + 2 > m {
        return Err(Error::InvalidArgument(format!(
            "complement test needs n <= m - 2, got n = {n}, m = {m}"
        )));
    }
    let rank = svd.rank(tol);
    if rank < m {
        return Err(Error::RankDeficient { rank, m });
    }
    require_gap(svd, n, tol)?;
    let necessary = necessary_residual(svd, x) <= tol.tol_orth;

    let mut spanning: Vec<DVector<f64>> = (0..n).map(|j| x.column(j)).collect();
    spanning.push(svd.u_col(n));
    let joined = orthonormalize(m, &spanning, tol)?.subspace;
    let y = orthogonal_complement(&joined);
    let q = svd.u().tr_mul(y.basis());
    let s2 = DMatrix::from_diagonal(&DVector::from_iterator(
        m,
        svd.sigma().iter().map(|s| s * s),
    ));
    let lmax = lambda_max_sym(&(q.transpose() * s2 * &q));
    let s1sq = svd.sigma_max().powi(2);
    let pivot = svd.sigma_or_zero(n).powi(2);
    let stat = if lmax.is_finite() {
        (pivot - lmax) / s1sq
    } else {
        1.0
    };
    Ok(OptimalityVerdict {
        optimal: necessary && stat >= -tol.tol_psd,
        necessary_holds: necessary,
        method: Method::Complement,
        distance: distance_svd(svd, x)?,
        width: svd.sigma_or_zero(n),
        boundary: stat.abs() <= tol.tol_psd,
        statistic: stat,
        evidence: Vec::new(),
    })
}

/// `P u_1, ..., P u_n` linearly independent (smallest singular value above
/// `tol_rank`). Fails for every non-optimal space it cannot rule in.
pub fn check_projection_independence(
    svd: &SvdFactorization,
    x: &Subspace,
    tol: &TolerancePolicy,
) -> Result<bool> {
    check_dims(svd, x)?;
    let n = x.dim();
    if n == 0 {
        return Ok(true);
    }
    if n > svd.dim() {
        return Err(Error::DimensionMismatch(format!(
            "subspace dimension {n} exceeds {}",
            svd.dim()
        )));
    }
    let lead = svd.u().columns(0, n).into_owned();
    let projected = x.basis() * x.basis().tr_mul(&lead);
    Ok(sigma_min_of(&projected) > tol.tol_rank)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::compute_svd;
    use crate::samples;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn tol() -> TolerancePolicy {
        TolerancePolicy::default()
    }

    fn hankel3() -> Matrix {
        Matrix::from_rows(&[
            vec![1.0, 0.0, 0.25],
            vec![0.0, 0.25, 0.0],
            vec![0.25, 0.0, 1.0],
        ])
        .unwrap()
    }

    /// Line `cos(a) u_1 + sin(a) u_3`.
    fn tilted(svd: &SvdFactorization, angle: f64) -> Subspace {
        let x = svd.from_left_coefficients(&[angle.cos(), 0.0, angle.sin()]);
        Subspace::line(&x).unwrap()
    }

    fn extreme_angle() -> f64 {
        (1.0 / 3.0_f64.sqrt()).asin()
    }

    #[test]
    fn distance_examples() {
        let t = tol();
        let d = Matrix::diagonal(&[3.0, 2.0, 1.0]).unwrap();
        let e1 = Subspace::line(&DVector::from_vec(vec![1.0, 0.0, 0.0])).unwrap();
        assert!((distance(&d, &e1, &t).unwrap() - 2.0).abs() < 1e-14);

        let ones = Subspace::line(&DVector::from_element(3, 1.0)).unwrap();
        assert!((distance(&hankel3(), &ones, &t).unwrap() - 0.75).abs() < 1e-14);

        let e3 = Subspace::line(&DVector::from_vec(vec![0.0, 0.0, 1.0])).unwrap();
        assert!((distance(&d, &e3, &t).unwrap() - 3.0).abs() < 1e-14);
        assert!(distance(&d, &Subspace::zero(4), &t).is_err());
    }

    #[test]
    fn distance_matches_exact_and_sampled_oracles() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let t = tol();
        let a = samples::uniform_matrix(&mut rng, 5);
        let raw = DMatrix::from_fn(5, 2, |_, _| rng.random_range(-1.0..1.0));
        let x = linalg::orthonormalize_columns(&raw, &t).unwrap().subspace;
        let e = distance(&a, &x, &t).unwrap();

        // exact: lambda_max(A^T (I - P) A)
        let ip = DMatrix::<f64>::identity(5, 5) - x.projector();
        let gram = a.as_dmatrix().transpose() * ip.clone() * a.as_dmatrix();
        let exact = lambda_max_sym(&gram).sqrt();
        assert!((e - exact).abs() < 1e-12);

        // sampled sup from below
        let residual_op = ip * a.as_dmatrix();
        let mut best: f64 = 0.0;
        for _ in 0..10_000 {
            let v: DVector<f64> = DVector::from_fn(5, |_, _| rng.random_range(-1.0..1.0));
            let v = &v / v.norm();
            best = best.max((&residual_op * v).norm());
        }
        assert!(best <= e + 1e-12);
        // power refinement of the sampled maximizer closes the gap
        let mut v = DVector::from_element(5, 1.0);
        for _ in 0..2_000 {
            v = residual_op.tr_mul(&(&residual_op * &v));
            v /= v.norm();
        }
        assert!((e - (&residual_op * v).norm()).abs() < 5e-3);
    }

    #[test]
    fn n_width_examples() {
        let t = tol();
        assert!((n_width(&hankel3(), 1, &t).unwrap() - 0.75).abs() < 1e-14);
        assert_eq!(n_width(&hankel3(), 3, &t).unwrap(), 0.0);
        let d = Matrix::diagonal(&[3.0, 2.0, 1.0]).unwrap();
        assert_eq!(n_width(&d, 0, &t).unwrap(), 3.0);
        assert!(n_width(&d, 4, &t).is_err());
    }

    #[test]
    fn necessary_examples() {
        let t = tol();
        let svd = compute_svd(&hankel3(), &t).unwrap();
        assert!(check_necessary(&svd, &svd.leading_left(1), &t).unwrap());
        let u2 = Subspace::line(&svd.u_col(1)).unwrap();
        assert!(!check_necessary(&svd, &u2, &t).unwrap());
        let mix = Subspace::line(&(svd.u_col(0) + svd.u_col(2))).unwrap();
        assert!(check_necessary(&svd, &mix, &t).unwrap());

        let flat = compute_svd(&Matrix::diagonal(&[3.0, 2.0, 2.0]).unwrap(), &t).unwrap();
        assert!(matches!(
            check_necessary(&flat, &flat.leading_left(1), &t),
            Err(Error::GapViolation { .. })
        ));
    }

    #[test]
    fn karlovitz_examples() {
        let t = tol();
        let svd = compute_svd(&hankel3(), &t).unwrap();
        assert!(check_karlovitz_sufficient(&svd, &svd.leading_left(1), &t).unwrap());
        let boundary = tilted(&svd, extreme_angle());
        assert!(!check_karlovitz_sufficient(&svd, &boundary, &t).unwrap());
        let v = check_optimal_signed_minors(&svd, &boundary, &MinorOptions::default(), &t).unwrap();
        assert!(v.optimal);

        // diag(3,2,1), sin^2 = 1/6: sum w_i^2 s1^2/(s2^2 - s3^2) = (1/6)(9)/3 = 1/2 <= 1
        let d = compute_svd(&Matrix::diagonal(&[3.0, 2.0, 1.0]).unwrap(), &t).unwrap();
        let theta = (1.0_f64 / 6.0).sqrt().asin();
        let x = Subspace::line(&DVector::from_vec(vec![theta.cos(), 0.0, theta.sin()])).unwrap();
        let plugged = theta.sin().powi(2) * 9.0 / (4.0 - 1.0);
        assert!((plugged - 0.5).abs() < 1e-15);
        assert!(check_karlovitz_sufficient(&d, &x, &t).unwrap());
        // and past the Karlovitz bound sin^2 = 1/3 it is inconclusive
        let theta = (0.4_f64).sqrt().asin();
        let x = Subspace::line(&DVector::from_vec(vec![theta.cos(), 0.0, theta.sin()])).unwrap();
        assert!(!check_karlovitz_sufficient(&d, &x, &t).unwrap());

        // n must stay below min(m-1, r)
        assert!(check_karlovitz_sufficient(&d, &d.leading_left(2), &t).is_err());
    }

    #[test]
    fn criterion_matrix_for_leading_space() {
        let t = tol();
        let d = compute_svd(&Matrix::diagonal(&[4.0, 3.0, 2.0, 1.0]).unwrap(), &t).unwrap();
        let cm = build_criterion_matrix(&d, &d.leading_left(2), &t).unwrap();
        let expected = [4.0, 4.0, 0.0, 4.0 - 1.0];
        for (i, e) in expected.iter().enumerate() {
            assert!((cm.c[(i, i)] - e).abs() < 1e-13, "C[{i},{i}] = {}", cm.c[(i, i)]);
        }
        assert!((cm.w.columns(0, 2).rows(0, 2) - DMatrix::<f64>::identity(2, 2)).amax() < 1e-15);
        assert!(cm.residual() < 1e-13);

        let cm0 = build_criterion_matrix(&d, &Subspace::zero(4), &t).unwrap();
        let expected = [0.0, 16.0 - 9.0, 16.0 - 4.0, 16.0 - 1.0];
        for (i, e) in expected.iter().enumerate() {
            assert!((cm0.c[(i, i)] - e).abs() < 1e-13);
        }
    }

    #[test]
    fn criterion_matrix_two_formulas_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let t = tol();
        let a = samples::gapped_matrix(&mut rng, 6);
        let svd = compute_svd(&a, &t).unwrap();
        let raw = DMatrix::from_fn(6, 2, |_, _| rng.random_range(-1.0..1.0));
        let x = linalg::orthonormalize_columns(&raw, &t).unwrap().subspace;
        let cm = build_criterion_matrix(&svd, &x, &t).unwrap();
        let s = DMatrix::from_diagonal(&DVector::from_column_slice(svd.sigma()));
        let independent = DMatrix::<f64>::identity(6, 6) * svd.sigma()[2].powi(2) - &s * &s
            + &s * svd.u().transpose() * x.projector() * svd.u() * &s;
        assert!((&cm.c - independent).amax() <= 1e-12);
        assert!((cm.w.tr_mul(&cm.w) - DMatrix::<f64>::identity(2, 2)).amax() < 1e-12);
        assert!((&cm.c - cm.c.transpose()).amax() < 1e-12);
    }

    #[test]
    fn psd_examples() {
        let t = tol();
        let svd = compute_svd(&hankel3(), &t).unwrap();
        assert!(check_optimal_psd(&svd, &svd.leading_left(1), &t).unwrap().optimal);
        let v40 = check_optimal_psd(&svd, &tilted(&svd, 40f64.to_radians()), &t).unwrap();
        assert!(!v40.optimal && v40.necessary_holds);
        let v30 = check_optimal_psd(&svd, &tilted(&svd, 30f64.to_radians()), &t).unwrap();
        assert!(v30.optimal && !v30.boundary);
        let edge = check_optimal_psd(&svd, &tilted(&svd, extreme_angle()), &t).unwrap();
        assert!(edge.optimal && edge.boundary);
    }

    #[test]
    fn index_sets_are_ordered() {
        let sets = signed_minor_index_sets(2, 4);
        // pool {0,1,3}; sets meeting {0,1}: 6 of them
        assert_eq!(
            sets,
            vec![
                vec![0],
                vec![0, 3],
                vec![1],
                vec![1, 3],
                vec![0, 1],
                vec![0, 1, 3],
            ]
        );
        assert_eq!(signed_minor_index_sets(1, 6).len(), 16);
    }

    #[test]
    fn signed_minor_examples() {
        let t = tol();
        let svd = compute_svd(&hankel3(), &t).unwrap();
        let boundary = Subspace::line(&DVector::from_element(3, 1.0)).unwrap();
        let v = check_optimal_signed_minors(&svd, &boundary, &MinorOptions::default(), &t).unwrap();
        assert!(v.optimal && v.boundary);
        assert!(v.evidence.is_empty());

        let verbose = MinorOptions {
            verbose: true,
            ..Default::default()
        };
        let v = check_optimal_signed_minors(&svd, &boundary, &verbose, &t).unwrap();
        assert_eq!(v.evidence.len(), 2);
        assert!(v.evidence.iter().all(|e| e.pass && e.required_sign == -1));

        let bad = tilted(&svd, 50f64.to_radians());
        let v = check_optimal_signed_minors(&svd, &bad, &MinorOptions::default(), &t).unwrap();
        assert!(!v.optimal);
        assert_eq!(v.evidence.len(), 1);
        assert!(!v.evidence[0].pass);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for m in 3..7 {
            let a = samples::gapped_matrix(&mut rng, m);
            let svd = compute_svd(&a, &t).unwrap();
            let v = check_optimal_signed_minors(&svd, &svd.leading_left(2), &verbose, &t).unwrap();
            assert!(v.optimal);
            assert!(v.evidence.iter().all(|e| e.pass));
        }

        let big = compute_svd(&Matrix::diagonal(&[5.0, 4.0, 3.0, 2.0, 1.0]).unwrap(), &t).unwrap();
        let tight = MinorOptions {
            max_dim: 4,
            verbose: false,
        };
        assert!(matches!(
            check_optimal_signed_minors(&big, &big.leading_left(1), &tight, &t),
            Err(Error::GuardExceeded { m: 5, limit: 4 })
        ));
    }

    #[test]
    fn sufficient_minor_examples() {
        let t = tol();
        let svd = compute_svd(&hankel3(), &t).unwrap();
        assert!(check_sufficient_minors(&svd, &svd.leading_left(1), &t).unwrap());
        let boundary = tilted(&svd, extreme_angle());
        let cm = build_criterion_matrix(&svd, &boundary, &t).unwrap();
        assert!(cm.principal_minor(&[0, 2]).abs() <= 1e-15);
        assert!(!check_sufficient_minors(&svd, &boundary, &t).unwrap());
        let inner = tilted(&svd, 30f64.to_radians());
        assert!(check_sufficient_minors(&svd, &inner, &t).unwrap());
        assert!(check_optimal_psd(&svd, &inner, &t).unwrap().optimal);
    }

    #[test]
    fn complement_examples() {
        let t = tol();
        let svd = compute_svd(&hankel3(), &t).unwrap();
        let (s1, s2, s3) = (1.25f64, 0.75f64, 0.25f64);
        let limit = (s2 * s2 - s3 * s3) / (s1 * s1 - s3 * s3);
        for deg in [0.0, 10.0, 30.0, 35.0, 36.0, 50.0, 80.0] {
            let a = f64::to_radians(deg);
            let v = check_optimal_complement(&svd, &tilted(&svd, a), &t).unwrap();
            assert_eq!(v.optimal, a.sin().powi(2) <= limit, "angle {deg}");
        }
        let d = compute_svd(&Matrix::diagonal(&[4.0, 3.0, 2.0, 1.0]).unwrap(), &t).unwrap();
        assert!(check_optimal_complement(&d, &d.leading_left(2), &t).unwrap().optimal);
        assert!(check_optimal_complement(&d, &d.leading_left(3), &t).is_err());
        let sing = compute_svd(&Matrix::diagonal(&[4.0, 3.0, 2.0, 0.0]).unwrap(), &t).unwrap();
        assert!(matches!(
            check_optimal_complement(&sing, &sing.leading_left(1), &t),
            Err(Error::RankDeficient { rank: 3, m: 4 })
        ));
    }

    #[test]
    fn projection_independence_examples() {
        let t = tol();
        let d = compute_svd(&Matrix::diagonal(&[3.0, 2.0, 1.0]).unwrap(), &t).unwrap();
        assert!(check_projection_independence(&d, &d.leading_left(2), &t).unwrap());
        let e3 = Subspace::line(&d.u_col(2)).unwrap();
        assert!(!check_projection_independence(&d, &e3, &t).unwrap());
        assert!((distance_svd(&d, &e3).unwrap() - 3.0).abs() < 1e-14);
    }

    #[test]
    fn distance_verdict_requires_necessary_condition() {
        let t = tol();
        let d = compute_svd(&Matrix::diagonal(&[3.0, 2.0, 1.0]).unwrap(), &t).unwrap();
        // tiny tilt towards u_2 moves E only to second order
        let eps = 1e-7;
        let x = Subspace::line(&DVector::from_vec(vec![1.0, eps, 0.0])).unwrap();
        let v = check_optimal_distance(&d, &x, &t).unwrap();
        assert!(v.statistic >= 0.0);
        assert!(!v.necessary_holds);
        assert!(!v.optimal);
        // full space: width 0, no gap test
        let v = check_optimal_distance(&d, &Subspace::full(3), &t).unwrap();
        assert!(v.optimal && v.width == 0.0);
    }
}
