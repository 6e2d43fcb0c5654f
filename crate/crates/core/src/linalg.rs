//! Dense linear algebra used by every other module.
//!
//! Everything here is a thin, validated layer over `nalgebra`: square
//! finite matrices, a sorted and sign-normalized SVD, orthonormal bases and
//! their complements. All thresholds come from one [`TolerancePolicy`].

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::tolerance::TolerancePolicy;

/// Square, finite, real matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    inner: DMatrix<f64>,
}

impl Matrix {
    pub fn new(inner: DMatrix<f64>) -> Result<Self> {
        if inner.nrows() != inner.ncols() {
            return Err(Error::NotSquare {
                rows: inner.nrows(),
                cols: inner.ncols(),
            });
        }
        check_finite(&inner)?;
        Ok(Self { inner })
    }

    /// Builds a matrix from entries in row-major order.
    pub fn from_row_major(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::BadLength {
                rows,
                cols,
                expected: rows * cols,
                got: data.len(),
            });
        }
        Self::new(DMatrix::from_row_slice(rows, cols, data))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows.len();
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::BadLength {
                rows: m,
                cols,
                expected: cols,
                got: bad.len(),
            });
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::from_row_major(m, cols, &flat)
    }

    pub fn identity(m: usize) -> Self {
        Self {
            inner: DMatrix::identity(m, m),
        }
    }

    pub fn zeros(m: usize) -> Self {
        Self {
            inner: DMatrix::zeros(m, m),
        }
    }

    pub fn diagonal(values: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(values)))
    }

    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.inner[(row, col)]
    }

    pub fn as_dmatrix(&self) -> &DMatrix<f64> {
        &self.inner
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.inner
    }

    pub fn transpose(&self) -> Self {
        Self {
            inner: self.inner.transpose(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.inner.amax()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.inner
            .row_iter()
            .map(|r| r.iter().copied().collect())
            .collect()
    }
}

fn check_finite(a: &DMatrix<f64>) -> Result<()> {
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            if !a[(i, j)].is_finite() {
                return Err(Error::NonFinite { row: i, col: j });
            }
        }
    }
    Ok(())
}

/// `A = U diag(sigma) V^T` with `sigma` descending.
///
/// Signs are fixed so that the first nonzero component of every `v_j` is
/// positive, with `u_j` flipped in tandem.
#[derive(Debug, Clone, PartialEq)]
pub struct SvdFactorization {
    u: DMatrix<f64>,
    sigma: Vec<f64>,
    v: DMatrix<f64>,
}

/// Components below this magnitude are skipped when fixing the sign of a
/// unit singular vector.
const SIGN_PIVOT_EPS: f64 = 1e-12;

impl SvdFactorization {
    pub fn dim(&self) -> usize {
        self.sigma.len()
    }

    pub fn u(&self) -> &DMatrix<f64> {
        &self.u
    }

    pub fn v(&self) -> &DMatrix<f64> {
        &self.v
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    /// `sigma_{k+1}` for a zero-based `k`, zero past the end.
    pub fn sigma_or_zero(&self, k: usize) -> f64 {
        self.sigma.get(k).copied().unwrap_or(0.0)
    }

    pub fn sigma_max(&self) -> f64 {
        self.sigma_or_zero(0)
    }

    /// Zero-based column `u_{j+1}`.
    pub fn u_col(&self, j: usize) -> DVector<f64> {
        self.u.column(j).into_owned()
    }

    pub fn v_col(&self, j: usize) -> DVector<f64> {
        self.v.column(j).into_owned()
    }

    /// Number of singular values above `tol_rank * sigma_1`.
    pub fn rank(&self, tol: &TolerancePolicy) -> usize {
        let s1 = self.sigma_max();
        if s1 == 0.0 {
            return 0;
        }
        self.sigma.iter().filter(|&&s| s > tol.tol_rank * s1).count()
    }

    /// Factorization of `A^T`: the roles of `U` and `V` swap.
    pub fn transposed(&self) -> Self {
        Self {
            u: self.v.clone(),
            sigma: self.sigma.clone(),
            v: self.u.clone(),
        }
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        let s = DMatrix::from_diagonal(&DVector::from_column_slice(&self.sigma));
        &self.u * s * self.v.transpose()
    }

    /// Leading left singular space `span{u_1..u_n}`.
    pub fn leading_left(&self, n: usize) -> Subspace {
        Subspace {
            basis: self.u.columns(0, n).into_owned(),
        }
    }

    pub fn leading_right(&self, n: usize) -> Subspace {
        Subspace {
            basis: self.v.columns(0, n).into_owned(),
        }
    }

    /// Coordinates of `x` in the left singular basis, `U^T x`.
    pub fn left_coefficients(&self, x: &DVector<f64>) -> DVector<f64> {
        self.u.tr_mul(x)
    }

    /// `sum_i w_i u_i`.
    pub fn from_left_coefficients(&self, w: &[f64]) -> DVector<f64> {
        &self.u * DVector::from_column_slice(w)
    }
}

/// Singular value decomposition of a square matrix, sorted descending.
pub fn compute_svd(a: &Matrix, tol: &TolerancePolicy) -> Result<SvdFactorization> {
    let m = a.dim();
    if m == 0 {
        return Ok(SvdFactorization {
            u: DMatrix::zeros(0, 0),
            sigma: Vec::new(),
            v: DMatrix::zeros(0, 0),
        });
    }
    let d = a.as_dmatrix();
    let f = to_faer(d).svd().map_err(|_| Error::NoConvergence)?;
    let u_raw = DMatrix::from_fn(m, m, |i, j| f.U()[(i, j)]);
    let v_raw = DMatrix::from_fn(m, m, |i, j| f.V()[(i, j)]);
    let s_diag = f.S().column_vector();
    let s_raw: Vec<f64> = (0..m).map(|i| s_diag[i]).collect();

    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| s_raw[j].total_cmp(&s_raw[i]));

    let mut u = DMatrix::zeros(m, m);
    let mut v = DMatrix::zeros(m, m);
    let mut sigma = Vec::with_capacity(m);
    for (dst, &src) in order.iter().enumerate() {
        let mut uc = u_raw.column(src).into_owned();
        let mut vc = v_raw.column(src).into_owned();
        let pivot = vc.iter().copied().find(|x| x.abs() > SIGN_PIVOT_EPS);
        if pivot.is_some_and(|p| p < 0.0) {
            uc.neg_mut();
            vc.neg_mut();
        }
        u.set_column(dst, &uc);
        v.set_column(dst, &vc);
        sigma.push(s_raw[src].max(0.0));
    }
    let out = SvdFactorization { u, sigma, v };

    let s1 = out.sigma_max();
    let recon = (out.reconstruct() - a.as_dmatrix()).amax();
    if recon > tol.tol_recon * s1.max(f64::MIN_POSITIVE) && recon > 0.0 {
        return Err(Error::Consistency(format!(
            "SVD reconstruction error {recon:e} exceeds tolerance"
        )));
    }
    Ok(out)
}

fn to_faer(a: &DMatrix<f64>) -> faer::Mat<f64> {
    faer::Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

/// Singular values of an arbitrary dense matrix, descending.
pub(crate) fn singular_values_of(a: &DMatrix<f64>) -> Vec<f64> {
    if a.is_empty() {
        return Vec::new();
    }
    let mut sv = to_faer(a)
        .singular_values()
        .expect("singular values of a finite matrix");
    sv.sort_by(|x, y| y.total_cmp(x));
    sv
}

/// Largest singular value of an arbitrary dense matrix.
pub(crate) fn sigma_max_of(a: &DMatrix<f64>) -> f64 {
    singular_values_of(a).first().copied().unwrap_or(0.0)
}

/// Smallest singular value of an `m x n` matrix with `m >= n`.
pub(crate) fn sigma_min_of(a: &DMatrix<f64>) -> f64 {
    if a.ncols() == 0 {
        return f64::INFINITY;
    }
    singular_values_of(a).last().copied().unwrap_or(0.0)
}

/// Spectral norm `max_{|x| <= 1} |A x| = sigma_1`.
pub fn spectral_norm(a: &Matrix) -> f64 {
    sigma_max_of(a.as_dmatrix())
}

/// Orthonormal basis of a subspace of `R^m`.
///
/// `dim == 0` is the space `{0}`, stored as an `m x 0` basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    basis: DMatrix<f64>,
}

impl Subspace {
    /// Wraps a basis after checking `B^T B = I` within `tol_orth`.
    pub fn new(basis: DMatrix<f64>, tol: &TolerancePolicy) -> Result<Self> {
        check_finite(&basis)?;
        let n = basis.ncols();
        let gram = basis.tr_mul(&basis) - DMatrix::<f64>::identity(n, n);
        let deviation = if gram.is_empty() { 0.0 } else { gram.amax() };
        if deviation > tol.tol_orth {
            return Err(Error::NotOrthonormal { deviation });
        }
        Ok(Self { basis })
    }

    pub fn zero(m: usize) -> Self {
        Self {
            basis: DMatrix::zeros(m, 0),
        }
    }

    pub fn full(m: usize) -> Self {
        Self {
            basis: DMatrix::identity(m, m),
        }
    }

    /// Line spanned by `x / |x|`.
    pub fn line(x: &DVector<f64>) -> Result<Self> {
        let norm = x.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidArgument(
                "cannot span a line with a zero vector".into(),
            ));
        }
        Ok(Self {
            basis: DMatrix::from_column_slice(x.len(), 1, (x / norm).as_slice()),
        })
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn column(&self, j: usize) -> DVector<f64> {
        self.basis.column(j).into_owned()
    }

    /// Orthogonal projector `B B^T`.
    pub fn projector(&self) -> DMatrix<f64> {
        &self.basis * self.basis.transpose()
    }

    pub fn project(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.basis * self.basis.tr_mul(x)
    }
}

/// Result of Gram-Schmidt: the basis plus the input positions judged
/// linearly dependent on their predecessors.
#[derive(Debug, Clone, PartialEq)]
pub struct Orthonormalized {
    pub subspace: Subspace,
    pub dropped: Vec<usize>,
}

/// Gram-Schmidt with one full re-orthogonalization pass.
///
/// A vector is dropped when its residual norm falls to
/// `tol_rank * max_input_norm`.
pub fn orthonormalize(
    m: usize,
    vectors: &[DVector<f64>],
    tol: &TolerancePolicy,
) -> Result<Orthonormalized> {
    if let Some(bad) = vectors.iter().find(|v| v.len() != m) {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} in R^{m}",
            bad.len()
        )));
    }
    let max_norm = vectors.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let cutoff = tol.tol_rank * max_norm;
    let mut kept: Vec<DVector<f64>> = Vec::new();
    let mut dropped = Vec::new();
    for (idx, v) in vectors.iter().enumerate() {
        let mut r = v.clone();
        for _ in 0..2 {
            for q in &kept {
                let c = q.dot(&r);
                r.axpy(-c, q, 1.0);
            }
        }
        let norm = r.norm();
        if norm <= cutoff || norm == 0.0 {
            dropped.push(idx);
        } else {
            kept.push(r / norm);
        }
    }
    let basis = if kept.is_empty() {
        DMatrix::zeros(m, 0)
    } else {
        DMatrix::from_columns(&kept)
    };
    Ok(Orthonormalized {
        subspace: Subspace { basis },
        dropped,
    })
}

/// Orthonormalizes the columns of `a` in order.
pub fn orthonormalize_columns(a: &DMatrix<f64>, tol: &TolerancePolicy) -> Result<Orthonormalized> {
    let cols: Vec<DVector<f64>> = a.column_iter().map(|c| c.into_owned()).collect();
    orthonormalize(a.nrows(), &cols, tol)
}

fn symmetry_defect(s: &DMatrix<f64>) -> f64 {
    if s.is_empty() {
        return 0.0;
    }
    (s - s.transpose()).amax()
}

/// Largest (signed) eigenvalue of a symmetric matrix.
pub fn largest_symmetric_eigenvalue(s: &Matrix, tol: &TolerancePolicy) -> Result<f64> {
    let a = s.as_dmatrix();
    let asymmetry = symmetry_defect(a);
    if asymmetry > tol.tol_orth * a.amax().max(1.0) {
        return Err(Error::NotSymmetric { asymmetry });
    }
    Ok(lambda_max_sym(a))
}

/// Eigenvalues of the symmetric part of `s`, ascending.
pub(crate) fn sym_eigenvalues(s: &DMatrix<f64>) -> Vec<f64> {
    if s.is_empty() {
        return Vec::new();
    }
    let sym = (s + s.transpose()) * 0.5;
    let mut ev = to_faer(&sym)
        .self_adjoint_eigenvalues(faer::Side::Lower)
        .expect("eigenvalues of a finite symmetric matrix");
    ev.sort_by(f64::total_cmp);
    ev
}

pub(crate) fn lambda_max_sym(s: &DMatrix<f64>) -> f64 {
    sym_eigenvalues(s).last().copied().unwrap_or(f64::NEG_INFINITY)
}

pub(crate) fn lambda_min_sym(s: &DMatrix<f64>) -> f64 {
    sym_eigenvalues(s).first().copied().unwrap_or(f64::INFINITY)
}

/// Orthonormal basis of the orthogonal complement of `s`.
///
/// Completes the basis by repeatedly adjoining the coordinate vector with
/// the largest residual; by a trace argument that residual is at least
/// `1/sqrt(m)`, so the completion never works with a near-dependent vector.
pub fn orthogonal_complement(s: &Subspace) -> Subspace {
    let m = s.ambient_dim();
    let target = m - s.dim().min(m);
    let mut basis: Vec<DVector<f64>> = s.basis.column_iter().map(|c| c.into_owned()).collect();
    let mut extra: Vec<DVector<f64>> = Vec::with_capacity(target);
    let mut used = vec![false; m];
    while extra.len() < target {
        let mut best: Option<(usize, DVector<f64>, f64)> = None;
        for (i, taken) in used.iter().enumerate() {
            if *taken {
                continue;
            }
            let mut r = DVector::zeros(m);
            r[i] = 1.0;
            for _ in 0..2 {
                for q in &basis {
                    let c = q.dot(&r);
                    r.axpy(-c, q, 1.0);
                }
            }
            let norm = r.norm();
            if best.as_ref().is_none_or(|b| norm > b.2) {
                best = Some((i, r, norm));
            }
        }
        let Some((i, r, norm)) = best else { break };
        used[i] = true;
        let q = r / norm;
        basis.push(q.clone());
        extra.push(q);
    }
    let basis = if extra.is_empty() {
        DMatrix::zeros(m, 0)
    } else {
        DMatrix::from_columns(&extra)
    };
    Subspace { basis }
}

/// Spectral gap assumption `sigma_n > sigma_{n+1} > sigma_{n+2} >= 0` with
/// `sigma_{n+1}` numerically nonzero.
///
/// `n = 0` reads `sigma_0` as infinite; indices past `m` read as zero.
pub fn check_spectral_gap(svd: &SvdFactorization, n: usize, tol: &TolerancePolicy) -> Result<bool> {
    let m = svd.dim();
    if m == 0 || n >= m {
        return Err(Error::IndexOutOfRange {
            index: n,
            range: format!("0..={}", m.saturating_sub(1)),
        });
    }
    let s1 = svd.sigma_max();
    if s1 == 0.0 {
        return Ok(false);
    }
    let next = svd.sigma_or_zero(n);
    let after = svd.sigma_or_zero(n + 1);
    let upper_gap = n == 0 || svd.sigma_or_zero(n - 1) - next > tol.tol_gap * s1;
    let lower_gap = next - after > tol.tol_gap * s1;
    Ok(upper_gap && lower_gap && next > tol.tol_rank * s1)
}

pub(crate) fn require_gap(svd: &SvdFactorization, n: usize, tol: &TolerancePolicy) -> Result<()> {
    if check_spectral_gap(svd, n, tol)? {
        Ok(())
    } else {
        Err(Error::GapViolation {
            n,
            sigma: svd.sigma.clone(),
        })
    }
}

/// Largest principal angle (radians) from the directions of `x` into `y`:
/// `asin |(I - P_y) X|`.
pub fn largest_principal_angle(x: &Subspace, y: &Subspace) -> Result<f64> {
    if x.ambient_dim() != y.ambient_dim() {
        return Err(Error::DimensionMismatch(format!(
            "subspaces of R^{} and R^{}",
            x.ambient_dim(),
            y.ambient_dim()
        )));
    }
    let residual = x.basis() - y.basis() * y.basis().tr_mul(x.basis());
    Ok(sigma_max_of(&residual).min(1.0).asin())
}
