//! Best rank-n approximations in the spectral norm.
//!
//! Besides the truncated SVD, any orthonormal basis `x_1..x_n` of an
//! optimal subspace gives the best approximant `sum_i x_i (A^T x_i)^T`
//! (and symmetrically for the right side). For `n = 1` the optimal lines
//! are classified completely, and for symmetric `3 x 3` matrices a whole
//! interval of scalings `s` makes `s x x^T` a best approximation.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::criteria;
use crate::error::{Error, Result};
use crate::linalg::{self, compute_svd, require_gap, sigma_max_of, Matrix, Subspace, SvdFactorization};
use crate::tolerance::TolerancePolicy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Source {
    TruncatedSvd,
    LeftSubspace,
    RightSubspace,
    EpsilonFamily,
    SymmetricRank1,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankNApproximant {
    pub matrix: Matrix,
    /// Nominal rank `n`.
    pub rank: usize,
    pub numerical_rank: usize,
    pub source: Source,
    /// `|A - R|`.
    pub error: f64,
    /// `error` equals `sigma_{n+1}` within `tol_psd * sigma_1`.
    pub best: bool,
    pub boundary: bool,
    pub warnings: Vec<String>,
}

fn finish(
    a: &Matrix,
    svd: &SvdFactorization,
    r: DMatrix<f64>,
    n: usize,
    source: Source,
    tol: &TolerancePolicy,
) -> Result<RankNApproximant> {
    let error = sigma_max_of(&(a.as_dmatrix() - &r));
    let r_sv = linalg::singular_values_of(&r);
    let r_top = r_sv.first().copied().unwrap_or(0.0);
    let numerical_rank = r_sv.iter().filter(|&&s| s > tol.tol_rank * r_top).count();
    let width = svd.sigma_or_zero(n);
    let best = (error - width).abs() <= tol.tol_psd * svd.sigma_max();
    Ok(RankNApproximant {
        matrix: Matrix::new(r)?,
        rank: n,
        numerical_rank,
        source,
        error,
        best,
        boundary: false,
        warnings: Vec::new(),
    })
}

fn check_rank(n: usize, m: usize) -> Result<()> {
    if n > m {
        return Err(Error::IndexOutOfRange {
            index: n,
            range: format!("0..={m}"),
        });
    }
    Ok(())
}

/// `R_n = sum_{i<=n} sigma_i u_i v_i^T`, with error `sigma_{n+1}`.
pub fn truncated_svd(a: &Matrix, n: usize, tol: &TolerancePolicy) -> Result<RankNApproximant> {
    let svd = compute_svd(a, tol)?;
    check_rank(n, svd.dim())?;
    let mut r = DMatrix::zeros(svd.dim(), svd.dim());
    for i in 0..n {
        r += svd.sigma()[i] * svd.u_col(i) * svd.v_col(i).transpose();
    }
    finish(a, &svd, r, n, Source::TruncatedSvd, tol)
}

/// `sum_i x_i (A^T x_i)^T = X X^T A`; its error is `E(A, X)`.
pub fn from_left_subspace(a: &Matrix, x: &Subspace, tol: &TolerancePolicy) -> Result<RankNApproximant> {
    if x.ambient_dim() != a.dim() {
        return Err(Error::DimensionMismatch(format!(
            "subspace of R^{} for a {}x{} matrix",
            x.ambient_dim(),
            a.dim(),
            a.dim()
        )));
    }
    let svd = compute_svd(a, tol)?;
    let r = x.projector() * a.as_dmatrix();
    let mut out = finish(a, &svd, r, x.dim(), Source::LeftSubspace, tol)?;
    let n = x.dim();
    if n >= 1 && n < svd.dim() && linalg::check_spectral_gap(&svd, n, tol)? {
        out.boundary = criteria::check_optimal_psd(&svd, x, tol)?.boundary;
    }
    Ok(out)
}

/// `sum_i (A y_i) y_i^T = A Y Y^T`; its error is `E(A^T, Y)`.
pub fn from_right_subspace(a: &Matrix, y: &Subspace, tol: &TolerancePolicy) -> Result<RankNApproximant> {
    if y.ambient_dim() != a.dim() {
        return Err(Error::DimensionMismatch(format!(
            "subspace of R^{} for a {}x{} matrix",
            y.ambient_dim(),
            a.dim(),
            a.dim()
        )));
    }
    let svd = compute_svd(a, tol)?;
    let r = a.as_dmatrix() * y.projector();
    finish(a, &svd, r, y.dim(), Source::RightSubspace, tol)
}

/// `sum_{i<=n} (sigma_i + eps_i) u_i v_i^T`, a best approximation whenever
/// every `|eps_i| <= sigma_{n+1}`.
///
/// Out-of-range perturbations are still built and come back with
/// `best == false` and a warning; `sigma_i + eps_i = 0` lowers the rank and
/// is reported the same way.
pub fn epsilon_family(
    a: &Matrix,
    n: usize,
    eps: &[f64],
    tol: &TolerancePolicy,
) -> Result<RankNApproximant> {
    let svd = compute_svd(a, tol)?;
    check_rank(n, svd.dim())?;
    if eps.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{} perturbations for rank {n}",
            eps.len()
        )));
    }
    let width = svd.sigma_or_zero(n);
    let mut r = DMatrix::zeros(svd.dim(), svd.dim());
    let mut warnings = Vec::new();
    for (i, &e) in eps.iter().enumerate() {
        if !e.is_finite() {
            return Err(Error::InvalidArgument(format!("eps_{} is not finite", i + 1)));
        }
        if e.abs() > width * (1.0 + tol.tol_orth) {
            warnings.push(format!(
                "eps_{} = {e} outside [-sigma_{{n+1}}, sigma_{{n+1}}] = [-{width}, {width}]",
                i + 1
            ));
        }
        let coeff = svd.sigma()[i] + e;
        if coeff.abs() <= tol.tol_rank * svd.sigma_max() {
            warnings.push(format!("sigma_{0} + eps_{0} = 0: rank drops", i + 1));
        }
        r += coeff * svd.u_col(i) * svd.v_col(i).transpose();
    }
    let mut out = finish(a, &svd, r, n, Source::EpsilonFamily, tol)?;
    out.warnings = warnings;
    Ok(out)
}

/// `scale * x x^T` for a unit vector `x`.
pub fn symmetric_rank1(
    a: &Matrix,
    x: &DVector<f64>,
    scale: f64,
    tol: &TolerancePolicy,
) -> Result<RankNApproximant> {
    if x.len() != a.dim() {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} for a {}x{} matrix",
            x.len(),
            a.dim(),
            a.dim()
        )));
    }
    let norm = x.norm();
    if (norm - 1.0).abs() > tol.tol_orth.sqrt() {
        return Err(Error::NotUnit { norm });
    }
    let x = x / norm;
    let svd = compute_svd(a, tol)?;
    let r = scale * &x * x.transpose();
    let mut out = finish(a, &svd, r, 1, Source::SymmetricRank1, tol)?;
    if svd.dim() >= 2 && linalg::check_spectral_gap(&svd, 1, tol)? {
        let w: Vec<f64> = svd.left_coefficients(&x).iter().copied().collect();
        out.boundary = rank1_admissible(&svd, &w, tol)?.boundary;
    }
    Ok(out)
}

/// Admissibility of the line spanned by `sum_i w_i u_i` as an optimal
/// 1-dimensional space.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Rank1Region {
    pub m: usize,
    pub w: Vec<f64>,
    pub admissible: bool,
    /// `w_1^2/(s1^2 - s2^2) - sum_{i>=3} w_i^2/(s2^2 - s_i^2)`.
    pub slack: f64,
    pub boundary: bool,
    pub reason: Option<String>,
}

/// The line is optimal iff `w_2 = 0` and
/// `sum_{i>=3} w_i^2/(s2^2 - s_i^2) <= w_1^2/(s1^2 - s2^2)`.
///
/// The decision is taken on the dimensionless margin
/// `1 - sum_{i>=3} (s1^2 - s_i^2)/(s2^2 - s_i^2) w_i^2`, which equals
/// `(s1^2 - s2^2) * slack` for unit `w` with `w_2 = 0` and stays well
/// conditioned when `w_1` vanishes.
pub fn rank1_admissible(svd: &SvdFactorization, w: &[f64], tol: &TolerancePolicy) -> Result<Rank1Region> {
    let m = svd.dim();
    if w.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "{} coefficients for a {m}x{m} matrix",
            w.len()
        )));
    }
    if m < 2 {
        return Err(Error::IndexOutOfRange {
            index: 1,
            range: format!("0..={}", m.saturating_sub(1)),
        });
    }
    require_gap(svd, 1, tol)?;
    let norm_sq: f64 = w.iter().map(|x| x * x).sum();
    if (norm_sq - 1.0).abs() > tol.tol_orth {
        return Err(Error::NotUnit {
            norm: norm_sq.sqrt(),
        });
    }
    let s = svd.sigma();
    let s1sq = s[0] * s[0];
    let s2sq = s[1] * s[1];
    let rhs = w[0] * w[0] / (s1sq - s2sq);
    let lhs: f64 = (2..m).map(|i| w[i] * w[i] / (s2sq - s[i] * s[i])).sum();
    let slack = rhs - lhs;
    let margin = 1.0
        - (2..m)
            .map(|i| (s1sq - s[i] * s[i]) / (s2sq - s[i] * s[i]) * w[i] * w[i])
            .sum::<f64>();

    let w2_zero = w[1].abs() <= tol.tol_orth;
    let within = margin >= -tol.tol_det;
    let reason = if !w2_zero {
        Some("w_2 != 0".to_string())
    } else if !within {
        Some("sum_{i>=3} w_i^2/(s2^2 - s_i^2) exceeds w_1^2/(s1^2 - s2^2)".to_string())
    } else {
        None
    };
    Ok(Rank1Region {
        m,
        w: w.to_vec(),
        admissible: w2_zero && within,
        slack,
        boundary: w2_zero && margin.abs() <= tol.tol_det,
        reason,
    })
}

/// Largest admissible rotation angle (radians) away from `u_1` inside the
/// `(u_1, u_3)` plane of a `3 x 3` matrix:
/// `asin sqrt((s2^2 - s3^2)/(s1^2 - s3^2))`.
pub fn rank1_max_angle_3d(svd: &SvdFactorization, tol: &TolerancePolicy) -> Result<f64> {
    if svd.dim() != 3 {
        return Err(Error::WrongSize {
            expected: 3,
            m: svd.dim(),
        });
    }
    require_gap(svd, 1, tol)?;
    let s = svd.sigma();
    let ratio = (s[1] * s[1] - s[2] * s[2]) / (s[0] * s[0] - s[2] * s[2]);
    Ok(ratio.sqrt().asin())
}

/// Interval `[lower, upper]` of scalings `s` for which
/// `|A - s x x^T| = sigma_2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingRange {
    pub lower: f64,
    pub upper: f64,
    pub w3_squared: f64,
}

impl ScalingRange {
    pub fn contains(&self, s: f64) -> bool {
        self.lower <= s && s <= self.upper
    }
}

/// Scaling interval for `x = w1 u_1 + w3 u_3` on a symmetric `3 x 3`
/// matrix whose eigenvalues for `u_1` and `u_3` are nonnegative.
pub fn symmetric_scaling_range(
    a: &Matrix,
    w1: f64,
    w3: f64,
    tol: &TolerancePolicy,
) -> Result<ScalingRange> {
    if a.dim() != 3 {
        return Err(Error::WrongSize {
            expected: 3,
            m: a.dim(),
        });
    }
    let asym = (a.as_dmatrix() - a.as_dmatrix().transpose()).amax();
    if asym > tol.tol_orth * a.max_abs().max(f64::MIN_POSITIVE) {
        return Err(Error::NotSymmetric { asymmetry: asym });
    }
    let svd = compute_svd(a, tol)?;
    require_gap(&svd, 1, tol)?;
    let s = svd.sigma();
    for j in [0usize, 2] {
        if s[j] > tol.tol_rank * s[0] && svd.u_col(j).dot(&svd.v_col(j)) < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "eigenvalue -{} for u_{}: the scaling law needs nonnegative eigenvalues on u_1 and u_3",
                s[j],
                j + 1
            )));
        }
    }
    let region = rank1_admissible(&svd, &[w1, 0.0, w3], tol)?;
    if !region.admissible {
        return Err(Error::Inadmissible(
            region.reason.unwrap_or_else(|| "criterion fails".into()),
        ));
    }
    let w3sq = w3 * w3;
    let lower_den = (s[1] - s[2]) - (s[0] - s[2]) * w3sq;
    if lower_den <= 0.0 {
        return Err(Error::UnboundedScaling {
            denominator: lower_den,
        });
    }
    let mut lower = (s[0] - s[1]) * (s[1] - s[2]) / lower_den;
    let mut upper = (s[0] + s[1]) * (s[1] + s[2]) / ((s[1] + s[2]) + (s[0] - s[2]) * w3sq);
    // at the extreme direction both ends meet at s1 + s3; rounding may cross them
    if lower > upper && lower - upper <= tol.tol_det * (s[0] + s[2]) {
        let mid = 0.5 * (lower + upper);
        lower = mid;
        upper = mid;
    }
    Ok(ScalingRange {
        lower,
        upper,
        w3_squared: w3sq,
    })
}

/// Closed-form eigenvalues `(lambda_+, lambda_-)` of the `2 x 2` block
/// `[[s1 - c w1^2, -c w1 w3], [-c w1 w3, s3 - c w3^2]]` (unit `(w1, w3)`).
pub fn rank1_block_eigenvalues(s1: f64, s3: f64, w3_squared: f64, c: f64) -> (f64, f64) {
    let root = ((s1 - s3 - c).powi(2) + 4.0 * w3_squared * (s1 - s3) * c).sqrt();
    let base = s1 + s3 - c;
    ((base + root) / 2.0, (base - root) / 2.0)
}

fn structure_scale(a: &Matrix, tol: &TolerancePolicy) -> f64 {
    tol.tol_orth * a.max_abs()
}

/// Entries constant along anti-diagonals.
pub fn is_hankel(a: &Matrix, tol: &TolerancePolicy) -> bool {
    let m = a.dim();
    let eps = structure_scale(a, tol);
    (1..m).all(|i| (1..m).all(|j| (a.get(i, j - 1) - a.get(i - 1, j)).abs() <= eps))
}

pub fn is_symmetric(a: &Matrix, tol: &TolerancePolicy) -> bool {
    let eps = structure_scale(a, tol);
    (a.as_dmatrix() - a.as_dmatrix().transpose()).amax() <= eps
}
