//! The alternating sequence `X^p = A(Y^{p-1})`, `Y^p = A^T(X^{p-1})`.
//!
//! Starting from optimal seeds every member stays optimal, and the spaces
//! approach the leading singular subspaces at rate `(sigma_{n+1}/sigma_j)^p`.
//! Bases are re-orthonormalized at each step.

use nalgebra::DVector;
use serde::Serialize;

use crate::criteria::distance_svd;
use crate::error::{Error, Result};
use crate::linalg::{compute_svd, orthonormalize, Matrix, Subspace, SvdFactorization};
use crate::tolerance::TolerancePolicy;

#[derive(Debug, Clone)]
pub struct SequenceStep {
    pub p: usize,
    pub x: Subspace,
    pub y: Subspace,
    pub x_optimal: bool,
    pub y_optimal: bool,
    /// `E(A, X^p)`.
    pub x_distance: f64,
    /// `E(A^T, Y^p)`.
    pub y_distance: f64,
    /// `|(I - P) u_j|`, `j = 1..n`.
    pub x_deficiency: Vec<f64>,
    /// `|(I - Pi) v_j|`, `j = 1..n`.
    pub y_deficiency: Vec<f64>,
    /// `(sigma_{n+1}/sigma_j)^p`.
    pub bound: Vec<f64>,
}

impl SequenceStep {
    pub fn dimension_dropped(&self, n: usize) -> bool {
        self.x.dim() < n || self.y.dim() < n
    }
}

/// `|u_j - P u_j|` for `j = 1..n`, with `P` the projector onto `x`.
pub fn deficiency(x: &Subspace, svd: &SvdFactorization, n: usize) -> Result<Vec<f64>> {
    deficiency_against(x, svd.u(), n)
}

fn deficiency_against(x: &Subspace, basis: &nalgebra::DMatrix<f64>, n: usize) -> Result<Vec<f64>> {
    let m = basis.nrows();
    if x.ambient_dim() != m {
        return Err(Error::DimensionMismatch(format!(
            "subspace of R^{} against singular vectors of R^{m}",
            x.ambient_dim()
        )));
    }
    if n > m {
        return Err(Error::IndexOutOfRange {
            index: n,
            range: format!("0..={m}"),
        });
    }
    Ok((0..n)
        .map(|j| {
            let u = basis.column(j).into_owned();
            (&u - x.project(&u)).norm()
        })
        .collect())
}

fn rate_bound(svd: &SvdFactorization, n: usize, p: usize) -> Vec<f64> {
    let next = svd.sigma_or_zero(n);
    (0..n)
        .map(|j| {
            let s = svd.sigma()[j];
            if s == 0.0 {
                1.0
            } else {
                (next / s).powi(p as i32)
            }
        })
        .collect()
}

fn image(op: &nalgebra::DMatrix<f64>, s: &Subspace, tol: &TolerancePolicy) -> Result<Subspace> {
    let cols: Vec<DVector<f64>> = s.basis().column_iter().map(|c| op * c).collect();
    Ok(orthonormalize(s.ambient_dim(), &cols, tol)?.subspace)
}

/// Steps `1..=p_max`; step 1 holds the seeds themselves.
///
/// Optimality is judged by direct distance against `sigma_{n+1}` with `n`
/// the seed dimension, which stays meaningful when a step loses dimension.
pub fn iterate(
    a: &Matrix,
    x1: &Subspace,
    y1: &Subspace,
    p_max: usize,
    tol: &TolerancePolicy,
) -> Result<Vec<SequenceStep>> {
    let m = a.dim();
    if x1.ambient_dim() != m || y1.ambient_dim() != m {
        return Err(Error::DimensionMismatch(format!(
            "seeds in R^{} and R^{} for a {m}x{m} matrix",
            x1.ambient_dim(),
            y1.ambient_dim()
        )));
    }
    if x1.dim() != y1.dim() {
        return Err(Error::DimensionMismatch(format!(
            "seed dimensions {} and {} differ",
            x1.dim(),
            y1.dim()
        )));
    }
    if p_max == 0 {
        return Err(Error::InvalidArgument("p_max must be at least 1".into()));
    }
    let n = x1.dim();
    let svd = compute_svd(a, tol)?;
    let svd_t = svd.transposed();
    let width = svd.sigma_or_zero(n);
    let slack = tol.tol_psd * svd.sigma_max();
    let at = a.as_dmatrix().transpose();

    let mut steps: Vec<SequenceStep> = Vec::with_capacity(p_max);
    let (mut x, mut y) = (x1.clone(), y1.clone());
    for p in 1..=p_max {
        if p > 1 {
            let next_x = image(a.as_dmatrix(), &y, tol)?;
            let next_y = image(&at, &x, tol)?;
            x = next_x;
            y = next_y;
        }
        let x_distance = distance_svd(&svd, &x)?;
        let y_distance = distance_svd(&svd_t, &y)?;
        steps.push(SequenceStep {
            p,
            x_optimal: x_distance <= width + slack,
            y_optimal: y_distance <= width + slack,
            x_distance,
            y_distance,
            x_deficiency: deficiency(&x, &svd, n)?,
            y_deficiency: deficiency_against(&y, svd.v(), n)?,
            bound: rate_bound(&svd, n, p),
            x: x.clone(),
            y: y.clone(),
        });
    }
    Ok(steps)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundViolation {
    pub p: usize,
    /// `"x"` or `"y"`.
    pub side: &'static str,
    /// 1-based.
    pub j: usize,
    pub deficiency: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    /// Both seeds optimal, so the rate bound is a theorem for this run.
    pub bounds_guaranteed: bool,
    pub within_bounds: bool,
    pub violations: Vec<BoundViolation>,
    /// `E(A, X^p) <= E(A^T, Y^{p-1})` and `E(A^T, Y^p) <= E(A, X^{p-1})`.
    pub lifting_holds: bool,
    pub all_optimal: bool,
    /// Per `j`: `exp` of the log-linear slope of the `x` deficiency in `p`.
    pub fitted_rate: Vec<Option<f64>>,
    /// `sigma_{n+1}/sigma_j`.
    pub predicted_rate: Vec<f64>,
    pub dimension_drops: Vec<usize>,
}

/// Deficiencies below this are treated as converged when fitting rates.
const FIT_FLOOR: f64 = 1e-13;

fn fit_rate(points: &[(usize, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|&&(_, d)| d > FIT_FLOOR)
        .map(|&(p, d)| (p as f64, d.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|t| t.0).sum::<f64>() / k;
    let my = pts.iter().map(|t| t.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|t| (t.0 - mx) * (t.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|t| (t.0 - mx).powi(2)).sum();
    Some((sxy / sxx).exp())
}

pub fn convergence_report(
    steps: &[SequenceStep],
    svd: &SvdFactorization,
    tol: &TolerancePolicy,
) -> Result<ConvergenceReport> {
    let first = steps
        .first()
        .ok_or_else(|| Error::InvalidArgument("no sequence steps".into()))?;
    let n = first.bound.len();
    let slack = tol.tol_psd * svd.sigma_max().max(1.0);

    let mut violations = Vec::new();
    for step in steps {
        for j in 0..n {
            for (side, d) in [("x", step.x_deficiency[j]), ("y", step.y_deficiency[j])] {
                if d > step.bound[j] + slack {
                    violations.push(BoundViolation {
                        p: step.p,
                        side,
                        j: j + 1,
                        deficiency: d,
                        bound: step.bound[j],
                    });
                }
            }
        }
    }
    let lifting_holds = steps.windows(2).all(|w| {
        w[1].x_distance <= w[0].y_distance + slack && w[1].y_distance <= w[0].x_distance + slack
    });
    let next = svd.sigma_or_zero(n);
    Ok(ConvergenceReport {
        bounds_guaranteed: first.x_optimal && first.y_optimal,
        within_bounds: violations.is_empty(),
        violations,
        lifting_holds,
        all_optimal: steps.iter().all(|s| s.x_optimal && s.y_optimal),
        fitted_rate: (0..n)
            .map(|j| fit_rate(&steps.iter().map(|s| (s.p, s.x_deficiency[j])).collect::<Vec<_>>()))
            .collect(),
        predicted_rate: (0..n)
            .map(|j| if svd.sigma()[j] == 0.0 { 1.0 } else { next / svd.sigma()[j] })
            .collect(),
        dimension_drops: steps.iter().filter(|s| s.dimension_dropped(n)).map(|s| s.p).collect(),
    })
}
