//! Strict total positivity and the Melkman-Micchelli optimal subspaces.
//!
//! For a strictly totally positive matrix the singular vector `v_{n+1}`
//! has exactly `n` sign changes. Pairing the two components around each
//! change gives vectors `s_j` orthogonal to `v_{n+1}`, and
//! `span{A s_1, .., A s_n}` is an optimal `n`-dimensional subspace.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::criteria::{self, OptimalityVerdict};
use crate::error::{Error, Result};
use crate::linalg::{compute_svd, orthonormalize, require_gap, Matrix, Subspace};
use crate::tolerance::TolerancePolicy;

/// Components with `|v_k| <= ZERO_RATIO * |v|` count as zero.
pub const ZERO_RATIO: f64 = 1e-8;

/// Largest dimension for exhaustive minor enumeration.
pub const EXHAUSTIVE_GUARD: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TpMode {
    /// Contiguous minors only (Fekete's criterion).
    Fekete,
    Exhaustive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FailingMinor {
    /// Zero-based.
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub det: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TpWitness {
    pub is_stp: bool,
    pub mode: TpMode,
    pub minors_checked: usize,
    pub failing_minor: Option<FailingMinor>,
}

fn minor(a: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> (f64, f64) {
    let k = rows.len();
    let sub = DMatrix::from_fn(k, k, |i, j| a[(rows[i], cols[j])]);
    let hadamard: f64 = sub.row_iter().map(|r| r.norm()).product();
    (sub.determinant(), hadamard)
}

fn combinations(m: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, m: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..m {
            if m - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, m, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, m, k, &mut Vec::with_capacity(k), &mut out);
    out
}

/// All minors positive, each beyond `tol_det` times its Hadamard bound.
///
/// Minors are visited by size, then row set, then column set, so the
/// reported witness is the first failure in that order.
pub fn is_strictly_totally_positive(a: &Matrix, mode: TpMode, tol: &TolerancePolicy) -> Result<TpWitness> {
    let m = a.dim();
    if mode == TpMode::Exhaustive && m > EXHAUSTIVE_GUARD {
        return Err(Error::GuardExceeded {
            m,
            limit: EXHAUSTIVE_GUARD,
        });
    }
    let d = a.as_dmatrix();
    let mut checked = 0;
    for k in 1..=m {
        let sets: Vec<Vec<usize>> = match mode {
            TpMode::Fekete => (0..=m - k).map(|s| (s..s + k).collect()).collect(),
            TpMode::Exhaustive => combinations(m, k),
        };
        for rows in &sets {
            for cols in &sets {
                checked += 1;
                let (det, bound) = minor(d, rows, cols);
                if det <= tol.tol_det * bound {
                    return Ok(TpWitness {
                        is_stp: false,
                        mode,
                        minors_checked: checked,
                        failing_minor: Some(FailingMinor {
                            rows: rows.clone(),
                            cols: cols.clone(),
                            det,
                        }),
                    });
                }
            }
        }
    }
    Ok(TpWitness {
        is_stp: true,
        mode,
        minors_checked: checked,
        failing_minor: None,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SignChangePattern {
    pub s_minus: usize,
    pub s_plus: usize,
    /// 1-based index before each sign change among the nonzero components.
    pub change_indices: Vec<usize>,
    pub first_sign: i8,
    /// 1-based positions treated as zero.
    pub zero_indices: Vec<usize>,
}

impl SignChangePattern {
    pub fn has_zeros(&self) -> bool {
        !self.zero_indices.is_empty()
    }
}

fn signs(v: &DVector<f64>) -> Result<Vec<i8>> {
    let norm = v.norm();
    if norm == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(v.iter()
        .map(|&x| {
            if x.abs() <= ZERO_RATIO * norm {
                0
            } else if x > 0.0 {
                1
            } else {
                -1
            }
        })
        .collect())
}

/// `S^-` ignores zero components; `S^+` assigns them signs to maximize
/// the number of changes.
pub fn sign_changes(v: &DVector<f64>) -> Result<SignChangePattern> {
    let sg = signs(v)?;
    let nonzero: Vec<(usize, i8)> = sg.iter().copied().enumerate().filter(|&(_, s)| s != 0).collect();
    let change_indices: Vec<usize> = nonzero
        .windows(2)
        .filter(|w| w[0].1 != w[1].1)
        .map(|w| w[0].0 + 1)
        .collect();

    // best[s] = most changes in a prefix ending with sign s (0 -> -1, 1 -> +1)
    let mut best: [Option<usize>; 2] = [None, None];
    for &s in &sg {
        let allowed: &[usize] = match s {
            1 => &[1],
            -1 => &[0],
            _ => &[0, 1],
        };
        let mut next = [None, None];
        for &c in allowed {
            let stay = best[c];
            let flip = best[1 - c].map(|x| x + 1);
            next[c] = match (stay, flip) {
                (None, None) => Some(0),
                (a, b) => a.max(b),
            };
        }
        best = next;
    }
    let s_plus = best[0].max(best[1]).unwrap_or(0);

    Ok(SignChangePattern {
        s_minus: change_indices.len(),
        s_plus,
        first_sign: nonzero[0].1,
        zero_indices: sg
            .iter()
            .enumerate()
            .filter(|&(_, &s)| s == 0)
            .map(|(i, _)| i + 1)
            .collect(),
        change_indices,
    })
}

/// Vectors `s_j` with entries `1/|v_k|` at `k = l_j, l_j + 1`, each
/// orthogonal to `v`.
pub fn build_s_vectors(v: &DVector<f64>, n: usize) -> Result<Vec<DVector<f64>>> {
    let pattern = sign_changes(v)?;
    if pattern.has_zeros() {
        return Err(Error::ZeroComponents {
            indices: pattern.zero_indices,
        });
    }
    if pattern.s_minus != n {
        return Err(Error::SignChangeCount {
            expected: n,
            found: pattern.s_minus,
        });
    }
    Ok(pattern
        .change_indices
        .iter()
        .map(|&l| {
            let mut s = DVector::zeros(v.len());
            s[l - 1] = 1.0 / v[l - 1].abs();
            s[l] = 1.0 / v[l].abs();
            s
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    /// Optimal for the column space problem: `span{A s_j}`.
    Left,
    /// Optimal for the transposed problem: `span{A^T t_j}`.
    Right,
}

#[derive(Debug, Clone)]
pub struct MelkmanSpace {
    pub subspace: Subspace,
    pub side: Side,
    /// The `s_j` (left) or `t_j` (right).
    pub pivot_vectors: Vec<DVector<f64>>,
    pub verdict: OptimalityVerdict,
}

/// Orthonormalized `span{A s_1, .., A s_n}` (left) or
/// `span{A^T t_1, .., A^T t_n}` (right), certified by the PSD test.
pub fn melkman_optimal_space(a: &Matrix, n: usize, side: Side, tol: &TolerancePolicy) -> Result<MelkmanSpace> {
    let m = a.dim();
    if n == 0 || n >= m {
        return Err(Error::IndexOutOfRange {
            index: n,
            range: format!("1..{m}"),
        });
    }
    if !is_strictly_totally_positive(a, TpMode::Fekete, tol)?.is_stp {
        return Err(Error::NotStp);
    }
    let svd = match side {
        Side::Left => compute_svd(a, tol)?,
        Side::Right => compute_svd(a, tol)?.transposed(),
    };
    require_gap(&svd, n, tol)?;
    let op = match side {
        Side::Left => a.as_dmatrix().clone(),
        Side::Right => a.as_dmatrix().transpose(),
    };
    let pivots = build_s_vectors(&svd.v_col(n), n)?;
    let images: Vec<DVector<f64>> = pivots.iter().map(|s| &op * s).collect();
    let ortho = orthonormalize(m, &images, tol)?;
    if !ortho.dropped.is_empty() {
        return Err(Error::Consistency(format!(
            "images of the pivot vectors are dependent (dropped {:?})",
            ortho.dropped
        )));
    }
    let verdict = criteria::check_optimal_psd(&svd, &ortho.subspace, tol)?;
    if !verdict.optimal {
        return Err(Error::Consistency(format!(
            "constructed space fails certification (statistic {})",
            verdict.statistic
        )));
    }
    Ok(MelkmanSpace {
        subspace: ortho.subspace,
        side,
        pivot_vectors: pivots,
        verdict,
    })
}
