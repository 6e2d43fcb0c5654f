use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use nwidth::criteria::{
    check_optimal_complement, check_optimal_distance, check_optimal_psd, check_optimal_signed_minors,
    karlovitz_verdict,
};
use nwidth::linalg::{check_spectral_gap, compute_svd, largest_principal_angle};
use nwidth::lowrank::{
    self, epsilon_family, from_left_subspace, from_right_subspace, rank1_admissible, rank1_max_angle_3d,
    symmetric_rank1, symmetric_scaling_range, truncated_svd,
};
use nwidth::sequence::{convergence_report, iterate as run_sequence};
use nwidth::tp::{is_strictly_totally_positive, melkman_optimal_space, sign_changes};
use nwidth::{
    Error, Matrix, MinorOptions, OptimalityVerdict, RankNApproximant, Side, Subspace, SvdFactorization, TolerancePolicy,
    TpMode,
};
use serde_json::{json, Value};

use crate::io::{self, read_matrix, read_subspace, CliError};
use crate::{CheckMethod, Outcome, SideArg};

pub struct Context {
    path: PathBuf,
    pub a: Matrix,
    pub svd: SvdFactorization,
    pub tol: TolerancePolicy,
}

impl Context {
    pub fn load(path: &Path, tol: TolerancePolicy) -> Result<Self, CliError> {
        let a = read_matrix(path)?;
        let svd = compute_svd(&a, &tol)?;
        Ok(Self {
            path: path.to_path_buf(),
            a,
            svd,
            tol,
        })
    }

    pub fn digest(&self) -> Value {
        json!({
            "path": self.path.display().to_string(),
            "rows": self.a.dim(),
            "cols": self.a.dim(),
            "sigma": self.svd.sigma(),
            "rank": self.svd.rank(&self.tol),
        })
    }

    fn m(&self) -> usize {
        self.a.dim()
    }

    fn subspace(&self, path: &Path) -> Result<(Subspace, f64), CliError> {
        read_subspace(path, self.m(), &self.tol)
    }
}

fn rows(a: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..a.nrows()).map(|i| a.row(i).iter().copied().collect()).collect()
}

fn vector(v: &DVector<f64>) -> Vec<f64> {
    v.iter().copied().collect()
}

fn verdict_json(v: &OptimalityVerdict) -> Value {
    serde_json::to_value(v).expect("verdict serializes")
}

pub fn svd(ctx: &Context) -> Result<Outcome, CliError> {
    let m = ctx.m();
    let mut gaps = Vec::new();
    for n in 1..m {
        gaps.push(json!({
            "n": n,
            "gap_holds": check_spectral_gap(&ctx.svd, n, &ctx.tol)?,
            "width": ctx.svd.sigma()[n],
        }));
    }
    Ok(Outcome {
        result: json!({
            "sigma": ctx.svd.sigma(),
            "u": rows(ctx.svd.u()),
            "v": rows(ctx.svd.v()),
            "rank": ctx.svd.rank(&ctx.tol),
            "gaps": gaps,
        }),
        affirmative: true,
        boundary: false,
    })
}

fn single_check(
    ctx: &Context,
    x: &Subspace,
    method: CheckMethod,
    verbose: bool,
) -> Result<OptimalityVerdict, Error> {
    let (svd, tol) = (&ctx.svd, &ctx.tol);
    match method {
        CheckMethod::Psd => check_optimal_psd(svd, x, tol),
        CheckMethod::Minors => {
            let opts = MinorOptions {
                verbose,
                ..MinorOptions::default()
            };
            check_optimal_signed_minors(svd, x, &opts, tol)
        }
        CheckMethod::Complement => check_optimal_complement(svd, x, tol),
        CheckMethod::Distance => check_optimal_distance(svd, x, tol),
        CheckMethod::Karlovitz => karlovitz_verdict(svd, x, tol),
        CheckMethod::All => unreachable!("expanded by the caller"),
    }
}

pub fn check(ctx: &Context, path: &Path, method: CheckMethod, verbose: bool) -> Result<Outcome, CliError> {
    let (x, change) = ctx.subspace(path)?;
    let subspace = json!({
        "path": path.display().to_string(),
        "dim": x.dim(),
        "basis": rows(x.basis()),
        "orthonormalization_change": change,
    });
    if method != CheckMethod::All {
        let v = single_check(ctx, &x, method, verbose)?;
        return Ok(Outcome {
            result: json!({ "subspace": subspace, "verdict": verdict_json(&v) }),
            affirmative: v.optimal,
            boundary: v.boundary,
        });
    }

    let exact = [
        ("psd", CheckMethod::Psd),
        ("minors", CheckMethod::Minors),
        ("complement", CheckMethod::Complement),
        ("distance", CheckMethod::Distance),
    ];
    let mut verdicts = serde_json::Map::new();
    let mut skipped = serde_json::Map::new();
    let mut decisions = Vec::new();
    let mut boundary = false;
    for (name, method) in exact {
        match single_check(ctx, &x, method, verbose) {
            Ok(v) => {
                decisions.push(v.optimal);
                boundary |= v.boundary;
                verdicts.insert(name.into(), verdict_json(&v));
            }
            Err(e @ (Error::InvalidArgument(_) | Error::RankDeficient { .. }))
                if method == CheckMethod::Complement =>
            {
                skipped.insert(name.into(), Value::String(e.to_string()));
            }
            Err(e) => return Err(e.into()),
        }
    }
    let karlovitz = karlovitz_verdict(&ctx.svd, &x, &ctx.tol)?;
    let agree = decisions.windows(2).all(|w| w[0] == w[1]);
    let optimal = agree && decisions[0];
    Ok(Outcome {
        result: json!({
            "subspace": subspace,
            "verdicts": verdicts,
            "skipped": skipped,
            "sufficient": { "karlovitz": verdict_json(&karlovitz) },
            "agree": agree,
            "optimal": optimal,
        }),
        affirmative: optimal,
        boundary,
    })
}

enum ApproxSource {
    Tsvd,
    Left(PathBuf),
    Right(PathBuf),
    Eps(Vec<f64>),
}

fn parse_source(text: &str) -> Result<ApproxSource, CliError> {
    let (kind, arg) = match text.split_once(':') {
        Some((k, a)) => (k, Some(a)),
        None => (text, None),
    };
    match (kind, arg) {
        ("tsvd", None) => Ok(ApproxSource::Tsvd),
        ("left", Some(f)) if !f.is_empty() => Ok(ApproxSource::Left(f.into())),
        ("right", Some(f)) if !f.is_empty() => Ok(ApproxSource::Right(f.into())),
        ("eps", Some(list)) => Ok(ApproxSource::Eps(io::parse_list(list)?)),
        _ => Err(CliError::Usage(format!(
            "unknown source {text:?}; expected tsvd, left:FILE, right:FILE or eps:LIST"
        ))),
    }
}

fn expect_n(n: Option<usize>, dim: usize) -> Result<(), CliError> {
    match n {
        Some(n) if n != dim => Err(CliError::Usage(format!(
            "--n {n} does not match the subspace dimension {dim}"
        ))),
        _ => Ok(()),
    }
}

fn require_n(n: Option<usize>, source: &str) -> Result<usize, CliError> {
    n.ok_or_else(|| CliError::Usage(format!("--source {source} needs --n")))
}

pub fn approx(
    ctx: &Context,
    n: Option<usize>,
    source: &str,
    scale: Option<f64>,
    out: Option<&Path>,
) -> Result<Outcome, CliError> {
    let parsed = parse_source(source)?;
    if scale.is_some() && !matches!(parsed, ApproxSource::Left(_)) {
        return Err(CliError::Usage("--scale applies to --source left:FILE only".into()));
    }
    let (a, tol) = (&ctx.a, &ctx.tol);
    let r: RankNApproximant = match parsed {
        ApproxSource::Tsvd => truncated_svd(a, require_n(n, "tsvd")?, tol)?,
        ApproxSource::Eps(eps) => {
            let n = require_n(n, "eps")?;
            let eps = if eps.len() == 1 && n > 1 { vec![eps[0]; n] } else { eps };
            epsilon_family(a, n, &eps, tol)?
        }
        ApproxSource::Left(path) => {
            let (x, _) = ctx.subspace(&path)?;
            expect_n(n, x.dim())?;
            match scale {
                Some(s) if x.dim() == 1 => symmetric_rank1(a, &x.column(0), s, tol)?,
                Some(_) => {
                    return Err(CliError::Usage(format!(
                        "--scale needs a 1-dimensional subspace, got dimension {}",
                        x.dim()
                    )))
                }
                None => from_left_subspace(a, &x, tol)?,
            }
        }
        ApproxSource::Right(path) => {
            let (y, _) = ctx.subspace(&path)?;
            expect_n(n, y.dim())?;
            from_right_subspace(a, &y, tol)?
        }
    };
    for w in &r.warnings {
        eprintln!("warning: {w}");
    }
    if let Some(path) = out {
        io::write_matrix(path, &r.matrix)?;
    }
    Ok(Outcome {
        result: json!({
            "source": r.source,
            "rank": r.rank,
            "numerical_rank": r.numerical_rank,
            "error": r.error,
            "width": ctx.svd.sigma_or_zero(r.rank),
            "best": r.best,
            "boundary": r.boundary,
            "warnings": r.warnings,
            "matrix": r.matrix.to_rows(),
            "structure": {
                "input_symmetric": lowrank::is_symmetric(a, tol),
                "input_hankel": lowrank::is_hankel(a, tol),
                "symmetric": lowrank::is_symmetric(&r.matrix, tol),
                "hankel": lowrank::is_hankel(&r.matrix, tol),
            },
            "out": out.map(|p| p.display().to_string()),
        }),
        affirmative: r.best,
        boundary: r.boundary,
    })
}

fn scaling_json(ctx: &Context, w: &[f64], admissible: bool) -> Value {
    if ctx.m() != 3 || !admissible || !lowrank::is_symmetric(&ctx.a, &ctx.tol) {
        return Value::Null;
    }
    match symmetric_scaling_range(&ctx.a, w[0], w[2], &ctx.tol) {
        Ok(r) => serde_json::to_value(r).expect("range serializes"),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

pub fn rank1(ctx: &Context, sweep: Option<usize>, w: Option<&str>) -> Result<Outcome, CliError> {
    let m = ctx.m();
    let max_angle = if m == 3 {
        let rad = rank1_max_angle_3d(&ctx.svd, &ctx.tol)?;
        json!({ "radians": rad, "degrees": rad.to_degrees() })
    } else {
        Value::Null
    };
    if let Some(list) = w {
        let mut w = io::parse_list(list)?;
        if w.len() != m {
            return Err(CliError::Usage(format!("--w has {} entries, the matrix is {m}x{m}", w.len())));
        }
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(CliError::Usage("--w is the zero vector".into()));
        }
        if (norm - 1.0).abs() > ctx.tol.tol_orth {
            eprintln!("warning: --w normalized (norm {norm})");
            w.iter_mut().for_each(|x| *x /= norm);
        }
        let region = rank1_admissible(&ctx.svd, &w, &ctx.tol)?;
        let direction = ctx.svd.from_left_coefficients(&w);
        return Ok(Outcome {
            result: json!({
                "region": region,
                "direction": vector(&direction),
                "max_angle": max_angle,
                "scaling_range": scaling_json(ctx, &w, region.admissible),
            }),
            affirmative: region.admissible,
            boundary: region.boundary,
        });
    }

    let k = sweep.expect("clap requires --angle-sweep or --w");
    if k == 0 {
        return Err(CliError::Usage("--angle-sweep needs at least one angle".into()));
    }
    if m < 3 {
        return Err(CliError::Usage(format!("--angle-sweep needs m >= 3, got {m}")));
    }
    let mut table = Vec::with_capacity(k);
    let mut boundary = false;
    for i in 0..k {
        let deg = if k == 1 { 0.0 } else { 90.0 * i as f64 / (k - 1) as f64 };
        let (s, c) = deg.to_radians().sin_cos();
        let mut w = vec![0.0; m];
        w[0] = c;
        w[2] = s;
        let region = rank1_admissible(&ctx.svd, &w, &ctx.tol)?;
        boundary |= region.boundary;
        table.push(json!({
            "degrees": deg,
            "w": w,
            "admissible": region.admissible,
            "slack": region.slack,
            "boundary": region.boundary,
            "scaling_range": scaling_json(ctx, &w, region.admissible),
        }));
    }
    Ok(Outcome {
        result: json!({ "max_angle": max_angle, "sweep": table }),
        affirmative: true,
        boundary,
    })
}

pub fn tp(ctx: &Context, n: Option<usize>, side: SideArg, exhaustive: bool) -> Result<Outcome, CliError> {
    let mode = if exhaustive { TpMode::Exhaustive } else { TpMode::Fekete };
    let witness = is_strictly_totally_positive(&ctx.a, mode, &ctx.tol)?;
    let mut patterns = Vec::new();
    for j in 0..ctx.m() {
        patterns.push(json!({
            "j": j + 1,
            "left": sign_changes(&ctx.svd.u_col(j))?,
            "right": sign_changes(&ctx.svd.v_col(j))?,
        }));
    }
    let mut affirmative = witness.is_stp;
    let mut boundary = false;
    let mut spaces = serde_json::Map::new();
    if let (Some(n), true) = (n, witness.is_stp) {
        let sides: &[Side] = match side {
            SideArg::Left => &[Side::Left],
            SideArg::Right => &[Side::Right],
            SideArg::Both => &[Side::Left, Side::Right],
        };
        for &s in sides {
            let space = melkman_optimal_space(&ctx.a, n, s, &ctx.tol)?;
            let (leading, name) = match s {
                Side::Left => (ctx.svd.leading_left(n), "left"),
                Side::Right => (ctx.svd.leading_right(n), "right"),
            };
            let angle = largest_principal_angle(&space.subspace, &leading)?;
            affirmative &= space.verdict.optimal;
            boundary |= space.verdict.boundary;
            spaces.insert(
                name.into(),
                json!({
                    "basis": rows(space.subspace.basis()),
                    "pivot_vectors": space.pivot_vectors.iter().map(vector).collect::<Vec<_>>(),
                    "verdict": verdict_json(&space.verdict),
                    "angle_to_leading": { "radians": angle, "degrees": angle.to_degrees() },
                }),
            );
        }
    }
    Ok(Outcome {
        result: json!({
            "witness": witness,
            "sign_patterns": patterns,
            "n": n,
            "optimal_spaces": if n.is_some() && witness.is_stp { Value::Object(spaces) } else { Value::Null },
        }),
        affirmative,
        boundary,
    })
}

pub fn iterate(ctx: &Context, x: &Path, y: &Path, steps: usize, bases: bool) -> Result<Outcome, CliError> {
    let (x1, _) = ctx.subspace(x)?;
    let (y1, _) = ctx.subspace(y)?;
    let seq = run_sequence(&ctx.a, &x1, &y1, steps, &ctx.tol)?;
    let report = convergence_report(&seq, &ctx.svd, &ctx.tol)?;
    let n = x1.dim();
    let table: Vec<Value> = seq
        .iter()
        .map(|s| {
            let mut row = json!({
                "p": s.p,
                "x_dim": s.x.dim(),
                "y_dim": s.y.dim(),
                "x_optimal": s.x_optimal,
                "y_optimal": s.y_optimal,
                "x_distance": s.x_distance,
                "y_distance": s.y_distance,
                "x_deficiency": s.x_deficiency,
                "y_deficiency": s.y_deficiency,
                "bound": s.bound,
                "dimension_dropped": s.dimension_dropped(n),
            });
            if bases {
                row["x_basis"] = json!(rows(s.x.basis()));
                row["y_basis"] = json!(rows(s.y.basis()));
            }
            row
        })
        .collect();
    let affirmative =
        report.all_optimal && report.lifting_holds && (report.within_bounds || !report.bounds_guaranteed);
    Ok(Outcome {
        result: json!({
            "n": n,
            "width": ctx.svd.sigma_or_zero(n),
            "steps": table,
            "convergence": report,
        }),
        affirmative,
        boundary: false,
    })
}
