//! Acceptance criteria. Runs without the libtest harness so every
//! criterion prints exactly one PASS/FAIL line.

use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use nwidth::criteria::{
    self, build_criterion_matrix, check_karlovitz_sufficient, check_optimal_complement,
    check_optimal_distance, check_optimal_psd, check_optimal_signed_minors, MinorOptions,
};
use nwidth::linalg::{compute_svd, largest_principal_angle, orthonormalize_columns, spectral_norm};
use nwidth::lowrank::{
    rank1_admissible, rank1_max_angle_3d, symmetric_rank1, symmetric_scaling_range,
};
use nwidth::samples;
use nwidth::sequence::iterate;
use nwidth::tp::{melkman_optimal_space, sign_changes, Side};
use nwidth::{Matrix, Subspace, TolerancePolicy};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = std::result::Result<String, String>;

fn hankel3() -> Matrix {
    Matrix::from_rows(&[
        vec![1.0, 0.0, 0.25],
        vec![0.0, 0.25, 0.0],
        vec![0.25, 0.0, 1.0],
    ])
    .unwrap()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn golden_hankel_svd() -> Outcome {
    let start = Instant::now();
    let tol = TolerancePolicy::default();
    let svd = compute_svd(&hankel3(), &tol).map_err(|e| e.to_string())?;
    let expected = [1.25, 0.75, 0.25];
    for (got, want) in svd.sigma().iter().zip(expected) {
        ensure((got - want).abs() <= 1e-12, || format!("sigma {got} vs {want}"))?;
    }
    let angle = rank1_max_angle_3d(&svd, &tol).map_err(|e| e.to_string())?;
    let want = (1.0 / 3f64.sqrt()).asin();
    ensure((angle - want).abs() <= 1e-12, || format!("angle {angle} vs {want}"))?;
    ensure((angle - 0.6154797).abs() < 1e-7, || format!("angle {angle}"))?;
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(1), || format!("runtime {elapsed:?}"))?;
    Ok(format!("sigma = {:?}, alpha = {angle:.15} rad, {elapsed:?}", svd.sigma()))
}

fn golden_hankel_approximant() -> Outcome {
    let tol = TolerancePolicy::default();
    let a = hankel3();
    let w1 = (2.0f64 / 3.0).sqrt();
    let w3 = (1.0f64 / 3.0).sqrt();
    let range = symmetric_scaling_range(&a, w1, w3, &tol).map_err(|e| e.to_string())?;
    ensure(
        (range.lower - 1.5).abs() <= 1e-12 && (range.upper - 1.5).abs() <= 1e-12,
        || format!("range [{}, {}]", range.lower, range.upper),
    )?;
    let svd = compute_svd(&a, &tol).map_err(|e| e.to_string())?;
    let x = svd.from_left_coefficients(&[w1, 0.0, w3]);
    let r = symmetric_rank1(&a, &x, range.lower, &tol).map_err(|e| e.to_string())?;
    let dev = (r.matrix.as_dmatrix() - DMatrix::from_element(3, 3, 0.5)).amax();
    ensure(dev <= 1e-12, || format!("max deviation from 1/2: {dev:e}"))?;
    let err = spectral_norm(&Matrix::new(a.as_dmatrix() - r.matrix.as_dmatrix()).unwrap());
    ensure((err - 0.75).abs() <= 1e-10, || format!("error {err}"))?;
    Ok(format!(
        "range [{}, {}], entry deviation {dev:.1e}, error {err}",
        range.lower, range.upper
    ))
}

fn vandermonde_angles() -> std::result::Result<(f64, f64), String> {
    let tol = TolerancePolicy::default();
    let a = samples::vandermonde(&[1.0, 2.0, 3.0]);
    let svd = compute_svd(&a, &tol).map_err(|e| e.to_string())?;
    let space = melkman_optimal_space(&a, 1, Side::Left, &tol).map_err(|e| e.to_string())?;
    let u1 = Subspace::line(&svd.u_col(0)).map_err(|e| e.to_string())?;
    let angle = largest_principal_angle(&space.subspace, &u1)
        .map_err(|e| e.to_string())?
        .to_degrees();
    let max_angle = rank1_max_angle_3d(&svd, &tol).map_err(|e| e.to_string())?.to_degrees();
    Ok((angle, max_angle))
}

fn golden_vandermonde() -> Outcome {
    let (angle, max_angle) = vandermonde_angles()?;
    let (again, max_again) = vandermonde_angles()?;
    ensure(angle < 0.171, || format!("Melkman angle {angle} deg"))?;
    ensure(max_angle > 6.695, || format!("max angle {max_angle} deg"))?;
    ensure(
        (angle - again).abs() <= 1e-6 && (max_angle - max_again).abs() <= 1e-6,
        || "angles not reproducible".into(),
    )?;
    Ok(format!("Melkman angle {angle:.9} deg, max admissible {max_angle:.9} deg"))
}

fn width_law() -> Outcome {
    let start = Instant::now();
    let tol = TolerancePolicy::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0xA4);
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for i in 0..100 {
        let m = 2 + i % 9;
        let a = samples::gapped_matrix(&mut rng, m);
        let svd = compute_svd(&a, &tol).map_err(|e| e.to_string())?;
        for n in 0..=m {
            let d = criteria::distance(&a, &svd.leading_left(n), &tol).map_err(|e| e.to_string())?;
            let rel = (d - svd.sigma_or_zero(n)).abs() / svd.sigma_max();
            worst = worst.max(rel);
            cases += 1;
        }
    }
    let elapsed = start.elapsed();
    ensure(worst <= 1e-9, || format!("worst relative deviation {worst:e}"))?;
    ensure(elapsed < Duration::from_secs(10), || format!("runtime {elapsed:?}"))?;
    Ok(format!("{cases} (A, n) cases, worst |E - sigma_(n+1)|/sigma_1 = {worst:.1e}, {elapsed:?}"))
}

fn random_candidate(rng: &mut ChaCha8Rng, svd: &nwidth::SvdFactorization, n: usize) -> Subspace {
    let m = svd.dim();
    match rng.random_range(0..4) {
        0 => svd.leading_left(n),
        1 | 2 => {
            let spread = [0.02, 0.1, 0.3, 1.0][rng.random_range(0..4)];
            samples::candidate_subspace(rng, svd, n, spread)
        }
        _ => {
            let raw = DMatrix::from_fn(m, n, |_, _| rng.random_range(-1.0..1.0));
            orthonormalize_columns(&raw, &TolerancePolicy::default()).unwrap().subspace
        }
    }
}

fn criterion_equivalence() -> Outcome {
    let tol = TolerancePolicy::default();
    let opts = MinorOptions::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0xE5);
    let (mut optimal, mut disagreements) = (0, Vec::new());
    for case in 0..500 {
        let m = rng.random_range(2..=6);
        let n = rng.random_range(1..m);
        let a = samples::gapped_matrix(&mut rng, m);
        let svd = compute_svd(&a, &tol).map_err(|e| e.to_string())?;
        let x = random_candidate(&mut rng, &svd, n);
        let psd = check_optimal_psd(&svd, &x, &tol).map_err(|e| e.to_string())?.optimal;
        let minors = check_optimal_signed_minors(&svd, &x, &opts, &tol)
            .map_err(|e| e.to_string())?
            .optimal;
        let direct = check_optimal_distance(&svd, &x, &tol).map_err(|e| e.to_string())?.optimal;
        let complement = if n + 2 <= m {
            Some(check_optimal_complement(&svd, &x, &tol).map_err(|e| e.to_string())?.optimal)
        } else {
            None
        };
        optimal += usize::from(psd);
        if minors != psd || direct != psd || complement.is_some_and(|c| c != psd) {
            disagreements.push(format!(
                "case {case} (m={m}, n={n}): psd {psd} minors {minors} direct {direct} complement {complement:?}"
            ));
        }
    }
    ensure(disagreements.is_empty(), || disagreements.join("; "))?;
    ensure(optimal > 50 && optimal < 450, || format!("unbalanced sample: {optimal} optimal"))?;
    Ok(format!("500 pairs, {optimal} optimal, 0 disagreements"))
}

fn determinant_identity() -> Outcome {
    let tol = TolerancePolicy::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0xD6);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let m = rng.random_range(2..=7);
        let n = rng.random_range(1..m);
        let a = samples::gapped_matrix(&mut rng, m);
        let svd = compute_svd(&a, &tol).map_err(|e| e.to_string())?;
        let x = random_candidate(&mut rng, &svd, n);
        let cm = build_criterion_matrix(&svd, &x, &tol).map_err(|e| e.to_string())?;
        let mut idx: Vec<usize> = (0..m).filter(|&k| k != n && rng.random_bool(0.6)).collect();
        if idx.is_empty() {
            idx.push(0);
        }
        let lhs = cm.principal_minor(&idx);

        let s = svd.sigma();
        let pivot = s[n] * s[n];
        let w = svd.u().tr_mul(x.basis());
        let mj = DMatrix::from_fn(n, n, |i, j| {
            (0..m)
                .map(|k| {
                    let f = if idx.contains(&k) { pivot / (pivot - s[k] * s[k]) } else { 1.0 };
                    f * w[(k, i)] * w[(k, j)]
                })
                .sum::<f64>()
        });
        let factor: f64 = idx.iter().map(|&k| pivot - s[k] * s[k]).product();
        let rhs = mj.determinant() * factor;
        let rel = (lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(f64::MIN_POSITIVE);
        worst = worst.max(rel);
        ensure(rel <= 1e-8, || format!("det C[J] = {lhs:e} vs {rhs:e} (J = {idx:?}, n = {n})"))?;
    }
    Ok(format!("200 triples, worst relative error {worst:.1e}"))
}

fn scaling_range_suite() -> Outcome {
    let tol = TolerancePolicy::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0x57);
    let (mut inside, mut outside) = (0, 0);
    for _ in 0..30 {
        let a = samples::gapped_symmetric_psd(&mut rng, 3);
        let svd = compute_svd(&a, &tol).map_err(|e| e.to_string())?;
        let s = svd.sigma().to_vec();
        let extreme = rank1_max_angle_3d(&svd, &tol).map_err(|e| e.to_string())?;
        for d in 0..5 {
            let alpha = if d == 4 { extreme } else { rng.random_range(-extreme..extreme) };
            let (w1, w3) = (alpha.cos(), alpha.sin());
            let range = symmetric_scaling_range(&a, w1, w3, &tol).map_err(|e| e.to_string())?;
            let x = svd.from_left_coefficients(&[w1, 0.0, w3]);
            let error_at = |c: f64| {
                let r = &x * x.transpose() * c;
                spectral_norm(&Matrix::new(a.as_dmatrix() - r).unwrap())
            };
            for k in 0..20 {
                let c = range.lower + (range.upper - range.lower) * k as f64 / 19.0;
                let e = error_at(c);
                ensure((e - s[1]).abs() <= 1e-9, || {
                    format!("interior scale {c} in [{}, {}]: error {e} vs {}", range.lower, range.upper, s[1])
                })?;
                inside += 1;
            }
            for k in 0..20 {
                let offset = 1e-3 * s[0] * (1.0 + (k / 2) as f64);
                let c = if k % 2 == 0 { range.lower - offset } else { range.upper + offset };
                let e = error_at(c);
                ensure(e > s[1] + 1e-6, || format!("exterior scale {c}: error {e} vs {}", s[1]))?;
                outside += 1;
            }
        }
    }
    Ok(format!("{inside} interior and {outside} exterior scalings"))
}

fn rank1_cross_check() -> Outcome {
    let tol = TolerancePolicy::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0x81);
    let mut admissible = 0;
    for case in 0..200 {
        let m = rng.random_range(3..=8);
        let a = samples::gapped_matrix(&mut rng, m);
        let svd = compute_svd(&a, &tol).map_err(|e| e.to_string())?;
        let theta: f64 = rng.random_range(0.0..std::f64::consts::FRAC_PI_2);
        let tail = DVector::from_fn(m - 2, |_, _| rng.random_range(-1.0..1.0)).normalize();
        let mut w = vec![theta.cos(), 0.0];
        w.extend(tail.iter().map(|t| t * theta.sin()));
        let region = rank1_admissible(&svd, &w, &tol).map_err(|e| e.to_string())?;
        let line = Subspace::line(&svd.from_left_coefficients(&w)).map_err(|e| e.to_string())?;
        let psd = check_optimal_psd(&svd, &line, &tol).map_err(|e| e.to_string())?;
        ensure(region.admissible == psd.optimal, || {
            format!("case {case}: admissible {} vs psd {}", region.admissible, psd.optimal)
        })?;
        admissible += usize::from(region.admissible);
    }
    Ok(format!("200 directions, {admissible} admissible, 0 disagreements"))
}

fn stp_iteration_suite() -> Outcome {
    let tol = TolerancePolicy::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0x97);
    let (mut spaces, mut steps_checked) = (0, 0);
    for i in 0..50 {
        let m = 3 + i % 6;
        let a = samples::random_stp(&mut rng, m);
        let svd = compute_svd(&a, &tol).map_err(|e| e.to_string())?;
        let s = svd.sigma();
        ensure(s.windows(2).all(|p| p[0] > p[1] * (1.0 + 1e-8)), || {
            format!("matrix {i}: singular values not simple {s:?}")
        })?;
        for n in 0..m {
            let p = sign_changes(&svd.v_col(n)).map_err(|e| e.to_string())?;
            ensure(p.s_minus == n && p.s_plus == n, || {
                format!("matrix {i}: v_{} has S- = {}, S+ = {}", n + 1, p.s_minus, p.s_plus)
            })?;
        }
        for n in 1..m - 1 {
            let x = melkman_optimal_space(&a, n, Side::Left, &tol)
                .map_err(|e| format!("matrix {i}, n = {n}: {e}"))?;
            let y = melkman_optimal_space(&a, n, Side::Right, &tol)
                .map_err(|e| format!("matrix {i}, n = {n}: {e}"))?;
            spaces += 2;
            let steps = iterate(&a, &x.subspace, &y.subspace, 6, &tol).map_err(|e| e.to_string())?;
            for st in &steps {
                ensure(st.x_optimal && st.y_optimal, || {
                    format!("matrix {i}, n = {n}, step {}: optimality lost", st.p)
                })?;
                for j in 0..n {
                    let worst = st.x_deficiency[j].max(st.y_deficiency[j]);
                    ensure(worst <= st.bound[j] + 1e-9, || {
                        format!("matrix {i}, n = {n}, p = {}, j = {}: {worst:e} > {:e}", st.p, j + 1, st.bound[j])
                    })?;
                }
                steps_checked += 1;
            }
        }
    }
    Ok(format!("50 matrices, {spaces} certified Melkman spaces, {steps_checked} steps within bounds"))
}

fn karlovitz_strictness() -> Outcome {
    let tol = TolerancePolicy::default();
    let svd = compute_svd(&hankel3(), &tol).map_err(|e| e.to_string())?;
    let x = Subspace::line(&DVector::from_element(3, 1.0)).map_err(|e| e.to_string())?;
    let karlovitz = check_karlovitz_sufficient(&svd, &x, &tol).map_err(|e| e.to_string())?;
    ensure(!karlovitz, || "Karlovitz test unexpectedly passes".into())?;
    let psd = check_optimal_psd(&svd, &x, &tol).map_err(|e| e.to_string())?;
    let minors = check_optimal_signed_minors(&svd, &x, &MinorOptions::default(), &tol)
        .map_err(|e| e.to_string())?;
    let direct = check_optimal_distance(&svd, &x, &tol).map_err(|e| e.to_string())?;
    ensure(psd.optimal && minors.optimal && direct.optimal, || {
        format!("exact criteria: psd {} minors {} direct {}", psd.optimal, minors.optimal, direct.optimal)
    })?;
    ensure(psd.boundary, || "boundary flag not raised".into())?;
    Ok("Karlovitz fails; PSD, signed minors and direct distance pass (boundary)".into())
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 10] = [
        ("golden Hankel SVD and extreme angle", golden_hankel_svd),
        ("golden Hankel-preserving approximant", golden_hankel_approximant),
        ("golden Vandermonde Melkman angles", golden_vandermonde),
        ("width law on 100 gapped matrices", width_law),
        ("criterion equivalence on 500 pairs", criterion_equivalence),
        ("determinant identity on 200 triples", determinant_identity),
        ("scaling range law", scaling_range_suite),
        ("rank-1 admissibility vs PSD", rank1_cross_check),
        ("STP sign property, Melkman spaces and iteration", stp_iteration_suite),
        ("Karlovitz strictness on the boundary vector", karlovitz_strictness),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS [{:>2}] {name}: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL [{:>2}] {name}: {detail}", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
