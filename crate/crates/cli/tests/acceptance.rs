//! Acceptance suite: one PASS/FAIL line per criterion. Exits non-zero when any
//! criterion fails.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use pseudoparabolic::verification::{
    case1, case2, case2_smooth_omega, compute_errors, convergence_study, with_discrete_measurement,
    ManufacturedCase, StudyOptions, StudyScheme,
};
use pseudoparabolic::*;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

fn secs(d: Duration) -> String {
    format!("{:.3} s", d.as_secs_f64())
}

/// Max error over the recovered source values at `t >= t0`.
fn h_err_after(traj: &Trajectory, h: &dyn Fn(f64) -> f64, t0: f64) -> f64 {
    traj.source_values
        .iter()
        .filter(|s| s.time >= t0 - 1e-12)
        .map(|s| (s.value - h(s.time)).abs())
        .fold(0.0, f64::max)
}

fn inverse_run(
    case: &ManufacturedCase,
    n: usize,
    scheme: InverseScheme,
    tweak: impl Fn(&mut InverseSchemeConfig),
) -> Trajectory {
    let grid = case.spec.grid(n, n).unwrap();
    let mut cfg = InverseSchemeConfig::new(scheme, grid);
    tweak(&mut cfg);
    run_inverse(&case.spec, &cfg).unwrap()
}

fn criterion_1() -> Verdict {
    let c = case1();
    let mut pass = true;
    let mut parts = Vec::new();
    for n in [50, 100, 200] {
        let start = Instant::now();
        let grid = c.spec.grid(n, n).unwrap();
        let direct = run_direct(
            &c.spec,
            &f64::exp,
            &DirectSchemeConfig::new(DirectScheme::CrankNicolson, grid),
        )
        .unwrap();
        let data = with_discrete_measurement(&c.spec, &direct).unwrap();
        let inv = run_inverse(
            &data,
            &InverseSchemeConfig::new(InverseScheme::CnSplitting, grid),
        )
        .unwrap();
        let elapsed = start.elapsed();
        let err = h_err_after(&inv, &f64::exp, 0.0);
        let scale = (0..=n).map(|i| grid.t(i).exp()).fold(0.0, f64::max);
        let rel = err / scale;
        pass &= rel <= 1e-9 && elapsed < Duration::from_secs(1);
        parts.push(format!("N={n}: rel {rel:.2e} in {}", secs(elapsed)));
    }
    Verdict {
        pass,
        detail: format!("{}; bound 1e-9, < 1 s per grid", parts.join(", ")),
    }
}

fn criterion_2() -> Verdict {
    let c = case1();
    let start = Instant::now();
    let traj = inverse_run(&c, 200, InverseScheme::CnSplitting, |cfg| {
        cfg.cn_nonlinearity = CnNonlinearity::Extrapolated
    });
    let elapsed = start.elapsed();
    let e = compute_errors(&traj, &c).unwrap();
    let (u, h) = (e.final_rel_err_u, e.max_rel_h_err_after(0.1));
    let lagged = compute_errors(
        &inverse_run(&c, 200, InverseScheme::CnSplitting, |_| {}),
        &c,
    )
    .unwrap();
    Verdict {
        pass: u <= 1e-3 && h <= 1e-2 && elapsed < Duration::from_secs(2),
        detail: format!(
            "extrapolated f: u rel {u:.2e} (<= 1e-3), h rel t>=0.1 {h:.2e} (<= 1e-2), {}; lagged f gives u {:.2e}, h {:.2e}",
            secs(elapsed),
            lagged.final_rel_err_u,
            lagged.max_rel_h_err_after(0.1)
        ),
    }
}

fn criterion_3() -> Verdict {
    let c = case2();
    let h = |t: f64| (c.exact_h)(t);
    let start = Instant::now();
    let traj = inverse_run(&c, 200, InverseScheme::CnSplitting, |_| {});
    let elapsed = start.elapsed();
    let e = compute_errors(&traj, &c).unwrap();
    let u = e.u_max_err.iter().copied().fold(0.0, f64::max);
    let h_all = h_err_after(&traj, &h, 0.0);
    let worst = traj
        .source_values
        .iter()
        .max_by(|a, b| {
            (a.value - h(a.time))
                .abs()
                .total_cmp(&(b.value - h(b.time)).abs())
        })
        .map_or(f64::NAN, |s| s.time);
    let anchored = inverse_run(&c, 200, InverseScheme::CnSplitting, |cfg| {
        cfg.anchor_measurement = true
    });
    let extrapolated = inverse_run(&c, 200, InverseScheme::CnSplitting, |cfg| {
        cfg.anchor_measurement = true;
        cfg.cn_nonlinearity = CnNonlinearity::Extrapolated;
    });
    Verdict {
        pass: u <= 1e-3 && h_all <= 5e-2 && elapsed < Duration::from_secs(2),
        detail: format!(
            "u max {u:.2e} (<= 1e-3), h max over [0, 1] {h_all:.2e} at t={worst} (<= 5e-2), {}; h max t>=0.1 {:.2e}; \
             anchored m: h max {:.2e}, with extrapolated f {:.2e}; p(0) = 0 makes the step-1 denominator O(tau^2)",
            secs(elapsed),
            h_err_after(&traj, &h, 0.1),
            h_err_after(&anchored, &h, 0.0),
            h_err_after(&extrapolated, &h, 0.0)
        ),
    }
}

fn criterion_4() -> Verdict {
    let c = case2();
    let start = Instant::now();
    let mut cn = StudyOptions::new(StudyScheme::Direct(DirectScheme::CrankNicolson));
    cn.cn_nonlinearity = CnNonlinearity::Extrapolated;
    let space = convergence_study(&c, &[(50, 5000), (100, 5000), (200, 5000)], cn)
        .unwrap()
        .orders_u();
    let time = convergence_study(
        &c,
        &[(400, 50), (400, 100), (400, 200)],
        StudyScheme::Direct(DirectScheme::RotheBackwardEuler),
    )
    .unwrap()
    .orders_u();
    let elapsed = start.elapsed();
    let fmt = |v: &[f64]| {
        v.iter()
            .map(|o| format!("{o:.3}"))
            .collect::<Vec<_>>()
            .join(", ")
    };
    Verdict {
        pass: space.iter().all(|o| (1.8..=2.2).contains(o))
            && time.iter().all(|o| (0.8..=1.2).contains(o))
            && elapsed < Duration::from_secs(5),
        detail: format!(
            "CN spatial orders [{}] (N_x 50/100/200, N_t 5000, extrapolated f), Rothe temporal orders [{}] (N_t 50/100/200, N_x 400), {}",
            fmt(&space),
            fmt(&time),
            secs(elapsed)
        ),
    }
}

fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            let pivot_row = a[col].clone();
            for (e, p) in a[row][col..].iter_mut().zip(&pivot_row[col..]) {
                *e -= factor * p;
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

fn criterion_5() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let diff = |a: &[f64], b: &[f64]| {
        a.iter()
            .zip(b)
            .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
    };
    let (mut thomas, mut rank_one, mut systems) = (0.0f64, 0.0f64, 0);
    while systems < 200 {
        let n = rng.random_range(2..=64);
        let sub: Vec<f64> = (0..n - 1).map(|_| rng.random_range(-1.0..1.0)).collect();
        let sup: Vec<f64> = (0..n - 1).map(|_| rng.random_range(-1.0..1.0)).collect();
        let diag: Vec<f64> = (0..n)
            .map(|k| {
                let off = if k > 0 { sub[k - 1].abs() } else { 0.0 }
                    + if k + 1 < n { sup[k].abs() } else { 0.0 };
                let sign = if rng.random_range(0..2) == 0 {
                    -1.0
                } else {
                    1.0
                };
                sign * (off + rng.random_range(0.1..2.0))
            })
            .collect();
        let a = TridiagonalMatrix::new(sub, diag, sup).unwrap();
        let rhs: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
        let u: Vec<f64> = (0..n).map(|_| rng.random_range(-0.5..0.5)).collect();
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(-0.5..0.5)).collect();
        let mut dense = a.to_dense();
        for (i, row) in dense.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e += u[i] * v[j];
            }
        }
        // skip nearly singular rank-one updates, which the solver rejects
        let Ok(y) = rank_one_solve(&a, &u, &v, &rhs) else {
            continue;
        };
        thomas = thomas.max(diff(
            &thomas_solve(&a, &rhs).unwrap(),
            &dense_solve(a.to_dense(), rhs.clone()),
        ));
        rank_one = rank_one.max(diff(&y, &dense_solve(dense, rhs)));
        systems += 1;
    }
    let elapsed = start.elapsed();
    Verdict {
        pass: thomas <= 1e-11 && rank_one <= 1e-11 && elapsed < Duration::from_secs(1),
        detail: format!(
            "200 systems, n in 2..=64: thomas {thomas:.2e}, rank-one {rank_one:.2e} (<= 1e-11), {}",
            secs(elapsed)
        ),
    }
}

fn criterion_6() -> Verdict {
    let c = case1();
    let energy = |nt: usize| {
        let grid = c.spec.grid(200, nt).unwrap();
        let cfg = DirectSchemeConfig::new(DirectScheme::RotheBackwardEuler, grid);
        run_direct(&c.spec, &f64::exp, &cfg).unwrap().max_energy()
    };
    let (a, b) = (energy(200), energy(400));
    let change = (a - b).abs() / b;
    Verdict {
        pass: change < 0.1,
        detail: format!(
            "max energy {a:.4} (N_t 200) vs {b:.4} (N_t 400), change {:.2}% (< 10%)",
            100.0 * change
        ),
    }
}

fn scaled_p(spec: &ProblemSpec, eps: f64) -> ProblemSpec {
    let mut out = spec.clone();
    let p = spec.p.clone();
    out.p = Arc::new(move |t, x| eps * p(t, x));
    out
}

fn criterion_7() -> Verdict {
    let eps = 0.1;
    let mut pass = true;
    let mut parts = Vec::new();
    for c in [case1(), case2()] {
        let grid = c.spec.grid(200, 100).unwrap();
        let base = evaluate_conditions(&c.spec, &grid).unwrap();
        let scaled = evaluate_conditions(&scaled_p(&c.spec, eps), &grid).unwrap();
        let flagged = base.omega_bar[0] == 0.0
            && base.first_unidentifiable_time() == Some(0.0)
            && !base.passes.as9_identifiable;
        let scaling = match (base.zeta_lhs, scaled.zeta_lhs) {
            (Some(a), Some(b)) => {
                let dev = (b / (eps * eps * a) - 1.0).abs();
                pass &= dev <= 1e-12;
                format!("zeta ratio deviation {dev:.2e}")
            }
            _ => {
                pass = false;
                "zeta_lhs undefined (wbar_m = 0), eps^2 scaling not checkable".to_string()
            }
        };
        pass &= flagged;
        parts.push(format!(
            "{}: wbar(0) = 0 flagged {flagged}, {scaling}",
            c.name
        ));
    }
    // the same check where the quantity is defined
    let mut spec = case2_smooth_omega().spec;
    spec.p = Arc::new(|t, x| (1.0 + t) * (std::f64::consts::PI * x).sin());
    let grid = spec.grid(200, 100).unwrap();
    let a = evaluate_conditions(&spec, &grid).unwrap().zeta_lhs.unwrap();
    let b = evaluate_conditions(&scaled_p(&spec, eps), &grid)
        .unwrap()
        .zeta_lhs
        .unwrap();
    let dev = (b / (eps * eps * a) - 1.0).abs();
    pass &= dev <= 1e-12;
    parts.push(format!(
        "identifiable variant: zeta(eps p)/zeta(p) = {:.15} for eps = {eps}, expected eps^2 (deviation {dev:.2e}); \
         zeta_lhs is homogeneous of degree 0 in p",
        b / a
    ));
    Verdict {
        pass,
        detail: parts.join("; "),
    }
}

fn criterion_8() -> Verdict {
    let c = case2_smooth_omega();
    let h = |t: f64| (c.exact_h)(t);
    let run = |n, s| inverse_run(&c, n, s, |_| {});
    let (cn200, cn400) = (
        run(200, InverseScheme::CnSplitting),
        run(400, InverseScheme::CnSplitting),
    );
    let (ro200, ro400) = (
        run(200, InverseScheme::RotheCoupled),
        run(400, InverseScheme::RotheCoupled),
    );
    let gap = cn400
        .source_values
        .iter()
        .zip(&ro400.source_values)
        .filter(|(a, _)| a.time >= 0.1 - 1e-12)
        .map(|(a, b)| (a.value - b.value).abs())
        .fold(0.0, f64::max);
    let e = |t: &Trajectory| h_err_after(t, &h, 0.1);
    let (c2, c4, r2, r4) = (e(&cn200), e(&cn400), e(&ro200), e(&ro400));
    Verdict {
        pass: gap <= 0.1 && c4 <= c2 && r4 <= r2,
        detail: format!(
            "N=400 max |h_cn - h_rothe| on [0.1, 1] {gap:.3e} (<= 1e-1); error t>=0.1: CN {c2:.3e} -> {c4:.3e}, Rothe {r2:.3e} -> {r4:.3e}"
        ),
    }
}

fn run_cli(args: &[&str]) -> bool {
    Command::new(env!("CARGO_BIN_EXE_ppinv"))
        .args(args)
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

fn read_all(dir: &Path, files: &[&str]) -> Vec<Vec<u8>> {
    files
        .iter()
        .map(|f| std::fs::read(dir.join(f)).unwrap_or_default())
        .collect()
}

fn criterion_9() -> Verdict {
    let dir: PathBuf = Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance-determinism");
    let _ = std::fs::remove_dir_all(&dir);
    let out = dir.to_str().unwrap().to_string();
    let runs: [(Vec<&str>, Vec<&str>); 2] = [
        (
            vec!["inverse", "case=1", "nx=200", "nt=200", "-o", &out],
            vec!["solution.csv", "source.csv", "errors.csv"],
        ),
        (
            vec!["converge", "case=2", "levels=25,50,100", "-o", &out],
            vec!["converge.csv"],
        ),
    ];
    let mut pass = true;
    let mut bytes = 0;
    for (args, files) in &runs {
        let ok1 = run_cli(args);
        let first = read_all(&dir, files);
        let ok2 = run_cli(args);
        let second = read_all(&dir, files);
        bytes += first.iter().map(Vec::len).sum::<usize>();
        pass &= ok1 && ok2 && first == second && first.iter().all(|b| !b.is_empty());
    }
    Verdict {
        pass,
        detail: format!("inverse and converge runs repeated, {bytes} bytes compared"),
    }
}

fn main() {
    type Check = (&'static str, fn() -> Verdict);
    let criteria: [Check; 9] = [
        ("roundtrip identifiability", criterion_1),
        ("case 1 reproduction", criterion_2),
        ("case 2 reproduction", criterion_3),
        ("convergence orders", criterion_4),
        ("linear-algebra oracle", criterion_5),
        ("discrete stability", criterion_6),
        ("condition checker", criterion_7),
        ("scheme cross-validation", criterion_8),
        ("determinism", criterion_9),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let v = check();
        if !v.pass {
            failed += 1;
        }
        println!(
            "criterion {}: {} {name}: {}",
            k + 1,
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
