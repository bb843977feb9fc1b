use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use pseudoparabolic::verification::case1;
use pseudoparabolic::{run_inverse, InverseScheme, InverseSchemeConfig};

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR"))
        .join("cli")
        .join(name);
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn ppinv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ppinv"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const CASE2_PROBLEM: &str = "
horizon = 1
eta = 1
kappa = t + 1
kappa_min = 1
kappa_max = 2
kappa_dt_max = 1
f = s^3
p = t*sin(pi*x) + t*sin(2*pi*x)
f_tilde = (2*t*(1 + pi^2) + pi^2*(t + 1)*(1 + t^2))*sin(pi*x) - (t*sin(pi*x) + t*sin(2*pi*x))*sin(2*pi*t) - (1 + t^2)^3*sin(pi*x)^3
u0 = sin(pi*x)
omega = indicator(0.4, 0.6)
m = (cos(0.4*pi) - cos(0.6*pi))/pi * (1 + t^2)
h = sin(2*pi*t)
u_exact = (1 + t^2)*sin(pi*x)
";

#[test]
fn check_flags_the_start_time_on_case1() {
    let dir = scratch("check");
    let o = ppinv(&[
        "check",
        "case=case1",
        "nx=100",
        "nt=40",
        "-o",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(
        stdout(&o).contains("AS-(9) violated at t=0"),
        "{}",
        stdout(&o)
    );
    assert_eq!(stdout(&o).lines().count(), 1);
    let text = std::fs::read_to_string(dir.join("check.txt")).unwrap();
    assert!(text.contains("AS-(9) violated at t=0"));
}

#[test]
fn inverse_case1_writes_the_three_tables() {
    let dir = scratch("inverse");
    let o = ppinv(&[
        "command=inverse",
        "case=1",
        "nx=200",
        "nt=200",
        &format!("output_dir={}", dir.display()),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for f in ["solution.csv", "source.csv", "errors.csv"] {
        assert!(dir.join(f).is_file(), "{f}");
    }
    let solution = std::fs::read_to_string(dir.join("solution.csv")).unwrap();
    assert_eq!(solution.lines().next(), Some("t,x,u_num,u_exact,abs_err"));
    // four snapshot times, 201 nodes each
    assert_eq!(solution.lines().count(), 1 + 4 * 201);
    let source = std::fs::read_to_string(dir.join("source.csv")).unwrap();
    assert_eq!(
        source.lines().next(),
        Some("t,h_num,h_exact,abs_err,denominator")
    );
    assert_eq!(source.lines().count(), 1 + 200);
    let errors = std::fs::read_to_string(dir.join("errors.csv")).unwrap();
    assert_eq!(
        errors.lines().next(),
        Some("t,u_max_err,u_l2_err,h_abs_err")
    );
    // no source value exists at t = 0
    assert_eq!(errors.lines().nth(1), Some("0.0,0.0,0.0,"));
}

#[test]
fn source_table_round_trips_exactly() {
    let dir = scratch("roundtrip");
    let o = ppinv(&[
        "inverse",
        "case=1",
        "nx=60",
        "nt=60",
        "-o",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let c = case1();
    let g = c.spec.grid(60, 60).unwrap();
    let traj = run_inverse(
        &c.spec,
        &InverseSchemeConfig::new(InverseScheme::CnSplitting, g),
    )
    .unwrap();
    let mut reader = csv::Reader::from_path(dir.join("source.csv")).unwrap();
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), traj.source_values.len());
    for (row, s) in rows.iter().zip(&traj.source_values) {
        assert_eq!(row[0].parse::<f64>().unwrap().to_bits(), s.time.to_bits());
        assert_eq!(row[1].parse::<f64>().unwrap().to_bits(), s.value.to_bits());
        assert_eq!(
            row[4].parse::<f64>().unwrap().to_bits(),
            s.denominator.to_bits()
        );
    }
}

#[test]
fn flags_override_the_config_file() {
    let dir = scratch("override");
    let cfg = dir.join("run.cfg");
    std::fs::write(&cfg, "command = check\ncase = case2\nnt = 200\nnx = 20\n").unwrap();
    let o = ppinv(&[
        "--config",
        cfg.to_str().unwrap(),
        "--nt",
        "40",
        "-o",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("nx=20 nt=40"), "{}", stdout(&o));
}

#[test]
fn config_errors_exit_1_with_the_line() {
    let dir = scratch("badcfg");
    let cfg = dir.join("run.cfg");
    std::fs::write(&cfg, "command = check\ncase = case2\nspeed = 3\n").unwrap();
    let o = ppinv(&["--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(
        stderr(&o).contains("run.cfg:3: unknown key 'speed'"),
        "{}",
        stderr(&o)
    );
    let o = ppinv(&["direct", "case=1", "nx=0"]);
    assert_eq!(o.status.code(), Some(1));
    let o = ppinv(&["--bogus"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn vanishing_profile_exits_2() {
    let dir = scratch("identifiability");
    let problem = dir.join("p0.txt");
    let text = CASE2_PROBLEM
        .replace("p = t*sin(pi*x) + t*sin(2*pi*x)", "p = 0")
        .replace("u_exact = (1 + t^2)*sin(pi*x)", "");
    std::fs::write(&problem, text).unwrap();
    let o = ppinv(&[
        "inverse",
        "case=custom",
        &format!("problem={}", problem.display()),
        "nx=40",
        "nt=40",
        "-o",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("step 1"), "{}", stderr(&o));
}

#[test]
fn boundary_incompatible_data_exit_3() {
    let dir = scratch("assumption");
    let problem = dir.join("p.txt");
    let text = "horizon = 1\neta = 1\nkappa = 1\np = sin(pi*x)\nu0 = 1\nomega = indicator(0.4, 0.6)\nm = 1\n";
    std::fs::write(&problem, text).unwrap();
    let o = ppinv(&[
        "inverse",
        "case=custom",
        &format!("problem={}", problem.display()),
        "nx=20",
        "nt=20",
        "-o",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn custom_problem_matches_the_builtin_case() {
    let dir = scratch("custom");
    let problem = dir.join("case2.txt");
    std::fs::write(&problem, CASE2_PROBLEM).unwrap();
    let custom = dir.join("custom");
    let builtin = dir.join("builtin");
    let p = format!("problem={}", problem.display());
    let o = ppinv(&[
        "inverse",
        "case=custom",
        &p,
        "nx=50",
        "nt=50",
        "-o",
        custom.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = ppinv(&[
        "inverse",
        "case=2",
        "nx=50",
        "nt=50",
        "-o",
        builtin.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let read = |d: &Path| -> Vec<f64> {
        csv::Reader::from_path(d.join("source.csv"))
            .unwrap()
            .records()
            .map(|r| r.unwrap()[1].parse().unwrap())
            .collect()
    };
    for (a, b) in read(&custom).iter().zip(read(&builtin)) {
        assert!((a - b).abs() <= 1e-9 * (1.0 + b.abs()), "{a} vs {b}");
    }
}

#[test]
fn converge_reports_orders() {
    let dir = scratch("converge");
    let o = ppinv(&[
        "converge",
        "case=2",
        "scheme=rothe",
        "refine=time",
        "nx=200",
        "levels=25,50,100",
        "-o",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.join("converge.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "nx,nt,u_final_max_err,h_max_err,order_u,order_h");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("200,25,"));
    assert!(lines[1].ends_with(",,,"), "{}", lines[1]);
    let order: f64 = lines[3].split(',').nth(4).unwrap().parse().unwrap();
    assert!((0.8..=1.2).contains(&order), "{order}");
}

#[test]
fn noisy_runs_depend_only_on_the_seed() {
    let dir = scratch("noise");
    let run = |seed: &str, out: &str| {
        let d = dir.join(out);
        let o = ppinv(&[
            "inverse",
            "case=2",
            "nx=40",
            "nt=40",
            "noise=1e-4",
            &format!("seed={seed}"),
            "-o",
            d.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        std::fs::read(d.join("source.csv")).unwrap()
    };
    let a = run("7", "a");
    assert_eq!(a, run("7", "b"));
    assert_ne!(a, run("8", "c"));
}
