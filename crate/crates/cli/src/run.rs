//! Dispatch of the four commands.

use std::path::PathBuf;

use pseudoparabolic::verification::{
    case1, case1_paper_rounded, case2, case2_paper_rounded, case2_smooth_omega, compute_errors,
    convergence_study, ManufacturedCase, StudyOptions, StudyScheme,
};
use pseudoparabolic::{
    check_interpretation_report, evaluate_conditions, run_direct, run_inverse, tabulated,
    DirectScheme, DirectSchemeConfig, InverseScheme, InverseSchemeConfig, ProblemSpec, ScalarFn,
    SpaceTimeGrid, Trajectory,
};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{CaseName, Command, ConfigError, RunConfig, Scheme, Study};
use crate::output::{self, num};
use crate::problem::{self, default_snapshots};
use crate::CliError;

/// Result of a successful command.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    /// One-line summary for standard output.
    pub summary: String,
    pub files: Vec<PathBuf>,
}

/// A resolved problem with whatever exact data it has.
struct Loaded {
    name: String,
    spec: ProblemSpec,
    case: Option<ManufacturedCase>,
    source: Option<ScalarFn>,
    snapshots: Vec<f64>,
    has_measurement: bool,
}

fn builtin(case: ManufacturedCase, cfg: &RunConfig) -> Loaded {
    Loaded {
        name: case.name.clone(),
        spec: case.spec.clone(),
        source: Some(case.exact_h.clone()),
        snapshots: cfg
            .snapshot_times
            .clone()
            .unwrap_or_else(|| case.snapshot_times.clone()),
        case: Some(case),
        has_measurement: true,
    }
}

fn load(cfg: &RunConfig) -> Result<Loaded, CliError> {
    let rounded = cfg.paper_rounded_m;
    Ok(match cfg.case {
        CaseName::Case1 => builtin(
            if rounded {
                case1_paper_rounded()
            } else {
                case1()
            },
            cfg,
        ),
        CaseName::Case2 => builtin(
            if rounded {
                case2_paper_rounded()
            } else {
                case2()
            },
            cfg,
        ),
        CaseName::Case2Smooth => {
            if rounded {
                return Err(ConfigError::Invalid(
                    "paper_rounded_m applies to case1 and case2 only".into(),
                )
                .into());
            }
            builtin(case2_smooth_omega(), cfg)
        }
        CaseName::Custom => {
            let path = cfg.problem.as_ref().expect("validated with the config");
            if rounded {
                return Err(ConfigError::Invalid(
                    "paper_rounded_m applies to case1 and case2 only".into(),
                )
                .into());
            }
            let p = problem::load(path)?;
            let snapshots = cfg
                .snapshot_times
                .clone()
                .or(p.snapshot_times.clone())
                .unwrap_or_else(|| default_snapshots(p.spec.horizon));
            Loaded {
                name: "custom".into(),
                spec: p.spec,
                case: p.case,
                source: p.source,
                snapshots,
                has_measurement: p.has_measurement,
            }
        }
    })
}

/// Replaces `m` by grid values `m(t_i) (1 + noise xi_i)`, `xi_i` uniform on
/// `[-1, 1]`, and `m'` by their backward differences.
fn perturb_measurement(spec: &mut ProblemSpec, grid: &SpaceTimeGrid, noise: f64, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values: Vec<f64> = (0..=grid.t_count())
        .map(|i| (spec.measurement)(grid.t(i)) * (1.0 + noise * rng.random_range(-1.0..=1.0)))
        .collect();
    set_tabulated_measurement(spec, grid, values);
}

fn set_tabulated_measurement(spec: &mut ProblemSpec, grid: &SpaceTimeGrid, values: Vec<f64>) {
    let tau = grid.tau();
    let mut dm: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]) / tau).collect();
    dm.insert(0, dm[0]);
    spec.measurement = tabulated(0.0, tau, values);
    spec.measurement_derivative = Some(tabulated(0.0, tau, dm));
}

fn scheme_label(s: Scheme) -> &'static str {
    match s {
        Scheme::Cn => "cn",
        Scheme::Rothe => "rothe",
    }
}

fn fmt_list(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|o| format!("{o:.4}")).collect();
    format!("[{}]", items.join(", "))
}

pub fn execute(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let dir = &cfg.output_dir;
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.clone(),
        source,
    })?;
    let mut loaded = load(cfg)?;
    let head = format!(
        "{} {} {}",
        command_label(cfg.command),
        loaded.name,
        scheme_label(cfg.scheme)
    );
    match cfg.command {
        Command::Direct => direct(cfg, &loaded, &head),
        Command::Inverse => inverse(cfg, &mut loaded, &head),
        Command::Converge => converge(cfg, &loaded, &head),
        Command::Check => check(cfg, &loaded, &head),
    }
}

fn command_label(c: Command) -> &'static str {
    match c {
        Command::Direct => "direct",
        Command::Inverse => "inverse",
        Command::Converge => "converge",
        Command::Check => "check",
    }
}

fn grid_label(cfg: &RunConfig) -> String {
    format!("nx={} nt={}", cfg.nx, cfg.nt)
}

fn write_state_outputs(
    cfg: &RunConfig,
    loaded: &Loaded,
    traj: &Trajectory,
    files: &mut Vec<PathBuf>,
) -> Result<Option<pseudoparabolic::verification::ErrorTable>, CliError> {
    let snaps = output::snapshot_indices(traj, &loaded.snapshots);
    files.push(output::write_solution(
        &cfg.output_dir,
        traj,
        &snaps,
        loaded.case.as_ref().map(|c| &c.exact_u),
    )?);
    match &loaded.case {
        Some(case) => {
            let table = compute_errors(traj, case)?;
            files.push(output::write_errors(&cfg.output_dir, &table)?);
            Ok(Some(table))
        }
        None => Ok(None),
    }
}

fn direct(cfg: &RunConfig, loaded: &Loaded, head: &str) -> Result<Outcome, CliError> {
    let Some(h) = loaded.source.clone() else {
        return Err(ConfigError::Invalid(
            "direct runs need the source h in the problem file".into(),
        )
        .into());
    };
    let grid = loaded.spec.grid(cfg.nx, cfg.nt)?;
    let scheme = match cfg.scheme {
        Scheme::Cn => DirectScheme::CrankNicolson,
        Scheme::Rothe => DirectScheme::RotheBackwardEuler,
    };
    let mut dcfg = DirectSchemeConfig::new(scheme, grid);
    dcfg.store_every = cfg.store_every;
    dcfg.cn_nonlinearity = cfg.cn_nonlinearity;
    let traj = run_direct(&loaded.spec, &move |t| h(t), &dcfg)?;
    let mut files = Vec::new();
    let summary = match write_state_outputs(cfg, loaded, &traj, &mut files)? {
        Some(e) => format!(
            "{head} {}: final_rel_err_u={} final_u_max_err={}",
            grid_label(cfg),
            num(e.final_rel_err_u),
            num(e.final_u_max_err)
        ),
        None => format!(
            "{head} {}: final_max_abs_u={}",
            grid_label(cfg),
            num(traj.final_state().max_abs())
        ),
    };
    Ok(Outcome { summary, files })
}

fn inverse(cfg: &RunConfig, loaded: &mut Loaded, head: &str) -> Result<Outcome, CliError> {
    if !loaded.has_measurement {
        return Err(ConfigError::Invalid(
            "inverse runs need the measurement m in the problem file".into(),
        )
        .into());
    }
    let grid = loaded.spec.grid(cfg.nx, cfg.nt)?;
    if cfg.noise > 0.0 {
        perturb_measurement(&mut loaded.spec, &grid, cfg.noise, cfg.seed);
    } else if cfg.scheme == Scheme::Rothe && loaded.spec.measurement_derivative.is_none() {
        let values = (0..=grid.t_count())
            .map(|i| (loaded.spec.measurement)(grid.t(i)))
            .collect();
        set_tabulated_measurement(&mut loaded.spec, &grid, values);
    }
    let scheme = match cfg.scheme {
        Scheme::Cn => InverseScheme::CnSplitting,
        Scheme::Rothe => InverseScheme::RotheCoupled,
    };
    let mut icfg = InverseSchemeConfig::new(scheme, grid);
    icfg.store_every = cfg.store_every;
    icfg.cn_nonlinearity = cfg.cn_nonlinearity;
    icfg.anchor_measurement = cfg.anchor_m;
    icfg.kappa_coupling = cfg.kappa_coupling;
    icfg.omega_mollify_width = cfg.omega_mollify_width;
    let traj = run_inverse(&loaded.spec, &icfg)?;
    let mut files = Vec::new();
    files.push(output::write_source(
        &cfg.output_dir,
        &traj,
        loaded.source.as_ref(),
    )?);
    let h_final = traj.source_values.last().map_or(f64::NAN, |s| s.value);
    let summary = match write_state_outputs(cfg, loaded, &traj, &mut files)? {
        Some(e) => format!(
            "{head} {}: final_rel_err_u={} max_rel_err_h(t>=0.1)={} h_max_err={}",
            grid_label(cfg),
            num(e.final_rel_err_u),
            num(e.max_rel_h_err_after(0.1)),
            num(e.h_max_err)
        ),
        None => {
            let dmin = traj
                .source_values
                .iter()
                .map(|s| s.denominator.abs())
                .fold(f64::INFINITY, f64::min);
            format!(
                "{head} {}: h(T)={} min_abs_denominator={}",
                grid_label(cfg),
                num(h_final),
                num(dmin)
            )
        }
    };
    Ok(Outcome { summary, files })
}

fn converge(cfg: &RunConfig, loaded: &Loaded, head: &str) -> Result<Outcome, CliError> {
    let Some(case) = &loaded.case else {
        return Err(ConfigError::Invalid(
            "convergence studies need exact data (u_exact and h)".into(),
        )
        .into());
    };
    let scheme = match (cfg.study, cfg.scheme) {
        (Study::Direct, Scheme::Cn) => StudyScheme::Direct(DirectScheme::CrankNicolson),
        (Study::Direct, Scheme::Rothe) => StudyScheme::Direct(DirectScheme::RotheBackwardEuler),
        (Study::Inverse, Scheme::Cn) => StudyScheme::Inverse(InverseScheme::CnSplitting),
        (Study::Inverse, Scheme::Rothe) => StudyScheme::Inverse(InverseScheme::RotheCoupled),
    };
    let mut opts = StudyOptions::new(scheme);
    opts.cn_nonlinearity = cfg.cn_nonlinearity;
    opts.anchor_measurement = cfg.anchor_m;
    let table = convergence_study(case, &cfg.study_grids(), opts)?;
    let files = vec![output::write_converge(&cfg.output_dir, &table)?];
    let study = match cfg.study {
        Study::Direct => "direct",
        Study::Inverse => "inverse",
    };
    let mut summary = format!("{head} {study}: orders_u={}", fmt_list(&table.orders_u()));
    if cfg.study == Study::Inverse {
        summary.push_str(&format!(" orders_h={}", fmt_list(&table.orders_h())));
    }
    Ok(Outcome { summary, files })
}

fn check(cfg: &RunConfig, loaded: &Loaded, head: &str) -> Result<Outcome, CliError> {
    let grid = loaded.spec.grid(cfg.nx, cfg.nt)?;
    let report = evaluate_conditions(&loaded.spec, &grid)?;
    let mut text = check_interpretation_report(&report);
    text.push_str("\nt,omega_bar\n");
    for (t, w) in report.times.iter().zip(&report.omega_bar) {
        text.push_str(&format!("{},{}\n", num(*t), num(*w)));
    }
    let files = vec![output::write_text(&cfg.output_dir, "check.txt", &text)?];
    Ok(Outcome {
        summary: format!("{head} {}: {}", grid_label(cfg), report.summary()),
        files,
    })
}
