//! wasm-bindgen bindings for the static demo page in `www/`.
//!
//! Crank-Nicolson runs extrapolate the nonlinearity. Each export has a plain Rust twin (`*_curves`) so the logic is testable
//! off the browser.

use pseudoparabolic::verification::{case1, case2, case2_smooth_omega, ManufacturedCase};
use pseudoparabolic::{
    evaluate_conditions, run_direct, run_inverse, tabulated, CnNonlinearity, DirectScheme,
    DirectSchemeConfig, InverseScheme, InverseSchemeConfig, ProblemSpec, SpaceTimeGrid,
};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wasm_bindgen::prelude::*;

/// Largest grid count the page may request.
pub const MAX_N: usize = 1000;

#[derive(Debug, thiserror::Error)]
pub enum DemoError {
    #[error("unknown case '{0}' (expected case1, case2 or case2_smooth)")]
    UnknownCase(String),
    #[error("unknown scheme '{0}' (expected cn or rothe)")]
    UnknownScheme(String),
    #[error("grid count {0} outside 4..={MAX_N}")]
    GridSize(usize),
    #[error("noise level {0} must lie in [0, 0.5]")]
    Noise(f64),
    #[error(transparent)]
    Solver(#[from] pseudoparabolic::Error),
}

/// One plotted curve pair plus a summary line.
#[wasm_bindgen(getter_with_clone)]
#[derive(Debug, Clone, PartialEq)]
pub struct Curves {
    /// Abscissae: times or nodes.
    pub x: Vec<f64>,
    pub numeric: Vec<f64>,
    /// Exact values at `x`; empty when there are none.
    pub exact: Vec<f64>,
    pub summary: String,
}

fn load_case(name: &str) -> Result<ManufacturedCase, DemoError> {
    match name {
        "case1" => Ok(case1()),
        "case2" => Ok(case2()),
        "case2_smooth" => Ok(case2_smooth_omega()),
        other => Err(DemoError::UnknownCase(other.into())),
    }
}

fn grid_for(spec: &ProblemSpec, n: usize) -> Result<SpaceTimeGrid, DemoError> {
    if !(4..=MAX_N).contains(&n) {
        return Err(DemoError::GridSize(n));
    }
    Ok(spec.grid(n, n)?)
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Multiplies grid values of `m` by `1 + noise xi`, `xi` uniform on `[-1, 1]`.
fn perturb(spec: &mut ProblemSpec, grid: &SpaceTimeGrid, noise: f64, seed: u32) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.into());
    let tau = grid.tau();
    let values: Vec<f64> = (0..=grid.t_count())
        .map(|i| (spec.measurement)(grid.t(i)) * (1.0 + noise * rng.random_range(-1.0..=1.0)))
        .collect();
    let mut dm: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]) / tau).collect();
    dm.insert(0, dm[0]);
    spec.measurement = tabulated(0.0, tau, values);
    spec.measurement_derivative = Some(tabulated(0.0, tau, dm));
}

/// Recovers `h` from (optionally noisy) measurements on an `n x n` grid.
pub fn reconstruct_curves(
    case: &str,
    scheme: &str,
    n: usize,
    noise: f64,
    seed: u32,
) -> Result<Curves, DemoError> {
    let c = load_case(case)?;
    let scheme = match scheme {
        "cn" => InverseScheme::CnSplitting,
        "rothe" => InverseScheme::RotheCoupled,
        other => return Err(DemoError::UnknownScheme(other.into())),
    };
    if !(0.0..=0.5).contains(&noise) {
        return Err(DemoError::Noise(noise));
    }
    let grid = grid_for(&c.spec, n)?;
    let mut spec = c.spec.clone();
    if noise > 0.0 {
        perturb(&mut spec, &grid, noise, seed);
    }
    let mut cfg = InverseSchemeConfig::new(scheme, grid);
    cfg.cn_nonlinearity = CnNonlinearity::Extrapolated;
    let traj = run_inverse(&spec, &cfg)?;
    let x: Vec<f64> = traj.source_values.iter().map(|s| s.time).collect();
    let numeric: Vec<f64> = traj.source_values.iter().map(|s| s.value).collect();
    let exact: Vec<f64> = x.iter().map(|&t| (c.exact_h)(t)).collect();
    let late = x.iter().position(|&t| t >= 0.1 - 1e-12).unwrap_or(0);
    let summary = format!(
        "{} N={n}: max |h - h_exact| = {:.3e} overall, {:.3e} for t >= 0.1",
        c.name,
        max_abs_diff(&numeric, &exact),
        max_abs_diff(&numeric[late..], &exact[late..])
    );
    Ok(Curves {
        x,
        numeric,
        exact,
        summary,
    })
}

/// Solves the direct problem with the exact source; returns the final profile.
pub fn direct_curves(case: &str, scheme: &str, n: usize) -> Result<Curves, DemoError> {
    let c = load_case(case)?;
    let scheme = match scheme {
        "cn" => DirectScheme::CrankNicolson,
        "rothe" => DirectScheme::RotheBackwardEuler,
        other => return Err(DemoError::UnknownScheme(other.into())),
    };
    let grid = grid_for(&c.spec, n)?;
    let h = c.exact_h.clone();
    let mut cfg = DirectSchemeConfig::new(scheme, grid);
    cfg.store_every = n;
    cfg.cn_nonlinearity = CnNonlinearity::Extrapolated;
    let traj = run_direct(&c.spec, &move |t| h(t), &cfg)?;
    let t = traj.final_time();
    let x = grid.nodes();
    let numeric = traj.final_state().with_boundary();
    let exact: Vec<f64> = x.iter().map(|&xj| (c.exact_u)(t, xj)).collect();
    let summary = format!(
        "{} N={n}: max |u - u_exact| at t = {t} is {:.3e}, peak discrete energy {:.4}",
        c.name,
        max_abs_diff(&numeric, &exact),
        traj.max_energy()
    );
    Ok(Curves {
        x,
        numeric,
        exact,
        summary,
    })
}

/// Tabulates `wbar(t)` and the identifiability verdict.
pub fn check_curves(case: &str, n: usize) -> Result<Curves, DemoError> {
    let c = load_case(case)?;
    let grid = grid_for(&c.spec, n)?;
    let report = evaluate_conditions(&c.spec, &grid)?;
    Ok(Curves {
        x: report.times.clone(),
        numeric: report.omega_bar.clone(),
        exact: Vec::new(),
        summary: report.summary(),
    })
}

fn js(e: DemoError) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
pub fn reconstruct(
    case: &str,
    scheme: &str,
    n: usize,
    noise: f64,
    seed: u32,
) -> Result<Curves, JsError> {
    reconstruct_curves(case, scheme, n, noise, seed).map_err(js)
}

#[wasm_bindgen(js_name = solveDirect)]
pub fn solve_direct(case: &str, scheme: &str, n: usize) -> Result<Curves, JsError> {
    direct_curves(case, scheme, n).map_err(js)
}

#[wasm_bindgen(js_name = checkConditions)]
pub fn check_conditions(case: &str, n: usize) -> Result<Curves, JsError> {
    check_curves(case, n).map_err(js)
}
