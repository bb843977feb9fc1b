//! Time stepping for the direct problem, where the source factor `h(t)` is
//! known.
//!
//! Two schemes share one driver:
//!
//! * Crank-Nicolson with the nonlinearity explicit:
//!   `A_{i+1/2} u_{i+1} = B_{i+1/2} u_i + tau (f* + f~_{i+1/2} + p_{i+1/2} h_{i+1})`
//!   where `f*` is `f(u_i)` or its extrapolation to `t_{i+1/2}`
//!   with `A = M - tau/2 K`, `B = M + tau/2 K`, `M = I - eta L`. It requires
//!   `rho = 1` and `eta` constant in space.
//! * Backward Euler (Rothe) with variable `rho`, `eta`, `kappa`, solving at
//!   each level
//!   `rho_i u_i/tau - (eta_i u_i')'/tau - (kappa_i u_i')' =
//!    f(u_{i-1}) + F_i + rho_{i-1} u_{i-1}/tau - (eta_i u_{i-1}')'/tau`.

use crate::error::{Error, Result};
use crate::grid::{sample_function, sample_midpoints, NodalField, ProblemSpec, SpaceTimeGrid};
use crate::trajectory::{max_residual, should_store, EnergyTracker, StepDiagnostics, Trajectory};
use crate::tridiag::{
    assemble_operator_m, assemble_variable_flux, thomas_solve, TridiagonalMatrix,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DirectScheme {
    CrankNicolson,
    RotheBackwardEuler,
}

/// Explicit treatment of `f` in the Crank-Nicolson step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CnNonlinearity {
    /// `f(u_i)`. First order in time.
    #[default]
    Lagged,
    /// `(3 f(u_i) - f(u_{i-1})) / 2`, with `f(u_0)` on the first step.
    /// Second order in time, still one solve per step.
    Extrapolated,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectSchemeConfig {
    pub scheme: DirectScheme,
    pub grid: SpaceTimeGrid,
    /// Keep every `store_every`-th state; the final state is always kept.
    pub store_every: usize,
    pub cn_nonlinearity: CnNonlinearity,
}

impl DirectSchemeConfig {
    pub fn new(scheme: DirectScheme, grid: SpaceTimeGrid) -> Self {
        Self {
            scheme,
            grid,
            store_every: 1,
            cn_nonlinearity: CnNonlinearity::Lagged,
        }
    }
}

/// Operators of one Crank-Nicolson step `t_i -> t_{i+1}`.
#[derive(Debug, Clone)]
pub(crate) struct CnStep {
    pub a: TridiagonalMatrix,
    pub b: TridiagonalMatrix,
    /// `(f~(t_i) + f~(t_{i+1})) / 2` at the interior nodes.
    pub f_tilde_half: Vec<f64>,
    /// `(p(t_i) + p(t_{i+1})) / 2` at the interior nodes.
    pub p_half: Vec<f64>,
}

impl CnStep {
    pub fn assemble(spec: &ProblemSpec, grid: &SpaceTimeGrid, i: usize) -> Result<Self> {
        let (t0, t1) = (grid.t(i), grid.t(i + 1));
        let t_half = 0.5 * (t0 + t1);
        let tau = grid.tau();

        let rho = sample_function(|t, x| spec.rho.eval(t, x), t_half, grid);
        if let Some(r) = rho.iter().find(|&&r| r != 1.0) {
            return Err(Error::AssumptionViolation(format!(
                "the Crank-Nicolson scheme requires rho = 1, found {r}; use the Rothe scheme"
            )));
        }
        let eta = sample_midpoints(|t, x| spec.eta.eval(t, x), t_half, grid);
        let eta0 = eta[0];
        if eta.iter().any(|&e| e != eta0) {
            return Err(Error::AssumptionViolation(
                "the Crank-Nicolson scheme requires eta constant in space; use the Rothe scheme"
                    .into(),
            ));
        }
        let m = assemble_operator_m(grid, eta0)?;
        let kappa = sample_midpoints(|t, x| spec.kappa.eval(t, x), t_half, grid);
        let k = assemble_variable_flux(grid, &kappa)?;
        let a = m.combine(1.0, &k, -0.5 * tau)?;
        let b = m.combine(1.0, &k, 0.5 * tau)?;

        let average = |f: &dyn Fn(f64, f64) -> f64| -> Vec<f64> {
            let lo = sample_function(f, t0, grid);
            let hi = sample_function(f, t1, grid);
            lo.iter().zip(&hi).map(|(a, b)| 0.5 * (a + b)).collect()
        };
        Ok(Self {
            a,
            b,
            f_tilde_half: average(&|t, x| spec.f_tilde_at(t, x)),
            p_half: average(&|t, x| spec.p_at(t, x)),
        })
    }

    /// `B u_i + tau f(u_i) + tau f~_{i+1/2}`, the right-hand side without
    /// the unknown source. With `prev = Some(u_{i-1})` the nonlinearity is
    /// extrapolated to the half step.
    pub fn known_rhs(
        &self,
        spec: &ProblemSpec,
        state: &NodalField,
        prev: Option<&NodalField>,
    ) -> Result<Vec<f64>> {
        let tau = state.grid().tau();
        let bu = self.b.mul_vec(state.values())?;
        let f = &spec.nonlinearity;
        let nonlinear: Vec<f64> = match prev {
            None => f.apply(state.values()),
            Some(p) => state
                .values()
                .iter()
                .zip(p.values())
                .map(|(&u, &v)| 1.5 * f.eval(u) - 0.5 * f.eval(v))
                .collect(),
        };
        Ok(bu
            .iter()
            .zip(&nonlinear)
            .zip(&self.f_tilde_half)
            .map(|((bu, fu), ft)| bu + tau * fu + tau * ft)
            .collect())
    }
}

fn cn_step_with_residual(
    state: &NodalField,
    prev: Option<&NodalField>,
    i: usize,
    spec: &ProblemSpec,
    h_next: f64,
) -> Result<(NodalField, f64)> {
    let grid = *state.grid();
    let step = CnStep::assemble(spec, &grid, i)?;
    let tau = grid.tau();
    let known = step.known_rhs(spec, state, prev)?;
    let rhs: Vec<f64> = known
        .iter()
        .zip(&step.p_half)
        .map(|(k, p)| k + tau * p * h_next)
        .collect();
    let next = thomas_solve(&step.a, &rhs)?;
    let residual = max_residual(&step.a, &next, &rhs);
    Ok((NodalField::new(next, grid)?, residual))
}

/// One Crank-Nicolson step from `t_i` to `t_{i+1}` with source value
/// `h_next = h(t_{i+1})`. Exactly one tridiagonal solve is performed.
pub fn cn_direct_step(
    state: &NodalField,
    i: usize,
    spec: &ProblemSpec,
    h_next: f64,
) -> Result<NodalField> {
    cn_step_with_residual(state, None, i, spec, h_next).map(|(u, _)| u)
}

/// Backward-Euler operator at level `t_i`.
#[derive(Debug, Clone)]
pub(crate) struct RotheLevel {
    /// `diag(rho_i)/tau - E_i/tau - K_i`.
    pub a: TridiagonalMatrix,
    /// Discrete `(eta_i u')'`.
    pub eta_flux: TridiagonalMatrix,
    pub rho_prev: Vec<f64>,
    pub rho_now: Vec<f64>,
}

impl RotheLevel {
    pub fn assemble(spec: &ProblemSpec, grid: &SpaceTimeGrid, i: usize) -> Result<Self> {
        if i == 0 {
            return Err(Error::InvalidInput("Rothe levels start at i = 1".into()));
        }
        let tau = grid.tau();
        let t = grid.t(i);
        let rho_now = sample_function(|t, x| spec.rho.eval(t, x), t, grid);
        let rho_prev = sample_function(|t, x| spec.rho.eval(t, x), grid.t(i - 1), grid);
        if let Some(r) = rho_now.iter().chain(&rho_prev).find(|&&r| !(r > 0.0)) {
            return Err(Error::AssumptionViolation(format!(
                "rho must be positive, found {r}"
            )));
        }
        let eta_flux =
            assemble_variable_flux(grid, &sample_midpoints(|t, x| spec.eta.eval(t, x), t, grid))?;
        let kappa_flux = assemble_variable_flux(
            grid,
            &sample_midpoints(|t, x| spec.kappa.eval(t, x), t, grid),
        )?;
        let mut a = eta_flux.combine(-1.0 / tau, &kappa_flux, -1.0)?;
        let shift: Vec<f64> = rho_now.iter().map(|r| r / tau).collect();
        a.add_diagonal(&shift)?;
        Ok(Self {
            a,
            eta_flux,
            rho_prev,
            rho_now,
        })
    }

    /// `f(u_{i-1}) + forcing + rho_{i-1} u_{i-1}/tau - E u_{i-1}/tau`.
    pub fn rhs(&self, spec: &ProblemSpec, prev: &NodalField, forcing: &[f64]) -> Result<Vec<f64>> {
        let tau = prev.grid().tau();
        let eu = self.eta_flux.mul_vec(prev.values())?;
        Ok(prev
            .values()
            .iter()
            .enumerate()
            .map(|(k, &u)| {
                spec.nonlinearity.eval(u) + forcing[k] + self.rho_prev[k] * u / tau - eu[k] / tau
            })
            .collect())
    }
}

fn rothe_step_with_residual(
    state: &NodalField,
    i: usize,
    spec: &ProblemSpec,
    forcing: &NodalField,
) -> Result<(NodalField, f64)> {
    let grid = *state.grid();
    if !forcing.grid().same_layout(&grid) {
        return Err(Error::Dimension {
            expected: grid.interior(),
            found: forcing.values().len(),
        });
    }
    let level = RotheLevel::assemble(spec, &grid, i)?;
    let rhs = level.rhs(spec, state, forcing.values())?;
    let next = thomas_solve(&level.a, &rhs)?;
    let residual = max_residual(&level.a, &next, &rhs);
    Ok((NodalField::new(next, grid)?, residual))
}

/// One backward-Euler step producing `u_i` from `u_{i-1}` (`state`), with the
/// total load `F_i = f~(t_i) + p(t_i) h(t_i)` sampled at the interior nodes.
pub fn rothe_direct_step(
    state: &NodalField,
    i: usize,
    spec: &ProblemSpec,
    forcing: &NodalField,
) -> Result<NodalField> {
    rothe_step_with_residual(state, i, spec, forcing).map(|(u, _)| u)
}

/// Runs the direct problem from `u(0) = u0` to the final time.
pub fn run_direct(
    spec: &ProblemSpec,
    h: &dyn Fn(f64) -> f64,
    cfg: &DirectSchemeConfig,
) -> Result<Trajectory> {
    let grid = cfg.grid;
    spec.validate(&grid)?;
    let mut state = spec.initial_field(grid);
    let mut prev: Option<NodalField> = None;
    let mut traj = Trajectory::start(state.clone());
    let mut energy = EnergyTracker::default();
    let last = grid.t_count();
    let extrapolate = cfg.cn_nonlinearity == CnNonlinearity::Extrapolated;
    for i in 0..last {
        let level = i + 1;
        let time = grid.t(level);
        let (next, residual) = match cfg.scheme {
            DirectScheme::CrankNicolson => {
                cn_step_with_residual(&state, prev.as_ref(), i, spec, h(time))
            }
            DirectScheme::RotheBackwardEuler => {
                let ht = h(time);
                let forcing = sample_function(
                    |t, x| spec.f_tilde_at(t, x) + spec.p_at(t, x) * ht,
                    time,
                    &grid,
                );
                rothe_step_with_residual(&state, level, spec, &NodalField::new(forcing, grid)?)
            }
        }
        .map_err(|e| e.at_step(level, time))?;
        let (inc, st, en) = energy.update(&state, &next, grid.tau());
        traj.diagnostics.push(StepDiagnostics {
            step: level,
            time,
            residual,
            increment_h1_sq: inc,
            state_h1_sq: st,
            energy: en,
            denominator: None,
        });
        if should_store(level, last, cfg.store_every) {
            traj.push_state(level, next.clone());
        }
        let old = std::mem::replace(&mut state, next);
        if extrapolate {
            prev = Some(old);
        }
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{CoefficientField, Nonlinearity, Weight};
    use std::sync::Arc;

    fn heat_like(eta: f64, kappa: f64, f_tilde: f64) -> ProblemSpec {
        ProblemSpec {
            length: 1.0,
            horizon: 1.0,
            rho: CoefficientField::constant(1.0),
            eta: CoefficientField::constant(eta),
            kappa: CoefficientField::constant(kappa),
            nonlinearity: Nonlinearity::zero(),
            p: Arc::new(|_, x| (std::f64::consts::PI * x).sin()),
            f_tilde: Arc::new(move |_, _| f_tilde),
            u0: Arc::new(|x| x * (1.0 - x)),
            omega: Weight::indicator(0.2, 0.8),
            measurement: Arc::new(|_| 0.0),
            measurement_derivative: None,
        }
    }

    #[test]
    fn zero_state_is_fixed_point() {
        let spec = heat_like(0.5, 1.0, 0.0);
        let g = SpaceTimeGrid::unit(16, 8, 1.0).unwrap();
        let u = cn_direct_step(&NodalField::zeros(g), 3, &spec, 0.0).unwrap();
        assert!(u.values().iter().all(|&v| v == 0.0));
        let zero = NodalField::zeros(g);
        let u = rothe_direct_step(&zero, 3, &spec, &zero).unwrap();
        assert!(u.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn ode_reduction_without_diffusion() {
        let spec = heat_like(0.0, 0.0, 1.0);
        let g = SpaceTimeGrid::unit(10, 20, 1.0).unwrap();
        let u0 = spec.initial_field(g);
        let u1 = cn_direct_step(&u0, 0, &spec, 0.0).unwrap();
        for (a, b) in u1.values().iter().zip(u0.values()) {
            assert_eq!(*a, b + g.tau());
        }
    }

    #[test]
    fn cn_rejects_variable_density_and_eta() {
        let g = SpaceTimeGrid::unit(8, 8, 1.0).unwrap();
        let mut spec = heat_like(0.5, 1.0, 0.0);
        spec.rho = CoefficientField::new(|_, x| 1.0 + x, 1.0, 2.0);
        let u = spec.initial_field(g);
        assert!(matches!(
            cn_direct_step(&u, 0, &spec, 0.0),
            Err(Error::AssumptionViolation(_))
        ));
        let mut spec = heat_like(0.5, 1.0, 0.0);
        spec.eta = CoefficientField::new(|_, x| 1.0 + x, 1.0, 2.0);
        assert!(matches!(
            cn_direct_step(&u, 0, &spec, 0.0),
            Err(Error::AssumptionViolation(_))
        ));
        // the Rothe scheme takes both
        spec.rho = CoefficientField::new(|_, x| 1.0 + x, 1.0, 2.0);
        rothe_direct_step(&u, 1, &spec, &NodalField::zeros(g)).unwrap();
    }

    #[test]
    fn rothe_rejects_nonpositive_density() {
        let g = SpaceTimeGrid::unit(8, 8, 1.0).unwrap();
        let mut spec = heat_like(0.5, 1.0, 0.0);
        spec.rho = CoefficientField::new(|_, _| 0.0, 0.0, 0.0);
        let u = spec.initial_field(g);
        assert!(matches!(
            rothe_direct_step(&u, 1, &spec, &NodalField::zeros(g)),
            Err(Error::AssumptionViolation(_))
        ));
    }

    #[test]
    fn no_steps_keeps_initial_state() {
        let spec = heat_like(0.5, 1.0, 0.0);
        let g = SpaceTimeGrid::unit(8, 0, 1.0).unwrap();
        for scheme in [
            DirectScheme::CrankNicolson,
            DirectScheme::RotheBackwardEuler,
        ] {
            let traj = run_direct(&spec, &|_| 1.0, &DirectSchemeConfig::new(scheme, g)).unwrap();
            assert_eq!(traj.states.len(), 1);
            assert_eq!(traj.times, vec![0.0]);
            assert_eq!(traj.states[0], spec.initial_field(g));
        }
    }

    #[test]
    fn thinning_keeps_final_state() {
        let spec = heat_like(0.5, 1.0, 0.0);
        let g = SpaceTimeGrid::unit(8, 10, 1.0).unwrap();
        let mut cfg = DirectSchemeConfig::new(DirectScheme::CrankNicolson, g);
        cfg.store_every = 4;
        let traj = run_direct(&spec, &|_| 1.0, &cfg).unwrap();
        assert_eq!(traj.levels, vec![0, 4, 8, 10]);
        assert_eq!(traj.diagnostics.len(), 10);
        assert!(traj.times.windows(2).all(|w| w[0] < w[1]));
    }
}
