//! Reconstruction of the source factor `h(t)` from the measurement `m(t)`.
//!
//! **Crank-Nicolson splitting.** The step is affine in the unknown source,
//! `u_{i+1} = u1 + h_{i+1} u2` with
//! `u1 = A^{-1}(B u_i + tau f(u_i) + tau f~_{i+1/2})` and
//! `u2 = tau A^{-1} p_{i+1/2}`, so substituting into the measurement at
//! `t_{i+1}` gives `h_{i+1} = (m_{i+1} - <u1, w>) / <u2, w>`.
//!
//! **Rothe coupling.** At each level the backward-Euler system is solved
//! together with the expression of `h_i` obtained by testing the equation with
//! `w_i = omega / rho_i`:
//!
//! ```text
//! h_i wbar_i = m'_i + (u_{i-1}, omega drho_i / rho_i) + (eta_i grad du_i, grad w_i)
//!            + (kappa_i grad u_{i-1}, grad w_i) - (f(u_{i-1}), w_i) - (f~_i, w_i)
//! ```
//!
//! where `wbar_i = (p_i, w_i)` and `du_i = (u_i - u_{i-1}) / tau`. Since the
//! gradient term involves the new state, `h_i` is eliminated and the system
//! matrix becomes tridiagonal plus the rank-one term
//! `-(1 / (tau wbar_i)) p_i q_i^T`, where `q_i . u = (eta_i grad u, grad w_i)`.

use crate::direct::{CnNonlinearity, CnStep, RotheLevel};
use crate::error::{Error, Result};
use crate::grid::{
    measure, sample_function, sample_midpoints, sample_nodes, NodalField, ProblemSpec,
    SpaceTimeGrid, Weight,
};
use crate::trajectory::{
    max_residual, should_store, EnergyTracker, SourceSample, StepDiagnostics, Trajectory,
};
use crate::tridiag::{rank_one_solve, thomas_solve};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InverseScheme {
    CnSplitting,
    RotheCoupled,
}

/// How the `kappa` term enters the Rothe expression for `h_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KappaCoupling {
    /// `(kappa_i grad u_{i-1}, grad w_i)`: explicit in the previous state.
    Lagged,
    /// `(kappa_i grad u_i, grad w_i)`: joins the rank-one term. With `m'_i`
    /// taken as the backward difference of discrete measurements this makes
    /// the scheme reproduce a backward-Euler direct solve exactly.
    #[default]
    Implicit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InverseSchemeConfig {
    pub scheme: InverseScheme,
    pub grid: SpaceTimeGrid,
    /// Relative floor below which a denominator counts as zero.
    pub denominator_floor: f64,
    /// Smoothing width applied to `omega` by the Rothe scheme. `None` picks
    /// `4 dx` for indicator weights and leaves continuous weights untouched.
    pub omega_mollify_width: Option<f64>,
    pub kappa_coupling: KappaCoupling,
    pub store_every: usize,
    /// Treatment of `f` by the splitting scheme.
    pub cn_nonlinearity: CnNonlinearity,
    /// Shift `m` by `<u0, omega> - m(0)` so the data agree with the discrete
    /// initial state (splitting scheme only; the Rothe scheme uses `m'`).
    pub anchor_measurement: bool,
}

impl InverseSchemeConfig {
    pub fn new(scheme: InverseScheme, grid: SpaceTimeGrid) -> Self {
        Self {
            scheme,
            grid,
            denominator_floor: 1e-12,
            omega_mollify_width: None,
            kappa_coupling: KappaCoupling::Implicit,
            store_every: 1,
            cn_nonlinearity: CnNonlinearity::Lagged,
            anchor_measurement: false,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.denominator_floor > 0.0) {
            return Err(Error::InvalidInput(format!(
                "denominator floor must be positive, got {}",
                self.denominator_floor
            )));
        }
        Ok(())
    }

    /// Weight actually used by the Rothe scheme.
    pub fn rothe_weight(&self, omega: &Weight) -> Result<Weight> {
        match (self.omega_mollify_width, omega.is_discontinuous()) {
            (Some(w), _) => omega.mollified(w),
            (None, true) => omega.mollified(4.0 * self.grid.dx()),
            (None, false) => Ok(omega.clone()),
        }
    }
}

/// Result of one inverse step.
#[derive(Debug, Clone, PartialEq)]
pub struct InverseStep {
    pub state: NodalField,
    pub source: f64,
    /// `<u2, omega>` for the splitting scheme, `wbar_i` for the Rothe scheme.
    pub denominator: f64,
    /// Max-norm residual of the equation satisfied by `(state, source)`.
    pub residual: f64,
}

/// One splitting step `t_i -> t_{i+1}`; the source is reported at `t_{i+1}`.
pub fn cn_inverse_step(
    state: &NodalField,
    i: usize,
    spec: &ProblemSpec,
    cfg: &InverseSchemeConfig,
) -> Result<InverseStep> {
    let grid = *state.grid();
    let omega = spec.omega.sample(&grid);
    let offset = measurement_offset(spec, cfg, &omega)?;
    cn_inverse_step_with(state, None, i, spec, cfg.denominator_floor, &omega, offset)
}

fn cn_inverse_step_with(
    state: &NodalField,
    prev: Option<&NodalField>,
    i: usize,
    spec: &ProblemSpec,
    floor: f64,
    omega: &[f64],
    m_offset: f64,
) -> Result<InverseStep> {
    let grid = *state.grid();
    let tau = grid.tau();
    let step = CnStep::assemble(spec, &grid, i)?;
    let known = step.known_rhs(spec, state, prev)?;
    let u1 = NodalField::new(thomas_solve(&step.a, &known)?, grid)?;
    let u2: Vec<f64> = thomas_solve(&step.a, &step.p_half)?
        .into_iter()
        .map(|v| tau * v)
        .collect();
    let u2 = NodalField::new(u2, grid)?;

    let denominator = measure(&u2, omega)?;
    let scale = grid.dx()
        * tau
        * step
            .p_half
            .iter()
            .zip(&omega[1..])
            .map(|(p, w)| (p * w).abs())
            .sum::<f64>();
    if !(denominator.abs() > floor * scale) {
        return Err(Error::Identifiability(format!(
            "measurement of the source response is {denominator:e} (scale {scale:e})"
        )));
    }
    let m_next = (spec.measurement)(grid.t(i + 1)) + m_offset;
    let source = (m_next - measure(&u1, omega)?) / denominator;
    let next: Vec<f64> = u1
        .values()
        .iter()
        .zip(u2.values())
        .map(|(a, b)| a + source * b)
        .collect();

    let rhs: Vec<f64> = known
        .iter()
        .zip(&step.p_half)
        .map(|(k, p)| k + tau * p * source)
        .collect();
    let residual = max_residual(&step.a, &next, &rhs);
    Ok(InverseStep {
        state: NodalField::new(next, grid)?,
        source,
        denominator,
        residual,
    })
}

fn measurement_offset(spec: &ProblemSpec, cfg: &InverseSchemeConfig, omega: &[f64]) -> Result<f64> {
    if !cfg.anchor_measurement {
        return Ok(0.0);
    }
    Ok(measure(&spec.initial_field(cfg.grid), omega)? - (spec.measurement)(0.0))
}

/// `q . u = (c grad u, grad w)` for interior `u` vanishing on the boundary;
/// `c` at cell midpoints, `w` on all nodes.
fn gradient_pairing(c_half: &[f64], w: &[f64], dx: f64) -> Vec<f64> {
    (1..w.len() - 1)
        .map(|j| (c_half[j - 1] * (w[j] - w[j - 1]) - c_half[j] * (w[j + 1] - w[j])) / dx)
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Precomputed weight samples shared by all Rothe steps of a run.
struct RotheWeight {
    omega: Vec<f64>,
}

/// One coupled Rothe step producing `(u_i, h_i)` from `u_{i-1}` (`state`),
/// `i >= 1`.
pub fn rothe_inverse_step(
    state: &NodalField,
    i: usize,
    spec: &ProblemSpec,
    cfg: &InverseSchemeConfig,
) -> Result<InverseStep> {
    let grid = *state.grid();
    let weight = cfg.rothe_weight(&spec.omega)?;
    let w = RotheWeight {
        omega: weight.sample(&grid),
    };
    rothe_inverse_step_with(state, i, spec, cfg, &w)
}

fn rothe_inverse_step_with(
    state: &NodalField,
    i: usize,
    spec: &ProblemSpec,
    cfg: &InverseSchemeConfig,
    weight: &RotheWeight,
) -> Result<InverseStep> {
    let grid = *state.grid();
    let dx = grid.dx();
    let tau = grid.tau();
    let t = grid.t(i);
    let m_prime = spec
        .measurement_derivative
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("the Rothe inverse scheme needs m'(t)".into()))?;

    let level = RotheLevel::assemble(spec, &grid, i)?;
    let rho_nodes = sample_nodes(|t, x| spec.rho.eval(t, x), t, &grid);
    if let Some(r) = rho_nodes.iter().find(|&&r| !(r > 0.0)) {
        return Err(Error::AssumptionViolation(format!(
            "rho must be positive, found {r}"
        )));
    }
    let w: Vec<f64> = weight
        .omega
        .iter()
        .zip(&rho_nodes)
        .map(|(o, r)| o / r)
        .collect();
    let w_in = &w[1..w.len() - 1];
    let p = sample_function(|t, x| spec.p_at(t, x), t, &grid);
    let f_tilde = sample_function(|t, x| spec.f_tilde_at(t, x), t, &grid);

    let wbar = dx * dot(&p, w_in);
    let scale = dx * p.iter().zip(w_in).map(|(p, w)| (p * w).abs()).sum::<f64>();
    if !(wbar.abs() > cfg.denominator_floor * scale) {
        return Err(Error::Identifiability(format!(
            "(p, omega/rho) = {wbar:e} at t = {t} (scale {scale:e})"
        )));
    }

    let q_eta = gradient_pairing(
        &sample_midpoints(|t, x| spec.eta.eval(t, x), t, &grid),
        &w,
        dx,
    );
    let q_kappa = gradient_pairing(
        &sample_midpoints(|t, x| spec.kappa.eval(t, x), t, &grid),
        &w,
        dx,
    );

    let prev = state.values();
    let f_prev = spec.nonlinearity.apply(prev);
    let drho_term: f64 = dx
        * (0..prev.len())
            .map(|k| {
                prev[k] * weight.omega[k + 1] * (level.rho_now[k] - level.rho_prev[k])
                    / tau
                    / level.rho_now[k]
            })
            .sum::<f64>();
    let mut known = m_prime(t) + drho_term
        - dot(&q_eta, prev) / tau
        - dx * dot(&f_prev, w_in)
        - dx * dot(&f_tilde, w_in);
    let v_row: Vec<f64> = match cfg.kappa_coupling {
        KappaCoupling::Lagged => {
            known += dot(&q_kappa, prev);
            q_eta.iter().map(|q| q / tau).collect()
        }
        KappaCoupling::Implicit => q_eta
            .iter()
            .zip(&q_kappa)
            .map(|(e, k)| e / tau + k)
            .collect(),
    };

    let base = level.rhs(spec, state, &f_tilde)?;
    let rhs: Vec<f64> = base
        .iter()
        .zip(&p)
        .map(|(b, p)| b + known / wbar * p)
        .collect();
    let u_col: Vec<f64> = p.iter().map(|p| -p / wbar).collect();
    let next = rank_one_solve(&level.a, &u_col, &v_row, &rhs)?;
    let source = (known + dot(&v_row, &next)) / wbar;

    let coupled: Vec<f64> = base.iter().zip(&p).map(|(b, p)| b + source * p).collect();
    let residual = max_residual(&level.a, &next, &coupled);
    Ok(InverseStep {
        state: NodalField::new(next, grid)?,
        source,
        denominator: wbar,
        residual,
    })
}

/// Runs the inverse problem from `u(0) = u0`, recovering `h` at every level
/// `i >= 1`.
pub fn run_inverse(spec: &ProblemSpec, cfg: &InverseSchemeConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let grid = cfg.grid;
    spec.validate(&grid)?;
    let mut state = spec.initial_field(grid);
    let mut prev: Option<NodalField> = None;
    let extrapolate = cfg.cn_nonlinearity == CnNonlinearity::Extrapolated;
    let mut traj = Trajectory::start(state.clone());
    let mut energy = EnergyTracker::default();
    let last = grid.t_count();

    let cn_omega = spec.omega.sample(&grid);
    let m_offset = measurement_offset(spec, cfg, &cn_omega)?;
    let rothe_weight = match cfg.scheme {
        InverseScheme::RotheCoupled => Some(RotheWeight {
            omega: cfg.rothe_weight(&spec.omega)?.sample(&grid),
        }),
        InverseScheme::CnSplitting => None,
    };

    for i in 0..last {
        let level = i + 1;
        let time = grid.t(level);
        let step = match &rothe_weight {
            None => cn_inverse_step_with(
                &state,
                prev.as_ref(),
                i,
                spec,
                cfg.denominator_floor,
                &cn_omega,
                m_offset,
            ),
            Some(w) => rothe_inverse_step_with(&state, level, spec, cfg, w),
        }
        .map_err(|e| e.at_step(level, time))?;
        if !step.source.is_finite() {
            return Err(
                Error::Data(format!("recovered source is {}", step.source)).at_step(level, time)
            );
        }
        let (inc, st, en) = energy.update(&state, &step.state, grid.tau());
        traj.diagnostics.push(StepDiagnostics {
            step: level,
            time,
            residual: step.residual,
            increment_h1_sq: inc,
            state_h1_sq: st,
            energy: en,
            denominator: Some(step.denominator),
        });
        traj.source_values.push(SourceSample {
            step: level,
            time,
            value: step.source,
            denominator: step.denominator,
        });
        if should_store(level, last, cfg.store_every) {
            traj.push_state(level, step.state.clone());
        }
        let old = std::mem::replace(&mut state, step.state);
        if extrapolate {
            prev = Some(old);
        }
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gradient_pairing_matches_summation_by_parts() {
        // sum_k c_{k+1/2} (u_{k+1} - u_k)(w_{k+1} - w_k) / dx
        let dx = 0.25;
        let c = [1.0, 2.0, 0.5, 3.0];
        let w = [0.3, -1.0, 2.0, 0.7, 1.1];
        let u = [0.0, 1.5, -0.5, 2.0, 0.0];
        let direct: f64 = (0..4)
            .map(|k| c[k] * (u[k + 1] - u[k]) * (w[k + 1] - w[k]) / dx)
            .sum();
        let q = gradient_pairing(&c, &w, dx);
        assert!((dot(&q, &u[1..4]) - direct).abs() < 1e-13);
    }

    #[test]
    fn nonpositive_floor_rejected() {
        let g = SpaceTimeGrid::unit(4, 4, 1.0).unwrap();
        let mut cfg = InverseSchemeConfig::new(InverseScheme::CnSplitting, g);
        cfg.denominator_floor = 0.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn default_mollifier_width_is_four_cells() {
        let g = SpaceTimeGrid::unit(100, 4, 1.0).unwrap();
        let cfg = InverseSchemeConfig::new(InverseScheme::RotheCoupled, g);
        match cfg.rothe_weight(&Weight::indicator(0.2, 0.8)).unwrap() {
            Weight::SmoothedIndicator { width, .. } => assert!((width - 0.04).abs() < 1e-15),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            cfg.rothe_weight(&Weight::function(|x| x * (1.0 - x)))
                .unwrap(),
            Weight::Function(_)
        ));
    }
}
