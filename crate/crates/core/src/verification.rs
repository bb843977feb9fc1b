//! Manufactured test cases, error tables and convergence studies.

use std::f64::consts::PI;
use std::sync::Arc;

use num_dual::{DualNum, HyperHyperDual64};

use crate::direct::{run_direct, CnNonlinearity, DirectScheme, DirectSchemeConfig};
use crate::error::{Error, Result};
use crate::grid::{
    measure, tabulated, CoefficientField, Lipschitz, Nonlinearity, ProblemSpec, ScalarFn,
    SpaceTimeFn, Weight,
};
use crate::inverse::{run_inverse, InverseScheme, InverseSchemeConfig};
use crate::trajectory::Trajectory;

/// Exact solution written once for `f64` and for hyper-dual numbers, so the
/// residual check differentiates exactly what the solvers compare against.
pub type DualProfile =
    Arc<dyn Fn(HyperHyperDual64, HyperHyperDual64) -> HyperHyperDual64 + Send + Sync>;

/// Tolerance of the manufactured residual check.
pub const RESIDUAL_TOLERANCE: f64 = 1e-8;

const COEFF_STEP: f64 = 1e-5;

#[derive(Clone)]
pub struct ManufacturedCase {
    pub name: String,
    pub spec: ProblemSpec,
    pub exact_u: SpaceTimeFn,
    pub exact_h: ScalarFn,
    /// Default display times for solution snapshots.
    pub snapshot_times: Vec<f64>,
    exact_u_dual: DualProfile,
}

impl std::fmt::Debug for ManufacturedCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ManufacturedCase")
            .field("name", &self.name)
            .field("spec", &self.spec)
            .finish_non_exhaustive()
    }
}

fn case1_u<D: DualNum<Primitive = f64> + Copy>(t: D, x: D) -> D {
    t.exp() * (x * PI).sin()
}

fn case2_u<D: DualNum<Primitive = f64> + Copy>(t: D, x: D) -> D {
    (t * t + 1.0) * (x * PI).sin()
}

/// `(cos 0.2 pi - cos 0.8 pi) / pi`
pub fn case1_measure_constant() -> f64 {
    ((0.2 * PI).cos() - (0.8 * PI).cos()) / PI
}

/// `(cos 0.4 pi - cos 0.6 pi) / pi`
pub fn case2_measure_constant() -> f64 {
    ((0.4 * PI).cos() - (0.6 * PI).cos()) / PI
}

pub const CASE1_PAPER_CONSTANT: f64 = 0.514;
pub const CASE2_PAPER_CONSTANT: f64 = 0.1967;

fn smooth_bump(x: f64) -> f64 {
    if (0.4..=0.6).contains(&x) {
        let s = (PI * (x - 0.4) / 0.2).sin();
        s * s
    } else {
        0.0
    }
}

/// Composite Simpson rule with `n` (even) panels.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut sum = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + k as f64 * h);
    }
    sum * h / 3.0
}

/// `integral sin(pi x) sin^2(pi (x - 0.4) / 0.2) dx` over `[0.4, 0.6]`.
pub fn smooth_weight_constant() -> f64 {
    simpson(|x| (PI * x).sin() * smooth_bump(x), 0.4, 0.6, 4096)
}

impl ManufacturedCase {
    /// Builds a case and checks the manufactured residual on a 17 x 17 lattice.
    pub fn new(
        name: impl Into<String>,
        spec: ProblemSpec,
        exact_u_dual: impl Fn(HyperHyperDual64, HyperHyperDual64) -> HyperHyperDual64
            + Send
            + Sync
            + 'static,
        exact_h: ScalarFn,
        snapshot_times: Vec<f64>,
    ) -> Result<Self> {
        let exact_u_dual: DualProfile = Arc::new(exact_u_dual);
        let profile = exact_u_dual.clone();
        let exact_u: SpaceTimeFn = Arc::new(move |t, x| profile(t.into(), x.into()).re);
        let case = Self {
            name: name.into(),
            spec,
            exact_u,
            exact_h,
            snapshot_times,
            exact_u_dual,
        };
        let r = case.max_residual_on_lattice(17);
        if !(r <= RESIDUAL_TOLERANCE) {
            return Err(Error::Data(format!(
                "{}: manufactured residual {r:e} exceeds {RESIDUAL_TOLERANCE:e}",
                case.name
            )));
        }
        Ok(case)
    }

    /// Pointwise residual of the continuous equation at `(t, x)` with the
    /// exact solution substituted. Derivatives of `u` are exact (hyper-dual
    /// arithmetic); coefficient derivatives use central differences.
    pub fn residual(&self, t: f64, x: f64) -> f64 {
        let xd = HyperHyperDual64::new(x, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        let td = HyperHyperDual64::new(t, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0);
        let d = (self.exact_u_dual)(td, xd);
        let (u, u_x, u_t, u_xx, u_xt, u_xxt) =
            (d.re, d.eps1, d.eps3, d.eps1eps2, d.eps1eps3, d.eps1eps2eps3);

        let s = &self.spec;
        let dt = |c: &CoefficientField| {
            (c.eval(t + COEFF_STEP, x) - c.eval(t - COEFF_STEP, x)) / (2.0 * COEFF_STEP)
        };
        let dx = |c: &CoefficientField| {
            (c.eval(t, x + COEFF_STEP) - c.eval(t, x - COEFF_STEP)) / (2.0 * COEFF_STEP)
        };

        let lhs = dt(&s.rho) * u + s.rho.eval(t, x) * u_t
            - dx(&s.eta) * u_xt
            - s.eta.eval(t, x) * u_xxt
            - dx(&s.kappa) * u_x
            - s.kappa.eval(t, x) * u_xx;
        let rhs = s.nonlinearity.eval(u) + s.f_tilde_at(t, x) + s.p_at(t, x) * (self.exact_h)(t);
        lhs - rhs
    }

    /// Max residual over the `n x n` lattice of `[0, T] x [0, L]`.
    pub fn max_residual_on_lattice(&self, n: usize) -> f64 {
        let n = n.max(2);
        let mut worst: f64 = 0.0;
        for a in 0..n {
            let t = self.spec.horizon * a as f64 / (n - 1) as f64;
            for b in 0..n {
                let x = self.spec.length * b as f64 / (n - 1) as f64;
                let r = self.residual(t, x).abs();
                worst = if r.is_nan() { f64::NAN } else { worst.max(r) };
                if worst.is_nan() {
                    return worst;
                }
            }
        }
        worst
    }
}

fn case1_spec(m_constant: f64) -> ProblemSpec {
    let eta = 0.5;
    let pi2 = PI * PI;
    ProblemSpec {
        length: 1.0,
        horizon: 2.0,
        rho: CoefficientField::constant(1.0).with_time_derivative_bound(0.0),
        eta: CoefficientField::constant(eta),
        kappa: CoefficientField::new(|t, _| t, 0.0, 2.0).with_time_derivative_bound(1.0),
        nonlinearity: Nonlinearity::cubic(),
        p: Arc::new(move |t, x| eta * pi2 * t * (PI * x).sin()),
        f_tilde: Arc::new(move |t, x| {
            let s = (PI * x).sin();
            (1.0 + eta * pi2 + pi2 * t - eta * pi2 * t) * t.exp() * s - (3.0 * t).exp() * s * s * s
        }),
        u0: Arc::new(|x| (PI * x).sin()),
        omega: Weight::indicator(0.2, 0.8),
        measurement: Arc::new(move |t| m_constant * t.exp()),
        measurement_derivative: Some(Arc::new(move |t| m_constant * t.exp())),
    }
}

fn case2_spec(m_constant: f64) -> ProblemSpec {
    let eta = 1.0;
    let pi2 = PI * PI;
    ProblemSpec {
        length: 1.0,
        horizon: 1.0,
        rho: CoefficientField::constant(1.0).with_time_derivative_bound(0.0),
        eta: CoefficientField::constant(eta),
        kappa: CoefficientField::new(|t, _| t + 1.0, 1.0, 2.0).with_time_derivative_bound(1.0),
        nonlinearity: Nonlinearity::cubic(),
        p: Arc::new(|t, x| t * (PI * x).sin() + t * (2.0 * PI * x).sin()),
        f_tilde: Arc::new(move |t, x| {
            let s = (PI * x).sin();
            let g = 1.0 + t * t;
            let p = t * s + t * (2.0 * PI * x).sin();
            (2.0 * t * (1.0 + eta * pi2) + pi2 * (t + 1.0) * g) * s
                - p * (2.0 * PI * t).sin()
                - g * g * g * s * s * s
        }),
        u0: Arc::new(|x| (PI * x).sin()),
        omega: Weight::indicator(0.4, 0.6),
        measurement: Arc::new(move |t| m_constant * (1.0 + t * t)),
        measurement_derivative: Some(Arc::new(move |t| 2.0 * m_constant * t)),
    }
}

fn build(
    name: &str,
    spec: ProblemSpec,
    u: fn(HyperHyperDual64, HyperHyperDual64) -> HyperHyperDual64,
    h: ScalarFn,
    snaps: Vec<f64>,
) -> ManufacturedCase {
    ManufacturedCase::new(name, spec, u, h, snaps).expect("built-in case satisfies its equation")
}

/// `u = e^t sin(pi x)`, `h = e^t` on `(0, 2) x (0, 1)`.
pub fn case1() -> ManufacturedCase {
    build(
        "case1",
        case1_spec(case1_measure_constant()),
        case1_u,
        Arc::new(f64::exp),
        vec![0.2, 1.0, 1.5, 2.0],
    )
}

/// [`case1`] with the measurement constant rounded to `0.514`.
pub fn case1_paper_rounded() -> ManufacturedCase {
    let mut c = case1();
    c.spec = case1_spec(CASE1_PAPER_CONSTANT);
    c.name = "case1 (rounded m)".into();
    c
}

/// `u = (1 + t^2) sin(pi x)`, `h = sin(2 pi t)` on `(0, 1) x (0, 1)`.
pub fn case2() -> ManufacturedCase {
    build(
        "case2",
        case2_spec(case2_measure_constant()),
        case2_u,
        Arc::new(|t: f64| (2.0 * PI * t).sin()),
        vec![0.2, 0.5, 0.8, 1.0],
    )
}

/// [`case2`] with the measurement constant rounded to `0.1967`.
pub fn case2_paper_rounded() -> ManufacturedCase {
    let mut c = case2();
    c.spec = case2_spec(CASE2_PAPER_CONSTANT);
    c.name = "case2 (rounded m)".into();
    c
}

/// [`case2`] measured with the `H^1_0` weight `sin^2(pi (x - 0.4) / 0.2)` on
/// `[0.4, 0.6]`.
pub fn case2_smooth_omega() -> ManufacturedCase {
    let mut c = case2();
    let k = smooth_weight_constant();
    c.spec.omega = Weight::function(smooth_bump);
    c.spec.measurement = Arc::new(move |t| k * (1.0 + t * t));
    c.spec.measurement_derivative = Some(Arc::new(move |t| 2.0 * k * t));
    c.name = "case2 (smooth omega)".into();
    c
}

/// Replaces `m` (and `m'`) by the measures of a trajectory: `m` interpolates
/// the discrete measures, `m'` the backward differences. Every level of `traj`
/// must be stored.
pub fn with_discrete_measurement(spec: &ProblemSpec, traj: &Trajectory) -> Result<ProblemSpec> {
    let grid = traj.grid;
    if traj.states.len() != grid.t_count() + 1 {
        return Err(Error::InvalidInput(
            "trajectory must store every time level".into(),
        ));
    }
    let omega = spec.omega.sample(&grid);
    let m: Vec<f64> = traj
        .states
        .iter()
        .map(|s| measure(s, &omega))
        .collect::<Result<_>>()?;
    let tau = grid.tau();
    let mut dm: Vec<f64> = m.windows(2).map(|w| (w[1] - w[0]) / tau).collect();
    dm.insert(0, dm.first().copied().unwrap_or(0.0));
    let mut out = spec.clone();
    out.measurement = tabulated(0.0, tau, m);
    out.measurement_derivative = Some(tabulated(0.0, tau, dm));
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorTable {
    /// Stored time levels.
    pub times: Vec<f64>,
    pub u_max_err: Vec<f64>,
    pub u_l2_err: Vec<f64>,
    /// `|h_i - h(t_i)|` at each stored time; `None` where no value exists.
    pub h_abs_err: Vec<Option<f64>>,
    /// Every recovered source value: `(t_i, |h_i - h(t_i)|)`.
    pub source_err: Vec<(f64, f64)>,
    /// Final max error over `max_j |u(T, x_j)|`.
    pub final_rel_err_u: f64,
    /// Final source error over `max_i |h(t_i)|`; NaN without source values.
    pub final_rel_err_h: f64,
    pub final_u_max_err: f64,
    /// Max of `source_err`; NaN without source values.
    pub h_max_err: f64,
    h_scale: f64,
}

impl ErrorTable {
    /// Largest source error at `t >= t0` relative to `max_i |h(t_i)|`.
    pub fn max_rel_h_err_after(&self, t0: f64) -> f64 {
        self.source_err
            .iter()
            .filter(|(t, _)| *t >= t0 - 1e-12)
            .map(|(_, e)| e / self.h_scale)
            .fold(f64::NAN, f64::max)
    }

    /// Largest absolute source error at `t >= t0`.
    pub fn max_h_err_after(&self, t0: f64) -> f64 {
        self.source_err
            .iter()
            .filter(|(t, _)| *t >= t0 - 1e-12)
            .map(|(_, e)| *e)
            .fold(f64::NAN, f64::max)
    }
}

pub fn compute_errors(traj: &Trajectory, case: &ManufacturedCase) -> Result<ErrorTable> {
    let grid = traj.grid;
    if grid.length() != case.spec.length || grid.horizon() != case.spec.horizon {
        return Err(Error::InvalidInput(format!(
            "trajectory grid covers (0, {}) x (0, {}), case {} needs (0, {}) x (0, {})",
            grid.horizon(),
            grid.length(),
            case.name,
            case.spec.horizon,
            case.spec.length
        )));
    }
    let dx = grid.dx();
    let mut u_max_err = Vec::with_capacity(traj.states.len());
    let mut u_l2_err = Vec::with_capacity(traj.states.len());
    let mut h_abs_err = Vec::with_capacity(traj.states.len());
    let mut final_exact_max: f64 = 0.0;
    for (k, (state, &level)) in traj.states.iter().zip(&traj.levels).enumerate() {
        let t = grid.t(level);
        let mut max: f64 = 0.0;
        let mut sq = 0.0;
        let mut exact_max: f64 = 0.0;
        // boundary values are imposed, so only interior nodes carry error
        for (j, u) in state.values().iter().enumerate() {
            let exact = (case.exact_u)(t, grid.x(j + 1));
            let e = (u - exact).abs();
            max = max.max(e);
            sq += e * e;
            exact_max = exact_max.max(exact.abs());
        }
        u_max_err.push(max);
        u_l2_err.push((dx * sq).sqrt());
        h_abs_err.push(
            traj.source_at(level)
                .map(|s| (s.value - (case.exact_h)(s.time)).abs()),
        );
        if k + 1 == traj.states.len() {
            final_exact_max = exact_max;
        }
    }
    let source_err: Vec<(f64, f64)> = traj
        .source_values
        .iter()
        .map(|s| (s.time, (s.value - (case.exact_h)(s.time)).abs()))
        .collect();
    let h_scale = (0..=grid.t_count())
        .map(|i| (case.exact_h)(grid.t(i)).abs())
        .fold(0.0, f64::max);
    let final_u_max_err = *u_max_err
        .last()
        .expect("trajectory holds the initial state");
    let final_rel_err_u = final_u_max_err / final_exact_max;
    let final_rel_err_h = source_err.last().map_or(f64::NAN, |(_, e)| e / h_scale);
    let h_max_err = source_err.iter().map(|(_, e)| *e).fold(f64::NAN, f64::max);
    Ok(ErrorTable {
        times: traj.times.clone(),
        u_max_err,
        u_l2_err,
        h_abs_err,
        source_err,
        final_rel_err_u,
        final_rel_err_h,
        final_u_max_err,
        h_max_err,
        h_scale,
    })
}

/// Scheme of a convergence study.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StudyScheme {
    /// Direct solve driven by the exact `h`.
    Direct(DirectScheme),
    /// Reconstruction from the case's measurement.
    Inverse(InverseScheme),
}

/// Scheme and options shared by every level of a study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudyOptions {
    pub scheme: StudyScheme,
    pub cn_nonlinearity: CnNonlinearity,
    pub anchor_measurement: bool,
}

impl StudyOptions {
    pub fn new(scheme: StudyScheme) -> Self {
        Self {
            scheme,
            cn_nonlinearity: CnNonlinearity::default(),
            anchor_measurement: false,
        }
    }
}

impl From<StudyScheme> for StudyOptions {
    fn from(scheme: StudyScheme) -> Self {
        Self::new(scheme)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelErrors {
    pub nx: usize,
    pub nt: usize,
    pub u_final_max_err: f64,
    /// NaN for direct runs.
    pub h_max_err: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub level: LevelErrors,
    /// Observed order against the previous level; `None` on the first row.
    pub order_u: Option<f64>,
    pub order_h: Option<f64>,
    /// False when an order is NaN because an error vanished or is undefined.
    pub orders_defined: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
}

/// `log(e_coarse / e_fine) / log(ratio)`; NaN when the quotient is undefined.
pub fn observed_order(e_coarse: f64, e_fine: f64, ratio: f64) -> f64 {
    if e_coarse > 0.0 && e_fine > 0.0 && e_coarse.is_finite() && e_fine.is_finite() && ratio > 1.0 {
        (e_coarse / e_fine).ln() / ratio.ln()
    } else {
        f64::NAN
    }
}

impl ConvergenceTable {
    pub fn from_levels(levels: Vec<LevelErrors>) -> Self {
        let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(levels.len());
        for (k, level) in levels.iter().enumerate() {
            let row = if k == 0 {
                ConvergenceRow {
                    level: *level,
                    order_u: None,
                    order_h: None,
                    orders_defined: true,
                }
            } else {
                let prev = levels[k - 1];
                let ratio =
                    (level.nx as f64 / prev.nx as f64).max(level.nt as f64 / prev.nt as f64);
                let ou = observed_order(prev.u_final_max_err, level.u_final_max_err, ratio);
                let direct = prev.h_max_err.is_nan() && level.h_max_err.is_nan();
                let oh = (!direct).then(|| observed_order(prev.h_max_err, level.h_max_err, ratio));
                ConvergenceRow {
                    level: *level,
                    order_u: Some(ou),
                    order_h: oh,
                    orders_defined: !ou.is_nan() && !oh.is_some_and(f64::is_nan),
                }
            };
            rows.push(row);
        }
        Self { rows }
    }

    /// Orders of consecutive pairs (rows 1..).
    pub fn orders_u(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.order_u).collect()
    }

    pub fn orders_h(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.order_h).collect()
    }
}

/// Errors of a single grid level.
pub fn run_level(
    case: &ManufacturedCase,
    nx: usize,
    nt: usize,
    opts: StudyOptions,
) -> Result<LevelErrors> {
    let grid = case.spec.grid(nx, nt)?;
    let traj = match opts.scheme {
        StudyScheme::Direct(s) => {
            let mut cfg = DirectSchemeConfig::new(s, grid);
            cfg.store_every = nt.max(1);
            cfg.cn_nonlinearity = opts.cn_nonlinearity;
            let h = case.exact_h.clone();
            run_direct(&case.spec, &move |t| h(t), &cfg)?
        }
        StudyScheme::Inverse(s) => {
            let mut cfg = InverseSchemeConfig::new(s, grid);
            cfg.store_every = nt.max(1);
            cfg.cn_nonlinearity = opts.cn_nonlinearity;
            cfg.anchor_measurement = opts.anchor_measurement;
            run_inverse(&case.spec, &cfg)?
        }
    };
    let table = compute_errors(&traj, case)?;
    Ok(LevelErrors {
        nx,
        nt,
        u_final_max_err: table.final_u_max_err,
        h_max_err: table.h_max_err,
    })
}

/// Runs every grid level (concurrently) and tabulates observed orders.
pub fn convergence_study(
    case: &ManufacturedCase,
    grids: &[(usize, usize)],
    opts: impl Into<StudyOptions>,
) -> Result<ConvergenceTable> {
    let opts = opts.into();
    if grids.len() < 2 {
        return Err(Error::InvalidInput(
            "a convergence study needs at least 2 grid levels".into(),
        ));
    }
    let results: Vec<Result<LevelErrors>> = std::thread::scope(|s| {
        let handles: Vec<_> = grids
            .iter()
            .map(|&(nx, nt)| s.spawn(move || run_level(case, nx, nt, opts)))
            .collect();
        handles
            .into_iter()
            .map(|h| {
                h.join()
                    .unwrap_or_else(|_| Err(Error::InvalidInput("grid level panicked".into())))
            })
            .collect()
    });
    let levels = results.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceTable::from_levels(levels))
}

/// Nonlinearity `f(s) = c s` with its global Lipschitz constant.
pub fn linear_nonlinearity(c: f64) -> Nonlinearity {
    Nonlinearity::new(move |s| c * s, Lipschitz::Global(c.abs()))
}
