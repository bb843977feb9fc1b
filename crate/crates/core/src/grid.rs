//! Grids, nodal fields, coefficient functions and the problem record.
//!
//! The spatial domain is `[0, length]` with homogeneous Dirichlet data, so only
//! the `N_x - 1` interior nodes carry unknowns. Boundary values are implicitly
//! zero everywhere in this crate.

use std::fmt;
use std::sync::Arc;

use crate::error::{check_len, Error, Result};

/// A function of `(t, x)`.
pub type SpaceTimeFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
/// A function of a single variable (`x` or `t` depending on context).
pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Uniform space-time grid: `x_j = j dx` for `j = 0..=N_x`, `t_i = i tau` for
/// `i = 0..=N_t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceTimeGrid {
    x_count: usize,
    t_count: usize,
    length: f64,
    horizon: f64,
    dx: f64,
    tau: f64,
}

impl SpaceTimeGrid {
    /// `t_count = 0` is allowed and describes a grid with no time steps; `tau`
    /// is then reported as zero.
    pub fn new(x_count: usize, t_count: usize, length: f64, horizon: f64) -> Result<Self> {
        if x_count == 0 {
            return Err(Error::DegenerateGrid("x_count must be positive".into()));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::DegenerateGrid(format!(
                "length must be > 0, got {length}"
            )));
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::DegenerateGrid(format!(
                "horizon must be > 0, got {horizon}"
            )));
        }
        let tau = if t_count == 0 {
            0.0
        } else {
            horizon / t_count as f64
        };
        Ok(Self {
            x_count,
            t_count,
            length,
            horizon,
            dx: length / x_count as f64,
            tau,
        })
    }

    /// Unit interval with the given resolution.
    pub fn unit(x_count: usize, t_count: usize, horizon: f64) -> Result<Self> {
        Self::new(x_count, t_count, 1.0, horizon)
    }

    pub fn x_count(&self) -> usize {
        self.x_count
    }

    pub fn t_count(&self) -> usize {
        self.t_count
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Number of interior nodes, `N_x - 1`.
    pub fn interior(&self) -> usize {
        self.x_count - 1
    }

    pub fn x(&self, j: usize) -> f64 {
        j as f64 * self.dx
    }

    /// Cell midpoint `x_{j+1/2}`.
    pub fn x_half(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.dx
    }

    pub fn t(&self, i: usize) -> f64 {
        i as f64 * self.tau
    }

    /// All node coordinates including both boundaries.
    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.x_count).map(|j| self.x(j)).collect()
    }

    /// Time level closest to `t`, clamped to the grid.
    pub fn nearest_level(&self, t: f64) -> usize {
        if self.tau == 0.0 {
            return 0;
        }
        let i = (t / self.tau).round();
        if i <= 0.0 {
            0
        } else {
            (i as usize).min(self.t_count)
        }
    }

    /// Same spatial and temporal layout.
    pub fn same_layout(&self, other: &SpaceTimeGrid) -> bool {
        self.x_count == other.x_count
            && self.t_count == other.t_count
            && self.length == other.length
            && self.horizon == other.horizon
    }
}

/// Interior-node values of a function vanishing on the boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct NodalField {
    values: Vec<f64>,
    grid: SpaceTimeGrid,
}

impl NodalField {
    pub fn new(values: Vec<f64>, grid: SpaceTimeGrid) -> Result<Self> {
        check_len(grid.interior(), values.len())?;
        Ok(Self { values, grid })
    }

    pub fn zeros(grid: SpaceTimeGrid) -> Self {
        Self {
            values: vec![0.0; grid.interior()],
            grid,
        }
    }

    /// Sample `profile(x)` at the interior nodes.
    pub fn from_profile(grid: SpaceTimeGrid, profile: impl Fn(f64) -> f64) -> Self {
        let values = (1..grid.x_count()).map(|j| profile(grid.x(j))).collect();
        Self { values, grid }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn grid(&self) -> &SpaceTimeGrid {
        &self.grid
    }

    /// Values on all `N_x + 1` nodes, boundary zeros included.
    pub fn with_boundary(&self) -> Vec<f64> {
        let mut full = Vec::with_capacity(self.values.len() + 2);
        full.push(0.0);
        full.extend_from_slice(&self.values);
        full.push(0.0);
        full
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Discrete `L^2` norm squared, `dx * sum u_j^2`.
    pub fn l2_norm_sq(&self) -> f64 {
        self.grid.dx() * self.values.iter().map(|v| v * v).sum::<f64>()
    }

    /// Discrete `H^1` norm squared: `L^2` part plus forward differences over
    /// every cell (boundary zeros included).
    pub fn h1_norm_sq(&self) -> f64 {
        let dx = self.grid.dx();
        let full = self.with_boundary();
        let grad: f64 = full
            .windows(2)
            .map(|w| {
                let d = (w[1] - w[0]) / dx;
                d * d
            })
            .sum();
        self.l2_norm_sq() + dx * grad
    }
}

/// Samples `f(t, x_j)` at the interior nodes, in index order.
pub fn sample_function(f: impl Fn(f64, f64) -> f64, t: f64, grid: &SpaceTimeGrid) -> Vec<f64> {
    (1..grid.x_count()).map(|j| f(t, grid.x(j))).collect()
}

/// Samples `f(t, x_j)` at all `N_x + 1` nodes.
pub fn sample_nodes(f: impl Fn(f64, f64) -> f64, t: f64, grid: &SpaceTimeGrid) -> Vec<f64> {
    (0..=grid.x_count()).map(|j| f(t, grid.x(j))).collect()
}

/// Samples `f(t, x_{j+1/2})` at the `N_x` cell midpoints.
pub fn sample_midpoints(f: impl Fn(f64, f64) -> f64, t: f64, grid: &SpaceTimeGrid) -> Vec<f64> {
    (0..grid.x_count()).map(|j| f(t, grid.x_half(j))).collect()
}

/// Quadrature rule used for the weighted spatial average.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Quadrature {
    /// `dx * sum_{j=0}^{N_x} u_j w_j`, every node with unit weight.
    #[default]
    UniformSum,
    /// Composite trapezoid; coincides with `UniformSum` for fields that
    /// vanish on the boundary.
    Trapezoid,
}

/// Weighted spatial average `dx * sum_{j=0}^{N_x} u_j w(x_j)`.
///
/// The sum runs left to right over all nodes so the result is reproducible bit
/// for bit.
pub fn measure(field: &NodalField, omega_samples: &[f64]) -> Result<f64> {
    measure_with(field, omega_samples, Quadrature::UniformSum)
}

pub fn measure_with(field: &NodalField, omega_samples: &[f64], rule: Quadrature) -> Result<f64> {
    let grid = field.grid();
    check_len(grid.x_count() + 1, omega_samples.len())?;
    let full = field.with_boundary();
    let last = full.len() - 1;
    let mut sum = 0.0;
    for (j, (u, w)) in full.iter().zip(omega_samples).enumerate() {
        let term = u * w;
        sum += match rule {
            Quadrature::Trapezoid if j == 0 || j == last => 0.5 * term,
            _ => term,
        };
    }
    Ok(grid.dx() * sum)
}

/// Discrete inner product on all nodes, same rule as [`measure`].
pub(crate) fn node_inner(dx: f64, a: &[f64], b: &[f64]) -> f64 {
    dx * a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>()
}

/// A coefficient such as `rho`, `eta` or `kappa`, with its declared bounds.
#[derive(Clone)]
pub struct CoefficientField {
    evaluator: SpaceTimeFn,
    lower_bound: f64,
    upper_bound: f64,
    time_derivative_bound: Option<f64>,
}

impl fmt::Debug for CoefficientField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoefficientField")
            .field("lower_bound", &self.lower_bound)
            .field("upper_bound", &self.upper_bound)
            .field("time_derivative_bound", &self.time_derivative_bound)
            .finish_non_exhaustive()
    }
}

impl CoefficientField {
    pub fn new(
        evaluator: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        lower_bound: f64,
        upper_bound: f64,
    ) -> Self {
        Self {
            evaluator: Arc::new(evaluator),
            lower_bound,
            upper_bound,
            time_derivative_bound: None,
        }
    }

    pub fn constant(value: f64) -> Self {
        let mut c = Self::new(move |_, _| value, value, value);
        c.time_derivative_bound = Some(0.0);
        c
    }

    pub fn with_time_derivative_bound(mut self, bound: f64) -> Self {
        self.time_derivative_bound = Some(bound);
        self
    }

    #[inline]
    pub fn eval(&self, t: f64, x: f64) -> f64 {
        (self.evaluator)(t, x)
    }

    pub fn lower_bound(&self) -> f64 {
        self.lower_bound
    }

    pub fn upper_bound(&self) -> f64 {
        self.upper_bound
    }

    pub fn time_derivative_bound(&self) -> Option<f64> {
        self.time_derivative_bound
    }

    pub fn evaluator(&self) -> &SpaceTimeFn {
        &self.evaluator
    }

    /// Checks the declared bounds at every grid node and time level.
    pub fn verify_on(&self, grid: &SpaceTimeGrid, name: &str) -> Result<()> {
        let slack = |b: f64| 1e-12 * b.abs().max(1.0);
        for i in 0..=grid.t_count() {
            let t = grid.t(i);
            for j in 0..=grid.x_count() {
                let x = grid.x(j);
                let v = self.eval(t, x);
                if v.is_nan() {
                    return Err(Error::Data(format!("{name}({t}, {x}) is NaN")));
                }
                if v < self.lower_bound - slack(self.lower_bound)
                    || v > self.upper_bound + slack(self.upper_bound)
                {
                    return Err(Error::AssumptionViolation(format!(
                        "{name}({t}, {x}) = {v} outside declared bounds [{}, {}]",
                        self.lower_bound, self.upper_bound
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Lipschitz information declared for the nonlinearity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Lipschitz {
    Global(f64),
    /// Only locally Lipschitz, e.g. `s^3`.
    LocalOnly,
}

#[derive(Clone)]
pub struct Nonlinearity {
    f: ScalarFn,
    lipschitz: Lipschitz,
}

impl fmt::Debug for Nonlinearity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Nonlinearity")
            .field("lipschitz", &self.lipschitz)
            .finish_non_exhaustive()
    }
}

impl Nonlinearity {
    pub fn new(f: impl Fn(f64) -> f64 + Send + Sync + 'static, lipschitz: Lipschitz) -> Self {
        Self {
            f: Arc::new(f),
            lipschitz,
        }
    }

    pub fn zero() -> Self {
        Self::new(|_| 0.0, Lipschitz::Global(0.0))
    }

    pub fn cubic() -> Self {
        Self::new(|s| s * s * s, Lipschitz::LocalOnly)
    }

    #[inline]
    pub fn eval(&self, s: f64) -> f64 {
        (self.f)(s)
    }

    pub fn lipschitz(&self) -> Lipschitz {
        self.lipschitz
    }

    pub fn apply(&self, values: &[f64]) -> Vec<f64> {
        values.iter().map(|&s| self.eval(s)).collect()
    }
}

/// Weight `omega(x)` of the spatial measurement.
#[derive(Clone)]
pub enum Weight {
    /// Indicator of `[start, end]`. It takes the value 1/2 at the two jump
    /// points, so the uniform node sum reduces to the trapezoid rule on
    /// `[start, end]` whenever the jumps fall on grid nodes.
    Indicator { start: f64, end: f64 },
    /// Indicator convolved with the raised-cosine kernel of the given width;
    /// the result is `C^2`.
    SmoothedIndicator { start: f64, end: f64, width: f64 },
    /// Any other weight, assumed continuous.
    Function(ScalarFn),
}

impl fmt::Debug for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Weight::Indicator { start, end } => write!(f, "Indicator[{start}, {end}]"),
            Weight::SmoothedIndicator { start, end, width } => {
                write!(f, "SmoothedIndicator[{start}, {end}; {width}]")
            }
            Weight::Function(_) => write!(f, "Function"),
        }
    }
}

/// Raised-cosine kernel CDF on `[-w/2, w/2]`.
fn kernel_cdf(s: f64, width: f64) -> f64 {
    let half = 0.5 * width;
    if s <= -half {
        0.0
    } else if s >= half {
        1.0
    } else {
        (s + half) / width
            + (2.0 * std::f64::consts::PI * s / width).sin() / (2.0 * std::f64::consts::PI)
    }
}

impl Weight {
    pub fn indicator(start: f64, end: f64) -> Self {
        Weight::Indicator { start, end }
    }

    pub fn function(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Weight::Function(Arc::new(f))
    }

    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Weight::Indicator { start, end } => {
                let at = |a: f64| (x - a).abs() <= 1e-12 * a.abs().max(1.0);
                if at(start) || at(end) {
                    0.5
                } else if x > start && x < end {
                    1.0
                } else {
                    0.0
                }
            }
            Weight::SmoothedIndicator { start, end, width } => {
                kernel_cdf(x - start, width) - kernel_cdf(x - end, width)
            }
            Weight::Function(ref f) => f(x),
        }
    }

    /// Whether the weight has jumps (and therefore no `H^1` gradient).
    pub fn is_discontinuous(&self) -> bool {
        matches!(self, Weight::Indicator { .. })
    }

    /// Smoothed copy for schemes that differentiate the weight. Continuous
    /// weights are convolved numerically with the same kernel.
    pub fn mollified(&self, width: f64) -> Result<Weight> {
        if !(width.is_finite() && width > 0.0) {
            return Err(Error::InvalidInput(format!(
                "mollifier width must be > 0, got {width}"
            )));
        }
        Ok(match self {
            Weight::Indicator { start, end } | Weight::SmoothedIndicator { start, end, .. } => {
                Weight::SmoothedIndicator {
                    start: *start,
                    end: *end,
                    width,
                }
            }
            Weight::Function(f) => {
                let f = f.clone();
                const NODES: usize = 64;
                Weight::function(move |x| {
                    // midpoint rule against the kernel density
                    let h = width / NODES as f64;
                    let mut acc = 0.0;
                    for k in 0..NODES {
                        let s = -0.5 * width + (k as f64 + 0.5) * h;
                        let density =
                            (1.0 + (2.0 * std::f64::consts::PI * s / width).cos()) / width;
                        acc += f(x - s) * density * h;
                    }
                    acc
                })
            }
        })
    }

    pub fn sample(&self, grid: &SpaceTimeGrid) -> Vec<f64> {
        (0..=grid.x_count()).map(|j| self.eval(grid.x(j))).collect()
    }
}

/// All data of the direct/inverse problem on `(0, horizon) x (0, length)`.
///
/// The equation is
/// `d_t(rho u) - (eta u_xt)_x - (kappa u_x)_x = f(u) + f_tilde + p h`
/// with `u = 0` on the boundary, `u(0) = u0`, and the measurement
/// `integral u(t, x) omega(x) dx = m(t)`.
#[derive(Clone)]
pub struct ProblemSpec {
    pub length: f64,
    pub horizon: f64,
    pub rho: CoefficientField,
    pub eta: CoefficientField,
    pub kappa: CoefficientField,
    pub nonlinearity: Nonlinearity,
    /// Spatial profile of the unknown source.
    pub p: SpaceTimeFn,
    /// Known part of the source.
    pub f_tilde: SpaceTimeFn,
    pub u0: ScalarFn,
    pub omega: Weight,
    pub measurement: ScalarFn,
    /// `m'(t)`; only the Rothe inverse scheme needs it.
    pub measurement_derivative: Option<ScalarFn>,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("length", &self.length)
            .field("horizon", &self.horizon)
            .field("rho", &self.rho)
            .field("eta", &self.eta)
            .field("kappa", &self.kappa)
            .field("nonlinearity", &self.nonlinearity)
            .field("omega", &self.omega)
            .finish_non_exhaustive()
    }
}

impl ProblemSpec {
    pub fn grid(&self, x_count: usize, t_count: usize) -> Result<SpaceTimeGrid> {
        SpaceTimeGrid::new(x_count, t_count, self.length, self.horizon)
    }

    /// Boundary compatibility of `u0` and declared coefficient bounds.
    pub fn validate(&self, grid: &SpaceTimeGrid) -> Result<()> {
        if grid.length() != self.length || grid.horizon() != self.horizon {
            return Err(Error::InvalidInput(
                "grid does not cover the problem domain".into(),
            ));
        }
        let scale = (0..=grid.x_count())
            .map(|j| (self.u0)(grid.x(j)).abs())
            .fold(1.0, f64::max);
        for x in [0.0, self.length] {
            let v = (self.u0)(x);
            if !(v.abs() <= 1e-12 * scale) {
                return Err(Error::AssumptionViolation(format!(
                    "initial profile must vanish on the boundary, u0({x}) = {v}"
                )));
            }
        }
        self.rho.verify_on(grid, "rho")?;
        self.eta.verify_on(grid, "eta")?;
        self.kappa.verify_on(grid, "kappa")?;
        Ok(())
    }

    pub fn p_at(&self, t: f64, x: f64) -> f64 {
        (self.p)(t, x)
    }

    pub fn f_tilde_at(&self, t: f64, x: f64) -> f64 {
        (self.f_tilde)(t, x)
    }

    pub fn initial_field(&self, grid: SpaceTimeGrid) -> NodalField {
        NodalField::from_profile(grid, |x| (self.u0)(x))
    }
}

/// Piecewise-linear interpolant through `(t0 + k dt, values[k])`; exact at the
/// nodes. Useful for feeding discrete measurement series into a
/// [`ProblemSpec`].
pub fn tabulated(t0: f64, dt: f64, values: Vec<f64>) -> ScalarFn {
    Arc::new(move |t: f64| {
        let last = values.len() - 1;
        let s = (t - t0) / dt;
        let k = s.round();
        if (s - k).abs() <= 1e-9 && k >= 0.0 && (k as usize) <= last {
            return values[k as usize];
        }
        let s = s.clamp(0.0, last as f64);
        let k = (s.floor() as usize).min(last.saturating_sub(1));
        let frac = s - k as f64;
        if last == 0 {
            values[0]
        } else {
            values[k] * (1.0 - frac) + values[k + 1] * frac
        }
    })
}
