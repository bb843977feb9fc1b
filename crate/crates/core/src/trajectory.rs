use crate::grid::{NodalField, SpaceTimeGrid};

/// Per-step bookkeeping recorded by every time loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDiagnostics {
    pub step: usize,
    pub time: f64,
    /// Max-norm residual of the linear system solved at this step.
    pub residual: f64,
    /// `||(u_i - u_{i-1}) / tau||^2_{H^1}`.
    pub increment_h1_sq: f64,
    /// `||u_i||^2_{H^1}`.
    pub state_h1_sq: f64,
    /// `sum_{k <= i} ||delta u_k||^2_{H^1} tau + ||u_i||^2_{H^1}`.
    pub energy: f64,
    /// Identifiability denominator of inverse steps.
    pub denominator: Option<f64>,
}

/// Recovered source value at one time level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceSample {
    pub step: usize,
    pub time: f64,
    pub value: f64,
    pub denominator: f64,
}

/// Stored states of one run. Source values and diagnostics are kept for every
/// step even when states are thinned.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub grid: SpaceTimeGrid,
    pub levels: Vec<usize>,
    pub times: Vec<f64>,
    pub states: Vec<NodalField>,
    pub source_values: Vec<SourceSample>,
    pub diagnostics: Vec<StepDiagnostics>,
}

impl Trajectory {
    pub(crate) fn start(initial: NodalField) -> Self {
        let grid = *initial.grid();
        Self {
            grid,
            levels: vec![0],
            times: vec![0.0],
            states: vec![initial],
            source_values: Vec::new(),
            diagnostics: Vec::new(),
        }
    }

    pub(crate) fn push_state(&mut self, level: usize, state: NodalField) {
        self.levels.push(level);
        self.times.push(self.grid.t(level));
        self.states.push(state);
    }

    pub fn final_state(&self) -> &NodalField {
        self.states
            .last()
            .expect("trajectory always holds the initial state")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("non-empty")
    }

    /// Source value recovered at time level `step`, if any.
    pub fn source_at(&self, step: usize) -> Option<&SourceSample> {
        // samples are stored in step order starting at 1
        self.source_values
            .get(step.wrapping_sub(1))
            .filter(|s| s.step == step)
            .or_else(|| self.source_values.iter().find(|s| s.step == step))
    }

    /// Largest discrete energy over the run (initial state included).
    pub fn max_energy(&self) -> f64 {
        let initial = self.states[0].h1_norm_sq();
        self.diagnostics
            .iter()
            .map(|d| d.energy)
            .fold(initial, f64::max)
    }
}

/// Running sums behind [`StepDiagnostics::energy`].
#[derive(Debug, Default)]
pub(crate) struct EnergyTracker {
    increments: f64,
}

impl EnergyTracker {
    /// Returns `(increment_h1_sq, state_h1_sq, energy)` for the step.
    pub fn update(&mut self, prev: &NodalField, next: &NodalField, tau: f64) -> (f64, f64, f64) {
        let delta: Vec<f64> = next
            .values()
            .iter()
            .zip(prev.values())
            .map(|(a, b)| (a - b) / tau)
            .collect();
        let delta = NodalField::new(delta, *next.grid()).expect("same grid");
        let inc = delta.h1_norm_sq();
        self.increments += inc * tau;
        let state = next.h1_norm_sq();
        (inc, state, self.increments + state)
    }
}

pub(crate) fn should_store(level: usize, last: usize, every: usize) -> bool {
    level == last || level.is_multiple_of(every.max(1))
}

pub(crate) fn max_residual(a: &crate::tridiag::TridiagonalMatrix, x: &[f64], rhs: &[f64]) -> f64 {
    a.mul_vec(x)
        .map(|ax| {
            ax.iter()
                .zip(rhs)
                .fold(0.0_f64, |m, (l, r)| m.max((l - r).abs()))
        })
        .unwrap_or(f64::NAN)
}
