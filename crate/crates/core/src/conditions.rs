//! Numerical evaluation of the data assumptions and of the identifiability
//! (smallness) condition
//!
//! `||p||_X^2 M^2 eta_1^2 / (4 wbar_m^2 eta_0 rho_0) < 1`,
//!
//! with `wbar(t) = (p(t), omega/rho(t))`, `wbar_m = min_t |wbar(t)|`,
//! `M = sup_t ||grad(omega/rho(t))||` and `||p||_X = max_t ||p(t)||`.
//!
//! The checker only reports: nothing here stops a solver from running.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::grid::{node_inner, sample_nodes, Lipschitz, ProblemSpec, SpaceTimeGrid};

/// Pass/fail flag per assumption.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AssumptionFlags {
    /// `0 < rho_0 <= rho <= rho_1`, `|d_t rho| <= rho_1'`.
    pub as1_rho: bool,
    /// `0 < eta_0 <= eta <= eta_1`.
    pub as2_eta: bool,
    /// `0 < kappa_0 <= kappa <= kappa_1`, `|d_t kappa| <= kappa_1'`.
    pub as3_kappa: bool,
    /// Global Lipschitz continuity of `f`.
    pub as4_lipschitz: bool,
    /// `u0` vanishes on the boundary.
    pub as6_initial: bool,
    /// `omega` continuous and vanishing on the boundary.
    pub as8_weight: bool,
    /// `wbar(t) != 0` for every time node.
    pub as9_identifiable: bool,
    /// The smallness condition; false whenever it cannot be evaluated.
    pub smallness: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    pub times: Vec<f64>,
    /// `wbar(t_i)` for every time node.
    pub omega_bar: Vec<f64>,
    pub omega_bar_min: f64,
    /// Discrete `sup_t ||grad(omega/rho(t))||`.
    pub gradient_sup: f64,
    /// Discrete `max_t ||p(t)||`.
    pub p_norm: f64,
    pub eta_lower: f64,
    pub eta_upper: f64,
    pub rho_lower: f64,
    /// Left side of the smallness condition; `None` when `wbar_m`, `eta_0`
    /// or `rho_0` vanish.
    pub zeta_lhs: Option<f64>,
    pub passes: AssumptionFlags,
    pub notes: Vec<String>,
}

/// Centered differences at interior nodes, one-sided at the two ends.
fn node_gradient(w: &[f64], dx: f64) -> Vec<f64> {
    let n = w.len() - 1;
    (0..=n)
        .map(|j| match j {
            0 => (w[1] - w[0]) / dx,
            j if j == n => (w[n] - w[n - 1]) / dx,
            j => (w[j + 1] - w[j - 1]) / (2.0 * dx),
        })
        .collect()
}

fn finite(values: &[f64], what: &str) -> Result<()> {
    match values.iter().find(|v| v.is_nan()) {
        Some(_) => Err(Error::Data(format!("{what} produced NaN on the grid"))),
        None => Ok(()),
    }
}

fn bounds_hold(spec_values: impl Iterator<Item = f64>, lower: f64, upper: f64) -> bool {
    let slack = |b: f64| 1e-12 * b.abs().max(1.0);
    let mut ok = true;
    for v in spec_values {
        ok &= v >= lower - slack(lower) && v <= upper + slack(upper);
    }
    ok
}

/// Evaluates every quantity by sampling the data on `grid`.
pub fn evaluate_conditions(spec: &ProblemSpec, grid: &SpaceTimeGrid) -> Result<ConditionReport> {
    if grid.x_count() < 2 {
        return Err(Error::DegenerateGrid(
            "need at least 2 spatial intervals".into(),
        ));
    }
    let dx = grid.dx();
    let omega = spec.omega.sample(grid);
    finite(&omega, "omega")?;
    let mut notes = Vec::new();

    let mut times = Vec::with_capacity(grid.t_count() + 1);
    let mut omega_bar = Vec::with_capacity(grid.t_count() + 1);
    let mut gradient_sup: f64 = 0.0;
    let mut p_norm: f64 = 0.0;
    let mut rho_ok = true;
    let mut eta_ok = true;
    let mut kappa_ok = true;
    let mut prev_rho: Option<Vec<f64>> = None;
    let mut prev_kappa: Option<Vec<f64>> = None;
    let mut max_drho: f64 = 0.0;
    let mut max_dkappa: f64 = 0.0;

    for i in 0..=grid.t_count() {
        let t = grid.t(i);
        let rho = sample_nodes(|t, x| spec.rho.eval(t, x), t, grid);
        let eta = sample_nodes(|t, x| spec.eta.eval(t, x), t, grid);
        let kappa = sample_nodes(|t, x| spec.kappa.eval(t, x), t, grid);
        let p = sample_nodes(|t, x| spec.p_at(t, x), t, grid);
        finite(&rho, "rho")?;
        finite(&eta, "eta")?;
        finite(&kappa, "kappa")?;
        finite(&p, "p")?;

        rho_ok &= bounds_hold(
            rho.iter().copied(),
            spec.rho.lower_bound(),
            spec.rho.upper_bound(),
        );
        eta_ok &= bounds_hold(
            eta.iter().copied(),
            spec.eta.lower_bound(),
            spec.eta.upper_bound(),
        );
        kappa_ok &= bounds_hold(
            kappa.iter().copied(),
            spec.kappa.lower_bound(),
            spec.kappa.upper_bound(),
        );
        if grid.tau() > 0.0 {
            if let Some(prev) = &prev_rho {
                max_drho = rho
                    .iter()
                    .zip(prev)
                    .fold(max_drho, |m, (a, b)| m.max((a - b).abs() / grid.tau()));
            }
            if let Some(prev) = &prev_kappa {
                max_dkappa = kappa
                    .iter()
                    .zip(prev)
                    .fold(max_dkappa, |m, (a, b)| m.max((a - b).abs() / grid.tau()));
            }
        }

        let w: Vec<f64> = omega.iter().zip(&rho).map(|(o, r)| o / r).collect();
        omega_bar.push(node_inner(dx, &p, &w));
        let grad = node_gradient(&w, dx);
        gradient_sup = gradient_sup.max(node_inner(dx, &grad, &grad).sqrt());
        p_norm = p_norm.max(node_inner(dx, &p, &p).sqrt());
        times.push(t);
        prev_rho = Some(rho);
        prev_kappa = Some(kappa);
    }

    let omega_bar_min = omega_bar.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    let rho0 = spec.rho.lower_bound();
    let eta0 = spec.eta.lower_bound();
    let eta1 = spec.eta.upper_bound();

    let check_derivative =
        |name: &str, declared: Option<f64>, observed: f64, notes: &mut Vec<String>| -> bool {
            match declared {
                Some(b) if observed <= b * (1.0 + 1e-9) + 1e-12 => true,
                Some(b) => {
                    notes.push(format!(
                        "|d_t {name}| reaches {observed:.6e}, above the declared bound {b}"
                    ));
                    false
                }
                None => {
                    notes.push(format!("no bound declared for |d_t {name}|"));
                    false
                }
            }
        };

    let mut as1 = rho_ok && rho0 > 0.0;
    if !rho_ok {
        notes.push("rho leaves its declared bounds on the grid".into());
    }
    if rho0 <= 0.0 {
        notes.push(format!("AS-(1): rho lower bound {rho0} is not positive"));
    }
    as1 &= check_derivative(
        "rho",
        spec.rho.time_derivative_bound(),
        max_drho,
        &mut notes,
    );

    let as2 = eta_ok && eta0 > 0.0;
    if !eta_ok {
        notes.push("eta leaves its declared bounds on the grid".into());
    }
    if eta0 <= 0.0 {
        notes.push(format!("AS-(2): eta lower bound {eta0} is not positive"));
    }

    let kappa0 = spec.kappa.lower_bound();
    let mut as3 = kappa_ok && kappa0 > 0.0;
    if !kappa_ok {
        notes.push("kappa leaves its declared bounds on the grid".into());
    }
    if kappa0 <= 0.0 {
        notes.push(format!(
            "AS-(3): kappa lower bound {kappa0} is not positive"
        ));
    }
    as3 &= check_derivative(
        "kappa",
        spec.kappa.time_derivative_bound(),
        max_dkappa,
        &mut notes,
    );

    let as4 = matches!(spec.nonlinearity.lipschitz(), Lipschitz::Global(_));
    if !as4 {
        notes.push("AS-(4): f is only locally Lipschitz; stability bounds are heuristic".into());
    }

    let u0_scale = (0..=grid.x_count())
        .map(|j| (spec.u0)(grid.x(j)).abs())
        .fold(1.0, f64::max);
    let as6 = [0.0, spec.length]
        .iter()
        .all(|&x| (spec.u0)(x).abs() <= 1e-12 * u0_scale);
    if !as6 {
        notes.push("AS-(6): u0 does not vanish on the boundary".into());
    }

    let ends_vanish = omega[0].abs() <= 1e-12 && omega[omega.len() - 1].abs() <= 1e-12;
    let as8 = !spec.omega.is_discontinuous() && ends_vanish;
    if spec.omega.is_discontinuous() {
        notes.push(
            "AS-(8): omega is an indicator, not in H^1_0; M is grid dependent and grows like dx^(-1/2)".into(),
        );
    } else if !ends_vanish {
        notes.push("AS-(8): omega does not vanish on the boundary".into());
    }

    let zero_at: Vec<f64> = times
        .iter()
        .zip(&omega_bar)
        .filter(|(_, w)| w.abs() <= 1e-14 * p_norm.max(1e-300))
        .map(|(t, _)| *t)
        .collect();
    let as9 = zero_at.is_empty();
    if let Some(t) = zero_at.first() {
        notes.push(format!("AS-(9) violated at t={t}: (p, omega/rho) = 0"));
    }

    let zeta_lhs = if omega_bar_min > 0.0 && eta0 > 0.0 && rho0 > 0.0 {
        Some(
            p_norm * p_norm * gradient_sup * gradient_sup * eta1 * eta1
                / (4.0 * omega_bar_min * omega_bar_min * eta0 * rho0),
        )
    } else {
        notes.push("smallness condition not applicable: a denominator vanishes".into());
        None
    };
    let smallness = zeta_lhs.is_some_and(|z| z < 1.0);

    Ok(ConditionReport {
        times,
        omega_bar,
        omega_bar_min,
        gradient_sup,
        p_norm,
        eta_lower: eta0,
        eta_upper: eta1,
        rho_lower: rho0,
        zeta_lhs,
        passes: AssumptionFlags {
            as1_rho: as1,
            as2_eta: as2,
            as3_kappa: as3,
            as4_lipschitz: as4,
            as6_initial: as6,
            as8_weight: as8,
            as9_identifiable: as9,
            smallness,
        },
        notes,
    })
}

impl ConditionReport {
    /// First time node where `wbar` vanishes.
    pub fn first_unidentifiable_time(&self) -> Option<f64> {
        self.times
            .iter()
            .zip(&self.omega_bar)
            .find(|(_, w)| w.abs() <= 1e-14 * self.p_norm.max(1e-300))
            .map(|(t, _)| *t)
    }

    /// One-line summary for command-line output.
    pub fn summary(&self) -> String {
        let mut parts = Vec::new();
        match self.first_unidentifiable_time() {
            Some(t) => parts.push(format!("AS-(9) violated at t={t}")),
            None => parts.push(format!(
                "AS-(9) holds (min |wbar| = {:e})",
                self.omega_bar_min
            )),
        }
        match self.zeta_lhs {
            Some(z) => parts.push(format!("zeta_lhs = {z:e}")),
            None => parts.push("zeta_lhs undefined".into()),
        }
        parts.join("; ")
    }
}

fn flag(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "VIOLATED"
    }
}

/// Renders the report together with the three readings of the smallness
/// condition: size of `p`, coefficient ratio, and quality of the weight.
pub fn check_interpretation_report(report: &ConditionReport) -> String {
    let mut s = String::new();
    let p = &report.passes;
    let _ = writeln!(s, "# identifiability and data assumptions");
    let _ = writeln!(s, "AS-(1) rho bounds:          {}", flag(p.as1_rho));
    let _ = writeln!(s, "AS-(2) eta bounds:          {}", flag(p.as2_eta));
    let _ = writeln!(s, "AS-(3) kappa bounds:        {}", flag(p.as3_kappa));
    let _ = writeln!(s, "AS-(4) f Lipschitz:         {}", flag(p.as4_lipschitz));
    let _ = writeln!(s, "AS-(6) u0 boundary values:  {}", flag(p.as6_initial));
    let _ = writeln!(s, "AS-(8) omega in H^1_0:      {}", flag(p.as8_weight));
    let _ = writeln!(
        s,
        "AS-(9) wbar(t) != 0:        {}",
        flag(p.as9_identifiable)
    );
    if let Some(t) = report.first_unidentifiable_time() {
        let _ = writeln!(s, "  AS-(9) violated at t={t}");
    }
    let _ = writeln!(s);
    let _ = writeln!(s, "wbar_m (min |wbar|)       = {:e}", report.omega_bar_min);
    let _ = writeln!(s, "M (sup |grad omega/rho|)  = {:e}", report.gradient_sup);
    let _ = writeln!(s, "||p||_X                   = {:e}", report.p_norm);
    let ratio = if report.eta_lower > 0.0 && report.rho_lower > 0.0 {
        report.eta_upper * report.eta_upper / (report.eta_lower * report.rho_lower)
    } else {
        f64::INFINITY
    };
    let _ = writeln!(s);
    let _ = writeln!(
        s,
        "source profile: ||p||_X^2 = {:e}",
        report.p_norm * report.p_norm
    );
    let _ = writeln!(s, "coefficients:   eta_1^2 / (eta_0 rho_0) = {ratio:e}");
    let weight_quality = if report.omega_bar_min > 0.0 {
        report.gradient_sup / report.omega_bar_min
    } else {
        f64::INFINITY
    };
    let _ = writeln!(s, "weight:         M / wbar_m = {weight_quality:e}");
    let _ = writeln!(s);
    match report.zeta_lhs {
        Some(z) if z < 1.0 => {
            let _ = writeln!(
                s,
                "smallness condition satisfied: zeta = {z:e}, margin {z} < 1"
            );
        }
        Some(z) => {
            let _ = writeln!(s, "smallness condition violated: zeta = {z:e} >= 1");
        }
        None => {
            let _ = writeln!(
                s,
                "smallness condition not applicable (wbar_m, eta_0 or rho_0 is zero)"
            );
        }
    }
    if !report.notes.is_empty() {
        let _ = writeln!(s);
        let _ = writeln!(s, "# notes");
        for n in &report.notes {
            let _ = writeln!(s, "- {n}");
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gradient_uses_one_sided_ends() {
        let g = node_gradient(&[0.0, 1.0, 4.0], 1.0);
        assert_eq!(g, vec![1.0, 2.0, 3.0]);
    }

    fn report_with(zeta: Option<f64>) -> ConditionReport {
        ConditionReport {
            times: vec![0.0, 1.0],
            omega_bar: vec![1.0, 1.0],
            omega_bar_min: 1.0,
            gradient_sup: 1.0,
            p_norm: 1.0,
            eta_lower: 1.0,
            eta_upper: 1.0,
            rho_lower: 1.0,
            zeta_lhs: zeta,
            passes: AssumptionFlags {
                as1_rho: true,
                as2_eta: true,
                as3_kappa: true,
                as4_lipschitz: true,
                as6_initial: true,
                as8_weight: true,
                as9_identifiable: true,
                smallness: zeta.is_some_and(|z| z < 1.0),
            },
            notes: vec![],
        }
    }

    #[test]
    fn passing_report_text() {
        let text = check_interpretation_report(&report_with(Some(0.5)));
        assert!(text.contains("smallness condition satisfied"));
        assert!(text.contains("margin 0.5 < 1"));
        assert!(text.contains("5e-1"));
    }

    #[test]
    fn failing_and_undefined_report_text() {
        assert!(check_interpretation_report(&report_with(Some(3.0)))
            .contains("smallness condition violated"));
        assert!(check_interpretation_report(&report_with(None)).contains("not applicable"));
    }
}
