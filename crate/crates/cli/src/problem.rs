//! Custom problem files: the same `key = value` format as run files, with
//! expressions as values.
//!
//! ```text
//! horizon = 1
//! eta = 1
//! kappa = 1 + t
//! kappa_min = 1
//! kappa_max = 2
//! kappa_dt_max = 1
//! f = s^3
//! p = t * sin(pi * x)
//! u0 = sin(pi * x)
//! omega = indicator(0.4, 0.6)
//! m = 0.1967 * (1 + t^2)
//! ```
//!
//! Coefficients are functions of `t` and `x`; bounds must be declared for any
//! coefficient that is not constant. `h` (the source, used by direct runs)
//! and `u_exact` are optional; when both are given the case is checked
//! against the equation and error tables are written.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use num_dual::HyperHyperDual64;
use pseudoparabolic::verification::ManufacturedCase;
use pseudoparabolic::{
    CoefficientField, Lipschitz, Nonlinearity, ProblemSpec, ScalarFn, SpaceTimeFn, Weight,
};

use crate::config::{read_entries, ConfigError, Entry};
use crate::expr::Expr;
use crate::CliError;

pub const KEYS: &[&str] = &[
    "length",
    "horizon",
    "rho",
    "rho_min",
    "rho_max",
    "rho_dt_max",
    "eta",
    "eta_min",
    "eta_max",
    "kappa",
    "kappa_min",
    "kappa_max",
    "kappa_dt_max",
    "f",
    "f_lipschitz",
    "p",
    "f_tilde",
    "u0",
    "omega",
    "m",
    "m_prime",
    "h",
    "u_exact",
    "snapshot_times",
];

/// A loaded custom problem.
#[derive(Clone)]
pub struct CustomProblem {
    pub spec: ProblemSpec,
    /// Whether the file defines `m`.
    pub has_measurement: bool,
    pub source: Option<ScalarFn>,
    pub case: Option<ManufacturedCase>,
    pub snapshot_times: Option<Vec<f64>>,
}

struct Fields<'a> {
    map: BTreeMap<&'a str, &'a Entry>,
}

impl<'a> Fields<'a> {
    fn entry(&self, key: &str) -> Option<&'a Entry> {
        self.map.get(key).copied()
    }

    fn expr(&self, key: &str, vars: &[&str]) -> Result<Option<Expr>, CliError> {
        self.entry(key)
            .map(|e| {
                Expr::parse(&e.value, vars).map_err(|source| CliError::Expr {
                    origin: e.origin.clone(),
                    key: key.to_string(),
                    source,
                })
            })
            .transpose()
    }

    fn required(&self, key: &'static str, vars: &[&str]) -> Result<Expr, CliError> {
        self.expr(key, vars)?
            .ok_or(CliError::Config(ConfigError::Missing(key)))
    }

    /// A constant number (expressions without variables are allowed).
    fn number(&self, key: &str) -> Result<Option<f64>, CliError> {
        match self.expr(key, &[])? {
            None => Ok(None),
            Some(e) => {
                let v = e.eval_f64(&[]);
                if v.is_finite() {
                    Ok(Some(v))
                } else {
                    let entry = self.entry(key).expect("present");
                    Err(ConfigError::BadValue {
                        origin: entry.origin.clone(),
                        key: key.into(),
                        value: entry.value.clone(),
                        expected: "a finite number".into(),
                    }
                    .into())
                }
            }
        }
    }
}

fn space_time(e: Expr) -> SpaceTimeFn {
    Arc::new(move |t, x| e.eval_f64(&[t, x]))
}

fn scalar(e: Expr) -> ScalarFn {
    Arc::new(move |v| e.eval_f64(&[v]))
}

fn coefficient(
    fields: &Fields,
    name: &str,
    default: Option<&str>,
) -> Result<CoefficientField, CliError> {
    let expr = match (fields.expr(name, &["t", "x"])?, default) {
        (Some(e), _) => e,
        (None, Some(d)) => Expr::parse(d, &["t", "x"]).expect("valid default"),
        (None, None) => {
            return Err(ConfigError::Invalid(format!("missing required key '{name}'")).into());
        }
    };
    let lo = fields.number(&format!("{name}_min"))?;
    let hi = fields.number(&format!("{name}_max"))?;
    let dt = fields.number(&format!("{name}_dt_max"))?;
    let field = if expr.is_constant() {
        let v = expr.eval_f64(&[0.0, 0.0]);
        CoefficientField::new(move |_, _| v, lo.unwrap_or(v), hi.unwrap_or(v))
            .with_time_derivative_bound(dt.unwrap_or(0.0))
    } else {
        let (Some(lo), Some(hi)) = (lo, hi) else {
            return Err(ConfigError::Invalid(format!(
                "{name} = {expr} is not constant; declare {name}_min and {name}_max"
            ))
            .into());
        };
        let uses_t = expr.uses("t");
        let field = CoefficientField::new(move |t, x| expr.eval_f64(&[t, x]), lo, hi);
        match (dt, uses_t) {
            (Some(b), _) => field.with_time_derivative_bound(b),
            (None, false) => field.with_time_derivative_bound(0.0),
            (None, true) => field,
        }
    };
    Ok(field)
}

fn weight(fields: &Fields) -> Result<Weight, CliError> {
    let entry = fields
        .entry("omega")
        .ok_or(CliError::Config(ConfigError::Missing("omega")))?;
    let v = entry.value.trim();
    if let Some(args) = v
        .strip_prefix("indicator(")
        .and_then(|r| r.strip_suffix(')'))
    {
        let parts: Vec<&str> = args.split(',').collect();
        let bounds: Option<Vec<f64>> = parts
            .iter()
            .map(|s| Expr::parse(s, &[]).ok().map(|e| e.eval_f64(&[])))
            .collect();
        return match bounds.as_deref() {
            Some(&[a, b]) if a.is_finite() && b.is_finite() && a < b => Ok(Weight::indicator(a, b)),
            _ => Err(ConfigError::BadValue {
                origin: entry.origin.clone(),
                key: "omega".into(),
                value: v.into(),
                expected: "indicator(a, b) with a < b, or an expression in x".into(),
            }
            .into()),
        };
    }
    let e = fields.required("omega", &["x"])?;
    Ok(Weight::function(move |x| e.eval_f64(&[x])))
}

pub fn load(path: &Path) -> Result<CustomProblem, CliError> {
    let entries = read_entries(path)?;
    parse(&entries, &path.display().to_string())
}

pub fn parse(entries: &[Entry], name: &str) -> Result<CustomProblem, CliError> {
    let mut map = BTreeMap::new();
    for e in entries {
        if !KEYS.contains(&e.key.as_str()) {
            return Err(ConfigError::UnknownKey {
                origin: e.origin.clone(),
                key: e.key.clone(),
            }
            .into());
        }
        map.insert(e.key.as_str(), e);
    }
    let fields = Fields { map };

    let length = fields.number("length")?.unwrap_or(1.0);
    let horizon = fields
        .number("horizon")?
        .ok_or(CliError::Config(ConfigError::Missing("horizon")))?;
    let rho = coefficient(&fields, "rho", Some("1"))?;
    let eta = coefficient(&fields, "eta", None)?;
    let kappa = coefficient(&fields, "kappa", None)?;
    let nonlinearity = match fields.expr("f", &["s"])? {
        None => Nonlinearity::zero(),
        Some(f) => {
            let lipschitz = match fields.number("f_lipschitz")? {
                Some(l) => Lipschitz::Global(l),
                None if f.is_constant() => Lipschitz::Global(0.0),
                None => Lipschitz::LocalOnly,
            };
            Nonlinearity::new(move |s| f.eval_f64(&[s]), lipschitz)
        }
    };
    let p = space_time(fields.required("p", &["t", "x"])?);
    let f_tilde = fields
        .expr("f_tilde", &["t", "x"])?
        .map_or_else(|| -> SpaceTimeFn { Arc::new(|_, _| 0.0) }, space_time);
    let u0 = scalar(fields.required("u0", &["x"])?);
    let omega = weight(&fields)?;
    let m = fields.expr("m", &["t"])?;
    let has_measurement = m.is_some();
    let measurement: ScalarFn = m.map_or_else(|| -> ScalarFn { Arc::new(|_| f64::NAN) }, scalar);
    let measurement_derivative = fields.expr("m_prime", &["t"])?.map(scalar);
    let source = fields.expr("h", &["t"])?.map(scalar);
    let snapshot_times = match fields.entry("snapshot_times") {
        Some(e) => Some(
            e.value
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| ConfigError::BadValue {
                    origin: e.origin.clone(),
                    key: e.key.clone(),
                    value: e.value.clone(),
                    expected: "a comma-separated list of times".into(),
                })?,
        ),
        None => None,
    };

    let spec = ProblemSpec {
        length,
        horizon,
        rho,
        eta,
        kappa,
        nonlinearity,
        p,
        f_tilde,
        u0,
        omega,
        measurement,
        measurement_derivative,
    };

    let case = match (fields.expr("u_exact", &["t", "x"])?, &source) {
        (Some(u), Some(h)) => {
            let snaps = snapshot_times
                .clone()
                .unwrap_or_else(|| default_snapshots(horizon));
            Some(ManufacturedCase::new(
                name,
                spec.clone(),
                move |t: HyperHyperDual64, x: HyperHyperDual64| u.eval(&[t, x]),
                h.clone(),
                snaps,
            )?)
        }
        (Some(_), None) => {
            return Err(ConfigError::Invalid("u_exact needs the matching source h".into()).into());
        }
        _ => None,
    };

    Ok(CustomProblem {
        spec,
        has_measurement,
        source,
        case,
        snapshot_times,
    })
}

/// Four evenly spaced display times ending at `horizon`.
pub fn default_snapshots(horizon: f64) -> Vec<f64> {
    (1..=4).map(|k| horizon * k as f64 / 4.0).collect()
}
