//! Run configuration: `key = value` files, `key=value` arguments and flags,
//! applied in that order (later sources override earlier ones).

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use pseudoparabolic::{CnNonlinearity, KappaCoupling};
use thiserror::Error;

/// Where a setting came from, for error messages.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Origin {
    Line { file: PathBuf, line: usize },
    Argument(usize),
    Flag(&'static str),
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Line { file, line } => write!(f, "{}:{line}", file.display()),
            Origin::Argument(k) => write!(f, "argument {k}"),
            Origin::Flag(name) => write!(f, "flag --{name}"),
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{origin}: {message}")]
    Syntax { origin: Origin, message: String },
    #[error("{origin}: unknown key '{key}'")]
    UnknownKey { origin: Origin, key: String },
    #[error("{origin}: invalid value '{value}' for {key}: expected {expected}")]
    BadValue {
        origin: Origin,
        key: String,
        value: String,
        expected: String,
    },
    #[error("{origin}: '{key}' given twice (first at {first})")]
    Duplicate {
        origin: Origin,
        key: String,
        first: Origin,
    },
    #[error("missing required key '{0}'")]
    Missing(&'static str),
    #[error("{0}")]
    Invalid(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

/// One `key = value` entry.
#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub origin: Origin,
}

/// Splits flat `key = value` text. Blank lines and `#` comments are skipped;
/// a key may appear only once.
pub fn parse_entries(text: &str, file: &Path) -> Result<Vec<Entry>, ConfigError> {
    let mut out: Vec<Entry> = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let origin = Origin::Line {
            file: file.to_path_buf(),
            line: k + 1,
        };
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError::Syntax {
                origin,
                message: format!("expected 'key = value', found '{line}'"),
            });
        };
        let key = key.trim();
        if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(ConfigError::Syntax {
                origin,
                message: format!("malformed key '{key}'"),
            });
        }
        if let Some(first) = out.iter().find(|e| e.key == key) {
            return Err(ConfigError::Duplicate {
                origin,
                key: key.into(),
                first: first.origin.clone(),
            });
        }
        out.push(Entry {
            key: key.into(),
            value: value.trim().into(),
            origin,
        });
    }
    Ok(out)
}

pub fn read_entries(path: &Path) -> Result<Vec<Entry>, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.into(),
        source,
    })?;
    parse_entries(&text, path)
}

/// Parses a `key=value` command-line argument (1-based position `k`).
pub fn parse_assignment(arg: &str, k: usize) -> Result<Entry, ConfigError> {
    let origin = Origin::Argument(k);
    match arg.split_once('=') {
        Some((key, value)) if !key.trim().is_empty() => Ok(Entry {
            key: key.trim().into(),
            value: value.trim().into(),
            origin,
        }),
        _ => Err(ConfigError::Syntax {
            origin,
            message: format!("expected key=value, found '{arg}'"),
        }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Direct,
    Inverse,
    Converge,
    Check,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseName {
    Case1,
    Case2,
    /// Case 2 measured with a smooth `H^1_0` weight.
    Case2Smooth,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Cn,
    Rothe,
}

/// What a convergence study runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Study {
    Direct,
    Inverse,
}

/// Which counts a convergence study refines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Refine {
    Both,
    Space,
    Time,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub case: CaseName,
    /// Problem file of a custom case.
    pub problem: Option<PathBuf>,
    pub scheme: Scheme,
    pub nx: usize,
    pub nt: usize,
    pub paper_rounded_m: bool,
    pub omega_mollify_width: Option<f64>,
    pub output_dir: PathBuf,
    /// Seed of the measurement perturbation.
    pub seed: u64,
    /// Relative amplitude of uniform noise added to `m` (0 = none).
    pub noise: f64,
    pub snapshot_times: Option<Vec<f64>>,
    pub cn_nonlinearity: CnNonlinearity,
    pub anchor_m: bool,
    pub kappa_coupling: KappaCoupling,
    /// Grid counts of a convergence study.
    pub levels: Vec<usize>,
    pub refine: Refine,
    pub study: Study,
    pub store_every: usize,
}

pub const KEYS: &[&str] = &[
    "command",
    "case",
    "problem",
    "scheme",
    "nx",
    "nt",
    "paper_rounded_m",
    "omega_mollify_width",
    "output_dir",
    "seed",
    "noise",
    "snapshot_times",
    "cn_nonlinearity",
    "anchor_m",
    "kappa_coupling",
    "levels",
    "refine",
    "study",
    "store_every",
];

fn bad(e: &Entry, expected: &str) -> ConfigError {
    ConfigError::BadValue {
        origin: e.origin.clone(),
        key: e.key.clone(),
        value: e.value.clone(),
        expected: expected.into(),
    }
}

fn choice<T: Copy>(e: &Entry, options: &[(&str, T)]) -> Result<T, ConfigError> {
    let v = e.value.to_ascii_lowercase();
    options
        .iter()
        .find(|(name, _)| *name == v)
        .map(|(_, t)| *t)
        .ok_or_else(|| {
            let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
            bad(e, &format!("one of {}", names.join(", ")))
        })
}

fn boolean(e: &Entry) -> Result<bool, ConfigError> {
    choice(
        e,
        &[
            ("true", true),
            ("yes", true),
            ("1", true),
            ("false", false),
            ("no", false),
            ("0", false),
        ],
    )
}

fn count(e: &Entry, min: usize) -> Result<usize, ConfigError> {
    match e.value.parse::<usize>() {
        Ok(n) if n >= min => Ok(n),
        _ => Err(bad(e, &format!("an integer >= {min}"))),
    }
}

fn real(e: &Entry) -> Result<f64, ConfigError> {
    e.value
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| bad(e, "a finite number"))
}

fn list<T: std::str::FromStr>(e: &Entry, what: &str) -> Result<Vec<T>, ConfigError> {
    let items: Option<Vec<T>> = e
        .value
        .split(',')
        .map(|s| s.trim().parse::<T>().ok())
        .collect();
    items
        .filter(|v| !v.is_empty())
        .ok_or_else(|| bad(e, &format!("a comma-separated list of {what}")))
}

impl RunConfig {
    /// Validates the merged entries; later entries for a key override
    /// earlier ones.
    pub fn from_entries(entries: &[Entry]) -> Result<Self, ConfigError> {
        let mut merged: BTreeMap<&str, &Entry> = BTreeMap::new();
        for e in entries {
            if !KEYS.contains(&e.key.as_str()) {
                return Err(ConfigError::UnknownKey {
                    origin: e.origin.clone(),
                    key: e.key.clone(),
                });
            }
            merged.insert(e.key.as_str(), e);
        }
        let get = |k: &str| merged.get(k).copied();

        let command = match get("command") {
            Some(e) => choice(
                e,
                &[
                    ("direct", Command::Direct),
                    ("inverse", Command::Inverse),
                    ("converge", Command::Converge),
                    ("check", Command::Check),
                ],
            )?,
            None => return Err(ConfigError::Missing("command")),
        };
        let case = match get("case") {
            Some(e) => choice(
                e,
                &[
                    ("case1", CaseName::Case1),
                    ("1", CaseName::Case1),
                    ("case2", CaseName::Case2),
                    ("2", CaseName::Case2),
                    ("case2_smooth", CaseName::Case2Smooth),
                    ("custom", CaseName::Custom),
                ],
            )?,
            None => return Err(ConfigError::Missing("case")),
        };
        let problem = get("problem").map(|e| PathBuf::from(&e.value));
        match (case, &problem) {
            (CaseName::Custom, None) => {
                return Err(ConfigError::Invalid(
                    "case = custom needs a problem file (problem = <path>)".into(),
                ))
            }
            (CaseName::Custom, Some(_)) | (_, None) => {}
            (_, Some(_)) => {
                return Err(ConfigError::Invalid(
                    "problem is only used with case = custom".into(),
                ))
            }
        }
        let scheme = get("scheme").map_or(Ok(Scheme::Cn), |e| {
            choice(e, &[("cn", Scheme::Cn), ("rothe", Scheme::Rothe)])
        })?;
        let nx = get("nx").map_or(Ok(200), |e| count(e, 2))?;
        let nt = get("nt").map_or(Ok(200), |e| count(e, 2))?;
        let paper_rounded_m = get("paper_rounded_m").map_or(Ok(false), boolean)?;
        let omega_mollify_width = match get("omega_mollify_width") {
            Some(e) => {
                let w = real(e)?;
                if w <= 0.0 {
                    return Err(bad(e, "a positive width"));
                }
                Some(w)
            }
            None => None,
        };
        let output_dir =
            get("output_dir").map_or_else(|| PathBuf::from("out"), |e| PathBuf::from(&e.value));
        let seed = match get("seed") {
            Some(e) => e
                .value
                .parse::<u64>()
                .map_err(|_| bad(e, "a non-negative integer"))?,
            None => 0,
        };
        let noise = match get("noise") {
            Some(e) => {
                let v = real(e)?;
                if v < 0.0 {
                    return Err(bad(e, "a non-negative amplitude"));
                }
                v
            }
            None => 0.0,
        };
        let snapshot_times = get("snapshot_times")
            .map(|e| list::<f64>(e, "times"))
            .transpose()?;
        let cn_nonlinearity = get("cn_nonlinearity").map_or(Ok(CnNonlinearity::Lagged), |e| {
            choice(
                e,
                &[
                    ("lagged", CnNonlinearity::Lagged),
                    ("extrapolated", CnNonlinearity::Extrapolated),
                ],
            )
        })?;
        let anchor_m = get("anchor_m").map_or(Ok(false), boolean)?;
        let kappa_coupling = get("kappa_coupling").map_or(Ok(KappaCoupling::Implicit), |e| {
            choice(
                e,
                &[
                    ("implicit", KappaCoupling::Implicit),
                    ("lagged", KappaCoupling::Lagged),
                ],
            )
        })?;
        let levels = match get("levels") {
            Some(e) => {
                let v = list::<usize>(e, "grid counts")?;
                if v.len() < 2 || v.iter().any(|n| *n < 2) {
                    return Err(bad(e, "at least two grid counts, each >= 2"));
                }
                v
            }
            None => vec![50, 100, 200],
        };
        let refine = get("refine").map_or(Ok(Refine::Both), |e| {
            choice(
                e,
                &[
                    ("both", Refine::Both),
                    ("space", Refine::Space),
                    ("time", Refine::Time),
                ],
            )
        })?;
        let study = get("study").map_or(Ok(Study::Direct), |e| {
            choice(e, &[("direct", Study::Direct), ("inverse", Study::Inverse)])
        })?;
        let store_every = get("store_every").map_or(Ok(1), |e| count(e, 1))?;

        Ok(Self {
            command,
            case,
            problem,
            scheme,
            nx,
            nt,
            paper_rounded_m,
            omega_mollify_width,
            output_dir,
            seed,
            noise,
            snapshot_times,
            cn_nonlinearity,
            anchor_m,
            kappa_coupling,
            levels,
            refine,
            study,
            store_every,
        })
    }

    /// Grids of a convergence study.
    pub fn study_grids(&self) -> Vec<(usize, usize)> {
        self.levels
            .iter()
            .map(|&n| match self.refine {
                Refine::Both => (n, n),
                Refine::Space => (n, self.nt),
                Refine::Time => (self.nx, n),
            })
            .collect()
    }
}
