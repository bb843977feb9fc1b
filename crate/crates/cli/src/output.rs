//! CSV and text outputs. Numbers use Rust's shortest round-trip formatting,
//! so re-parsing a file reproduces every value exactly.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use pseudoparabolic::verification::{ConvergenceTable, ErrorTable};
use pseudoparabolic::{ScalarFn, SpaceTimeFn, Trajectory};

use crate::CliError;

pub const SOLUTION_HEADER: [&str; 5] = ["t", "x", "u_num", "u_exact", "abs_err"];
pub const SOURCE_HEADER: [&str; 5] = ["t", "h_num", "h_exact", "abs_err", "denominator"];
pub const ERRORS_HEADER: [&str; 4] = ["t", "u_max_err", "u_l2_err", "h_abs_err"];
pub const CONVERGE_HEADER: [&str; 6] = [
    "nx",
    "nt",
    "u_final_max_err",
    "h_max_err",
    "order_u",
    "order_h",
];

/// Shortest string that parses back to `v`.
pub fn num(v: f64) -> String {
    format!("{v:?}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>, CliError> {
    let file = File::create(path).map_err(|source| CliError::Io {
        path: path.into(),
        source,
    })?;
    Ok(csv::Writer::from_writer(BufWriter::new(file)))
}

fn finish(mut w: csv::Writer<BufWriter<File>>, path: &Path) -> Result<PathBuf, CliError> {
    w.flush().map_err(|source| CliError::Io {
        path: path.into(),
        source,
    })?;
    Ok(path.into())
}

/// Stored levels nearest to each requested time, in time order, without
/// repeats.
pub fn snapshot_indices(traj: &Trajectory, times: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = times
        .iter()
        .map(|&t| {
            (0..traj.times.len())
                .min_by(|&a, &b| {
                    (traj.times[a] - t)
                        .abs()
                        .total_cmp(&(traj.times[b] - t).abs())
                })
                .expect("trajectory holds the initial state")
        })
        .collect();
    idx.sort_unstable();
    idx.dedup();
    idx
}

/// `t,x,u_num,u_exact,abs_err` at the selected stored levels, boundary nodes
/// included.
pub fn write_solution(
    dir: &Path,
    traj: &Trajectory,
    snapshots: &[usize],
    exact: Option<&SpaceTimeFn>,
) -> Result<PathBuf, CliError> {
    let path = dir.join("solution.csv");
    let mut w = writer(&path)?;
    w.write_record(SOLUTION_HEADER)?;
    let grid = traj.grid;
    for &k in snapshots {
        let t = traj.times[k];
        for (j, u) in traj.states[k].with_boundary().into_iter().enumerate() {
            let x = grid.x(j);
            let ex = exact.map(|f| f(t, x));
            w.write_record([
                num(t),
                num(x),
                num(u),
                opt(ex),
                opt(ex.map(|e| (u - e).abs())),
            ])?;
        }
    }
    finish(w, &path)
}

/// `t,h_num,h_exact,abs_err,denominator`, one row per recovered value.
pub fn write_source(
    dir: &Path,
    traj: &Trajectory,
    exact: Option<&ScalarFn>,
) -> Result<PathBuf, CliError> {
    let path = dir.join("source.csv");
    let mut w = writer(&path)?;
    w.write_record(SOURCE_HEADER)?;
    for s in &traj.source_values {
        let ex = exact.map(|h| h(s.time));
        w.write_record([
            num(s.time),
            num(s.value),
            opt(ex),
            opt(ex.map(|e| (s.value - e).abs())),
            num(s.denominator),
        ])?;
    }
    finish(w, &path)
}

pub fn write_errors(dir: &Path, table: &ErrorTable) -> Result<PathBuf, CliError> {
    let path = dir.join("errors.csv");
    let mut w = writer(&path)?;
    w.write_record(ERRORS_HEADER)?;
    for k in 0..table.times.len() {
        w.write_record([
            num(table.times[k]),
            num(table.u_max_err[k]),
            num(table.u_l2_err[k]),
            opt(table.h_abs_err[k]),
        ])?;
    }
    finish(w, &path)
}

/// Undefined orders are written as `NaN`; the first row has none.
pub fn write_converge(dir: &Path, table: &ConvergenceTable) -> Result<PathBuf, CliError> {
    let path = dir.join("converge.csv");
    let mut w = writer(&path)?;
    w.write_record(CONVERGE_HEADER)?;
    for r in &table.rows {
        let l = &r.level;
        let h = (!l.h_max_err.is_nan()).then_some(l.h_max_err);
        w.write_record([
            l.nx.to_string(),
            l.nt.to_string(),
            num(l.u_final_max_err),
            opt(h),
            opt(r.order_u),
            opt(r.order_h),
        ])?;
    }
    finish(w, &path)
}

pub fn write_text(dir: &Path, name: &str, text: &str) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    let mut file = File::create(&path).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })?;
    file.write_all(text.as_bytes())
        .map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
    Ok(path)
}
