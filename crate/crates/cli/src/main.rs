use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use ppinv::config::{parse_assignment, read_entries, Entry, Origin};
use ppinv::{execute, CliError, RunConfig};

/// Direct and inverse solver for 1-D semilinear pseudo-parabolic equations.
///
/// Settings come from an optional config file (`key = value` lines), then
/// `key=value` arguments, then flags; later sources win. A bare first
/// argument is taken as the command, e.g. `ppinv inverse case=1`.
#[derive(Debug, Parser)]
#[command(name = "ppinv", version)]
struct Args {
    /// Config file with `key = value` lines.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// `key=value` settings (a leading bare word sets `command`).
    assignments: Vec<String>,
    /// direct | inverse | converge | check
    #[arg(long)]
    command: Option<String>,
    /// case1 | case2 | case2_smooth | custom
    #[arg(long)]
    case: Option<String>,
    /// Problem file for `case = custom`.
    #[arg(long)]
    problem: Option<String>,
    /// cn | rothe
    #[arg(long)]
    scheme: Option<String>,
    #[arg(long)]
    nx: Option<String>,
    #[arg(long)]
    nt: Option<String>,
    /// Use the rounded measurement constants of the reference figures.
    #[arg(long)]
    paper_rounded_m: bool,
    /// Smoothing width for indicator weights in the Rothe scheme.
    #[arg(long)]
    omega_mollify_width: Option<String>,
    #[arg(short, long)]
    output_dir: Option<String>,
    /// Seed of the measurement noise.
    #[arg(long)]
    seed: Option<String>,
    /// Relative amplitude of uniform noise on m.
    #[arg(long)]
    noise: Option<String>,
    /// Comma-separated times written to solution.csv.
    #[arg(long)]
    snapshot_times: Option<String>,
    /// lagged | extrapolated
    #[arg(long)]
    cn_nonlinearity: Option<String>,
    /// Shift m so that it matches the discrete initial state.
    #[arg(long)]
    anchor_m: bool,
    /// implicit | lagged (Rothe inverse)
    #[arg(long)]
    kappa_coupling: Option<String>,
    /// Comma-separated grid counts of a convergence study.
    #[arg(long)]
    levels: Option<String>,
    /// both | space | time
    #[arg(long)]
    refine: Option<String>,
    /// direct | inverse (convergence study target)
    #[arg(long)]
    study: Option<String>,
    #[arg(long)]
    store_every: Option<String>,
}

impl Args {
    fn entries(&self) -> Result<Vec<Entry>, CliError> {
        let mut out = match &self.config {
            Some(path) => read_entries(path)?,
            None => Vec::new(),
        };
        for (k, a) in self.assignments.iter().enumerate() {
            if k == 0 && !a.contains('=') {
                out.push(Entry {
                    key: "command".into(),
                    value: a.clone(),
                    origin: Origin::Argument(1),
                });
            } else {
                out.push(parse_assignment(a, k + 1)?);
            }
        }
        let flags: [(&'static str, Option<&String>); 17] = [
            ("command", self.command.as_ref()),
            ("case", self.case.as_ref()),
            ("problem", self.problem.as_ref()),
            ("scheme", self.scheme.as_ref()),
            ("nx", self.nx.as_ref()),
            ("nt", self.nt.as_ref()),
            ("omega_mollify_width", self.omega_mollify_width.as_ref()),
            ("output_dir", self.output_dir.as_ref()),
            ("seed", self.seed.as_ref()),
            ("noise", self.noise.as_ref()),
            ("snapshot_times", self.snapshot_times.as_ref()),
            ("cn_nonlinearity", self.cn_nonlinearity.as_ref()),
            ("kappa_coupling", self.kappa_coupling.as_ref()),
            ("levels", self.levels.as_ref()),
            ("refine", self.refine.as_ref()),
            ("study", self.study.as_ref()),
            ("store_every", self.store_every.as_ref()),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                out.push(Entry {
                    key: key.into(),
                    value: v.clone(),
                    origin: Origin::Flag(key),
                });
            }
        }
        for (key, on) in [
            ("paper_rounded_m", self.paper_rounded_m),
            ("anchor_m", self.anchor_m),
        ] {
            if on {
                out.push(Entry {
                    key: key.into(),
                    value: "true".into(),
                    origin: Origin::Flag(key),
                });
            }
        }
        Ok(out)
    }
}

fn run(args: &Args) -> Result<String, CliError> {
    let cfg = RunConfig::from_entries(&args.entries()?)?;
    Ok(execute(&cfg)?.summary)
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&args) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
