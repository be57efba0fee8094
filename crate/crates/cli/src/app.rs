//! Argument parsing and the process-level entry point.

use std::fs;
use std::path::PathBuf;

use clap::{CommandFactory, Parser, ValueEnum};

use crate::commands::{run, CliError, Command};
use crate::config::parse_config;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CommandArg {
    /// P(T) for each R and target over the degree grid
    Sweep,
    /// Probabilities at T = pi/4 and 3pi/4 next to the published table
    Table1,
    /// Physical decoherence times and the pi/4 interaction time
    Units,
    /// Checks of the printed closed forms against the reference engine
    Audit,
    /// Density-matrix entries at T = t-max-deg
    Evolve,
}

impl From<CommandArg> for Command {
    fn from(c: CommandArg) -> Self {
        match c {
            CommandArg::Sweep => Command::Sweep,
            CommandArg::Table1 => Command::Table1,
            CommandArg::Units => Command::Units,
            CommandArg::Audit => Command::Audit,
            CommandArg::Evolve => Command::Evolve,
        }
    }
}

/// GHZ-state generation in a trapped ion coupled to a cavity, under intrinsic decoherence.
///
/// Every flag may also be given as `key = value` in the file passed to
/// `--config`; flags win. T is given in degrees.
#[derive(Debug, Parser)]
#[command(name = "ionghz", version)]
struct Args {
    #[arg(value_enum)]
    command: CommandArg,

    /// Plain-text `key = value` file
    #[arg(long)]
    config: Option<PathBuf>,
    /// mu/a; 4 yields the GHZ state at T = pi/4
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
    /// Comma-separated R = a/gamma values, or `none`
    #[arg(long, allow_hyphen_values = true)]
    r: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    t_max_deg: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    t_step_deg: Option<String>,
    /// minus, plus or both
    #[arg(long, allow_hyphen_values = true)]
    target: Option<String>,
    /// eigen, poisson, ode, mc or unitary
    #[arg(long, allow_hyphen_values = true)]
    engine: Option<String>,
    /// Rabi frequency in rad/s
    #[arg(long, allow_hyphen_values = true)]
    omega_rad_s: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    m: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    n: Option<String>,
    /// RK4 step in seconds, or `auto`
    #[arg(long, allow_hyphen_values = true)]
    dt: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    tail_tol: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    n_traj: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    seed: Option<String>,
    /// Output CSV path; `-` for stdout
    #[arg(long, allow_hyphen_values = true)]
    out: Option<String>,
}

impl Args {
    fn flag_pairs(&self) -> Vec<(String, String)> {
        [
            ("alpha", &self.alpha),
            ("r", &self.r),
            ("t_max_deg", &self.t_max_deg),
            ("t_step_deg", &self.t_step_deg),
            ("target", &self.target),
            ("engine", &self.engine),
            ("omega_rad_s", &self.omega_rad_s),
            ("m", &self.m),
            ("n", &self.n),
            ("dt", &self.dt),
            ("tail_tol", &self.tail_tol),
            ("n_traj", &self.n_traj),
            ("seed", &self.seed),
            ("out", &self.out),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone())))
        .collect()
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code. Diagnostics go to stderr.
pub fn run_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            if !e.use_stderr() {
                let _ = e.print();
                return 0;
            }
            let text = e.render().to_string();
            eprint!("{text}");
            if !text.contains("Usage:") {
                eprintln!("\n{}", Args::command().render_usage());
            }
            return 1;
        }
    };
    match execute(&args) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("ionghz: {e}");
            e.exit_code()
        }
    }
}

fn execute(args: &Args) -> Result<(), CliError> {
    let file = match &args.config {
        Some(p) => Some(
            fs::read_to_string(p).map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", p.display())))?,
        ),
        None => None,
    };
    let config = parse_config(file.as_deref(), &args.flag_pairs())?;
    let outcome = run(args.command.into(), &config)?;
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    if config.out.is_some() {
        println!("{}", outcome.summary);
    } else {
        eprintln!("{}", outcome.summary);
    }
    Ok(())
}
