//! Command dispatch, report tables and the exit-code mapping.

use std::f64::consts::FRAC_PI_4;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ionghz_core::experiments::{
    audit, degree_grid, find_peaks, physical_units, sweep, table1, PeakRecord, SweepSpec, System, TimeSeries,
};
use ionghz_core::ModeIndices;
use thiserror::Error;

use crate::config::{Config, ConfigError};
use crate::csv::{emit_csv, metadata_line, Cell, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Sweep,
    Table1,
    Units,
    Audit,
    Evolve,
}

impl Command {
    pub const ALL: [Command; 5] = [Command::Sweep, Command::Table1, Command::Units, Command::Audit, Command::Evolve];

    pub fn as_str(self) -> &'static str {
        match self {
            Command::Sweep => "sweep",
            Command::Table1 => "table1",
            Command::Units => "units",
            Command::Audit => "audit",
            Command::Evolve => "evolve",
        }
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Command::ALL.into_iter().find(|c| c.as_str() == s).ok_or_else(|| format!("unknown command `{s}`"))
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error("invalid input: {0}")]
    Validation(String),

    #[error(transparent)]
    Core(#[from] ionghz_core::Error),

    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 1,
            CliError::Validation(_) => 2,
            CliError::Core(e) if !e.is_numerical() => 2,
            CliError::Core(_) | CliError::Io { .. } => 3,
        }
    }
}

fn io_error(path: Option<&Path>) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.map_or("<stdout>".into(), |p| p.display().to_string()), source }
}

/// What a successful command reports back.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub summary: String,
    pub warnings: Vec<String>,
    pub files: Vec<PathBuf>,
}

pub fn run(command: Command, config: &Config) -> Result<Outcome, CliError> {
    let meta = metadata_line(command.as_str(), config.effective());
    let mut warnings = Vec::new();
    let mut files = Vec::new();
    let out = config.out.as_deref();

    let (table, summary) = match command {
        Command::Sweep => {
            let (series, spec) = run_sweep(config, &mut warnings)?;
            if let Some(path) = out {
                let peaks = find_peaks(&series);
                let peaks_path = sibling(path, "peaks.csv");
                emit_csv(&meta, &peak_table(&peaks), Some(&peaks_path)).map_err(io_error(Some(&peaks_path)))?;
                files.push(peaks_path);
                let script_path = sibling(path, "gp");
                fs::write(&script_path, gnuplot_script(path, &series)).map_err(io_error(Some(&script_path)))?;
                files.push(script_path);
            }
            let summary = format!(
                "sweep: {} R values x {} T points, engine {}",
                spec.r_values.len(),
                series.t_rad.len(),
                spec.engine
            );
            (series_table(&series), summary)
        }
        Command::Table1 => {
            let table = table1_table(config)?;
            let summary = format!("table1: {} rows", table.rows.len());
            (table, summary)
        }
        Command::Units => {
            let u = physical_units(config.omega, config.alpha, &config.r_values)?;
            let mut table = Table::new(["r", "inv_gamma_ns", "a_rad_s", "t_quarter_us"]);
            for (r, inv) in u.r_values.iter().zip(&u.inv_gamma_ns) {
                table.push(vec![Cell::Number(*r), Cell::Number(*inv), Cell::Number(u.a), Cell::Number(u.t_quarter_us)]);
            }
            (table, format!("units: a = {} rad/s, t(pi/4) = {} us", u.a, u.t_quarter_us))
        }
        Command::Audit => {
            let table = audit_table()?;
            let flagged = table.rows.iter().filter(|r| r.last() != Some(&Cell::Text("ok".into()))).count();
            let summary = format!("audit: {} items, {} flagged", table.rows.len(), flagged);
            (table, summary)
        }
        Command::Evolve => {
            let table = evolve_table(config, &mut warnings)?;
            (
                table,
                format!(
                    "evolve: {} R values at T = {} deg, engine {}",
                    config.r_values.len(),
                    config.t_max_deg,
                    config.engine
                ),
            )
        }
    };

    emit_csv(&meta, &table, out).map_err(io_error(out))?;
    if let Some(p) = out {
        files.insert(0, p.to_path_buf());
    }
    Ok(Outcome { summary, warnings, files })
}

/// `out.csv` → `out.<ext>`.
fn sibling(path: &Path, ext: &str) -> PathBuf {
    path.with_extension(ext)
}

fn check_grid(config: &Config) -> Result<(), CliError> {
    if !(config.t_step_deg > 0.0) {
        return Err(CliError::Validation(format!("t_step_deg must be > 0, got {}", config.t_step_deg)));
    }
    if config.t_max_deg < 0.0 {
        return Err(CliError::Validation(format!("t_max_deg must be >= 0, got {}", config.t_max_deg)));
    }
    Ok(())
}

fn run_sweep(config: &Config, warnings: &mut Vec<String>) -> Result<(TimeSeries, SweepSpec), CliError> {
    check_grid(config)?;
    let spec = SweepSpec {
        alpha: config.alpha,
        omega: config.omega,
        eta_c: config.eta_c,
        eta_l: config.eta_l,
        r_values: config.r_values.clone(),
        t_grid: degree_grid(0.0, config.t_max_deg, config.t_step_deg),
        targets: config.target.signs(),
        engine: config.engine,
        controls: config.controls,
    };
    if !spec.r_values.is_empty() {
        let system = System::from_ratio(spec.omega, spec.alpha, ModeIndices::GROUND, spec.eta_c, spec.eta_l)?;
        warnings.extend(system.lamb_dicke_warnings().iter().map(ToString::to_string));
    }
    let series = sweep(&spec)?;
    Ok((series, spec))
}

fn series_table(series: &TimeSeries) -> Table {
    let mut headers = vec!["T_rad".to_string(), "T_deg".to_string()];
    headers.extend(series.columns.iter().map(|c| format!("P_{}_R{}", c.target, c.r)));
    headers.extend(series.purity.iter().map(|c| format!("purity_R{}", c.r)));
    let mut table = Table { headers, rows: Vec::new() };
    for (i, (t, d)) in series.t_rad.iter().zip(&series.t_deg).enumerate() {
        let mut row = vec![Cell::Number(*t), Cell::Number(*d)];
        row.extend(series.columns.iter().map(|c| Cell::Probability(c.values[i])));
        row.extend(series.purity.iter().map(|c| Cell::Probability(c.values[i])));
        table.push(row);
    }
    table
}

fn peak_table(peaks: &[PeakRecord]) -> Table {
    let mut table = Table::new(["r", "target", "index", "T_grid_deg", "P_grid", "T_peak_deg", "P_peak"]);
    for p in peaks {
        table.push(vec![
            Cell::Number(p.r),
            Cell::Text(p.target.to_string()),
            Cell::Integer(p.index as i64),
            Cell::Number(p.t_grid.to_degrees()),
            Cell::Probability(p.value_grid),
            Cell::Number(p.t_peak.to_degrees()),
            Cell::Probability(p.value),
        ]);
    }
    table
}

fn gnuplot_script(csv: &Path, series: &TimeSeries) -> String {
    let name = csv.file_name().map_or_else(|| csv.display().to_string(), |n| n.to_string_lossy().into_owned());
    let mut s = String::from("set datafile separator ','\nset key autotitle columnhead\n");
    s.push_str("set xlabel 'T (degrees)'\nset ylabel 'P'\nset yrange [0:1.05]\n");
    let plots: Vec<String> =
        (0..series.columns.len()).map(|k| format!("'{name}' every ::1 using 2:{} with lines", k + 3)).collect();
    if plots.is_empty() {
        s.push_str("# no probability columns\n");
    } else {
        s.push_str(&format!("plot {}\n", plots.join(", \\\n     ")));
    }
    s
}

fn table1_table(config: &Config) -> Result<Table, CliError> {
    let rows = table1(config.omega, config.alpha)?;
    let mut table = Table::new([
        "r",
        "inv_gamma_ns",
        "published_inv_gamma_ns",
        "P_minus_quarter",
        "published_quarter",
        "dev_quarter",
        "P_plus_three_quarter",
        "published_three_quarter",
        "dev_three_quarter",
    ]);
    for row in &rows {
        table.push(vec![
            Cell::Number(row.r),
            Cell::Number(row.inv_gamma_ns),
            row.published_inv_gamma_ns.map_or(Cell::Empty, Cell::Number),
            Cell::Probability(row.p_minus_quarter),
            Cell::Number(row.published_quarter),
            Cell::Number(row.dev_quarter()),
            Cell::Probability(row.p_plus_three_quarter),
            Cell::Number(row.published_three_quarter),
            Cell::Number(row.dev_three_quarter()),
        ]);
    }
    Ok(table)
}

fn audit_table() -> Result<Table, CliError> {
    let report = audit()?;
    let mut table = Table::new(["item", "r", "t_scaled", "computed", "reference", "deviation", "flag"]);
    let text = |s: &str| Cell::Text(s.into());

    for p in &report.printed {
        let mut flags = Vec::new();
        if p.out_of_bounds {
            flags.push("out_of_bounds");
        }
        if p.contradicts_table {
            flags.push("contradicts_table");
        }
        let flag = if flags.is_empty() { "ok".to_string() } else { flags.join(";") };
        table.push(vec![
            text("printed_probability_formula"),
            Cell::Number(0.0),
            Cell::Number(p.t_scaled),
            Cell::Number(p.value),
            Cell::Number(p.expected),
            Cell::Number(p.value - p.expected),
            Cell::Text(flag),
        ]);
    }

    for (item, res) in [
        ("printed_density_matrix", &report.rho_closed_form),
        ("printed_density_matrix_phi1_negated", &report.rho_closed_form_phi1_reversed),
    ] {
        table.push(vec![
            text(item),
            Cell::Number(res.at_r),
            Cell::Number(res.at_t),
            Cell::Number(res.max_residual),
            Cell::Number(0.0),
            Cell::Number(res.max_residual),
            text(if res.max_residual <= 1e-9 { "ok" } else { "exceeds_1e-9" }),
        ]);
    }

    for row in &report.three_quarter {
        table.push(vec![
            text("three_quarter_plus"),
            Cell::Number(row.r),
            Cell::Number(3.0 * FRAC_PI_4),
            Cell::Probability(row.computed_plus),
            Cell::Number(row.published),
            Cell::Number(row.deviation()),
            text("unresolved"),
        ]);
        table.push(vec![
            text("three_quarter_minus"),
            Cell::Number(row.r),
            Cell::Number(3.0 * FRAC_PI_4),
            Cell::Probability(row.computed_minus),
            Cell::Number(row.published),
            Cell::Number(row.computed_minus - row.published),
            text("unresolved"),
        ]);
    }
    Ok(table)
}

fn evolve_table(config: &Config, warnings: &mut Vec<String>) -> Result<Table, CliError> {
    if config.t_max_deg < 0.0 {
        return Err(CliError::Validation(format!("t_max_deg must be >= 0, got {}", config.t_max_deg)));
    }
    let modes = ModeIndices::new(config.m, config.n)?;
    let system = System::from_ratio(config.omega, config.alpha, modes, config.eta_c, config.eta_l)?;
    warnings.extend(system.lamb_dicke_warnings().iter().map(ToString::to_string));
    let t = config.t_max_deg.to_radians();

    let mut table = Table::new(["r", "row", "col", "re", "im", "std_error"]);
    for &r in &config.r_values {
        let out = system.evolve(config.engine, &system.request(r, t, config.controls))?;
        for i in 0..4 {
            for j in 0..4 {
                let z = out.rho.entries[(i, j)];
                let se = out.std_error.map_or(Cell::Empty, |s| Cell::Number(s[(i, j)]));
                table.push(vec![
                    Cell::Number(r),
                    Cell::Integer(i as i64),
                    Cell::Integer(j as i64),
                    Cell::Number(z.re),
                    Cell::Number(z.im),
                    se,
                ]);
            }
        }
    }
    Ok(table)
}
