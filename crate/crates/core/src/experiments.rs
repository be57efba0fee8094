//! Parameter sweeps, peak finding, physical units and the audit report.
//!
//! A sweep is parameterized by `α = μ/a`, `R = a/γ` and the scaled time
//! `T = a·t`; the physical Rabi frequency Ω fixes the time unit.

use std::f64::consts::{FRAC_PI_4, PI};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::engines::{
    closed_form_rho_eq9, evolve_eigenbasis, evolve_monte_carlo, evolve_ode, evolve_poisson, evolve_unitary,
    DensityMatrix, EngineControls, EvolutionRequest,
};
use crate::error::{Error, Result};
use crate::linalg::RealMat4;
use crate::model::{
    build_hamiltonian, derived_couplings, spectrum_analytic, validate_lamb_dicke, DerivedCouplings, HamiltonianBlock,
    LambDickeWarning, ModeIndices, Spectrum, SystemParams,
};
use crate::observables::{ghz_state, p_ghz, printed_eq11, purity, GhzSign};

/// Ω used for the trapped-ion experiment, in rad/s (MHz read as 10⁶ rad/s).
pub const OMEGA_EXPERIMENT: f64 = 8.95e6;
pub const ALPHA_GHZ: f64 = 4.0;
pub const R_VALUES: [f64; 4] = [0.001, 0.005, 0.01, 0.1];

/// Reported values: `(R, 1/γ in ns, P at T = π/4, P at T = 3π/4)`.
pub const PUBLISHED_TABLE1: [(f64, f64, f64, f64); 4] =
    [(0.001, 0.43, 0.99, 0.94), (0.005, 2.15, 0.94, 0.78), (0.01, 4.32, 0.89, 0.65), (0.1, 43.20, 0.53, 0.37)];
pub const PUBLISHED_DECOHERENCE_FREE: (f64, f64) = (1.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Engine {
    Eigenbasis,
    Poisson,
    Ode,
    MonteCarlo,
    Unitary,
}

impl Engine {
    pub fn as_str(self) -> &'static str {
        match self {
            Engine::Eigenbasis => "eigen",
            Engine::Poisson => "poisson",
            Engine::Ode => "ode",
            Engine::MonteCarlo => "mc",
            Engine::Unitary => "unitary",
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Engine {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "eigen" | "eigenbasis" => Engine::Eigenbasis,
            "poisson" => Engine::Poisson,
            "ode" => Engine::Ode,
            "mc" | "monte_carlo" => Engine::MonteCarlo,
            "unitary" => Engine::Unitary,
            other => return Err(format!("unknown engine `{other}` (expected eigen, poisson, ode, mc or unitary)")),
        })
    }
}

/// A block fixed by Ω and α, with the decoherence-free spectrum.
#[derive(Debug, Clone, Copy)]
pub struct System {
    pub params: SystemParams,
    pub modes: ModeIndices,
    pub couplings: DerivedCouplings,
    pub block: HamiltonianBlock,
    pub spectrum: Spectrum,
}

impl System {
    /// Chooses `g` so that `a = Ω/√(α²−1)`, i.e. `μ/a = α`.
    pub fn from_ratio(omega: f64, alpha: f64, modes: ModeIndices, eta_c: f64, eta_l: f64) -> Result<Self> {
        if !(alpha > 1.0 && alpha.is_finite()) {
            return Err(Error::invalid("alpha", format!("must be > 1, got {alpha}")));
        }
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::invalid("omega", format!("must be > 0, got {omega}")));
        }
        if !(eta_c > 0.0) {
            return Err(Error::invalid("eta_c", "must be > 0 to couple the sideband"));
        }
        if !modes.is_coupled() {
            return Err(Error::invalid("modes", "m and n must both be >= 1"));
        }
        let a = omega / (alpha * alpha - 1.0).sqrt();
        let sqrt_mn = (f64::from(modes.m) * f64::from(modes.n)).sqrt();
        let g = 2.0 * a / (eta_c * sqrt_mn);
        let params = SystemParams::new(omega, g, eta_c, eta_l, f64::INFINITY)?;
        let couplings = derived_couplings(&params, modes);
        let block = build_hamiltonian(&params, modes);
        let spectrum = spectrum_analytic(&block, &couplings)?;
        Ok(System { params, modes, couplings, block, spectrum })
    }

    pub fn lamb_dicke_warnings(&self) -> Vec<LambDickeWarning> {
        validate_lamb_dicke(&self.params)
    }

    pub fn a(&self) -> f64 {
        self.couplings.a
    }

    /// `γ = a/R`; `R = 0` is the decoherence-free limit.
    pub fn gamma_for(&self, r: f64) -> f64 {
        if r == 0.0 {
            f64::INFINITY
        } else {
            self.a() / r
        }
    }

    pub fn request(&self, r: f64, t_scaled: f64, controls: EngineControls) -> EvolutionRequest {
        EvolutionRequest::new(DensityMatrix::lower_ground(self.modes), t_scaled / self.a(), self.gamma_for(r))
            .with_controls(controls)
    }

    pub fn evolve(&self, engine: Engine, req: &EvolutionRequest) -> Result<EngineOutput> {
        let (rho, std_error) = match engine {
            Engine::Eigenbasis => (evolve_eigenbasis(&self.spectrum, req)?, None),
            Engine::Unitary => (evolve_unitary(&self.spectrum, &req.initial, req.t)?, None),
            Engine::Poisson => (evolve_poisson(&self.block, &self.spectrum, req)?, None),
            Engine::Ode => (evolve_ode(&self.block, req)?, None),
            Engine::MonteCarlo => {
                let est = evolve_monte_carlo(&self.block, &self.spectrum, req)?;
                (est.mean, Some(est.std_error))
            }
        };
        Ok(EngineOutput { rho, std_error })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EngineOutput {
    pub rho: DensityMatrix,
    /// Only for Monte Carlo.
    pub std_error: Option<RealMat4>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub alpha: f64,
    pub omega: f64,
    pub eta_c: f64,
    pub eta_l: f64,
    pub r_values: Vec<f64>,
    /// Scaled times `T` in radians, strictly increasing.
    pub t_grid: Vec<f64>,
    pub targets: Vec<GhzSign>,
    pub engine: Engine,
    pub controls: EngineControls,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            alpha: ALPHA_GHZ,
            omega: OMEGA_EXPERIMENT,
            eta_c: 0.05,
            eta_l: 0.05,
            r_values: R_VALUES.to_vec(),
            t_grid: degree_grid(0.0, 360.0, 0.25),
            targets: GhzSign::BOTH.to_vec(),
            engine: Engine::Eigenbasis,
            controls: EngineControls::default(),
        }
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.t_grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("t_grid", "must be strictly increasing"));
        }
        if self.t_grid.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(Error::invalid("t_grid", "times must be finite and >= 0"));
        }
        if let Some(r) = self.r_values.iter().find(|r| !(r.is_finite() && **r >= 0.0)) {
            return Err(Error::invalid("r", format!("values must be finite and >= 0, got {r}")));
        }
        self.controls.validate()
    }
}

/// `[min, min + step, …]` up to `max` (inclusive within 1e-9 steps), in radians.
pub fn degree_grid(min_deg: f64, max_deg: f64, step_deg: f64) -> Vec<f64> {
    if !(step_deg > 0.0) || max_deg < min_deg {
        return Vec::new();
    }
    let n = ((max_deg - min_deg) / step_deg + 1e-9).floor() as usize;
    (0..=n).map(|k| (min_deg + k as f64 * step_deg).to_radians()).collect()
}

/// `n` evenly spaced points on `[0, max]`, both ends included.
pub fn linear_grid(max: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|k| max * k as f64 / (n - 1) as f64).collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityColumn {
    pub r: f64,
    pub target: GhzSign,
    /// Clamped to `[0, 1]`.
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PurityColumn {
    pub r: f64,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub t_rad: Vec<f64>,
    pub t_deg: Vec<f64>,
    /// Ordered by R, then target.
    pub columns: Vec<ProbabilityColumn>,
    pub purity: Vec<PurityColumn>,
}

/// Evaluates every `(R, T)` grid point independently; results are gathered in
/// grid order regardless of how the points are scheduled.
pub fn sweep(spec: &SweepSpec) -> Result<TimeSeries> {
    spec.validate()?;
    let t_rad = spec.t_grid.clone();
    let t_deg: Vec<f64> = t_rad.iter().map(|t| t.to_degrees()).collect();
    if spec.r_values.is_empty() {
        return Ok(TimeSeries { t_rad, t_deg, columns: Vec::new(), purity: Vec::new() });
    }

    let system = System::from_ratio(spec.omega, spec.alpha, ModeIndices::GROUND, spec.eta_c, spec.eta_l)?;
    let targets: Vec<_> = spec.targets.iter().map(|&s| ghz_state(s, 0)).collect();

    let points: Vec<(usize, usize)> =
        (0..spec.r_values.len()).flat_map(|ri| (0..t_rad.len()).map(move |ti| (ri, ti))).collect();
    let values: Vec<(Vec<f64>, f64)> = points
        .par_iter()
        .map(|&(ri, ti)| {
            let req = system.request(spec.r_values[ri], t_rad[ti], spec.controls);
            let rho = system.evolve(spec.engine, &req)?.rho;
            let probs = targets.iter().map(|g| p_ghz(&rho, g).map(|p| p.clamped())).collect::<Result<Vec<_>>>()?;
            Ok((probs, purity(&rho)))
        })
        .collect::<Result<_>>()?;

    let nt = t_rad.len();
    let mut columns = Vec::new();
    let mut purity_cols = Vec::new();
    for (ri, &r) in spec.r_values.iter().enumerate() {
        let rows = &values[ri * nt..(ri + 1) * nt];
        for (k, &target) in spec.targets.iter().enumerate() {
            columns.push(ProbabilityColumn { r, target, values: rows.iter().map(|(p, _)| p[k]).collect() });
        }
        purity_cols.push(PurityColumn { r, values: rows.iter().map(|(_, q)| *q).collect() });
    }
    Ok(TimeSeries { t_rad, t_deg, columns, purity: purity_cols })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakRecord {
    pub r: f64,
    pub target: GhzSign,
    pub index: usize,
    /// Raw grid maximum.
    pub t_grid: f64,
    pub value_grid: f64,
    /// Parabolic refinement through the three surrounding points (radians).
    pub t_peak: f64,
    pub value: f64,
}

/// Vertex of the parabola through three points, in coordinates relative to
/// the middle one.
fn parabolic_vertex(x: [f64; 3], y: [f64; 3]) -> Option<(f64, f64)> {
    let (d0, d2) = (x[0] - x[1], x[2] - x[1]);
    let (e0, e2) = (y[0] - y[1], y[2] - y[1]);
    // y − y1 = A u² + B u with u = x − x1
    let denom = d0 * d2 * (d0 - d2);
    let a = (e0 * d2 - e2 * d0) / denom;
    let b = (e2 * d0 * d0 - e0 * d2 * d2) / denom;
    if !(a < 0.0) {
        return None;
    }
    let u = -b / (2.0 * a);
    Some((x[1] + u, y[1] - b * b / (4.0 * a)))
}

/// Interior local maxima of one column. Plateaus report their first point.
pub fn find_column_peaks(t: &[f64], values: &[f64], r: f64, target: GhzSign) -> Vec<PeakRecord> {
    let mut peaks = Vec::new();
    if values.len() < 3 {
        return peaks;
    }
    let mut i = 1;
    while i + 1 < values.len() {
        let v = values[i];
        if v > values[i - 1] {
            let mut j = i;
            while j + 1 < values.len() && values[j + 1] == v {
                j += 1;
            }
            if j + 1 < values.len() && values[j + 1] < v {
                let (t_peak, value) = if j == i {
                    parabolic_vertex([t[i - 1], t[i], t[i + 1]], [values[i - 1], v, values[i + 1]]).unwrap_or((t[i], v))
                } else {
                    (t[i], v)
                };
                peaks.push(PeakRecord { r, target, index: i, t_grid: t[i], value_grid: v, t_peak, value });
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    peaks
}

pub fn find_peaks(series: &TimeSeries) -> Vec<PeakRecord> {
    series.columns.iter().flat_map(|c| find_column_peaks(&series.t_rad, &c.values, c.r, c.target)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnitReport {
    pub omega: f64,
    pub alpha: f64,
    /// Sideband coupling in rad/s.
    pub a: f64,
    pub r_values: Vec<f64>,
    pub inv_gamma_ns: Vec<f64>,
    /// Physical time at `T = π/4`, µs.
    pub t_quarter_us: f64,
}

pub fn physical_units(omega: f64, alpha: f64, r_values: &[f64]) -> Result<UnitReport> {
    if !(alpha > 1.0) {
        return Err(Error::invalid("alpha", format!("must be > 1, got {alpha}")));
    }
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::invalid("omega", format!("must be > 0, got {omega}")));
    }
    let a = omega / (alpha * alpha - 1.0).sqrt();
    Ok(UnitReport {
        omega,
        alpha,
        a,
        r_values: r_values.to_vec(),
        inv_gamma_ns: r_values.iter().map(|r| r / a * 1e9).collect(),
        t_quarter_us: FRAC_PI_4 / a * 1e6,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Table1Row {
    /// `0` for the decoherence-free row.
    pub r: f64,
    pub inv_gamma_ns: f64,
    /// Minus-target probability at `T = π/4`.
    pub p_minus_quarter: f64,
    /// Plus-target probability at `T = 3π/4`.
    pub p_plus_three_quarter: f64,
    pub published_inv_gamma_ns: Option<f64>,
    pub published_quarter: f64,
    pub published_three_quarter: f64,
}

impl Table1Row {
    pub fn dev_quarter(&self) -> f64 {
        self.p_minus_quarter - self.published_quarter
    }

    pub fn dev_three_quarter(&self) -> f64 {
        self.p_plus_three_quarter - self.published_three_quarter
    }
}

fn probability_at(
    system: &System,
    engine: Engine,
    controls: EngineControls,
    r: f64,
    t: f64,
    sign: GhzSign,
) -> Result<f64> {
    let rho = system.evolve(engine, &system.request(r, t, controls))?.rho;
    Ok(p_ghz(&rho, &ghz_state(sign, 0))?.clamped())
}

/// Decoherence-free row followed by one row per reported R, all from the
/// reference engine.
pub fn table1(omega: f64, alpha: f64) -> Result<Vec<Table1Row>> {
    let system = System::from_ratio(omega, alpha, ModeIndices::GROUND, 0.05, 0.05)?;
    let controls = EngineControls::default();
    let units = physical_units(omega, alpha, &R_VALUES)?;
    let row = |r: f64, inv_gamma_ns, published: (Option<f64>, f64, f64)| -> Result<Table1Row> {
        Ok(Table1Row {
            r,
            inv_gamma_ns,
            p_minus_quarter: probability_at(&system, Engine::Eigenbasis, controls, r, FRAC_PI_4, GhzSign::Minus)?,
            p_plus_three_quarter: probability_at(
                &system,
                Engine::Eigenbasis,
                controls,
                r,
                3.0 * FRAC_PI_4,
                GhzSign::Plus,
            )?,
            published_inv_gamma_ns: published.0,
            published_quarter: published.1,
            published_three_quarter: published.2,
        })
    };
    let mut rows = vec![row(0.0, 0.0, (None, PUBLISHED_DECOHERENCE_FREE.0, PUBLISHED_DECOHERENCE_FREE.1))?];
    for (k, &(r, inv_g, q, tq)) in PUBLISHED_TABLE1.iter().enumerate() {
        rows.push(row(r, units.inv_gamma_ns[k], (Some(inv_g), q, tq))?);
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrintedFormulaCheck {
    pub t_scaled: f64,
    pub value: f64,
    /// Table entry the formula should reproduce.
    pub expected: f64,
    pub out_of_bounds: bool,
    pub contradicts_table: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormResidual {
    /// Worst max-entry distance from the reference engine over the grid.
    pub max_residual: f64,
    pub at_r: f64,
    pub at_t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreeQuarterComparison {
    pub r: f64,
    pub computed_plus: f64,
    pub computed_minus: f64,
    pub published: f64,
}

impl ThreeQuarterComparison {
    pub fn deviation(&self) -> f64 {
        self.computed_plus - self.published
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    pub printed: [PrintedFormulaCheck; 2],
    /// Closed-form ρ(t) against the reference engine, eigenvectors as
    /// returned by the model.
    pub rho_closed_form: ClosedFormResidual,
    /// The same comparison with the first eigenvector negated.
    pub rho_closed_form_phi1_reversed: ClosedFormResidual,
    pub three_quarter: Vec<ThreeQuarterComparison>,
}

/// Grid used by the audit: α = 4, R ∈ {0} ∪ reported values, 64 points on [0, π].
pub const AUDIT_GRID_POINTS: usize = 64;

fn closed_form_residual(system: &System, spectrum: &Spectrum) -> Result<ClosedFormResidual> {
    let mut worst = ClosedFormResidual { max_residual: 0.0, at_r: 0.0, at_t: 0.0 };
    for r in std::iter::once(0.0).chain(R_VALUES) {
        for t in linear_grid(PI, AUDIT_GRID_POINTS) {
            let req = system.request(r, t, EngineControls::default());
            let reference = evolve_eigenbasis(&system.spectrum, &req)?;
            let literal = closed_form_rho_eq9(&system.couplings, spectrum, req.t, req.gamma);
            let d = literal.max_abs_diff(&reference);
            if d > worst.max_residual {
                worst = ClosedFormResidual { max_residual: d, at_r: r, at_t: t };
            }
        }
    }
    Ok(worst)
}

pub fn audit() -> Result<AuditReport> {
    let printed = [FRAC_PI_4, 3.0 * FRAC_PI_4].map(|t| {
        let value = printed_eq11(t, ALPHA_GHZ, 0.0);
        PrintedFormulaCheck {
            t_scaled: t,
            value,
            expected: 1.0,
            out_of_bounds: !(0.0..=1.0).contains(&value),
            contradicts_table: (value - 1.0).abs() > 0.01,
        }
    });

    let system = System::from_ratio(OMEGA_EXPERIMENT, ALPHA_GHZ, ModeIndices::GROUND, 0.05, 0.05)?;
    let rho_closed_form = closed_form_residual(&system, &system.spectrum)?;
    let mut reversed = system.spectrum;
    let v0 = -reversed.vector(0);
    reversed.eigenvectors.set_column(0, &v0);
    let rho_closed_form_phi1_reversed = closed_form_residual(&system, &reversed)?;

    let controls = EngineControls::default();
    let three_quarter = PUBLISHED_TABLE1
        .iter()
        .map(|&(r, _, _, published)| {
            let t = 3.0 * FRAC_PI_4;
            Ok(ThreeQuarterComparison {
                r,
                computed_plus: probability_at(&system, Engine::Eigenbasis, controls, r, t, GhzSign::Plus)?,
                computed_minus: probability_at(&system, Engine::Eigenbasis, controls, r, t, GhzSign::Minus)?,
                published,
            })
        })
        .collect::<Result<_>>()?;

    Ok(AuditReport { printed, rho_closed_form, rho_closed_form_phi1_reversed, three_quarter })
}
