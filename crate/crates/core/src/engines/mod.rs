//! Density-matrix propagation under intrinsic decoherence.
//!
//! Four engines that check one another:
//!
//! * [`evolve_eigenbasis`]: first-order dephasing in the energy eigenbasis,
//!   the reference engine.
//! * [`evolve_poisson`]: exact Poisson mixture of stochastic unitary kicks.
//! * [`evolve_ode`]: RK4 integration of the first-order master equation.
//! * [`evolve_monte_carlo`]: sampled kick counts, averaged.
//!
//! [`closed_form_rho_eq9`] is a literal transcription of the printed
//! closed-form density matrix, kept for auditing against the reference.

mod closed_form;
mod eigenbasis;
mod monte_carlo;
mod ode;
mod poisson;

pub use closed_form::closed_form_rho_eq9;
pub use eigenbasis::{evolve_eigenbasis, evolve_unitary};
pub use monte_carlo::{evolve_monte_carlo, MonteCarloEstimate, CHUNK_SIZE};
pub use ode::{default_dt, evolve_ode};
pub use poisson::{evolve_poisson, evolve_poisson_ksum, poisson_weights, PoissonWeights};

use crate::error::{Error, Result};
use crate::linalg::{self, Mat4, C64};
use crate::model::{self, BasisOrder, ModeIndices};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix {
    pub entries: Mat4,
    pub basis: BasisOrder,
}

/// Numerical health of a density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateDiagnostics {
    pub hermiticity_error: f64,
    pub trace_error: f64,
    pub min_eigenvalue: f64,
}

impl StateDiagnostics {
    pub fn within(&self, hermiticity: f64, trace: f64, positivity: f64) -> bool {
        self.hermiticity_error <= hermiticity && self.trace_error <= trace && self.min_eigenvalue >= positivity
    }
}

impl DensityMatrix {
    pub fn new(entries: Mat4, basis: BasisOrder) -> Self {
        DensityMatrix { entries, basis }
    }

    /// `|k⟩⟨k|` for basis state `index` (0-based, block order).
    pub fn basis_state(basis: BasisOrder, index: usize) -> Self {
        assert!(index < 4, "basis index {index} out of range");
        let mut entries = Mat4::zeros();
        entries[(index, index)] = C64::new(1.0, 0.0);
        DensityMatrix { entries, basis }
    }

    /// `|g,m−1,n−1⟩⟨g,m−1,n−1|`, which is `|g,0,0⟩⟨g,0,0|` for `m = n = 1`.
    pub fn lower_ground(modes: ModeIndices) -> Self {
        Self::basis_state(BasisOrder::new(modes), 2)
    }

    pub fn trace(&self) -> C64 {
        self.entries.trace()
    }

    pub fn diagnostics(&self) -> Result<StateDiagnostics> {
        Ok(StateDiagnostics {
            hermiticity_error: linalg::hermiticity_error(&self.entries),
            trace_error: (self.trace() - C64::new(1.0, 0.0)).norm(),
            min_eigenvalue: linalg::min_eigenvalue(&self.entries)?,
        })
    }

    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        linalg::max_abs_diff(&self.entries, &other.entries)
    }

    /// `½ Σ|λ_i(ρ − σ)|`.
    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64> {
        let w = linalg::hermitian_eigenvalues(&(self.entries - other.entries))?;
        Ok(0.5 * w.iter().map(|x| x.abs()).sum::<f64>())
    }

    pub(crate) fn expect_basis(&self, basis: BasisOrder) -> Result<()> {
        if self.basis == basis {
            Ok(())
        } else {
            Err(Error::BasisMismatch { expected: basis, found: self.basis })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineControls {
    /// Poisson tail mass allowed outside the explicit k-sum.
    pub tail_tol: f64,
    /// RK4 step; `None` means `1e-3 / μ`.
    pub dt: Option<f64>,
    pub n_traj: usize,
    pub seed: u64,
}

impl Default for EngineControls {
    fn default() -> Self {
        EngineControls { tail_tol: 1e-12, dt: None, n_traj: 100_000, seed: 0x5eed }
    }
}

impl EngineControls {
    pub fn validate(&self) -> Result<()> {
        if !(self.tail_tol > 0.0 && self.tail_tol < 1.0) {
            return Err(Error::invalid("tail_tol", format!("must lie in (0, 1), got {}", self.tail_tol)));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(Error::invalid("dt", format!("must be > 0, got {dt}")));
            }
        }
        if self.n_traj == 0 {
            return Err(Error::invalid("n_traj", "must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionRequest {
    pub initial: DensityMatrix,
    /// Duration in seconds (or scaled units, consistently with the block).
    pub t: f64,
    /// Step frequency; `f64::INFINITY` for decoherence-free evolution.
    pub gamma: f64,
    pub controls: EngineControls,
}

impl EvolutionRequest {
    pub fn new(initial: DensityMatrix, t: f64, gamma: f64) -> Self {
        EvolutionRequest { initial, t, gamma, controls: EngineControls::default() }
    }

    pub fn with_controls(self, controls: EngineControls) -> Self {
        EvolutionRequest { controls, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t >= 0.0 && self.t.is_finite()) {
            return Err(Error::invalid("t", format!("must be finite and >= 0, got {}", self.t)));
        }
        model::check_gamma(self.gamma)?;
        self.controls.validate()
    }
}
