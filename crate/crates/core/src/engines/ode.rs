use super::{DensityMatrix, EvolutionRequest};
use crate::error::{Error, Result};
use crate::linalg::{self, commutator, Mat4, C64};
use crate::model::HamiltonianBlock;

/// Output states with a smaller eigenvalue than this are a numerical failure.
pub const POSITIVITY_FLOOR: f64 = -1e-7;

/// `1e-3 / μ`, with `μ` read off the block entries.
pub fn default_dt(block: &HamiltonianBlock) -> f64 {
    let omega = block.entries[(0, 1)];
    let a = 0.5 * block.entries[(0, 3)];
    1e-3 / a.hypot(omega)
}

/// `−i[H, ρ] − [H, [H, ρ]] / (2γ)`.
fn generator(h: &Mat4, rho: &Mat4, inv_two_gamma: f64) -> Mat4 {
    let c = commutator(h, rho);
    let mut out = c * C64::new(0.0, -1.0);
    if inv_two_gamma != 0.0 {
        out -= commutator(h, &c) * C64::new(inv_two_gamma, 0.0);
    }
    out
}

fn rk4_step(h: &Mat4, rho: &Mat4, dt: f64, inv_two_gamma: f64) -> Mat4 {
    let half = C64::new(0.5 * dt, 0.0);
    let full = C64::new(dt, 0.0);
    let k1 = generator(h, rho, inv_two_gamma);
    let k2 = generator(h, &(rho + k1 * half), inv_two_gamma);
    let k3 = generator(h, &(rho + k2 * half), inv_two_gamma);
    let k4 = generator(h, &(rho + k3 * full), inv_two_gamma);
    rho + (k1 + k2 * C64::new(2.0, 0.0) + k3 * C64::new(2.0, 0.0) + k4) * C64::new(dt / 6.0, 0.0)
}

/// Fixed-step RK4 integration of the first-order master equation.
///
/// The last step is shortened to land on `t`. The result is Hermitized once
/// at the end and rejected if its smallest eigenvalue is below
/// [`POSITIVITY_FLOOR`].
pub fn evolve_ode(block: &HamiltonianBlock, req: &EvolutionRequest) -> Result<DensityMatrix> {
    req.validate()?;
    req.initial.expect_basis(block.basis)?;
    if req.t == 0.0 {
        return Ok(req.initial);
    }
    let dt = match req.controls.dt {
        Some(dt) => dt,
        None => {
            let dt = default_dt(block);
            if !dt.is_finite() {
                // H = 0: nothing moves
                return Ok(req.initial);
            }
            dt
        }
    };
    let h = block.complex();
    let inv_two_gamma = if req.gamma.is_infinite() { 0.0 } else { 0.5 / req.gamma };

    let full_steps = (req.t / dt).floor();
    let remainder = req.t - full_steps * dt;
    let mut rho = req.initial.entries;
    for _ in 0..full_steps as u64 {
        rho = rk4_step(&h, &rho, dt, inv_two_gamma);
    }
    if remainder > 0.0 {
        rho = rk4_step(&h, &rho, remainder, inv_two_gamma);
    }
    let rho = linalg::hermitize(&rho);

    if rho.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite("ode state"));
    }
    let min_eigenvalue = linalg::min_eigenvalue(&rho)?;
    if min_eigenvalue < POSITIVITY_FLOOR {
        return Err(Error::Positivity { min_eigenvalue });
    }
    Ok(DensityMatrix::new(rho, req.initial.basis))
}
