use super::{DensityMatrix, EvolutionRequest};
use crate::error::Result;
use crate::linalg::C64;
use crate::model::Spectrum;

/// Multiply each eigenbasis coherence `(p, q)` by
/// `exp(−iΔt − Δ²t/(2γ))`, `Δ = E_p − E_q`; the decay term is absent for
/// `γ = ∞`.
fn dephase(spectrum: &Spectrum, initial: &DensityMatrix, t: f64, gamma: f64) -> DensityMatrix {
    if t == 0.0 {
        return *initial;
    }
    let mut rho = spectrum.to_eigenbasis(&initial.entries);
    let e = &spectrum.eigenvalues;
    for p in 0..4 {
        for q in 0..4 {
            if p == q {
                continue;
            }
            let delta = e[p] - e[q];
            let decay = if gamma.is_infinite() { 0.0 } else { delta * delta * t / (2.0 * gamma) };
            rho[(p, q)] *= C64::from_polar((-decay).exp(), -delta * t);
        }
    }
    DensityMatrix::new(spectrum.from_eigenbasis(&rho), initial.basis)
}

/// Reference engine: closed-form solution of the first-order equation in the
/// energy eigenbasis. Eigenbasis populations are untouched.
pub fn evolve_eigenbasis(spectrum: &Spectrum, req: &EvolutionRequest) -> Result<DensityMatrix> {
    req.validate()?;
    req.initial.expect_basis(spectrum.basis)?;
    Ok(dephase(spectrum, &req.initial, req.t, req.gamma))
}

/// `e^{−iHt} ρ e^{iHt}`; the same code path as [`evolve_eigenbasis`] at `γ = ∞`.
pub fn evolve_unitary(spectrum: &Spectrum, initial: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
    evolve_eigenbasis(spectrum, &EvolutionRequest::new(*initial, t, f64::INFINITY))
}
