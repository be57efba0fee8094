use super::{evolve_unitary, DensityMatrix, EvolutionRequest};
use crate::error::{Error, Result};
use crate::linalg::{Mat4, C64};
use crate::model::{HamiltonianBlock, Spectrum};

/// The k-sum must reproduce the closed form to this max-entry distance.
const SELF_CHECK_TOL: f64 = 1e-9;

/// Normalized Poisson weights `P(N = k)` for `k ∈ [k_min, k_min + len)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PoissonWeights {
    pub k_min: u64,
    pub weights: Vec<f64>,
    /// Upper bound on the probability mass outside the window.
    pub tail_bound: f64,
}

/// Poisson(`lambda`) weights around the mode until the excluded mass is
/// below `tail_tol`.
///
/// Weights are built by the ratio recursion `w_{k±1}/w_k` outward from the
/// mode, so no factorials are formed. Past the mode each side is bounded by a
/// geometric series in the (decreasing) ratio, which gives the tail bound.
pub fn poisson_weights(lambda: f64, tail_tol: f64) -> Result<PoissonWeights> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::invalid("lambda", format!("must be finite and >= 0, got {lambda}")));
    }
    let cap = (100.0 * (lambda.sqrt() + 10.0)) as usize;
    let mode = lambda.floor() as u64;

    let mut upper = vec![1.0];
    let mut lower = Vec::new();
    let mut sum = 1.0;

    // upper side: r_{k+1} = r_k λ/(k+1)
    let mut k = mode;
    let mut r = 1.0;
    let upper_tail = loop {
        let q = lambda / (k + 2) as f64;
        let bound = r * lambda / (k + 1) as f64 / (1.0 - q).max(f64::MIN_POSITIVE);
        if bound <= 0.5 * tail_tol * sum {
            break bound;
        }
        r *= lambda / (k + 1) as f64;
        k += 1;
        upper.push(r);
        sum += r;
        if upper.len() + lower.len() > cap {
            return Err(Error::TailTruncation { tail_tol, cap });
        }
    };

    // lower side: r_{k-1} = r_k k/λ
    let mut k = mode;
    let mut r = 1.0;
    let lower_tail = loop {
        if k == 0 {
            break 0.0;
        }
        let q = (k - 1) as f64 / lambda;
        let next = r * k as f64 / lambda;
        let bound = next / (1.0 - q);
        if bound <= 0.5 * tail_tol * sum {
            break bound;
        }
        r = next;
        k -= 1;
        lower.push(r);
        sum += r;
        if upper.len() + lower.len() > cap {
            return Err(Error::TailTruncation { tail_tol, cap });
        }
    };

    let k_min = mode - lower.len() as u64;
    let weights: Vec<f64> = lower.iter().rev().chain(upper.iter()).map(|w| w / sum).collect();
    Ok(PoissonWeights { k_min, weights, tail_bound: (upper_tail + lower_tail) / sum })
}

/// `exp(λ(e^{−iθ} − 1))` with `e^{−iθ} − 1 = −2sin²(θ/2) − i sin θ`.
fn mixture_factor(lambda: f64, theta: f64) -> C64 {
    let h = (0.5 * theta).sin();
    C64::from_polar((-2.0 * lambda * h * h).exp(), -lambda * theta.sin())
}

fn check_bases(block: &HamiltonianBlock, spectrum: &Spectrum, req: &EvolutionRequest) -> Result<()> {
    req.validate()?;
    if block.basis != spectrum.basis {
        return Err(Error::BasisMismatch { expected: block.basis, found: spectrum.basis });
    }
    req.initial.expect_basis(spectrum.basis)
}

fn closed_form(spectrum: &Spectrum, req: &EvolutionRequest) -> Mat4 {
    let lambda = req.gamma * req.t;
    let e = &spectrum.eigenvalues;
    let mut rho = spectrum.to_eigenbasis(&req.initial.entries);
    for p in 0..4 {
        for q in 0..4 {
            if p != q {
                rho[(p, q)] *= mixture_factor(lambda, (e[p] - e[q]) / req.gamma);
            }
        }
    }
    spectrum.from_eigenbasis(&rho)
}

/// Explicit `Σ_k P(N = k) U^k ρ(0) U^{−k}`, `U = exp(−iH/γ)`, truncated at
/// Poisson tail mass `tail_tol`.
pub fn evolve_poisson_ksum(
    block: &HamiltonianBlock,
    spectrum: &Spectrum,
    req: &EvolutionRequest,
) -> Result<DensityMatrix> {
    check_bases(block, spectrum, req)?;
    if req.gamma.is_infinite() {
        return evolve_unitary(spectrum, &req.initial, req.t);
    }
    let pw = poisson_weights(req.gamma * req.t, req.controls.tail_tol)?;
    let e = &spectrum.eigenvalues;
    let rho0 = spectrum.to_eigenbasis(&req.initial.entries);
    let mut rho = Mat4::zeros();
    for p in 0..4 {
        for q in 0..4 {
            let theta = (e[p] - e[q]) / req.gamma;
            let factor: C64 = pw
                .weights
                .iter()
                .enumerate()
                .map(|(i, &w)| C64::from_polar(w, -theta * (pw.k_min + i as u64) as f64))
                .sum();
            rho[(p, q)] = rho0[(p, q)] * factor;
        }
    }
    Ok(DensityMatrix::new(spectrum.from_eigenbasis(&rho), req.initial.basis))
}

/// Exact solution of the Milburn equation
/// `dρ/dt = γ(U ρ U† − ρ)`, `U = exp(−iH/γ)`.
///
/// Each eigenbasis coherence is multiplied by `exp(γt(e^{−iΔ/γ} − 1))`. The
/// explicit k-sum is evaluated alongside and must agree to 1e-9.
pub fn evolve_poisson(block: &HamiltonianBlock, spectrum: &Spectrum, req: &EvolutionRequest) -> Result<DensityMatrix> {
    check_bases(block, spectrum, req)?;
    if req.gamma.is_infinite() {
        // U^N with N → ∞ kicks of vanishing size is the unitary flow
        return evolve_unitary(spectrum, &req.initial, req.t);
    }
    if req.t == 0.0 {
        return Ok(req.initial);
    }
    let rho = DensityMatrix::new(closed_form(spectrum, req), req.initial.basis);
    let check = evolve_poisson_ksum(block, spectrum, req)?;
    let deviation = rho.max_abs_diff(&check);
    if deviation > SELF_CHECK_TOL {
        return Err(Error::PoissonSelfCheck { deviation });
    }
    Ok(rho)
}
