use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;

use super::{DensityMatrix, EvolutionRequest};
use crate::error::{Error, Result};
use crate::linalg::{Mat4, RealMat4, C64};
use crate::model::{HamiltonianBlock, Spectrum};

/// Trajectories per work unit. Partial sums are formed per chunk and reduced
/// in chunk order, so the bits do not depend on the rayon pool size.
pub const CHUNK_SIZE: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloEstimate {
    pub mean: DensityMatrix,
    /// Standard error of each entry of `mean`: `sqrt((Var Re + Var Im) / n)`.
    pub std_error: RealMat4,
    pub n_traj: usize,
}

/// Generator for trajectory `index`: ChaCha8 keyed by `seed`, with the
/// trajectory index as the stream number.
fn trajectory_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn sample_kicks<R: Rng>(rng: &mut R, lambda: f64) -> u64 {
    if lambda == 0.0 {
        return 0;
    }
    // construction only fails for λ <= 0 or λ huge; callers guard λ
    let dist = Poisson::new(lambda).expect("poisson mean is positive and finite");
    dist.sample(rng) as u64
}

struct Kernel<'a> {
    spectrum: &'a Spectrum,
    rho0_eig: Mat4,
    gamma: f64,
    lambda: f64,
    seed: u64,
}

impl Kernel<'_> {
    /// `U^N ρ(0) U^{−N}` for the kick count drawn by trajectory `index`.
    fn trajectory(&self, index: u64) -> Mat4 {
        let n = sample_kicks(&mut trajectory_rng(self.seed, index), self.lambda) as f64;
        let phase: [C64; 4] =
            std::array::from_fn(|p| C64::from_polar(1.0, -self.spectrum.eigenvalues[p] * n / self.gamma));
        let mut rho = self.rho0_eig;
        for p in 0..4 {
            for q in 0..4 {
                rho[(p, q)] *= phase[p] * phase[q].conj();
            }
        }
        self.spectrum.from_eigenbasis(&rho)
    }
}

/// Stochastic unitary steps: averages `U^N ρ(0) U^{−N}` over `n_traj` draws
/// of `N ~ Poisson(γt)`, `U = exp(−iH/γ)`.
///
/// Sums are shifted by the first trajectory before accumulating second
/// moments, which keeps the variance estimate free of cancellation.
pub fn evolve_monte_carlo(
    block: &HamiltonianBlock,
    spectrum: &Spectrum,
    req: &EvolutionRequest,
) -> Result<MonteCarloEstimate> {
    req.validate()?;
    if block.basis != spectrum.basis {
        return Err(Error::BasisMismatch { expected: block.basis, found: spectrum.basis });
    }
    req.initial.expect_basis(spectrum.basis)?;
    if req.gamma.is_infinite() {
        return Err(Error::invalid("gamma", "monte carlo needs a finite step frequency"));
    }
    let n_traj = req.controls.n_traj;
    let lambda = req.gamma * req.t;
    if lambda > 1e15 {
        return Err(Error::invalid("gamma", format!("mean kick count {lambda:e} is too large to sample")));
    }

    let e = &spectrum.eigenvalues;
    if req.t == 0.0 || e.iter().all(|&x| x == e[0]) {
        // every U^N is a global phase
        return Ok(MonteCarloEstimate { mean: req.initial, std_error: RealMat4::zeros(), n_traj });
    }

    let kernel = Kernel {
        spectrum,
        rho0_eig: spectrum.to_eigenbasis(&req.initial.entries),
        gamma: req.gamma,
        lambda,
        seed: req.controls.seed,
    };
    let shift = kernel.trajectory(0);

    let n_chunks = n_traj.div_ceil(CHUNK_SIZE);
    let partials: Vec<(Mat4, RealMat4)> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK_SIZE;
            let end = (start + CHUNK_SIZE).min(n_traj);
            let mut sum = Mat4::zeros();
            let mut sum_sq = RealMat4::zeros();
            for i in start..end {
                let d = kernel.trajectory(i as u64) - shift;
                sum += d;
                sum_sq += d.map(|z| z.norm_sqr());
            }
            (sum, sum_sq)
        })
        .collect();

    let (sum, sum_sq) =
        partials.into_iter().fold((Mat4::zeros(), RealMat4::zeros()), |(s, q), (ds, dq)| (s + ds, q + dq));

    let n = n_traj as f64;
    let mean_shift = sum / C64::new(n, 0.0);
    let mean = shift + mean_shift;
    let std_error = if n_traj > 1 {
        RealMat4::from_fn(|i, j| {
            let var = (sum_sq[(i, j)] - n * mean_shift[(i, j)].norm_sqr()) / (n - 1.0);
            (var.max(0.0) / n).sqrt()
        })
    } else {
        RealMat4::repeat(f64::INFINITY)
    };

    Ok(MonteCarloEstimate { mean: DensityMatrix::new(mean, req.initial.basis), std_error, n_traj })
}
