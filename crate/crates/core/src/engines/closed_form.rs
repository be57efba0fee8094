use super::DensityMatrix;
use crate::linalg::{Mat4, C64};
use crate::model::{DerivedCouplings, Spectrum};

/// The printed closed-form ρ(t) for ρ(0) = |g,m−1,n−1⟩⟨g,m−1,n−1|, assembled
/// term by term in the eigenbasis of `spectrum` and mapped back to the block
/// basis.
///
/// `A² = (μ+Ω)/4μ`, `B² = (μ−Ω)/4μ` with nonnegative roots. Each coherence
/// carries `exp(−2d²t/γ + iφt)`; the `γ = ∞` limit drops the decay. This is an
/// audit target: no sign or phase is adjusted to agree with the engines.
pub fn closed_form_rho_eq9(couplings: &DerivedCouplings, spectrum: &Spectrum, t: f64, gamma: f64) -> DensityMatrix {
    let (mu, a, om) = (couplings.mu, couplings.a, couplings.omega);
    let big_a = ((mu + om) / (4.0 * mu)).sqrt();
    let big_b = ((mu - om) / (4.0 * mu)).sqrt();
    let plus = (big_a + big_b).powi(2) / 2.0;
    let minus = (big_a - big_b).powi(2) / 2.0;
    let cross = (big_a * big_a - big_b * big_b) / 2.0;

    // exp(−2·rate²·t/γ + i·phase·t)
    let f = |rate: f64, phase: f64| {
        let decay = if gamma.is_infinite() { 0.0 } else { 2.0 * rate * rate * t / gamma };
        C64::from_polar((-decay).exp(), phase * t)
    };
    let re = |x: f64| C64::new(x, 0.0);

    let mut rho = Mat4::zeros();
    rho[(0, 0)] = re(plus);
    rho[(3, 3)] = re(plus);
    rho[(1, 1)] = re(minus);
    rho[(2, 2)] = re(minus);

    rho[(0, 3)] = -f(mu - a, -2.0 * (mu - a)) * plus;
    rho[(3, 0)] = -f(mu - a, 2.0 * (mu - a)) * plus;

    rho[(1, 2)] = f(mu + a, 2.0 * (mu + a)) * minus;
    rho[(2, 1)] = f(mu + a, -2.0 * (mu + a)) * minus;

    let w = f(mu, -2.0 * mu) * cross;
    rho[(0, 1)] = w;
    rho[(2, 3)] = -w;
    let w = f(mu, 2.0 * mu) * cross;
    rho[(1, 0)] = w;
    rho[(3, 2)] = -w;

    let w = f(a, 2.0 * a) * cross;
    rho[(0, 2)] = w;
    rho[(1, 3)] = -w;
    let w = f(a, -2.0 * a) * cross;
    rho[(2, 0)] = w;
    rho[(3, 1)] = -w;

    DensityMatrix::new(spectrum.from_eigenbasis(&rho), spectrum.basis)
}
