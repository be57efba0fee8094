//! GHZ targets, generation probability and a few auxiliary observables.
//!
//! Scaled units are used for the closed forms: `T = a·t`, `α = μ/a`,
//! `R = a/γ`.

use std::fmt;
use std::str::FromStr;

use nalgebra::Vector4;

use crate::engines::DensityMatrix;
use crate::error::{Error, Result};
use crate::linalg::{Mat4, C64};
use crate::model::{BasisOrder, ModeIndices, Spectrum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GhzSign {
    /// `(|g,0,0⟩ − i|e,1,1⟩)/√2`
    Minus,
    /// `(|g,0,0⟩ + i|e,1,1⟩)/√2`
    Plus,
}

impl GhzSign {
    pub const BOTH: [GhzSign; 2] = [GhzSign::Minus, GhzSign::Plus];

    pub fn as_str(self) -> &'static str {
        match self {
            GhzSign::Minus => "minus",
            GhzSign::Plus => "plus",
        }
    }

    fn imaginary_sign(self) -> f64 {
        match self {
            GhzSign::Minus => -1.0,
            GhzSign::Plus => 1.0,
        }
    }
}

impl fmt::Display for GhzSign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GhzSign {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "minus" => Ok(GhzSign::Minus),
            "plus" => Ok(GhzSign::Plus),
            other => Err(format!("unknown target `{other}` (expected minus or plus)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GhzTarget {
    pub sign: GhzSign,
    /// The state carries the global phase `(−1)^p`, invisible in any overlap.
    pub p_phase: i32,
    pub state: Vector4<C64>,
    pub projector: Mat4,
    pub basis: BasisOrder,
}

pub fn ghz_state(sign: GhzSign, p: i32) -> GhzTarget {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let global = if p.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let state = Vector4::new(
        C64::new(0.0, 0.0),
        C64::new(0.0, sign.imaginary_sign() * s),
        C64::new(s, 0.0),
        C64::new(0.0, 0.0),
    ) * C64::new(global, 0.0);
    GhzTarget {
        sign,
        p_phase: p,
        state,
        projector: state * state.adjoint(),
        basis: BasisOrder::new(ModeIndices::GROUND),
    }
}

/// An overlap `tr(ρ P)`; `raw` may stray outside `[0, 1]` by rounding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Probability {
    pub raw: f64,
}

impl Probability {
    pub fn clamped(self) -> f64 {
        self.raw.clamp(0.0, 1.0)
    }
}

pub fn p_ghz(rho: &DensityMatrix, target: &GhzTarget) -> Result<Probability> {
    rho.expect_basis(target.basis)?;
    Ok(Probability { raw: (rho.entries * target.projector).trace().re })
}

/// Coefficients of the closed-form GHZ probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormCoefficients {
    pub alpha: f64,
    pub r: f64,
    /// `(α²+1)/(4α²)`
    pub c0: f64,
    /// `(α²−1)/(4α²)`, on the `cos 2αT` term
    pub c_mu: f64,
    /// `(α²−1)/(4α²)`, on the `sin 2T` term
    pub c_a: f64,
    /// `(α−1)²/(8α²)`, on `sin 2(α+1)T`
    pub c_plus: f64,
    /// `(α+1)²/(8α²)`, on `sin 2(α−1)T`
    pub c_minus: f64,
    /// `A = √((μ+Ω)/4μ)`
    pub a_coeff: f64,
    /// `B = √((μ−Ω)/4μ)`
    pub b_coeff: f64,
}

impl ClosedFormCoefficients {
    pub fn new(alpha: f64, r: f64) -> Self {
        let a2 = alpha * alpha;
        let omega = (a2 - 1.0).max(0.0).sqrt();
        ClosedFormCoefficients {
            alpha,
            r,
            c0: (a2 + 1.0) / (4.0 * a2),
            c_mu: (a2 - 1.0) / (4.0 * a2),
            c_a: (a2 - 1.0) / (4.0 * a2),
            c_plus: (alpha - 1.0).powi(2) / (8.0 * a2),
            c_minus: (alpha + 1.0).powi(2) / (8.0 * a2),
            a_coeff: ((alpha + omega) / (4.0 * alpha)).sqrt(),
            b_coeff: ((alpha - omega) / (4.0 * alpha)).sqrt(),
        }
    }
}

/// GHZ probability from ρ(0) = |g,0,0⟩⟨g,0,0| in closed form:
///
/// ```text
/// P∓(T) = c0 + c_mu e^{−2α²TR} cos 2αT ± c_a e^{−2TR} sin 2T
///            ± c_plus e^{−2(α+1)²TR} sin 2(α+1)T ∓ c_minus e^{−2(α−1)²TR} sin 2(α−1)T
/// ```
///
/// with the upper signs for [`GhzSign::Minus`].
pub fn closed_form_pghz(t_scaled: f64, alpha: f64, r: f64, sign: GhzSign) -> f64 {
    let c = ClosedFormCoefficients::new(alpha, r);
    let s = -sign.imaginary_sign();
    let tr = t_scaled * r;
    let (ap, am) = (alpha + 1.0, alpha - 1.0);
    c.c0 + c.c_mu * (-2.0 * alpha * alpha * tr).exp() * (2.0 * alpha * t_scaled).cos()
        + s * c.c_a * (-2.0 * tr).exp() * (2.0 * t_scaled).sin()
        + s * c.c_plus * (-2.0 * ap * ap * tr).exp() * (2.0 * ap * t_scaled).sin()
        - s * c.c_minus * (-2.0 * am * am * tr).exp() * (2.0 * am * t_scaled).sin()
}

/// The GHZ probability formula exactly as printed, in scaled units (`a = 1`).
///
/// Kept with its `Ω²/2μ²` coefficients and the unsquared `(μ±a)` decay
/// exponents of its last two terms. Not a probability; never clamped.
pub fn printed_eq11(t_scaled: f64, alpha: f64, r: f64) -> f64 {
    let (mu, a) = (alpha, 1.0);
    let om2_over_2mu2 = (alpha * alpha - 1.0) / (2.0 * alpha * alpha);
    let t = t_scaled;
    0.5 + om2_over_2mu2 * ((-2.0 * mu * mu * t * r).exp() * (2.0 * mu * t).cos())
        + om2_over_2mu2 * ((-2.0 * a * a * t * r).exp() * (2.0 * a * t).sin() - 1.0)
        + 0.5 * ((mu - a) / (2.0 * mu)).powi(2) * (-2.0 * (mu + a) * t * r).exp() * (2.0 * (mu + a) * t).sin()
        - 0.5 * ((mu + a) / (2.0 * mu)).powi(2) * (-2.0 * (mu - a) * t * r).exp() * (2.0 * (mu - a) * t).sin()
}

pub fn purity(rho: &DensityMatrix) -> f64 {
    (rho.entries * rho.entries).trace().re
}

/// Diagonal of ρ in the block basis.
pub fn populations(rho: &DensityMatrix) -> [f64; 4] {
    std::array::from_fn(|i| rho.entries[(i, i)].re)
}

/// `|⟨Φ_p|ρ|Φ_q⟩|` for `(p, q)` = (1,2), (1,3), (1,4), (2,3), (2,4), (3,4).
pub fn eigenbasis_coherences(rho: &DensityMatrix, spectrum: &Spectrum) -> Result<[f64; 6]> {
    if rho.basis != spectrum.basis {
        return Err(Error::BasisMismatch { expected: spectrum.basis, found: rho.basis });
    }
    let e = spectrum.to_eigenbasis(&rho.entries);
    const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
    Ok(PAIRS.map(|(p, q)| e[(p, q)].norm()))
}
