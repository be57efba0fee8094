//! Physical parameters, the four-state interaction block and its spectrum.
//!
//! Units: ħ = 1, every energy is stored as an angular frequency in rad/s.
//! The block basis is `(|g,m,n⟩, |e,m,n⟩, |g,m−1,n−1⟩, |e,m−1,n−1⟩)` where `m`
//! counts vibrational quanta and `n` cavity photons.

use std::fmt;

use nalgebra::Vector4;

use crate::error::{Error, Result};
use crate::linalg::{self, to_complex, Mat4, RealMat4};

/// Lamb-Dicke parameters at or above this value trigger a warning.
pub const LAMB_DICKE_LIMIT: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Laser–ion Rabi coupling Ω.
    pub omega: f64,
    /// Cavity–ion coupling g.
    pub g: f64,
    pub eta_c: f64,
    /// Only checked against the Lamb-Dicke regime; Ω already carries the laser coupling.
    pub eta_l: f64,
    /// Mean frequency of the minimum unitary step. `f64::INFINITY` means no
    /// intrinsic decoherence.
    pub gamma: f64,
}

impl SystemParams {
    pub fn new(omega: f64, g: f64, eta_c: f64, eta_l: f64, gamma: f64) -> Result<Self> {
        for (name, v) in [("omega", omega), ("g", g), ("eta_c", eta_c), ("eta_l", eta_l)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(name, format!("must be finite and >= 0, got {v}")));
            }
        }
        check_gamma(gamma)?;
        Ok(SystemParams { omega, g, eta_c, eta_l, gamma })
    }

    pub fn with_gamma(self, gamma: f64) -> Result<Self> {
        check_gamma(gamma)?;
        Ok(SystemParams { gamma, ..self })
    }

    pub fn is_decoherence_free(&self) -> bool {
        self.gamma.is_infinite()
    }
}

pub(crate) fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && !gamma.is_nan() {
        Ok(())
    } else {
        Err(Error::invalid("gamma", format!("must be > 0 (or +inf), got {gamma}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModeIndices {
    pub m: u32,
    pub n: u32,
}

impl ModeIndices {
    pub fn new(m: i64, n: i64) -> Result<Self> {
        let conv = |name, v: i64| {
            u32::try_from(v).map_err(|_| {
                if v < 0 {
                    Error::NegativeQuantumNumber { name, value: v }
                } else {
                    Error::invalid(name, format!("{v} is out of range"))
                }
            })
        };
        Ok(ModeIndices { m: conv("m", m)?, n: conv("n", n)? })
    }

    /// The `m = n = 1` block holding `|g,0,0⟩` and `|e,1,1⟩`.
    pub const GROUND: ModeIndices = ModeIndices { m: 1, n: 1 };

    pub fn is_coupled(&self) -> bool {
        self.m >= 1 && self.n >= 1
    }

    fn sqrt_mn(&self) -> f64 {
        (f64::from(self.m) * f64::from(self.n)).sqrt()
    }
}

/// Tag naming the four basis states of a block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BasisOrder {
    pub modes: ModeIndices,
}

impl BasisOrder {
    pub fn new(modes: ModeIndices) -> Self {
        BasisOrder { modes }
    }

    pub fn labels(&self) -> [String; 4] {
        let (m, n) = (i64::from(self.modes.m), i64::from(self.modes.n));
        [
            format!("|g,{m},{n}>"),
            format!("|e,{m},{n}>"),
            format!("|g,{},{}>", m - 1, n - 1),
            format!("|e,{},{}>", m - 1, n - 1),
        ]
    }
}

impl fmt::Display for BasisOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.labels().join(", "))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedCouplings {
    /// Sideband coupling `a = ½·g·η_c·√(mn)`.
    pub a: f64,
    /// Dressed frequency `μ = √(a² + Ω²)`.
    pub mu: f64,
    pub omega: f64,
    /// `μ / a`; `None` when `a = 0`.
    pub alpha: Option<f64>,
    /// Intrinsic decoherence parameter `a / γ`.
    pub r: f64,
}

pub fn derived_couplings(params: &SystemParams, modes: ModeIndices) -> DerivedCouplings {
    let a = 0.5 * params.g * params.eta_c * modes.sqrt_mn();
    let mu = a.hypot(params.omega);
    DerivedCouplings { a, mu, omega: params.omega, alpha: (a > 0.0).then(|| mu / a), r: a / params.gamma }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HamiltonianBlock {
    /// Real symmetric entries in rad/s.
    pub entries: RealMat4,
    pub basis: BasisOrder,
}

impl HamiltonianBlock {
    pub fn complex(&self) -> Mat4 {
        to_complex(&self.entries)
    }
}

pub fn build_hamiltonian(params: &SystemParams, modes: ModeIndices) -> HamiltonianBlock {
    let om = params.omega;
    let side = params.g * params.eta_c * modes.sqrt_mn();
    #[rustfmt::skip]
    let entries = RealMat4::new(
        0.0,  om,  0.0, side,
        om,   0.0, 0.0, 0.0,
        0.0,  0.0, 0.0, om,
        side, 0.0, om,  0.0,
    );
    HamiltonianBlock { entries, basis: BasisOrder::new(modes) }
}

/// Eigenpairs of the block in the fixed order
/// `(E1, E2, E3, E4) = (μ−a, −(μ+a), μ+a, −(μ−a))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: [f64; 4],
    /// Orthonormal real eigenvectors as columns.
    pub eigenvectors: RealMat4,
    pub basis: BasisOrder,
}

impl Spectrum {
    pub fn vector(&self, p: usize) -> Vector4<f64> {
        self.eigenvectors.column(p).into_owned()
    }

    pub fn projector(&self, p: usize) -> RealMat4 {
        let v = self.vector(p);
        v * v.transpose()
    }

    /// Sum of the projectors of every eigenvalue within `tol` of `E_p`.
    pub fn eigenspace_projector(&self, p: usize, tol: f64) -> RealMat4 {
        (0..4).filter(|&q| (self.eigenvalues[q] - self.eigenvalues[p]).abs() <= tol).map(|q| self.projector(q)).sum()
    }

    pub fn reconstruct(&self) -> RealMat4 {
        (0..4).map(|p| self.projector(p) * self.eigenvalues[p]).sum()
    }

    pub fn max_eigenvalue_magnitude(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0f64, |m, e| m.max(e.abs()))
    }

    /// `Vᵀ ρ V`: matrix elements `⟨Φ_p|ρ|Φ_q⟩`.
    pub fn to_eigenbasis(&self, m: &Mat4) -> Mat4 {
        let v = to_complex(&self.eigenvectors);
        v.transpose() * m * v
    }

    pub fn from_eigenbasis(&self, m: &Mat4) -> Mat4 {
        let v = to_complex(&self.eigenvectors);
        v * m * v.transpose()
    }

    /// `max_ij |(H Φ)_ij − (Φ E)_ij|`.
    pub fn residual(&self, block: &HamiltonianBlock) -> f64 {
        let hv = block.entries * self.eigenvectors;
        let ve = self.eigenvectors * RealMat4::from_diagonal(&self.eigenvalues.into());
        (hv - ve).abs().max()
    }

    pub fn orthonormality_error(&self) -> f64 {
        (self.eigenvectors.transpose() * self.eigenvectors - RealMat4::identity()).abs().max()
    }
}

/// Flip `v` so its first significant component is nonnegative.
fn fix_sign(v: &mut Vector4<f64>) {
    let scale = v.amax();
    if let Some(first) = v.iter().copied().find(|x| x.abs() > 1e-12 * scale) {
        if first < 0.0 {
            *v = -*v;
        }
    }
}

/// Eigenvector `(x, y)` of `[[2b, Ω], [Ω, 0]]` for eigenvalue `lambda`.
///
/// Both `(λ, Ω)` and `(Ω, λ − 2b)` solve the system; the one with the larger
/// norm is used so `Ω = 0` or `λ = 0` never produces a null vector.
fn reduced_eigenvector(b: f64, omega: f64, lambda: f64) -> Option<(f64, f64)> {
    let c1 = (lambda, omega);
    let c2 = (omega, lambda - 2.0 * b);
    let n1 = c1.0.hypot(c1.1);
    let n2 = c2.0.hypot(c2.1);
    let (v, n) = if n1 >= n2 { (c1, n1) } else { (c2, n2) };
    (n > 0.0).then(|| (v.0 / n, v.1 / n))
}

/// Closed-form spectrum via the split into the symmetric span
/// `{(e1+e4)/√2, (e2+e3)/√2}` and the antisymmetric span
/// `{(e1−e4)/√2, (e2−e3)/√2}`. On each span the block reduces to
/// `[[±2a, Ω], [Ω, 0]]` with eigenvalues `±a ± μ`.
pub fn spectrum_analytic(block: &HamiltonianBlock, couplings: &DerivedCouplings) -> Result<Spectrum> {
    let (a, mu, om) = (couplings.a, couplings.mu, couplings.omega);
    let tol = 1e-12 * mu.max(f64::MIN_POSITIVE);
    if (block.entries[(0, 1)] - om).abs() > tol || (block.entries[(0, 3)] - 2.0 * a).abs() > tol {
        return Err(Error::invalid("couplings", "do not match the Hamiltonian block"));
    }

    let s = std::f64::consts::FRAC_1_SQRT_2;
    // (eigenvalue, ±1 for symmetric/antisymmetric span)
    let layout = [(mu - a, -1.0), (-(mu + a), -1.0), (mu + a, 1.0), (-(mu - a), 1.0)];

    let mut eigenvalues = [0.0; 4];
    let mut eigenvectors = RealMat4::zeros();
    for (p, &(lambda, parity)) in layout.iter().enumerate() {
        // the first eigenvalue of each span takes (1, 0) when H = 0
        let fallback = if p % 2 == 0 { (1.0, 0.0) } else { (0.0, 1.0) };
        let (x, y) = reduced_eigenvector(parity * a, om, lambda).unwrap_or(fallback);
        let mut v = Vector4::new(s * x, s * y, parity * s * y, parity * s * x);
        fix_sign(&mut v);
        eigenvalues[p] = lambda;
        eigenvectors.set_column(p, &v);
    }
    Ok(Spectrum { eigenvalues, eigenvectors, basis: block.basis })
}

/// Jacobi diagonalization of the block, permuted into the convention order.
///
/// Eigenvalues sorted ascending as `w0 ≤ w1 ≤ w2 ≤ w3` map to the convention
/// order as `(w2, w0, w3, w1)`, which for `a, Ω ≥ 0` is exactly
/// `(μ−a, −(μ+a), μ+a, −(μ−a))`.
pub fn spectrum_numeric(block: &HamiltonianBlock) -> Result<Spectrum> {
    let eig = linalg::jacobi_eigen(&block.entries)?;
    let mut order: Vec<usize> = (0..4).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let convention = [order[2], order[0], order[3], order[1]];

    let mut eigenvalues = [0.0; 4];
    let mut eigenvectors = RealMat4::zeros();
    for (p, &src) in convention.iter().enumerate() {
        let mut v: Vector4<f64> = eig.eigenvectors.column(src).into_owned();
        fix_sign(&mut v);
        eigenvalues[p] = eig.eigenvalues[src];
        eigenvectors.set_column(p, &v);
    }
    Ok(Spectrum { eigenvalues, eigenvectors, basis: block.basis })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LambDickeWarning {
    pub parameter: &'static str,
    pub value: f64,
}

impl fmt::Display for LambDickeWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} = {} is outside the Lamb-Dicke regime (limit {LAMB_DICKE_LIMIT}); lowest-order block may be inaccurate",
            self.parameter, self.value
        )
    }
}

pub fn validate_lamb_dicke(params: &SystemParams) -> Vec<LambDickeWarning> {
    [("eta_c", params.eta_c), ("eta_l", params.eta_l)]
        .into_iter()
        .filter(|&(_, v)| v >= LAMB_DICKE_LIMIT)
        .map(|(parameter, value)| LambDickeWarning { parameter, value })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params_with(omega: f64, g_eta: f64) -> SystemParams {
        SystemParams::new(omega, g_eta / 0.05, 0.05, 0.05, 1000.0).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn derived_couplings_direct_substitution() {
        let c = derived_couplings(&params_with(15f64.sqrt(), 2.0), ModeIndices::GROUND);
        assert!(close(c.a, 1.0, 1e-15));
        assert!(close(c.mu, 4.0, 1e-15));
        assert!(close(c.alpha.unwrap(), 4.0, 1e-15));
        assert!(close(c.r, 0.001, 1e-18));

        let c = derived_couplings(&params_with(1.3, 2.0), ModeIndices::new(0, 5).unwrap());
        assert_eq!(c.a, 0.0);
        assert_eq!(c.mu, 1.3);
        assert_eq!(c.alpha, None);

        let c = derived_couplings(&params_with(1.0, 1.0), ModeIndices::new(4, 9).unwrap());
        assert!(close(c.a, 3.0, 1e-15));
    }

    #[test]
    fn decoherence_free_has_zero_r() {
        let p = params_with(1.0, 2.0).with_gamma(f64::INFINITY).unwrap();
        assert_eq!(derived_couplings(&p, ModeIndices::GROUND).r, 0.0);
        assert!(p.is_decoherence_free());
    }

    #[test]
    fn parameter_validation() {
        assert!(SystemParams::new(-1.0, 1.0, 0.1, 0.1, 1.0).is_err());
        assert!(SystemParams::new(1.0, 1.0, 0.1, 0.1, 0.0).is_err());
        assert!(SystemParams::new(1.0, 1.0, 0.1, 0.1, f64::NAN).is_err());
        assert!(SystemParams::new(1.0, 1.0, 0.1, 0.1, f64::INFINITY).is_ok());
        assert!(matches!(ModeIndices::new(-1, 1), Err(Error::NegativeQuantumNumber { name: "m", value: -1 })));
        assert!(matches!(ModeIndices::new(1, -3), Err(Error::NegativeQuantumNumber { name: "n", .. })));
    }

    #[test]
    fn hamiltonian_pattern() {
        let h = build_hamiltonian(&params_with(2.0, 2.0), ModeIndices::GROUND).entries;
        for &(i, j) in &[(0, 1), (1, 0), (2, 3), (3, 2), (0, 3), (3, 0)] {
            assert!(close(h[(i, j)], 2.0, 1e-15), "({i},{j})");
        }
        assert_eq!(h.abs().sum(), 12.0);
        assert_eq!(h, h.transpose());

        let h = build_hamiltonian(&params_with(1.0, 2.0), ModeIndices::new(0, 3).unwrap()).entries;
        assert_eq!(h[(0, 3)], 0.0);
        assert_eq!(h[(3, 0)], 0.0);
        assert_eq!(h[(0, 1)], 1.0);
        assert_eq!(h[(2, 3)], 1.0);
    }

    #[test]
    fn analytic_spectrum_values() {
        let p = params_with(15f64.sqrt(), 2.0);
        let c = derived_couplings(&p, ModeIndices::GROUND);
        let b = build_hamiltonian(&p, ModeIndices::GROUND);
        let s = spectrum_analytic(&b, &c).unwrap();
        for (e, want) in s.eigenvalues.iter().zip([3.0, -5.0, 5.0, -3.0]) {
            assert!(close(*e, want, 1e-14));
        }
        assert!(s.residual(&b) <= 1e-10 * 5.0);
        assert!(s.orthonormality_error() <= 1e-12);

        let n = spectrum_numeric(&b).unwrap();
        for (x, y) in s.eigenvalues.iter().zip(n.eigenvalues) {
            assert!(close(*x, y, 1e-10 * 4.0));
        }
    }

    fn sorted(mut w: [f64; 4]) -> [f64; 4] {
        w.sort_by(f64::total_cmp);
        w
    }

    #[test]
    fn degenerate_spectra() {
        // a = 0: two resonant Rabi doublets
        let p = params_with(1.0, 0.0);
        let b = build_hamiltonian(&p, ModeIndices::GROUND);
        let s = spectrum_analytic(&b, &derived_couplings(&p, ModeIndices::GROUND)).unwrap();
        assert_eq!(sorted(s.eigenvalues), [-1.0, -1.0, 1.0, 1.0]);
        assert!(s.residual(&b) < 1e-14 && s.orthonormality_error() < 1e-14);

        // Ω = 0: μ = a
        let p = params_with(0.0, 2.0);
        let b = build_hamiltonian(&p, ModeIndices::GROUND);
        let s = spectrum_analytic(&b, &derived_couplings(&p, ModeIndices::GROUND)).unwrap();
        assert_eq!(sorted(s.eigenvalues), [-2.0, 0.0, 0.0, 2.0]);
        assert!(s.residual(&b) < 1e-14 && s.orthonormality_error() < 1e-14);

        // H = 0
        let p = params_with(0.0, 0.0);
        let b = build_hamiltonian(&p, ModeIndices::GROUND);
        let s = spectrum_analytic(&b, &derived_couplings(&p, ModeIndices::GROUND)).unwrap();
        assert_eq!(s.eigenvalues, [0.0; 4]);
        assert!(s.orthonormality_error() < 1e-15);
        let n = spectrum_numeric(&b).unwrap();
        assert_eq!(n.eigenvalues, [0.0; 4]);
    }

    #[test]
    fn analytic_rejects_foreign_couplings() {
        let p = params_with(1.0, 2.0);
        let b = build_hamiltonian(&p, ModeIndices::GROUND);
        let c = derived_couplings(&params_with(2.0, 2.0), ModeIndices::GROUND);
        assert!(spectrum_analytic(&b, &c).is_err());
    }

    #[test]
    fn eigenvector_sign_convention() {
        let p = params_with(15f64.sqrt(), 2.0);
        let b = build_hamiltonian(&p, ModeIndices::GROUND);
        for s in
            [spectrum_analytic(&b, &derived_couplings(&p, ModeIndices::GROUND)).unwrap(), spectrum_numeric(&b).unwrap()]
        {
            for q in 0..4 {
                let v = s.vector(q);
                let first = v.iter().find(|x| x.abs() > 1e-12).unwrap();
                assert!(*first > 0.0);
            }
        }
    }

    #[test]
    fn lamb_dicke_threshold() {
        let mk = |c, l| SystemParams::new(1.0, 1.0, c, l, 1.0).unwrap();
        assert!(validate_lamb_dicke(&mk(0.05, 0.05)).is_empty());
        let w = validate_lamb_dicke(&mk(0.5, 0.05));
        assert_eq!(w.len(), 1);
        assert_eq!(w[0].parameter, "eta_c");
        assert!(w[0].to_string().contains("eta_c"));
        assert_eq!(validate_lamb_dicke(&mk(0.3, 0.05)).len(), 1);
        assert_eq!(validate_lamb_dicke(&mk(0.3, 0.3)).len(), 2);
    }

    #[test]
    fn basis_labels() {
        assert_eq!(
            BasisOrder::new(ModeIndices::GROUND).labels(),
            ["|g,1,1>", "|e,1,1>", "|g,0,0>", "|e,0,0>"].map(String::from)
        );
    }
}
