//! Small dense linear algebra on the four-state block.
//!
//! Everything here works on stack-allocated `nalgebra` matrices. The real
//! symmetric eigensolver is a cyclic Jacobi iteration; it is used both as the
//! independent check on the closed-form spectrum and, through the usual
//! real embedding of a Hermitian matrix, for positivity checks on density
//! matrices.

use nalgebra::{Matrix4, SMatrix, SVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type Mat4 = Matrix4<C64>;
pub type RealMat4 = Matrix4<f64>;

/// Relative off-diagonal threshold at which the Jacobi sweep stops.
pub const JACOBI_TOL: f64 = 1e-13;
/// Sweep cap; a well-formed symmetric matrix of this size converges in < 10.
pub const JACOBI_MAX_SWEEPS: usize = 64;

pub fn to_complex(m: &RealMat4) -> Mat4 {
    m.map(|x| C64::new(x, 0.0))
}

pub fn max_abs(m: &Mat4) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff(a: &Mat4, b: &Mat4) -> f64 {
    max_abs(&(a - b))
}

/// Largest `|m_ij - conj(m_ji)|`.
pub fn hermiticity_error(m: &Mat4) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

pub fn hermitize(m: &Mat4) -> Mat4 {
    (m + m.adjoint()).scale(0.5)
}

/// `[a, b] = ab - ba`.
pub fn commutator(a: &Mat4, b: &Mat4) -> Mat4 {
    a * b - b * a
}

/// Eigen-decomposition of a real symmetric matrix: `a = V diag(w) Vᵀ`.
#[derive(Debug, Clone)]
pub struct SymmetricEigen<const N: usize> {
    pub eigenvalues: SVector<f64, N>,
    /// Eigenvectors as columns, aligned with `eigenvalues`.
    pub eigenvectors: SMatrix<f64, N, N>,
    pub sweeps: usize,
}

fn off_diagonal_max<const N: usize>(a: &SMatrix<f64, N, N>) -> f64 {
    let mut m = 0.0f64;
    for i in 0..N {
        for j in 0..N {
            if i != j {
                m = m.max(a[(i, j)].abs());
            }
        }
    }
    m
}

/// Cyclic Jacobi eigensolver for a real symmetric matrix.
///
/// Iterates full sweeps of plane rotations over every `(p, q)` pair until the
/// largest off-diagonal entry is at most `JACOBI_TOL` times the largest entry
/// of the input. The input is symmetrized from its upper triangle.
pub fn jacobi_eigen<const N: usize>(input: &SMatrix<f64, N, N>) -> Result<SymmetricEigen<N>> {
    let mut a = *input;
    for i in 0..N {
        for j in (i + 1)..N {
            a[(j, i)] = a[(i, j)];
        }
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("jacobi input"));
    }
    let scale = a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let threshold = JACOBI_TOL * scale;
    let mut v = SMatrix::<f64, N, N>::identity();

    let mut sweeps = 0;
    while off_diagonal_max(&a) > threshold {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::NoConvergence { sweeps });
        }
        sweeps += 1;
        for p in 0..N {
            for q in (p + 1)..N {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                // A <- Jᵀ A J, with J the (p, q) plane rotation
                for k in 0..N {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..N {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;

                for k in 0..N {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }

    Ok(SymmetricEigen { eigenvalues: SVector::<f64, N>::from_fn(|i, _| a[(i, i)]), eigenvectors: v, sweeps })
}

/// Eigenvalues of a 4×4 Hermitian matrix, ascending.
///
/// Uses the real 8×8 embedding `[[Re, -Im], [Im, Re]]`, whose spectrum is the
/// Hermitian spectrum with every eigenvalue doubled.
pub fn hermitian_eigenvalues(m: &Mat4) -> Result<[f64; 4]> {
    let h = hermitize(m);
    let embed = SMatrix::<f64, 8, 8>::from_fn(|i, j| {
        let z = h[(i % 4, j % 4)];
        match (i < 4, j < 4) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    });
    let eig = jacobi_eigen(&embed)?;
    let mut w: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    w.sort_by(f64::total_cmp);
    Ok([w[0], w[2], w[4], w[6]])
}

pub fn min_eigenvalue(m: &Mat4) -> Result<f64> {
    Ok(hermitian_eigenvalues(m)?[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_handles_zero_matrix() {
        let eig = jacobi_eigen(&RealMat4::zeros()).unwrap();
        assert_eq!(eig.sweeps, 0);
        assert!(eig.eigenvalues.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn jacobi_recovers_constructed_spectrum() {
        // Q from two explicit plane rotations, so Q·D·Qᵀ has known eigenvalues
        let (c1, s1) = (0.3f64.cos(), 0.3f64.sin());
        let (c2, s2) = (1.1f64.cos(), 1.1f64.sin());
        let r1 = RealMat4::new(c1, -s1, 0.0, 0.0, s1, c1, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0);
        let r2 = RealMat4::new(1.0, 0.0, 0.0, 0.0, 0.0, c2, 0.0, -s2, 0.0, 0.0, 1.0, 0.0, 0.0, s2, 0.0, c2);
        let q = r1 * r2;
        let d = [-2.5, 0.75, 1.0, 4.0];
        let a = q * RealMat4::from_diagonal(&d.into()) * q.transpose();
        let eig = jacobi_eigen(&a).unwrap();
        let mut w: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        w.sort_by(f64::total_cmp);
        for (x, y) in w.iter().zip(d) {
            assert!((x - y).abs() < 1e-10);
        }
        let v = eig.eigenvectors;
        assert!((v.transpose() * v - RealMat4::identity()).abs().max() < 1e-13);
    }

    #[test]
    fn embedded_eigenvalues_of_complex_projector() {
        let s = 0.5f64.sqrt();
        let psi = nalgebra::Vector4::new(C64::new(0.0, 0.0), C64::new(0.0, -s), C64::new(s, 0.0), C64::new(0.0, 0.0));
        let p = psi * psi.adjoint();
        let w = hermitian_eigenvalues(&p).unwrap();
        assert!(w[0].abs() < 1e-14 && w[2].abs() < 1e-14);
        assert!((w[3] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_non_finite_input() {
        let mut a = RealMat4::identity();
        a[(0, 1)] = f64::NAN;
        assert!(matches!(jacobi_eigen(&a), Err(Error::NonFinite(_))));
    }
}
