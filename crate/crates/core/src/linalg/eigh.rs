//! Eigenvalues of complex Hermitian matrices by the cyclic Jacobi method.
//!
//! Sizes here are tiny (enlarged system dimension), so Jacobi's robustness
//! and simplicity beat bringing in a LAPACK binding. Only eigenvalues are
//! required by the callers.

use num_complex::Complex;

use super::CMat;
use crate::error::{Result, SchroError};
use crate::float::Real;

/// Sorted (ascending) real eigenvalues of a Hermitian matrix.
pub fn hermitian_eigenvalues<T: Real>(a: &CMat<T>) -> Result<Vec<T>> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(SchroError::invalid("eigh: matrix must be square"));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let herm_tol = T::of(1e-10) * (T::one() + super::max_abs(a));
    if !super::is_hermitian(a, herm_tol) {
        return Err(SchroError::invalid("eigh: matrix is not Hermitian"));
    }
    // Work on the Hermitian average to kill representation noise.
    let mut m = a.clone();
    for i in 0..n {
        for j in 0..n {
            let avg = (a[(i, j)] + a[(j, i)].conj()) * Complex::new(T::of(0.5), T::zero());
            m[(i, j)] = avg;
        }
    }

    let max_sweeps = 60;
    for _sweep in 0..max_sweeps {
        let mut off = T::zero();
        for i in 0..n {
            for j in (i + 1)..n {
                off = off + m[(i, j)].norm_sqr();
            }
        }
        let scale = m.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr());
        if off <= T::epsilon() * T::epsilon() * scale.max(T::min_positive_value()) {
            let mut eigs: Vec<T> = (0..n).map(|i| m[(i, i)].re).collect();
            eigs.sort_by(|x, y| x.partial_cmp(y).expect("eigenvalues are finite"));
            return Ok(eigs);
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                let mag = apq.norm();
                if mag == T::zero() {
                    continue;
                }
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                // Standard Jacobi angle on the 2x2 block, with a complex
                // phase absorbing arg(apq).
                let tau = (aqq - app) / (T::of(2.0) * mag);
                let t = {
                    let sign = if tau >= T::zero() { T::one() } else { -T::one() };
                    sign / (tau.abs() + (T::one() + tau * tau).sqrt())
                };
                let c = T::one() / (T::one() + t * t).sqrt();
                let s_mag = t * c;
                let phase = apq / Complex::new(mag, T::zero());
                let s = phase.conj() * Complex::new(s_mag, T::zero());

                // Apply the rotation on the left and right: rows/cols p, q.
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = mpk * Complex::new(c, T::zero()) - s.conj() * mqk;
                    m[(q, k)] = s * mpk + mqk * Complex::new(c, T::zero());
                }
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = mkp * Complex::new(c, T::zero()) - s * mkq;
                    m[(k, q)] = s.conj() * mkp + mkq * Complex::new(c, T::zero());
                }
            }
        }
    }
    Err(SchroError::numerical("eigh: Jacobi sweep did not converge"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use num_complex::Complex64;

    #[test]
    fn diagonal_matrix() {
        let d = array![
            [Complex64::new(3.0, 0.0), Complex64::new(0.0, 0.0)],
            [Complex64::new(0.0, 0.0), Complex64::new(-1.0, 0.0)]
        ];
        let e = hermitian_eigenvalues(&d).unwrap();
        assert!((e[0] + 1.0).abs() < 1e-14 && (e[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn known_complex_hermitian() {
        // [[2, i],[-i, 2]] has eigenvalues 1 and 3.
        let h = array![
            [Complex64::new(2.0, 0.0), Complex64::new(0.0, 1.0)],
            [Complex64::new(0.0, -1.0), Complex64::new(2.0, 0.0)]
        ];
        let e = hermitian_eigenvalues(&h).unwrap();
        assert!((e[0] - 1.0).abs() < 1e-13 && (e[1] - 3.0).abs() < 1e-13);
    }

    #[test]
    fn rejects_non_hermitian() {
        let g = array![
            [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
            [Complex64::new(2.0, 0.0), Complex64::new(0.0, 0.0)]
        ];
        assert!(hermitian_eigenvalues(&g).is_err());
    }

    #[test]
    fn trace_matches_eigenvalue_sum() {
        let h = array![
            [Complex64::new(1.5, 0.0), Complex64::new(0.3, -0.4), Complex64::new(0.0, 0.9)],
            [Complex64::new(0.3, 0.4), Complex64::new(-0.7, 0.0), Complex64::new(0.1, 0.0)],
            [Complex64::new(0.0, -0.9), Complex64::new(0.1, 0.0), Complex64::new(2.2, 0.0)]
        ];
        let e = hermitian_eigenvalues(&h).unwrap();
        let s: f64 = e.iter().sum();
        assert!((s - (1.5 - 0.7 + 2.2)).abs() < 1e-12);
    }
}
