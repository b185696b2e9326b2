//! Brute-force reference solutions used to validate the warped pipeline.
//!
//! Time-independent systems are solved by the matrix exponential with the
//! Duhamel term handled in closed form when `A` is invertible (quadrature
//! otherwise). Time-dependent systems use an embedded Dormand-Prince 5(4)
//! pair with adaptive steps and a half-tolerance re-solve to certify the
//! reported error estimate.

pub use crate::linalg::expm;

use num_complex::Complex;

use crate::error::{Result, SchroError};
use crate::float::Real;
use crate::linalg::{eye, lu_solve, vec_norm, CMat, CVec};
use crate::quad::gauss_legendre;
use crate::system::{DynamicalSystem, VectorFn};

/// How a reference solution was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReferenceMethod {
    /// `u(T) = e^{AT} u0` (homogeneous, constant `A`).
    Expm,
    /// Matrix exponential plus the closed-form or quadrature source term.
    Duhamel,
    /// Adaptive Dormand-Prince 5(4).
    AdaptiveRk,
}

/// A certified reference value for `u(T)`.
pub struct ReferenceSolution<T: Real> {
    pub u_t: CVec<T>,
    pub method: ReferenceMethod,
    pub est_error: T,
}

/// Default oracle tolerance.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Solves the system to tolerance `tol` by the most direct route
/// available.
pub fn solve_reference<T: Real>(sys: &DynamicalSystem<T>, tol: T) -> Result<ReferenceSolution<T>> {
    if sys.time_dependent {
        let coarse = dopri5(sys, tol)?;
        let fine = dopri5(sys, tol * T::of(0.5))?;
        let est = vec_norm(&(&coarse - &fine));
        if est > tol * T::of(10.0) * (T::one() + vec_norm(&fine)) {
            return Err(SchroError::numerical(format!(
                "adaptive reference self-check failed: {est:e}"
            )));
        }
        return Ok(ReferenceSolution { u_t: fine, method: ReferenceMethod::AdaptiveRk, est_error: est });
    }

    let a = sys.a_of_t.at(T::zero());
    let b = sys.b_of_t.at(T::zero());
    let t = sys.horizon;
    let e_at = expm(&a.mapv(|z| z * Complex::new(t, T::zero())))?;
    let homogeneous = e_at.dot(&sys.u0);
    let b_is_zero = b.iter().all(|z| z.norm() == T::zero());
    if b_is_zero {
        return Ok(ReferenceSolution {
            u_t: homogeneous,
            method: ReferenceMethod::Expm,
            est_error: T::of(1e-14),
        });
    }
    // Duhamel term: A^{-1} (e^{AT} - I) b when A is invertible, else
    // 64-node Gauss-Legendre on e^{A(T-s)} b.
    let n = sys.dim;
    let rhs_mat = {
        let mut m = CMat::<T>::zeros((n, 1));
        for i in 0..n {
            m[(i, 0)] = b[i];
        }
        m
    };
    let source = match lu_solve(&a, &{
        let diff = &e_at - &eye::<T>(n);
        diff.dot(&rhs_mat)
    }) {
        Ok(x) => x.column(0).to_owned(),
        Err(_) => {
            // Singular A: integrate the propagated source directly.
            let (nodes, weights) = gauss_legendre::<T>(64);
            let half = t * T::of(0.5);
            let mut acc = CVec::<T>::zeros(n);
            for (x, w) in nodes.iter().zip(weights.iter()) {
                let s = half + half * *x;
                let prop = expm(&a.mapv(|z| z * Complex::new(t - s, T::zero())))?;
                let term = prop.dot(&b);
                let scale = Complex::new(*w * half, T::zero());
                for i in 0..n {
                    acc[i] = acc[i] + term[i] * scale;
                }
            }
            acc
        }
    };
    Ok(ReferenceSolution {
        u_t: homogeneous + source,
        method: ReferenceMethod::Duhamel,
        est_error: T::of(1e-13),
    })
}

/// Dormand-Prince 5(4) embedded pair with PI-free step control.
pub fn dopri5<T: Real>(sys: &DynamicalSystem<T>, tol: T) -> Result<CVec<T>> {
    let f = |t: T, y: &CVec<T>| -> CVec<T> {
        let a = sys.a_of_t.at(t);
        let mut rhs = a.dot(y);
        match &sys.b_of_t {
            VectorFn::Constant(b) => {
                for i in 0..rhs.len() {
                    rhs[i] = rhs[i] + b[i];
                }
            }
            VectorFn::TimeDependent(bf) => {
                let b = bf(t);
                for i in 0..rhs.len() {
                    rhs[i] = rhs[i] + b[i];
                }
            }
        }
        rhs
    };

    // Butcher tableau (Dormand-Prince 1980).
    let c: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
    let a_tab: [[f64; 6]; 6] = [
        [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    let b5: [f64; 7] = [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
        0.0,
    ];
    let b4: [f64; 7] = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];

    let t_end = sys.horizon;
    let mut t = T::zero();
    let mut y = sys.u0.clone();
    let mut h = t_end * T::of(1e-3);
    let h_min = t_end * T::of(1e-13);
    let mut steps = 0usize;
    while (t_end - t) > t_end * T::epsilon() * T::of(4.0) {
        if h > t_end - t {
            h = t_end - t;
        }
        if h < h_min {
            return Err(SchroError::numerical("dopri5: step size underflow (stiff system?)"));
        }
        let mut k: Vec<CVec<T>> = Vec::with_capacity(7);
        k.push(f(t, &y));
        for stage in 1..7 {
            let mut ys = y.clone();
            for j in 0..stage {
                let coeff = if stage < 6 { a_tab[stage - 1][j] } else { b5[j] };
                if coeff == 0.0 {
                    continue;
                }
                let w = Complex::new(h * T::of(coeff), T::zero());
                for i in 0..ys.len() {
                    ys[i] = ys[i] + k[j][i] * w;
                }
            }
            k.push(f(t + h * T::of(c[stage]), &ys));
        }
        // 5th-order solution and embedded error.
        let mut y5 = y.clone();
        let mut err = T::zero();
        let mut err_vec = CVec::<T>::zeros(y.len());
        for j in 0..7 {
            let w5 = Complex::new(h * T::of(b5[j]), T::zero());
            let we = Complex::new(h * T::of(b5[j] - b4[j]), T::zero());
            for i in 0..y.len() {
                y5[i] = y5[i] + k[j][i] * w5;
                err_vec[i] = err_vec[i] + k[j][i] * we;
            }
        }
        let scale = T::one() + vec_norm(&y).max(vec_norm(&y5));
        err = err.max(vec_norm(&err_vec) / scale);
        if err <= tol {
            t = t + h;
            y = y5;
        }
        let safety = T::of(0.9);
        let expo = T::of(0.2);
        let factor = if err > T::zero() {
            (safety * (tol / err).powf(expo)).min(T::of(5.0)).max(T::of(0.2))
        } else {
            T::of(5.0)
        };
        h = h * factor;
        steps += 1;
        if steps > 2_000_000 {
            return Err(SchroError::numerical("dopri5: step budget exhausted"));
        }
    }
    Ok(y)
}
