//! The compactly supported mollifier `eta(p) = exp(1/(p^2-1)) / C` on
//! (-1, 1) and its derivatives.
//!
//! Derivatives have the closed form
//! `eta^(k)(p) = Q_k(p) (1-p^2)^{-2k} exp(1/(p^2-1)) / C`
//! where the `Q_k` satisfy an integer-coefficient recurrence
//! `Q_{k+1} = (1-p^2)^2 Q_k' + 2p(2k-1-2kp^2) Q_k`, `Q_0 = 1`.
//! The recurrence is carried out in exact big-integer arithmetic; the
//! coefficients are converted to floating point once at table build time.

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Result, SchroError};
use crate::float::Real;
use crate::logspace::LogNum;
use crate::quad;

/// Highest derivative order tabulated by default.
pub const K_MAX: usize = 40;

/// Exact coefficients of `Q_k`, ascending powers.
pub fn q_polynomials(k_max: usize) -> Vec<Vec<BigInt>> {
    let mut polys: Vec<Vec<BigInt>> = Vec::with_capacity(k_max + 1);
    polys.push(vec![BigInt::from(1)]);
    for k in 0..k_max {
        let q = &polys[k];
        let deg = q.len() - 1;
        let mut next = vec![BigInt::zero(); deg + 4];
        // (1 - 2p^2 + p^4) * Q_k'
        for j in 1..=deg {
            let d = q[j].clone() * BigInt::from(j);
            next[j - 1] += &d;
            next[j + 1] -= &d * BigInt::from(2);
            next[j + 3] += &d;
        }
        // 2p(2k - 1) Q_k - 4k p^3 Q_k
        let c1 = BigInt::from(2 * (2 * k as i64 - 1));
        let c3 = BigInt::from(4 * k as i64);
        for j in 0..=deg {
            next[j + 1] += &q[j] * &c1;
            next[j + 3] -= &q[j] * &c3;
        }
        while next.len() > 1 && next.last().map_or(false, |c| c.is_zero()) {
            next.pop();
        }
        polys.push(next);
    }
    polys
}

/// Tabulated mollifier: normalization constant and `Q_k` coefficients.
pub struct Mollifier<T> {
    /// Normalization `C = int_{-1}^{1} exp(1/(p^2-1)) dp`.
    pub norm_c: T,
    q_coeffs: Vec<Vec<T>>,
}

impl<T: Real> Mollifier<T> {
    pub fn build(k_max: usize) -> Result<Self> {
        let norm_c = quad::adaptive(
            |p: T| {
                let d = p * p - T::one();
                if d >= T::zero() {
                    T::zero()
                } else {
                    (T::one() / d).exp()
                }
            },
            -T::one(),
            T::one(),
            T::of(1e-14),
        )?;
        if !norm_c.is_finite() || norm_c <= T::zero() {
            return Err(SchroError::numerical("mollifier normalization failed"));
        }
        let q_coeffs = q_polynomials(k_max)
            .into_iter()
            .map(|poly| {
                poly.into_iter()
                    .map(|c| T::of(c.to_f64().expect("Q_k coefficient fits in f64")))
                    .collect()
            })
            .collect();
        Ok(Mollifier { norm_c, q_coeffs })
    }

    pub fn k_max(&self) -> usize {
        self.q_coeffs.len() - 1
    }

    /// `eta^(k)(p)` in signed log form; exactly zero outside (-1, 1).
    pub fn eta_log(&self, p: T, k: usize) -> Result<LogNum<T>> {
        if k >= self.q_coeffs.len() {
            return Err(SchroError::invalid(format!(
                "mollifier derivative order {k} exceeds table ({})",
                self.k_max()
            )));
        }
        if p.abs() >= T::one() {
            return Ok(LogNum::zero());
        }
        let q = horner(&self.q_coeffs[k], p);
        let one_minus = T::one() - p * p;
        let ln_mag = q.abs().ln() - T::of(2.0 * k as f64) * one_minus.ln()
            + T::one() / (p * p - T::one())
            - self.norm_c.ln();
        let sign = if q > T::zero() {
            1
        } else if q < T::zero() {
            -1
        } else {
            0
        };
        Ok(LogNum::new(sign, ln_mag))
    }

    /// `eta^(k)(p)` as a plain scalar.
    pub fn eta(&self, p: T, k: usize) -> Result<T> {
        Ok(self.eta_log(p, k)?.to_real())
    }

    /// Cumulative kernel `int_{-1}^{x} eta(t) dt`, clamped to [0, 1].
    pub fn cumulative(&self, x: T) -> Result<T> {
        if x <= -T::one() {
            return Ok(T::zero());
        }
        if x >= T::one() {
            return Ok(T::one());
        }
        let c = self.norm_c;
        let raw = quad::adaptive(
            |p: T| {
                let d = p * p - T::one();
                if d >= T::zero() {
                    T::zero()
                } else {
                    (T::one() / d).exp() / c
                }
            },
            -T::one(),
            x,
            T::of(1e-13),
        )?;
        Ok(raw.min(T::one()).max(T::zero()))
    }
}

fn horner<T: Real>(coeffs: &[T], x: T) -> T {
    let mut acc = T::zero();
    for &c in coeffs.iter().rev() {
        acc = acc * x + c;
    }
    acc
}
