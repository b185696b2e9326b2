//! Two-point Hermite interpolation of the warped-profile bridge on [-1, 0].
//!
//! The degree-(2r-1) polynomial matches the first r-1 derivatives of
//! `e^{-p}` at `p = 0` and of `e^{p}` at `p = -1`. It is assembled from
//! generalized Lagrange polynomials built by a backward recursion; the
//! whole construction is carried out in exact rational arithmetic and the
//! irrational endpoint value `e^{-1}` is kept symbolic, so the endpoint
//! conditions hold exactly by construction.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Result, SchroError};
use crate::float::Real;

/// Rational polynomial, ascending coefficients.
type RatPoly = Vec<BigRational>;

fn poly_zero() -> RatPoly {
    vec![BigRational::zero()]
}

fn poly_scale(p: &RatPoly, s: &BigRational) -> RatPoly {
    p.iter().map(|c| c * s).collect()
}

fn poly_sub(a: &RatPoly, b: &RatPoly) -> RatPoly {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| {
            let ca = a.get(i).cloned().unwrap_or_else(BigRational::zero);
            let cb = b.get(i).cloned().unwrap_or_else(BigRational::zero);
            ca - cb
        })
        .collect()
}

fn poly_mul(a: &RatPoly, b: &RatPoly) -> RatPoly {
    let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, ca) in a.iter().enumerate() {
        if ca.is_zero() {
            continue;
        }
        for (j, cb) in b.iter().enumerate() {
            out[i + j] += ca * cb;
        }
    }
    out
}

fn poly_pow(base: &RatPoly, e: usize) -> RatPoly {
    let mut out = vec![BigRational::one()];
    for _ in 0..e {
        out = poly_mul(&out, base);
    }
    out
}

fn poly_derivative(p: &RatPoly, order: usize) -> RatPoly {
    let mut cur = p.clone();
    for _ in 0..order {
        if cur.len() <= 1 {
            return poly_zero();
        }
        cur = cur
            .iter()
            .enumerate()
            .skip(1)
            .map(|(j, c)| c * BigRational::from(BigInt::from(j)))
            .collect();
    }
    cur
}

fn poly_eval(p: &RatPoly, x: &BigRational) -> BigRational {
    let mut acc = BigRational::zero();
    for c in p.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

fn factorial_rat(k: usize) -> BigRational {
    let mut f = BigInt::one();
    for j in 2..=k {
        f *= BigInt::from(j);
    }
    BigRational::from(f)
}

/// Substitute `p = t - 1`, returning coefficients in ascending powers of
/// `t`; exact binomial expansion.
fn poly_shift_minus_one(p: &RatPoly) -> RatPoly {
    let mut out = vec![BigRational::zero(); p.len()];
    // (t - 1)^i expanded via Pascal row built incrementally.
    let mut pascal: Vec<BigInt> = vec![BigInt::one()];
    for (i, c) in p.iter().enumerate() {
        if i > 0 {
            let mut next = vec![BigInt::one(); i + 1];
            for j in 1..i {
                next[j] = &pascal[j - 1] + &pascal[j];
            }
            pascal = next;
        }
        if c.is_zero() {
            continue;
        }
        for (j, binom) in pascal.iter().enumerate() {
            // coefficient of t^j in (t-1)^i is C(i,j) (-1)^{i-j}
            let sign = if (i - j) % 2 == 0 {
                BigRational::one()
            } else {
                -BigRational::one()
            };
            out[j] += c * sign * BigRational::from(binom.clone());
        }
    }
    out
}

/// The bridge polynomial `P(p) = e^{-1} P0(p) + P1(p)` with rational
/// `P0`, `P1`.
///
/// Evaluation uses two exact expansions: around `p = 0` (the monomial
/// coefficients) for the right half and around `p = -1` for the left
/// half. Using the near endpoint keeps the alternating-coefficient
/// cancellation at bay, so the interpolation conditions hold to full
/// precision at both ends.
pub struct HermiteBridge<T> {
    pub r: usize,
    /// `deriv_at0[j]`: ascending coefficients of the j-th derivative in
    /// powers of `p`, as (coefficient of e^{-1}, rational part).
    deriv_at0: Vec<Vec<(T, T)>>,
    /// `deriv_at1[j]`: same in powers of `t = p + 1`.
    deriv_at1: Vec<Vec<(T, T)>>,
    /// Exact rational polynomials, retained for the exactness tests.
    pub p0: RatPoly,
    pub p1: RatPoly,
}

/// Largest interpolation order accepted in double precision; beyond this
/// the monomial-basis conditioning of the construction degrades.
pub const R_CAP: usize = 16;

impl<T: Real> HermiteBridge<T> {
    pub fn build(r: usize) -> Result<Self> {
        if r < 1 || r > R_CAP {
            return Err(SchroError::invalid(format!(
                "interpolation order r must be in 1..={R_CAP}, got {r}"
            )));
        }
        // l_{0k}(p) = (-1)^r (p+1)^k p^r / k!   (node -1 family)
        // l_{1k}(p) = p^k (p+1)^r / k!          (node 0 family)
        let p_plus_1: RatPoly = vec![BigRational::one(), BigRational::one()];
        let p_mono: RatPoly = vec![BigRational::zero(), BigRational::one()];
        let sign_r = if r % 2 == 0 {
            BigRational::one()
        } else {
            -BigRational::one()
        };
        let l0: Vec<RatPoly> = (0..r)
            .map(|k| {
                let base = poly_mul(&poly_pow(&p_plus_1, k), &poly_pow(&p_mono, r));
                poly_scale(&base, &(&sign_r / factorial_rat(k)))
            })
            .collect();
        let l1: Vec<RatPoly> = (0..r)
            .map(|k| {
                let base = poly_mul(&poly_pow(&p_mono, k), &poly_pow(&p_plus_1, r));
                poly_scale(&base, &(BigRational::one() / factorial_rat(k)))
            })
            .collect();

        let minus_one = -BigRational::one();
        let zero = BigRational::zero();
        let mut big_l0: Vec<RatPoly> = vec![poly_zero(); r];
        let mut big_l1: Vec<RatPoly> = vec![poly_zero(); r];
        big_l0[r - 1] = l0[r - 1].clone();
        big_l1[r - 1] = l1[r - 1].clone();
        for k in (0..r.saturating_sub(1)).rev() {
            let mut acc0 = l0[k].clone();
            let mut acc1 = l1[k].clone();
            for nu in (k + 1)..r {
                let c0 = poly_eval(&poly_derivative(&l0[k], nu), &minus_one);
                if !c0.is_zero() {
                    acc0 = poly_sub(&acc0, &poly_scale(&big_l0[nu], &c0));
                }
                let c1 = poly_eval(&poly_derivative(&l1[k], nu), &zero);
                if !c1.is_zero() {
                    acc1 = poly_sub(&acc1, &poly_scale(&big_l1[nu], &c1));
                }
            }
            big_l0[k] = acc0;
            big_l1[k] = acc1;
        }

        // P = sum_k e^{-1} L_{0k} + (-1)^k L_{1k}
        let mut p0 = poly_zero();
        let mut p1 = poly_zero();
        for k in 0..r {
            p0 = poly_sub(&p0, &poly_scale(&big_l0[k], &(-BigRational::one())));
            let sign = if k % 2 == 0 {
                -BigRational::one()
            } else {
                BigRational::one()
            };
            p1 = poly_sub(&p1, &poly_scale(&big_l1[k], &sign));
        }

        let to_table = |d0: &RatPoly, d1: &RatPoly| -> Vec<(T, T)> {
            let n = d0.len().max(d1.len());
            (0..n)
                .map(|i| {
                    let c0 = d0.get(i).map_or(0.0, |c| c.to_f64().unwrap_or(f64::NAN));
                    let c1 = d1.get(i).map_or(0.0, |c| c.to_f64().unwrap_or(f64::NAN));
                    (T::of(c0), T::of(c1))
                })
                .collect()
        };
        let p0_shift = poly_shift_minus_one(&p0);
        let p1_shift = poly_shift_minus_one(&p1);
        let max_order = 2 * r; // derivatives above 2r-1 vanish
        let mut deriv_at0 = Vec::with_capacity(max_order);
        let mut deriv_at1 = Vec::with_capacity(max_order);
        for j in 0..max_order {
            deriv_at0.push(to_table(&poly_derivative(&p0, j), &poly_derivative(&p1, j)));
            deriv_at1.push(to_table(
                &poly_derivative(&p0_shift, j),
                &poly_derivative(&p1_shift, j),
            ));
        }
        Ok(HermiteBridge { r, deriv_at0, deriv_at1, p0, p1 })
    }

    /// Evaluate the j-th derivative of the bridge polynomial at `p`,
    /// using whichever endpoint expansion is closer.
    pub fn eval_deriv(&self, p: T, j: usize) -> T {
        if j >= self.deriv_at0.len() {
            return T::zero();
        }
        let e_inv = (-T::one()).exp();
        let (table, x) = if p < T::of(-0.5) {
            (&self.deriv_at1[j], p + T::one())
        } else {
            (&self.deriv_at0[j], p)
        };
        let mut acc = T::zero();
        for &(c0, c1) in table.iter().rev() {
            acc = acc * x + (e_inv * c0 + c1);
        }
        acc
    }

    pub fn eval(&self, p: T) -> T {
        self.eval_deriv(p, 0)
    }

}
