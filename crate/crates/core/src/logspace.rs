//! Signed log-magnitude arithmetic.
//!
//! High-order derivatives of the initialization profiles reach magnitudes
//! far beyond `f64` range before their damping factors are applied
//! (Hermite polynomial values against `exp(-x^2)`, factorial-sized Leibniz
//! weights). Numbers are therefore carried as `sign * exp(ln_abs)` and only
//! collapsed to a plain scalar at the end.

use crate::float::Real;

/// A real number stored as sign and natural log of its absolute value.
#[derive(Clone, Copy, Debug)]
pub struct LogNum<T> {
    /// -1, 0 or +1.
    pub sign: i8,
    /// ln|x|; meaningless when `sign == 0`.
    pub ln_abs: T,
}

impl<T: Real> LogNum<T> {
    pub fn zero() -> Self {
        LogNum { sign: 0, ln_abs: T::neg_infinity() }
    }

    pub fn one() -> Self {
        LogNum { sign: 1, ln_abs: T::zero() }
    }

    pub fn new(sign: i8, ln_abs: T) -> Self {
        if sign == 0 {
            Self::zero()
        } else {
            LogNum { sign, ln_abs }
        }
    }

    /// Exact log representation of a plain scalar.
    pub fn from_real(x: T) -> Self {
        if x == T::zero() {
            Self::zero()
        } else {
            LogNum { sign: if x > T::zero() { 1 } else { -1 }, ln_abs: x.abs().ln() }
        }
    }

    /// `exp(ln_abs) * sign`; may overflow to infinity for very large values.
    pub fn to_real(self) -> T {
        if self.sign == 0 {
            T::zero()
        } else {
            T::of(self.sign as f64) * self.ln_abs.exp()
        }
    }

    pub fn is_zero(self) -> bool {
        self.sign == 0
    }

    pub fn abs(self) -> Self {
        LogNum { sign: self.sign.abs(), ln_abs: self.ln_abs }
    }

    pub fn neg(self) -> Self {
        LogNum { sign: -self.sign, ln_abs: self.ln_abs }
    }

    pub fn mul(self, rhs: Self) -> Self {
        if self.sign == 0 || rhs.sign == 0 {
            return Self::zero();
        }
        LogNum { sign: self.sign * rhs.sign, ln_abs: self.ln_abs + rhs.ln_abs }
    }

    /// Multiply by `exp(e)` without leaving log space.
    pub fn scale_exp(self, e: T) -> Self {
        if self.sign == 0 {
            return self;
        }
        LogNum { sign: self.sign, ln_abs: self.ln_abs + e }
    }

    /// Signed addition via log-sum-exp on the larger magnitude.
    pub fn add(self, rhs: Self) -> Self {
        if self.sign == 0 {
            return rhs;
        }
        if rhs.sign == 0 {
            return self;
        }
        let (big, small) = if self.ln_abs >= rhs.ln_abs { (self, rhs) } else { (rhs, self) };
        let d = (small.ln_abs - big.ln_abs).exp(); // in (0, 1]
        let factor = if big.sign == small.sign { T::one() + d } else { T::one() - d };
        if factor == T::zero() {
            return Self::zero();
        }
        // factor > 0 always: |small| <= |big|.
        LogNum { sign: big.sign, ln_abs: big.ln_abs + factor.ln() }
    }

    pub fn sub(self, rhs: Self) -> Self {
        self.add(rhs.neg())
    }

    /// Square of the value (always nonnegative).
    pub fn sq(self) -> Self {
        if self.sign == 0 {
            return self;
        }
        LogNum { sign: 1, ln_abs: self.ln_abs + self.ln_abs }
    }
}

/// Sum of nonnegative log-space terms, e.g. a quadrature accumulation.
pub fn log_sum<T: Real>(terms: impl IntoIterator<Item = LogNum<T>>) -> LogNum<T> {
    terms.into_iter().fold(LogNum::zero(), |acc, t| acc.add(t))
}
