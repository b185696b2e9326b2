//! Initialization profiles `psi(p)` for the warped phase transformation.
//!
//! Five families are provided. `exp_abs` is the original kinked profile
//! `e^{-|p|}`; the other four extend `e^{-p}` smoothly to the negative
//! axis, trading a small recovery bias for spectral accuracy in `p`:
//!
//! * `cutoff`   — mollified indicator times `e^{-p}` (compact support),
//! * `hermite`  — two-point Hermite interpolation bridge on [-1, 0],
//! * `erf`      — Gaussian-smoothed step, `(erf(a p)+1)/2 * e^{-p}`,
//! * `quartic`  — same idea with an `exp(-t^4)` kernel.
//!
//! Profiles expose analytic derivatives in signed log form so that
//! derivative L2 norms, which grow like `r^r`, can be formed up to high
//! order without overflow.

mod interp;
mod mollifier;

pub use interp::{HermiteBridge, R_CAP};
pub use mollifier::{q_polynomials, Mollifier, K_MAX};

use std::sync::Arc;

use crate::error::{Result, SchroError};
use crate::float::Real;
use crate::logspace::LogNum;
use crate::quad;
use crate::special::{self, ln_binomial, ln_erfc};

/// Which family a profile belongs to, with its parameters.
#[derive(Clone, Debug, PartialEq)]
pub enum ProfileKind<T> {
    ExpAbs,
    /// Mollified cut-off with kernel half-width `d >= 1`, flat on `(-1, r)`.
    Cutoff { d: T, r: T },
    /// Hermite bridge of interpolation order `r`.
    Hermite { r: usize },
    /// Error-function profile with scale `a = 2 sqrt(log(1/eps))`.
    Erf { a: T, eps: T },
    /// Quartic-kernel profile; `a` fixed by bisection on the tail mass.
    Quartic { a: T, eps: T },
}

/// An initialization profile with evaluator and analytic derivatives.
#[derive(Clone)]
pub struct InitProfile<T: Real> {
    kind: ProfileKind<T>,
    deriv_order_max: usize,
    beta_claim: Option<T>,
    p_star: T,
    moll: Option<Arc<Mollifier<T>>>,
    bridge: Option<Arc<HermiteBridge<T>>>,
    quartic: Option<Arc<QuarticKernel<T>>>,
}

/// `psi(p) = e^{-|p|}`: the original first-order initialization.
pub fn make_exp_abs<T: Real>() -> InitProfile<T> {
    InitProfile {
        kind: ProfileKind::ExpAbs,
        deriv_order_max: 0,
        beta_claim: None,
        p_star: T::zero(),
        moll: None,
        bridge: None,
        quartic: None,
    }
}

/// Cut-off profile `psi = zeta * e^{-p}` where `zeta` mollifies the
/// indicator of `(-1-d, r+d)` with kernel half-width `d`. Flat equal to
/// one on `(-1, r)`, supported in `[-1-2d, r+2d]`.
pub fn make_cutoff<T: Real>(r: T, d: T) -> Result<InitProfile<T>> {
    if r <= T::zero() {
        return Err(SchroError::invalid("cutoff: flat region endpoint r must be > 0"));
    }
    if d < T::one() {
        return Err(SchroError::invalid("cutoff: kernel half-width d must be >= 1"));
    }
    Ok(InitProfile {
        kind: ProfileKind::Cutoff { d, r },
        deriv_order_max: K_MAX,
        beta_claim: Some(T::of(0.5)),
        p_star: T::zero(),
        moll: Some(Arc::new(Mollifier::build(K_MAX)?)),
        bridge: None,
        quartic: None,
    })
}

/// Hermite-bridge profile of order `r` (`C^{r-1}` globally).
pub fn make_hermite<T: Real>(r: usize) -> Result<InitProfile<T>> {
    let bridge = HermiteBridge::build(r)?;
    Ok(InitProfile {
        kind: ProfileKind::Hermite { r },
        deriv_order_max: r.saturating_sub(1),
        beta_claim: None,
        p_star: T::zero(),
        moll: None,
        bridge: Some(Arc::new(bridge)),
        quartic: None,
    })
}

/// Error-function profile for accuracy target `eps`, with the scale
/// `a = 2 sqrt(log(1/eps))` that places the deviation threshold at
/// `p* = 1/2`.
pub fn make_erf<T: Real>(eps: T) -> Result<InitProfile<T>> {
    let e_inv = (-T::one()).exp();
    if eps <= T::zero() || eps >= e_inv {
        return Err(SchroError::invalid("erf profile requires 0 < eps < 1/e"));
    }
    let a = T::of(2.0) * (T::one() / eps).ln().sqrt();
    Ok(make_erf_with_scale(a, eps))
}

/// Error-function profile with an explicit scale (used by growth studies
/// that couple `a` to the derivative order instead of to `eps`).
pub fn make_erf_with_scale<T: Real>(a: T, eps: T) -> InitProfile<T> {
    InitProfile {
        kind: ProfileKind::Erf { a, eps },
        deriv_order_max: 64,
        beta_claim: Some(T::one()),
        p_star: T::of(0.5),
        moll: None,
        bridge: None,
        quartic: None,
    }
}

/// Quartic-kernel profile; the scale is found by bisection so the kernel
/// tail mass beyond `a/2` is at most `eps`.
pub fn make_quartic<T: Real>(eps: T) -> Result<InitProfile<T>> {
    let e_inv = (-T::one()).exp();
    if eps <= T::zero() || eps >= e_inv {
        return Err(SchroError::invalid("quartic profile requires 0 < eps < 1/e"));
    }
    let kernel = Arc::new(QuarticKernel::build()?);
    // phi(p) = chi(a p) + 1/2 with chi odd; |phi - 1| <= eps for p >= 1/2
    // iff tail(a/2) <= eps. tail is strictly decreasing.
    let tail = |a: T| kernel.tail_mass(a * T::of(0.5));
    let mut lo = T::one();
    let mut hi = T::of(2.0);
    if tail(lo) <= eps {
        hi = lo;
    } else {
        while tail(hi) > eps {
            hi = hi * T::of(2.0);
            if hi > T::of(1e4) {
                return Err(SchroError::numerical("quartic: bisection bracket failed"));
            }
        }
        for _ in 0..200 {
            let mid = T::of(0.5) * (lo + hi);
            if tail(mid) > eps {
                lo = mid;
            } else {
                hi = mid;
            }
            if (hi - lo) <= T::epsilon() * hi {
                break;
            }
        }
    }
    let a = hi;
    Ok(InitProfile {
        kind: ProfileKind::Quartic { a, eps },
        deriv_order_max: K_MAX,
        beta_claim: Some(T::one()),
        p_star: T::of(0.5),
        moll: None,
        bridge: None,
        quartic: Some(kernel),
    })
}

impl<T: Real> InitProfile<T> {
    pub fn kind(&self) -> &ProfileKind<T> {
        &self.kind
    }

    /// Largest derivative order with an analytic formula.
    pub fn deriv_order_max(&self) -> usize {
        self.deriv_order_max
    }

    /// Claimed Gevrey exponent `beta` (None for exp_abs and hermite).
    pub fn beta_claim(&self) -> Option<T> {
        self.beta_claim
    }

    /// Deviation threshold: `psi` is `eps`-close to `e^{-p}` for
    /// `p >= p_star`.
    pub fn p_star(&self) -> T {
        self.p_star
    }

    /// Left end of the support when compact (cut-off family only); the
    /// truncated domain must contain it.
    pub fn support_left(&self) -> Option<T> {
        match &self.kind {
            ProfileKind::Cutoff { d, .. } => Some(-T::one() - T::of(2.0) * *d),
            _ => None,
        }
    }

    /// Short config-style identifier.
    pub fn id(&self) -> String {
        match &self.kind {
            ProfileKind::ExpAbs => "exp_abs".into(),
            ProfileKind::Cutoff { d, .. } => format!("cutoff:d={}", d.as_f64()),
            ProfileKind::Hermite { r } => format!("hermite:r={r}"),
            ProfileKind::Erf { eps, .. } => format!("erf:eps={:e}", eps.as_f64()),
            ProfileKind::Quartic { eps, .. } => format!("quartic:eps={:e}", eps.as_f64()),
        }
    }

    /// `psi(p)`.
    pub fn eval(&self, p: T) -> T {
        match &self.kind {
            ProfileKind::ExpAbs => (-p.abs()).exp(),
            ProfileKind::Cutoff { d, r } => {
                let moll = self.moll.as_ref().expect("cutoff carries mollifier");
                let a1 = -T::one() - *d;
                let b1 = *r + *d;
                let zeta = moll.cumulative((p - a1) / *d).expect("mollifier cdf")
                    - moll.cumulative((p - b1) / *d).expect("mollifier cdf");
                zeta.max(T::zero()) * (-p).exp()
            }
            ProfileKind::Hermite { .. } => {
                let bridge = self.bridge.as_ref().expect("hermite carries bridge");
                if p > T::zero() {
                    (-p).exp()
                } else if p < -T::one() {
                    p.exp()
                } else {
                    bridge.eval(p)
                }
            }
            ProfileKind::Erf { a, .. } => {
                let x = *a * p;
                // phi = erfc(-x)/2; go to logs once the tail underflows.
                if x > T::of(-4.0) {
                    T::of(0.5) * special::erfc(-x) * (-p).exp()
                } else {
                    (ln_erfc(-x) - T::of(2.0).ln() - p).exp()
                }
            }
            ProfileKind::Quartic { a, .. } => {
                let kernel = self.quartic.as_ref().expect("quartic carries kernel");
                let x = *a * p;
                if x > T::of(-2.0) {
                    (T::of(0.5) + kernel.chi(x)) * (-p).exp()
                } else {
                    // phi = tail_mass(|x|) on the far-left side.
                    (kernel.ln_tail_mass(-x) - p).exp()
                }
            }
        }
    }

    /// `psi^(r)(p)` in signed log form. `r = 0` falls back to [`eval`].
    ///
    /// [`eval`]: InitProfile::eval
    pub fn deriv_log(&self, p: T, r: usize) -> Result<LogNum<T>> {
        if r == 0 {
            return Ok(LogNum::from_real(self.eval(p)));
        }
        if r > self.deriv_order_max {
            return Err(SchroError::invalid(format!(
                "profile {} supports derivatives up to order {}, requested {r}",
                self.id(),
                self.deriv_order_max
            )));
        }
        match &self.kind {
            ProfileKind::ExpAbs => unreachable!("deriv_order_max = 0"),
            ProfileKind::Hermite { .. } => {
                let bridge = self.bridge.as_ref().expect("hermite carries bridge");
                let v = if p > T::zero() {
                    let s = if r % 2 == 0 { T::one() } else { -T::one() };
                    s * (-p).exp()
                } else if p < -T::one() {
                    p.exp()
                } else {
                    bridge.eval_deriv(p, r)
                };
                Ok(LogNum::from_real(v))
            }
            ProfileKind::Cutoff { d, r: rflat } => {
                let moll = self.moll.as_ref().expect("cutoff carries mollifier");
                let a1 = -T::one() - *d;
                let b1 = *rflat + *d;
                // Leibniz over psi = zeta e^{-p} with
                // zeta^(k) = eta_d^(k-1)(p-a1) - eta_d^(k-1)(p-b1).
                let mut terms = Vec::with_capacity(r + 1);
                for k in 0..=r {
                    let zeta_k = if k == 0 {
                        LogNum::from_real(
                            moll.cumulative((p - a1) / *d)? - moll.cumulative((p - b1) / *d)?,
                        )
                    } else {
                        let scale = -T::of(k as f64) * d.ln();
                        let left = moll.eta_log((p - a1) / *d, k - 1)?.scale_exp(scale);
                        let right = moll.eta_log((p - b1) / *d, k - 1)?.scale_exp(scale);
                        left.sub(right)
                    };
                    if zeta_k.is_zero() {
                        continue;
                    }
                    let sign = if (r - k) % 2 == 0 { 1 } else { -1 };
                    let w = LogNum::new(sign, ln_binomial::<T>(r, k) - p);
                    terms.push(w.mul(zeta_k));
                }
                Ok(terms.into_iter().fold(LogNum::zero(), |a, b| a.add(b)))
            }
            ProfileKind::Erf { a, .. } => {
                let x = *a * p;
                let ln_a = a.ln();
                let mut terms = Vec::with_capacity(r + 1);
                // k = 0: phi(p) (-1)^r e^{-p}
                let ln_phi = if x > T::of(-4.0) {
                    (T::of(0.5) * special::erfc(-x)).ln()
                } else {
                    ln_erfc(-x) - T::of(2.0).ln()
                };
                let sign0 = if r % 2 == 0 { 1 } else { -1 };
                terms.push(LogNum::new(sign0, ln_phi - p));
                // k >= 1: C(r,k) (a^k/2) erf^(k)(x) (-1)^{r-k} e^{-p},
                // erf^(k)(x) = (2/sqrt(pi)) (-1)^{k-1} H_{k-1}(x) e^{-x^2}.
                let ln_two_over_sqrt_pi = (T::of(2.0) / T::PI().sqrt()).ln();
                for k in 1..=r {
                    let h = special::hermite_h_log(k - 1, x);
                    if h.is_zero() {
                        continue;
                    }
                    let parity = if (r - k + k - 1) % 2 == 0 { 1 } else { -1 };
                    let ln_mag = ln_binomial::<T>(r, k)
                        + T::of(k as f64) * ln_a
                        - T::of(2.0).ln()
                        + ln_two_over_sqrt_pi
                        + h.ln_abs
                        - x * x
                        - p;
                    terms.push(LogNum::new(parity * h.sign, ln_mag));
                }
                Ok(terms.into_iter().fold(LogNum::zero(), |acc, t| acc.add(t)))
            }
            ProfileKind::Quartic { a, .. } => {
                let kernel = self.quartic.as_ref().expect("quartic carries kernel");
                let x = *a * p;
                let ln_a = a.ln();
                let mut terms = Vec::with_capacity(r + 1);
                let ln_phi = if x > T::of(-2.0) {
                    (T::of(0.5) + kernel.chi(x)).ln()
                } else {
                    kernel.ln_tail_mass(-x)
                };
                let sign0 = if r % 2 == 0 { 1 } else { -1 };
                terms.push(LogNum::new(sign0, ln_phi - p));
                for k in 1..=r {
                    let g = kernel.g_log(k - 1, x);
                    if g.is_zero() {
                        continue;
                    }
                    let parity = if (r - k) % 2 == 0 { 1 } else { -1 };
                    let ln_mag = ln_binomial::<T>(r, k) + T::of(k as f64) * ln_a
                        - kernel.ln_norm
                        + g.ln_abs
                        - x * x * x * x
                        - p;
                    terms.push(LogNum::new(parity * g.sign, ln_mag));
                }
                Ok(terms.into_iter().fold(LogNum::zero(), |acc, t| acc.add(t)))
            }
        }
    }

    /// Plain-scalar derivative; may overflow for extreme orders, in which
    /// case use [`deriv_log`](InitProfile::deriv_log).
    pub fn deriv(&self, p: T, r: usize) -> Result<T> {
        Ok(self.deriv_log(p, r)?.to_real())
    }
}

/// `ln ||psi^(r)||_{L2(lo, hi)}` by composite Gauss-Legendre panels in
/// log space. Panels are refined near the origin where the smooth-step
/// transition concentrates the derivative mass.
pub fn deriv_l2_norm_ln<T: Real>(
    profile: &InitProfile<T>,
    r: usize,
    lo: T,
    hi: T,
) -> Result<T> {
    if r > profile.deriv_order_max() {
        return Err(SchroError::invalid(format!(
            "profile {} has no analytic derivative of order {r}",
            profile.id()
        )));
    }
    let (nodes, weights) = quad::gauss_legendre::<T>(16);
    let mut panels: Vec<(T, T)> = Vec::new();
    let dense_lo = lo.max(-T::of(4.0));
    let dense_hi = hi.min(T::of(4.0));
    push_panels(&mut panels, lo, dense_lo, 64);
    push_panels(&mut panels, dense_lo, dense_hi, 512);
    push_panels(&mut panels, dense_hi, hi, 128);

    let mut acc = LogNum::<T>::zero();
    for (a, b) in panels {
        if b <= a {
            continue;
        }
        let half = T::of(0.5) * (b - a);
        let mid = T::of(0.5) * (a + b);
        for (x, w) in nodes.iter().zip(weights.iter()) {
            let p = mid + half * *x;
            let v = profile.deriv_log(p, r)?;
            acc = acc.add(v.sq().scale_exp((*w * half).ln()));
        }
    }
    if acc.is_zero() {
        return Err(SchroError::numerical("derivative norm is identically zero"));
    }
    Ok(T::of(0.5) * acc.ln_abs)
}

/// `||psi^(r)||_{L2}` as a plain scalar (may overflow for large `r`).
pub fn deriv_l2_norm<T: Real>(profile: &InitProfile<T>, r: usize, lo: T, hi: T) -> Result<T> {
    Ok(deriv_l2_norm_ln(profile, r, lo, hi)?.exp())
}

fn push_panels<T: Real>(panels: &mut Vec<(T, T)>, a: T, b: T, n: usize) {
    if b <= a {
        return;
    }
    let step = (b - a) / T::of(n as f64);
    for i in 0..n {
        let lo = a + step * T::of(i as f64);
        panels.push((lo, lo + step));
    }
}

/// Tabulated `exp(-t^4)` kernel: normalization, antiderivative and
/// derivative polynomials `G_j` with `d^j/dx^j e^{-x^4} = G_j(x) e^{-x^4}`.
pub struct QuarticKernel<T> {
    /// `int_R exp(-t^4) dt = 2 Gamma(5/4)`.
    pub norm: T,
    pub ln_norm: T,
    g_coeffs: Vec<Vec<T>>,
}

impl<T: Real> QuarticKernel<T> {
    pub fn build() -> Result<Self> {
        let half = quad::adaptive(|t: T| (-t * t * t * t).exp(), T::zero(), T::of(4.0), T::of(1e-14))?;
        let norm = T::of(2.0) * half;
        // G_0 = 1, G_{j+1} = G_j' - 4 x^3 G_j.
        let mut g_coeffs: Vec<Vec<T>> = vec![vec![T::one()]];
        for j in 0..K_MAX {
            let g = &g_coeffs[j];
            let mut next = vec![T::zero(); g.len() + 3];
            for (i, &c) in g.iter().enumerate() {
                if i >= 1 {
                    next[i - 1] += c * T::of(i as f64);
                }
                next[i + 3] -= T::of(4.0) * c;
            }
            g_coeffs.push(next);
        }
        Ok(QuarticKernel { norm, ln_norm: norm.ln(), g_coeffs })
    }

    /// Odd antiderivative `chi(x) = norm^{-1} int_0^x exp(-t^4) dt`.
    pub fn chi(&self, x: T) -> T {
        let cap = T::of(4.0);
        let xa = x.abs().min(cap);
        let v = quad::adaptive(|t: T| (-t * t * t * t).exp(), T::zero(), xa, T::of(1e-13))
            .unwrap_or(T::zero())
            / self.norm;
        if x >= T::zero() {
            v
        } else {
            -v
        }
    }

    /// Tail mass `1/2 - chi(x)` for `x >= 0`.
    pub fn tail_mass(&self, x: T) -> T {
        if x <= T::zero() {
            return T::of(0.5) - self.chi(x);
        }
        if x < T::of(3.5) {
            let v = quad::adaptive(
                |t: T| (-t * t * t * t).exp(),
                x,
                x + T::of(4.0),
                T::of(1e-15),
            )
            .unwrap_or(T::zero())
                / self.norm;
            return v;
        }
        self.ln_tail_mass(x).exp()
    }

    /// `ln(1/2 - chi(x))` for large `x >= 0` via the two-term asymptotic
    /// `int_x^inf e^{-t^4} dt = e^{-x^4}/(4x^3) (1 - 3/(4x^4) + ...)`.
    pub fn ln_tail_mass(&self, x: T) -> T {
        if x < T::of(3.5) {
            return self.tail_mass(x).ln();
        }
        let x4 = x * x * x * x;
        let corr = T::one() - T::of(0.75) / x4;
        -x4 - (T::of(4.0) * x * x * x).ln() + corr.ln() - self.ln_norm
    }

    /// `G_j(x)` in signed log form. Beyond |x| = 6 the `exp(-x^4)` factor
    /// every caller multiplies by is below e^{-1200}, so the term is
    /// reported as zero instead of risking overflow in the plain Horner
    /// evaluation.
    pub fn g_log(&self, j: usize, x: T) -> LogNum<T> {
        if x.abs() >= T::of(6.0) {
            return LogNum::zero();
        }
        let coeffs = &self.g_coeffs[j];
        let mut acc = T::zero();
        for &c in coeffs.iter().rev() {
            acc = acc * x + c;
        }
        LogNum::from_real(acc)
    }
}

/// Largest deviation `max |psi(p) - e^{-p}|` over a sampled interval.
pub fn max_deviation_from_exp<T: Real>(profile: &InitProfile<T>, lo: T, hi: T, samples: usize) -> T {
    let mut worst = T::zero();
    for i in 0..samples {
        let p = lo + (hi - lo) * T::of(i as f64) / T::of((samples - 1) as f64);
        let dev = (profile.eval(p) - (-p).exp()).abs();
        worst = worst.max(dev);
    }
    worst
}
