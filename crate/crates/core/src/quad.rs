//! Quadrature kernels: adaptive Gauss–Kronrod and fixed Gauss–Legendre.
//!
//! The integrands in this crate (mollifier kernels, erf/quartic tails,
//! squared profile derivatives) are smooth inside each panel, so a 7–15
//! Gauss–Kronrod pair with interval bisection is accurate and cheap.

use crate::error::{Result, SchroError};
use crate::float::Real;

/// 15-point Kronrod abscissae on [-1, 1] (nonnegative half; symmetric).
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.0,
];

/// Kronrod weights matching `XGK`.
const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];

/// 7-point Gauss weights for the odd-indexed Kronrod abscissae.
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

/// One Gauss–Kronrod evaluation on [a, b]: returns (I15, |I15 - I7|).
fn gk15<T: Real>(f: &impl Fn(T) -> T, a: T, b: T) -> (T, T) {
    let half = T::of(0.5) * (b - a);
    let mid = T::of(0.5) * (a + b);
    let mut ik = T::zero();
    let mut ig = T::zero();
    for (j, (&x, &wk)) in XGK.iter().zip(WGK.iter()).enumerate() {
        let xs = T::of(x) * half;
        let (fl, fr) = (f(mid - xs), f(mid + xs));
        let pair = if j == 7 { f(mid) } else { fl + fr };
        ik += T::of(wk) * pair;
        if j % 2 == 1 {
            ig += T::of(WG[j / 2]) * pair;
        }
    }
    (ik * half, ((ik - ig) * half).abs())
}

/// Adaptive Gauss–Kronrod integration of `f` over [a, b] to absolute
/// tolerance `tol`. Fails if the interval stack exhausts the subdivision
/// budget before the error estimate drops below `tol`.
pub fn adaptive<T: Real>(f: impl Fn(T) -> T, a: T, b: T, tol: T) -> Result<T> {
    if a == b {
        return Ok(T::zero());
    }
    let span = (b - a).abs();
    let mut stack = vec![(a, b, 0u32)];
    let mut total = T::zero();
    let mut evals = 0usize;
    while let Some((lo, hi, depth)) = stack.pop() {
        let (val, err) = gk15(&f, lo, hi);
        evals += 15;
        // Budget the tolerance by panel width; the epsilon term accepts
        // panels whose error estimate is pure floating-point noise.
        let width = (hi - lo).abs();
        let budget = tol * (width / span) + T::epsilon() * T::of(64.0) * val.abs();
        // Panels at the coordinate resolution limit carry only roundoff
        // noise; their contribution is below any meaningful tolerance.
        if err <= budget || width <= span * T::of(1e-12) {
            total += val;
        } else if depth >= 44 || evals > 4_000_000 {
            return Err(SchroError::numerical(format!(
                "adaptive quadrature did not converge on [{lo}, {hi}] (err {err:e})"
            )));
        } else {
            let mid = T::of(0.5) * (lo + hi);
            stack.push((lo, mid, depth + 1));
            stack.push((mid, hi, depth + 1));
        }
    }
    Ok(total)
}

/// Gauss–Legendre nodes and weights on [-1, 1], computed by Newton
/// iteration on the Legendre recurrence. Good to machine precision for
/// the orders used here (n <= 64).
pub fn gauss_legendre<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    let mut nodes = vec![T::zero(); n];
    let mut weights = vec![T::zero(); n];
    let nf = T::of(n as f64);
    for i in 0..(n + 1) / 2 {
        // Chebyshev-based initial guess.
        let guess = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut x = T::of(guess);
        let mut dp = T::one();
        for _ in 0..100 {
            // Evaluate P_n and P_n' via the three-term recurrence.
            let mut p0 = T::one();
            let mut p1 = x;
            for k in 2..=n {
                let kf = T::of(k as f64);
                let p2 = ((T::of(2.0) * kf - T::one()) * x * p1 - (kf - T::one()) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (x * p1 - p0) / (x * x - T::one());
            let dx = p1 / dp;
            x = x - dx;
            if dx.abs() <= T::epsilon() * T::of(4.0) {
                break;
            }
        }
        let w = T::of(2.0) / ((T::one() - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Fixed-order Gauss–Legendre integral of `f` over [a, b].
pub fn gauss_legendre_integrate<T: Real>(f: impl Fn(T) -> T, a: T, b: T, n: usize) -> T {
    let (x, w) = gauss_legendre::<T>(n);
    let half = T::of(0.5) * (b - a);
    let mid = T::of(0.5) * (a + b);
    let mut acc = T::zero();
    for (xi, wi) in x.iter().zip(w.iter()) {
        acc += *wi * f(mid + half * *xi);
    }
    acc * half
}
