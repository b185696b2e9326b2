//! The warped-phase pipeline core: truncated auxiliary domain, Fourier
//! transforms in `p`, exact per-mode unitary evolution, recovery of the
//! solution from the warped field, and measurement statistics.
//!
//! After the transformation `w(t, p) = e^{-p} u_f(t)` (extended by the
//! profile `psi` for `p < 0`), the field satisfies
//! `w_t = -H1 w_p + i H2 w`, so each Fourier mode `mu` evolves by the
//! unitary `V(T) = exp(-i (mu H1 - H2) T)`. The solution is read back as
//! `u_f(T) = e^{p} w(T, p)` at grid points just above the wavefront mark
//! `p_diamond = lambda_max^+(H1) T`.

use num_complex::Complex;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{Result, SchroError};
use crate::float::{Cplx, Real};
use crate::linalg::{self, adjoint, expm, eye, CMat, CVec};
use crate::profiles::InitProfile;
use crate::system::{HermitianSplit, SpectralBounds};

/// Truncated auxiliary interval `[-L, R]` with a uniform power-of-two grid.
#[derive(Clone, Debug)]
pub struct WarpedDomain<T> {
    left: T,
    right: T,
    n_p: usize,
    dp: T,
    /// Grid index of `p = 0`.
    zero_index: usize,
}

impl<T: Real> WarpedDomain<T> {
    /// Builds the grid, nudging `L` up to the nearest multiple of the
    /// cell width so that `p = 0` lies exactly on a node. The total
    /// width is preserved.
    pub fn new(left: T, right: T, n_p: usize) -> Result<Self> {
        if left <= T::zero() || right <= T::zero() {
            return Err(SchroError::invalid("domain extents must be positive"));
        }
        if n_p < 4 || !n_p.is_power_of_two() {
            return Err(SchroError::invalid(format!(
                "grid size must be a power of two >= 4, got {n_p}"
            )));
        }
        let width = left + right;
        let dp = width / T::of(n_p as f64);
        let k0 = (left / dp - T::of(1e-9)).ceil();
        let k0u = k0.to_usize().unwrap_or(0);
        if k0u == 0 || k0u >= n_p {
            return Err(SchroError::invalid("domain does not bracket p = 0"));
        }
        let left_adj = k0 * dp;
        Ok(WarpedDomain {
            left: left_adj,
            right: width - left_adj,
            n_p,
            dp,
            zero_index: k0u,
        })
    }

    pub fn left(&self) -> T {
        self.left
    }

    pub fn right(&self) -> T {
        self.right
    }

    pub fn n_p(&self) -> usize {
        self.n_p
    }

    pub fn dp(&self) -> T {
        self.dp
    }

    pub fn zero_index(&self) -> usize {
        self.zero_index
    }

    pub fn width(&self) -> T {
        self.left + self.right
    }

    /// `p_k = -L + k dp`.
    pub fn grid_point(&self, k: usize) -> T {
        if k == self.zero_index {
            return T::zero();
        }
        -self.left + T::of(k as f64) * self.dp
    }

    /// Centered Fourier mode `mu_l = 2 pi (l - n/2) / (L + R)`.
    pub fn mode(&self, l: usize) -> T {
        T::of(2.0) * T::PI() / self.width() * (T::of(l as f64) - T::of(self.n_p as f64) / T::of(2.0))
    }

    /// Largest mode magnitude, `n pi / (L + R)`.
    pub fn mu_max(&self) -> T {
        T::of(self.n_p as f64) * T::PI() / self.width()
    }

    pub fn grid(&self) -> Vec<T> {
        (0..self.n_p).map(|k| self.grid_point(k)).collect()
    }
}

/// Truncation rule: `L = R = lambda_abs T + log(1/eps)`, so the warped
/// field decays to about `eps` at the boundary for profiles dominated by
/// `e^{-|p|}`.
pub fn choose_domain<T: Real>(bounds: &SpectralBounds<T>, horizon: T, eps: T) -> Result<(T, T)> {
    if eps <= T::zero() || eps >= T::one() {
        return Err(SchroError::invalid("tolerance must lie in (0, 1)"));
    }
    let l = bounds.lambda_abs * horizon + (T::one() / eps).ln();
    Ok((l, l))
}

/// Smallest grid floor.
pub const MIN_NP: usize = 16;

/// Resolution rule. For smooth profiles, pick `r ~ ceil(log(1/eps))`
/// (capped by the profile's analytic derivative order), set
/// `mu_target = pi (1/eps)^{1/r} ||psi^(r)||^{1/r}` and return the next
/// power of two whose largest mode reaches it. The kinked `exp_abs`
/// profile is first order, so its rule is `n_p ~ 1/eps`.
pub fn choose_resolution<T: Real>(
    profile: &InitProfile<T>,
    eps: T,
    left: T,
    right: T,
) -> Result<usize> {
    if eps <= T::zero() || eps > T::one() {
        return Err(SchroError::invalid("tolerance must lie in (0, 1]"));
    }
    if profile.deriv_order_max() == 0 {
        let target = T::one() / eps;
        return Ok(next_pow2_at_least(target, MIN_NP));
    }
    let r_want = (T::one() / eps).ln().ceil().to_usize().unwrap_or(1).max(1);
    let r = r_want.min(profile.deriv_order_max());
    if r_want > profile.deriv_order_max() {
        return Err(SchroError::invalid(format!(
            "profile {} supports derivatives to order {}, resolution rule wants r = {r_want}",
            profile.id(),
            profile.deriv_order_max()
        )));
    }
    let ln_norm = crate::profiles::deriv_l2_norm_ln(profile, r, -left, right)?;
    let rf = T::of(r as f64);
    let mu_target = T::PI() * ((T::one() / eps).ln() / rf + ln_norm / rf).exp();
    let n_target = mu_target * (left + right) / T::PI();
    Ok(next_pow2_at_least(n_target, MIN_NP))
}

fn next_pow2_at_least<T: Real>(x: T, floor: usize) -> usize {
    let mut n = floor;
    while T::of(n as f64) < x && n < (1 << 30) {
        n *= 2;
    }
    n
}

/// Which space the state values live in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Representation {
    Physical,
    Fourier,
}

/// The discretized warped field: row `k` holds `w(t, p_k)` (physical) or
/// the coefficient of mode `mu_k` (Fourier).
#[derive(Clone)]
pub struct WarpedState<T: Real> {
    pub values: CMat<T>,
    pub rep: Representation,
    pub time: T,
}

impl<T: Real> WarpedState<T> {
    /// Frobenius norm of the state.
    pub fn norm(&self) -> T {
        self.values.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt()
    }
}

/// `W(0) = psi tensor u_I`: row `k` is `psi(p_k) u_I`.
pub fn initialize<T: Real>(
    profile: &InitProfile<T>,
    domain: &WarpedDomain<T>,
    u_i: &CVec<T>,
) -> WarpedState<T> {
    let n = domain.n_p();
    let m = u_i.len();
    let mut values = CMat::<T>::zeros((n, m));
    for k in 0..n {
        let w = Complex::new(profile.eval(domain.grid_point(k)), T::zero());
        for j in 0..m {
            values[(k, j)] = w * u_i[j];
        }
    }
    WarpedState { values, rep: Representation::Physical, time: T::zero() }
}

/// Sampled profile values on the grid.
pub fn profile_samples<T: Real>(profile: &InitProfile<T>, domain: &WarpedDomain<T>) -> Vec<T> {
    (0..domain.n_p()).map(|k| profile.eval(domain.grid_point(k))).collect()
}

/// Columnwise discrete Fourier transform with the centered-mode phase
/// convention `w_k = sum_l w~_l e^{i mu_l (p_k + L)}`. The centered modes
/// turn into a standard FFT after twisting rows by `(-1)^k`.
pub fn to_fourier<T: Real>(state: &WarpedState<T>, domain: &WarpedDomain<T>) -> Result<WarpedState<T>> {
    if state.rep != Representation::Physical {
        return Err(SchroError::invalid("to_fourier expects a physical-space state"));
    }
    Ok(WarpedState {
        values: dft_columns(&state.values, domain, true)?,
        rep: Representation::Fourier,
        time: state.time,
    })
}

/// Inverse of [`to_fourier`].
pub fn from_fourier<T: Real>(
    state: &WarpedState<T>,
    domain: &WarpedDomain<T>,
) -> Result<WarpedState<T>> {
    if state.rep != Representation::Fourier {
        return Err(SchroError::invalid("from_fourier expects a Fourier-space state"));
    }
    Ok(WarpedState {
        values: dft_columns(&state.values, domain, false)?,
        rep: Representation::Physical,
        time: state.time,
    })
}

fn dft_columns<T: Real>(values: &CMat<T>, domain: &WarpedDomain<T>, forward: bool) -> Result<CMat<T>> {
    let n = values.nrows();
    if n != domain.n_p() {
        return Err(SchroError::invalid("state/domain grid size mismatch"));
    }
    let m = values.ncols();
    let mut planner = FftPlanner::<T>::new();
    let fft = if forward { planner.plan_fft_forward(n) } else { planner.plan_fft_inverse(n) };
    let mut out = values.clone();
    let inv_n = T::one() / T::of(n as f64);
    let mut buf = vec![Complex::new(T::zero(), T::zero()); n];
    for j in 0..m {
        if forward {
            // w~_l = (1/n) sum_k w_k (-1)^k e^{-2 pi i k l / n}
            for k in 0..n {
                let sign = if k % 2 == 0 { T::one() } else { -T::one() };
                buf[k] = values[(k, j)] * Complex::new(sign, T::zero());
            }
            fft.process(&mut buf);
            for l in 0..n {
                out[(l, j)] = buf[l] * Complex::new(inv_n, T::zero());
            }
        } else {
            // w_k = (-1)^k sum_l w~_l e^{+2 pi i k l / n}
            for l in 0..n {
                buf[l] = values[(l, j)];
            }
            fft.process(&mut buf);
            for k in 0..n {
                let sign = if k % 2 == 0 { T::one() } else { -T::one() };
                out[(k, j)] = buf[k] * Complex::new(sign, T::zero());
            }
        }
    }
    Ok(out)
}

/// Per-mode propagator `V(t) = exp(-i (mu H1 - H2) t)`.
pub fn mode_propagator<T: Real>(h1: &CMat<T>, h2: &CMat<T>, mu: T, t: T) -> Result<CMat<T>> {
    let m = h1.nrows();
    let minus_i_t = Complex::new(T::zero(), -t);
    let mut gen = CMat::<T>::zeros((m, m));
    for i in 0..m {
        for j in 0..m {
            let h = h1[(i, j)] * Complex::new(mu, T::zero()) - h2[(i, j)];
            gen[(i, j)] = h * minus_i_t;
        }
    }
    expm(&gen)
}

/// True when every off-diagonal entry is exactly zero (structural check,
/// no tolerance) — enables the elementwise propagator fast path.
fn is_exactly_diagonal<T: Real>(m: &CMat<T>) -> bool {
    let n = m.nrows();
    for i in 0..n {
        for j in 0..n {
            if i != j && m[(i, j)] != Complex::new(T::zero(), T::zero()) {
                return false;
            }
        }
    }
    true
}

/// Evolves a Fourier-space state under a time-independent split by the
/// exact per-mode unitaries. Each propagator's unitarity is verified to
/// `1e-12` before use.
pub fn evolve_time_independent<T: Real>(
    state: &WarpedState<T>,
    split: &HermitianSplit<T>,
    domain: &WarpedDomain<T>,
    t: T,
) -> Result<WarpedState<T>> {
    if state.rep != Representation::Fourier {
        return Err(SchroError::invalid("evolve expects a Fourier-space state"));
    }
    if !split.is_constant() {
        return Err(SchroError::invalid(
            "evolve_time_independent requires a constant split; use the lifted evolution",
        ));
    }
    let h1 = split.h1.at(T::zero());
    let h2 = split.h2.at(T::zero());
    let m = h1.nrows();
    if m != state.values.ncols() {
        return Err(SchroError::invalid("split/state dimension mismatch"));
    }
    let diagonal = is_exactly_diagonal(&h1) && is_exactly_diagonal(&h2);
    let mut out = state.values.clone();
    let n = domain.n_p();
    let slice = out
        .as_slice_mut()
        .ok_or_else(|| SchroError::numerical("state buffer not contiguous"))?;
    let failures: Vec<String> = slice
        .par_chunks_mut(m)
        .enumerate()
        .map(|(l, row)| -> std::result::Result<(), String> {
            let mu = domain.mode(l);
            if diagonal {
                for (j, value) in row.iter_mut().enumerate() {
                    let phase = -(mu * h1[(j, j)].re - h2[(j, j)].re) * t;
                    let rot = Complex::new(phase.cos(), phase.sin());
                    *value = *value * rot;
                }
                return Ok(());
            }
            let v = mode_propagator(&h1, &h2, mu, t).map_err(|e| e.to_string())?;
            let gram = adjoint(&v).dot(&v);
            let dev = linalg::max_abs(&(&gram - &eye::<T>(m)));
            // The squaring stage loses ~eps per doubling, so the
            // achievable defect grows with the generator norm; 1e-12 is
            // the gate for O(1) norms.
            let norm_scale = (mu.abs() * t.abs() + T::one()) * T::epsilon() * T::of(8.0);
            if dev > T::of(1e-12) + norm_scale {
                return Err(format!("mode {l}: propagator unitarity defect {dev:e}"));
            }
            let mut tmp = vec![Complex::new(T::zero(), T::zero()); m];
            for i in 0..m {
                let mut acc = Complex::new(T::zero(), T::zero());
                for j in 0..m {
                    acc = acc + v[(i, j)] * row[j];
                }
                tmp[i] = acc;
            }
            row.copy_from_slice(&tmp);
            Ok(())
        })
        .filter_map(|r| r.err())
        .collect();
    if let Some(msg) = failures.first() {
        return Err(SchroError::numerical(msg.clone()));
    }
    debug_assert_eq!(slice.len(), n * m);
    Ok(WarpedState { values: out, rep: Representation::Fourier, time: state.time + t })
}

/// Indices eligible for recovery and the preferred read-back node.
#[derive(Clone, Debug)]
pub struct RecoveryWindow<T> {
    /// `lambda_max^+(H1) T`: the wavefront mark below which recovery is
    /// invalid.
    pub p_diamond: T,
    /// Profile deviation threshold (0 for exact profiles, 1/2 for the
    /// smoothed step families).
    pub p_star: T,
    /// Grid indices `k` with `p_star + p_diamond < p_k < R - lambda^- T`
    /// and `p_k <= p_ub`.
    pub k_set: Vec<usize>,
    /// The chosen read-back index.
    pub k_star: usize,
}

impl<T: Real> RecoveryWindow<T> {
    /// Builds the window. The upper cap keeps `p_k = O(1)` so the factor
    /// `e^{p_k}` does not amplify noise; the read-back node sits two
    /// cells above the wavefront mark.
    pub fn build(
        domain: &WarpedDomain<T>,
        bounds: &SpectralBounds<T>,
        horizon: T,
        p_star: T,
    ) -> Result<Self> {
        let p_diamond = bounds.lambda_plus * horizon;
        let p_ub = T::one().max(p_diamond + T::one());
        let lower = p_star + p_diamond;
        let upper = (domain.right() - bounds.lambda_minus * horizon).min(p_ub);
        let mut k_set = Vec::new();
        for k in 0..domain.n_p() {
            let p = domain.grid_point(k);
            if p > lower && p <= upper {
                k_set.push(k);
            }
        }
        if k_set.is_empty() {
            return Err(SchroError::config(format!(
                "empty recovery window: no grid point in ({lower}, {upper}]; \
                 increase the resolution or the domain"
            )));
        }
        let threshold = p_star.max(p_diamond) + T::of(2.0) * domain.dp();
        let k_star = k_set
            .iter()
            .copied()
            .find(|&k| domain.grid_point(k) >= threshold)
            .unwrap_or(*k_set.last().expect("nonempty"));
        Ok(RecoveryWindow { p_diamond, p_star, k_set, k_star })
    }
}

/// Reads `u_f(T) = e^{p} w(T, p)` at the chosen node (or averaged over
/// the window) and extracts the leading `n_orig` components.
pub fn recover<T: Real>(
    state: &WarpedState<T>,
    domain: &WarpedDomain<T>,
    window: &RecoveryWindow<T>,
    n_orig: usize,
    average: bool,
) -> Result<(CVec<T>, CVec<T>)> {
    if state.rep != Representation::Physical {
        return Err(SchroError::invalid("recover expects a physical-space state"));
    }
    let m = state.values.ncols();
    let mut u_f = CVec::<T>::zeros(m);
    if average {
        for &k in &window.k_set {
            let w = Complex::new(domain.grid_point(k).exp(), T::zero());
            for j in 0..m {
                u_f[j] = u_f[j] + state.values[(k, j)] * w;
            }
        }
        let inv = Complex::new(T::one() / T::of(window.k_set.len() as f64), T::zero());
        u_f.mapv_inplace(|z| z * inv);
    } else {
        let k = window.k_star;
        let w = Complex::new(domain.grid_point(k).exp(), T::zero());
        for j in 0..m {
            u_f[j] = state.values[(k, j)] * w;
        }
    }
    let u = u_f.slice(ndarray::s![..n_orig]).to_owned();
    Ok((u_f, u))
}

/// Measurement statistics for reading the solution out of the warped
/// register.
#[derive(Clone, Copy, Debug)]
pub struct SuccessProbability<T> {
    /// Probability that a computational-basis measurement of the `p`
    /// register lands in the recovery window.
    pub pr_w: T,
    /// Probability including the projection onto the original components.
    pub pr_u: T,
    /// Amplitude-amplification repetition count, `ceil(pr_u^{-1/2})`.
    pub amplification_g: u64,
    /// Profile-mass ratio over the window (the `C_e0^2 / C_e^2` factor).
    pub c_ratio: T,
}

/// Computes the window-hit probability from the final physical state and
/// the initial norm `||W(0)||^2 = sum_k psi(p_k)^2 ||u_I||^2`.
pub fn success_probability<T: Real>(
    state: &WarpedState<T>,
    window: &RecoveryWindow<T>,
    psi_samples: &[T],
    u_i: &CVec<T>,
    u_f: &CVec<T>,
    u: &CVec<T>,
) -> Result<SuccessProbability<T>> {
    if state.rep != Representation::Physical {
        return Err(SchroError::invalid("success_probability expects physical space"));
    }
    let psi_sq_total = psi_samples.iter().fold(T::zero(), |acc, &v| acc + v * v);
    let u_i_norm_sq = u_i.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr());
    let w0_sq = psi_sq_total * u_i_norm_sq;
    if w0_sq <= T::zero() {
        return Err(SchroError::invalid("initial warped state has zero norm"));
    }
    let mut window_sq = T::zero();
    let mut psi_sq_window = T::zero();
    for &k in &window.k_set {
        for j in 0..state.values.ncols() {
            window_sq += state.values[(k, j)].norm_sqr();
        }
        psi_sq_window += psi_samples[k] * psi_samples[k];
    }
    let pr_w = window_sq / w0_sq;
    let uf_sq = u_f.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr());
    let u_sq = u.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr());
    let pr_u = if uf_sq > T::zero() { pr_w * u_sq / uf_sq } else { T::zero() };
    let amplification_g = if pr_u > T::zero() {
        (T::one() / pr_u.sqrt()).ceil().to_u64().unwrap_or(u64::MAX)
    } else {
        u64::MAX
    };
    Ok(SuccessProbability { pr_w, pr_u, amplification_g, c_ratio: psi_sq_window / psi_sq_total })
}

/// Closed-form centered DFT coefficients of the sampled `e^{-|p|}`
/// profile: two geometric sums around the kink node. Exact up to
/// rounding for any grid size, with all intermediate magnitudes <= 1.
pub fn exp_abs_dft_coeff<T: Real>(domain: &WarpedDomain<T>, l: usize) -> Cplx<T> {
    let n = domain.n_p() as i64;
    let k0 = domain.zero_index() as i64;
    let dp = domain.dp();
    let shift = l as i64 - n / 2;
    // omega = e^{-i mu_l dp} = e^{-2 pi i shift / n}; exact angle per power
    // via integer reduction mod n.
    let unit_angle = |num: i64| -> Cplx<T> {
        let r = num.rem_euclid(n);
        let ang = -T::of(2.0) * T::PI() * T::of(r as f64) / T::of(n as f64);
        Complex::new(ang.cos(), ang.sin())
    };
    let omega_k0 = unit_angle(shift * k0);
    let decay = (-dp).exp();
    // left branch: sum_{j=0}^{k0} (e^{-dp} omega^{-1})^j
    let q_left = Complex::new(decay, T::zero()) * unit_angle(-shift);
    let s_left = geometric_sum(q_left, (k0 + 1) as usize);
    // right branch: sum_{j=0}^{n-k0-1} (e^{-dp} omega)^j
    let q_right = Complex::new(decay, T::zero()) * unit_angle(shift);
    let s_right = geometric_sum(q_right, (n - k0) as usize);
    let one = Complex::new(T::one(), T::zero());
    let total = omega_k0 * (s_left + s_right - one);
    total * Complex::new(T::one() / T::of(n as f64), T::zero())
}

/// `sum_{j=0}^{count-1} q^j` with |q| <= 1.
fn geometric_sum<T: Real>(q: Cplx<T>, count: usize) -> Cplx<T> {
    let one = Complex::new(T::one(), T::zero());
    let denom = one - q;
    if denom.norm() < T::of(1e-14) {
        return Complex::new(T::of(count as f64), T::zero());
    }
    let q_pow = complex_powi(q, count);
    (one - q_pow) / denom
}

fn complex_powi<T: Real>(q: Cplx<T>, mut e: usize) -> Cplx<T> {
    let mut base = q;
    let mut acc = Complex::new(T::one(), T::zero());
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base;
        }
        base = base * base;
        e >>= 1;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::{make_erf, make_exp_abs};
    use crate::system::{
        diag_matrix, hermitian_split, homogenize, spectral_bounds, DynamicalSystem, MatrixFn,
        VectorFn,
    };
    use ndarray::array;
    use num_complex::Complex64;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn domain_grid_identity() {
        let d = WarpedDomain::new(10.0f64, 10.0, 128).unwrap();
        // dp * mu_max = pi exactly
        assert!((d.dp() * d.mu_max() - std::f64::consts::PI).abs() < 1e-14);
        // mu at n/2 is zero
        assert_eq!(d.mode(64), 0.0);
        // grid contains p = 0 exactly
        assert_eq!(d.grid_point(d.zero_index()), 0.0);
    }

    #[test]
    fn asymmetric_domain_keeps_zero_on_grid() {
        let d = WarpedDomain::new(7.3f64, 12.9, 256).unwrap();
        assert_eq!(d.grid_point(d.zero_index()), 0.0);
        assert!((d.width() - 20.2).abs() < 1e-12);
        assert!(d.left() >= 7.3 - 1e-9);
    }

    #[test]
    fn choose_domain_examples() {
        let b = SpectralBounds::<f64> { lambda_plus: 0.25, lambda_minus: 0.5, lambda_abs: 0.5 };
        let (l, _) = choose_domain(&b, 1.0, 1e-6).unwrap();
        assert!((l - 14.315_510_557_964_274).abs() < 1e-9);
        let b0 = SpectralBounds { lambda_plus: 0.0, lambda_minus: 0.0, lambda_abs: 0.0 };
        let (l0, r0) = choose_domain(&b0, 1.0, (-10.0f64).exp()).unwrap();
        assert!((l0 - 10.0).abs() < 1e-12 && (r0 - 10.0).abs() < 1e-12);
        let (l3, _) = choose_domain(&b, 1.0, 1e-3).unwrap();
        assert!((l3 - 7.407_755_278_982_137).abs() < 1e-9);
    }

    #[test]
    fn resolution_rule_exp_abs_doubles() {
        let psi = make_exp_abs::<f64>();
        let n1 = choose_resolution(&psi, 1.0 / 300.0, 10.0, 10.0).unwrap();
        let n2 = choose_resolution(&psi, 0.5 / 300.0, 10.0, 10.0).unwrap();
        assert_eq!(n2, 2 * n1);
        // floor clamp
        assert_eq!(choose_resolution(&psi, 1.0, 10.0, 10.0).unwrap(), MIN_NP);
    }

    #[test]
    fn resolution_rule_erf_grows_logarithmically() {
        let mut previous = 0usize;
        let mut values = Vec::new();
        for &eps in &[1e-2f64, 1e-4, 1e-6] {
            let psi = make_erf::<f64>(eps).unwrap();
            let n = choose_resolution(&psi, eps, 16.0, 16.0).unwrap();
            assert!(n >= previous);
            previous = n;
            values.push(n as f64);
        }
        // within a factor of 2 of linear-in-log growth
        let ratio_a = values[1] / values[0];
        let ratio_b = values[2] / values[1];
        assert!(ratio_a <= 4.0 && ratio_b <= 4.0, "{values:?}");
    }

    #[test]
    fn fourier_round_trip_and_conventions() {
        let d = WarpedDomain::new(4.0f64, 4.0, 32).unwrap();
        // constant state -> single nonzero row at mu = 0 (row n/2)
        let ones = CMat::<f64>::from_elem((32, 2), c(1.0));
        let state = WarpedState { values: ones, rep: Representation::Physical, time: 0.0 };
        let hat = to_fourier(&state, &d).unwrap();
        for l in 0..32 {
            let mag = hat.values[(l, 0)].norm();
            if l == 16 {
                assert!((mag - 1.0).abs() < 1e-13);
            } else {
                assert!(mag < 1e-13, "row {l}: {mag}");
            }
        }
        // single mode e^{i mu_3 (p + L)} -> indicator at row 3
        let mut vals = CMat::<f64>::zeros((32, 1));
        let mu3 = d.mode(3);
        for k in 0..32 {
            let phase = mu3 * (d.grid_point(k) + d.left());
            vals[(k, 0)] = Complex64::new(phase.cos(), phase.sin());
        }
        let s = WarpedState { values: vals, rep: Representation::Physical, time: 0.0 };
        let h = to_fourier(&s, &d).unwrap();
        for l in 0..32 {
            let mag = h.values[(l, 0)].norm();
            if l == 3 {
                assert!((mag - 1.0).abs() < 1e-12);
            } else {
                assert!(mag < 1e-12);
            }
        }
        // random round trip
        let mut vals = CMat::<f64>::zeros((32, 3));
        let mut seed = 0x9e3779b97f4a7c15u64;
        let mut next = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
        };
        for v in vals.iter_mut() {
            *v = Complex64::new(next(), next());
        }
        let s = WarpedState { values: vals.clone(), rep: Representation::Physical, time: 0.0 };
        let back = from_fourier(&to_fourier(&s, &d).unwrap(), &d).unwrap();
        let dev = vals
            .iter()
            .zip(back.values.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(dev < 1e-13);
    }

    #[test]
    fn zero_mode_row_ignores_h1() {
        // At mu = 0 the propagator is exp(i H2 T) regardless of H1.
        let h1 = array![[c(-3.0), c(0.0)], [c(0.0), c(-1.0)]];
        let h2 = array![[c(0.0), Complex64::new(0.0, -0.5)], [Complex64::new(0.0, 0.5), c(0.0)]];
        let v = mode_propagator(&h1, &h2, 0.0, 1.3).unwrap();
        let expect = expm(&h2.mapv(|z| Complex64::new(0.0, 1.3) * z)).unwrap();
        assert!(linalg::max_abs(&(&v - &expect)) < 1e-13);
    }

    fn standard_b0_system() -> DynamicalSystem<f64> {
        DynamicalSystem::new(
            MatrixFn::Constant(array![[c(-1.0), c(0.5)], [c(-0.5), c(-2.0)]]),
            VectorFn::Constant(array![c(0.0), c(0.0)]),
            array![c(1.0), c(1.0)],
            1.0,
            false,
        )
        .unwrap()
    }

    #[test]
    fn evolve_conserves_fourier_norm() {
        let sys = standard_b0_system();
        let homo = homogenize(&sys);
        let split = hermitian_split(&homo.a_f, 1.0, false).unwrap();
        let d = WarpedDomain::new(12.0f64, 12.0, 64).unwrap();
        let psi = make_exp_abs::<f64>();
        let w0 = initialize(&psi, &d, &homo.u_i);
        let hat = to_fourier(&w0, &d).unwrap();
        let n0 = hat.norm();
        let evolved = evolve_time_independent(&hat, &split, &d, 1.0).unwrap();
        let n1 = evolved.norm();
        assert!((n0 - n1).abs() / n0 < 1e-12, "norm drift {}", (n0 - n1).abs() / n0);
    }

    #[test]
    fn h1_zero_recovery_is_exact() {
        // Anti-Hermitian generator: H1 = 0, recovery exact for exp_abs.
        let sys = DynamicalSystem::new(
            MatrixFn::Constant(array![[c(0.0), c(1.0)], [c(-1.0), c(0.0)]]),
            VectorFn::Constant(array![c(0.0), c(0.0)]),
            array![c(1.0), c(0.5)],
            1.0,
            false,
        )
        .unwrap();
        let homo = homogenize(&sys);
        let split = hermitian_split(&homo.a_f, 1.0, false).unwrap();
        let bounds = spectral_bounds(&split, &[0.0]).unwrap();
        assert_eq!(bounds.lambda_abs, 0.0);
        let d = WarpedDomain::new(10.0f64, 10.0, 128).unwrap();
        let psi = make_exp_abs::<f64>();
        let w0 = initialize(&psi, &d, &homo.u_i);
        let hat = to_fourier(&w0, &d).unwrap();
        let evolved = evolve_time_independent(&hat, &split, &d, 1.0).unwrap();
        let back = from_fourier(&evolved, &d).unwrap();
        let window = RecoveryWindow::build(&d, &bounds, 1.0, 0.0).unwrap();
        let (_, u) = recover(&back, &d, &window, 2, false).unwrap();
        // Oracle: u(T) = expm(A T) u0, A anti-Hermitian.
        let a = array![[c(0.0), c(1.0)], [c(-1.0), c(0.0)]];
        let e = expm(&a).unwrap();
        let expect = e.dot(&array![c(1.0), c(0.5)]);
        for j in 0..2 {
            assert!((u[j] - expect[j]).norm() < 1e-12, "component {j}");
        }
    }

    #[test]
    fn window_respects_wavefront_mark() {
        let bounds = SpectralBounds { lambda_plus: 0.2, lambda_minus: 2.0, lambda_abs: 2.0 };
        let d = WarpedDomain::new(16.0f64, 16.0, 256).unwrap();
        let w = RecoveryWindow::build(&d, &bounds, 1.0, 0.5).unwrap();
        assert!((w.p_diamond - 0.2).abs() < 1e-14);
        for &k in &w.k_set {
            let p = d.grid_point(k);
            assert!(p > 0.7 && p <= 1.2);
        }
        let pk = d.grid_point(w.k_star);
        assert!(pk >= 0.5f64.max(w.p_diamond) + 2.0 * d.dp() - 1e-12);
    }

    #[test]
    fn empty_window_is_an_error() {
        let bounds = SpectralBounds { lambda_plus: 0.0, lambda_minus: 0.0, lambda_abs: 0.0 };
        // dp = 4 > p_ub = 1: no admissible node.
        let d = WarpedDomain::new(8.0f64, 8.0, 4).unwrap();
        assert!(RecoveryWindow::build(&d, &bounds, 1.0, 0.0).is_err());
    }

    #[test]
    fn exp_abs_closed_form_dft_matches_fft() {
        let d = WarpedDomain::new(9.0f64, 13.0, 1024).unwrap();
        let psi = make_exp_abs::<f64>();
        let w0 = initialize(&psi, &d, &array![c(1.0)]);
        let hat = to_fourier(&w0, &d).unwrap();
        for &l in &[0usize, 1, 5, 511, 512, 513, 900, 1023] {
            let closed = exp_abs_dft_coeff(&d, l);
            let fftv = hat.values[(l, 0)];
            assert!(
                (closed - fftv).norm() < 1e-12,
                "mode {l}: closed {closed} vs fft {fftv}"
            );
        }
    }

    #[test]
    fn probability_of_pure_decay_profile() {
        // Unitary system (H1 = 0), window = all p_k in (0, 1]; as the grid
        // refines, pr_w -> int_0^1 e^{-2p} / int e^{-2|p|} over the box.
        let sys = DynamicalSystem::new(
            MatrixFn::Constant(array![[c(0.0)]]),
            VectorFn::Constant(array![c(0.0)]),
            array![c(1.0)],
            1.0,
            false,
        )
        .unwrap();
        let homo = homogenize(&sys);
        let split = hermitian_split(&homo.a_f, 1.0, false).unwrap();
        let bounds = spectral_bounds(&split, &[0.0]).unwrap();
        let d = WarpedDomain::new(14.0f64, 14.0, 32768).unwrap();
        let psi = make_exp_abs::<f64>();
        let w0 = initialize(&psi, &d, &homo.u_i);
        let hat = to_fourier(&w0, &d).unwrap();
        let evolved = evolve_time_independent(&hat, &split, &d, 1.0).unwrap();
        let back = from_fourier(&evolved, &d).unwrap();
        let window = RecoveryWindow::build(&d, &bounds, 1.0, 0.0).unwrap();
        let samples = profile_samples(&psi, &d);
        let (u_f, u) = recover(&back, &d, &window, 1, false).unwrap();
        let pr = success_probability(&back, &window, &samples, &homo.u_i, &u_f, &u).unwrap();
        // int_0^1 e^{-2p} dp / int_{-14}^{14} e^{-2|p|} dp = (1 - e^{-2})/2
        let expect = (1.0 - (-2.0f64).exp()) / 2.0;
        assert!((pr.pr_w - expect).abs() < 1e-3, "pr_w {} vs {expect}", pr.pr_w);
        // u_f = [u; 0...], so the component ratio is 1 and pr_u = pr_w.
        assert!((pr.pr_u - pr.pr_w).abs() < 1e-12);
    }

    #[test]
    fn diagonal_fast_path_matches_dense() {
        let h1 = diag_matrix(&[c(-1.0), c(0.0)]);
        let h2 = diag_matrix(&[c(0.3), c(-0.2)]);
        let d = WarpedDomain::new(6.0f64, 6.0, 16).unwrap();
        let mut vals = CMat::<f64>::zeros((16, 2));
        for (i, v) in vals.iter_mut().enumerate() {
            *v = Complex64::new(0.1 * i as f64, -0.05 * i as f64);
        }
        let state = WarpedState { values: vals, rep: Representation::Fourier, time: 0.0 };
        let split_diag = HermitianSplit {
            h1: MatrixFn::Constant(h1.clone()),
            h2: MatrixFn::Constant(h2.clone()),
            alpha1: 1.0,
            alpha2: 0.3,
        };
        let fast = evolve_time_independent(&state, &split_diag, &d, 0.7).unwrap();
        // Force the dense path with a structurally non-diagonal copy that
        // is numerically identical.
        let mut h1_dense = h1.clone();
        h1_dense[(0, 1)] = Complex64::new(0.0, 0.0);
        let mut slow_vals = state.values.clone();
        for l in 0..16 {
            let v = mode_propagator(&h1, &h2, d.mode(l), 0.7).unwrap();
            let row = slow_vals.row(l).to_owned();
            for i in 0..2 {
                let mut acc = Complex64::new(0.0, 0.0);
                for j in 0..2 {
                    acc += v[(i, j)] * row[j];
                }
                slow_vals[(l, i)] = acc;
            }
        }
        let dev = fast
            .values
            .iter()
            .zip(slow_vals.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(dev < 1e-13);
    }
}
