//! End-to-end solves: homogenize, split, truncate, initialize, evolve,
//! recover, and report measurement statistics.

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Result, SchroError};
use crate::float::{Cplx, Real};
use crate::lift::{lift_and_evolve, LiftConfig};
use crate::profiles::{InitProfile, ProfileKind};
use crate::system::{
    hermitian_split, homogenize, spectral_bounds, uniform_grid, DynamicalSystem, HermitianSplit,
    HomogenizedSystem, SpectralBounds,
};
use crate::warp::{
    choose_domain, choose_resolution, exp_abs_dft_coeff, from_fourier, initialize,
    profile_samples, recover, success_probability, to_fourier, RecoveryWindow, Representation,
    SuccessProbability, WarpedDomain, WarpedState,
};
use crate::linalg::CVec;

/// Tuning knobs for a single pipeline solve.
#[derive(Clone, Debug)]
pub struct SolveOptions<T> {
    /// Accuracy knob driving domain truncation (and the resolution rule
    /// when `n_p` is not overridden).
    pub epsilon: T,
    /// Explicit `(L, R)` instead of the truncation rule.
    pub domain_override: Option<(T, T)>,
    /// Explicit grid size instead of the resolution rule.
    pub np_override: Option<usize>,
    /// Average `e^{p_k} w(T, p_k)` over the window instead of reading one
    /// node.
    pub mode_average: bool,
    /// Run the lifted clock-coordinate evolution even for constant
    /// generators (cross-check mode). Time-dependent systems always lift.
    pub force_lift: bool,
    /// Clock-grid settings (`n_s`, `m`, optional half-extent, dt refine).
    pub lift_n_s: usize,
    pub lift_m: usize,
    pub lift_s_half: Option<T>,
    pub lift_dt_refine: usize,
    /// Grid size beyond which the solve switches to the single-node
    /// recovery path (no full state storage, no measurement statistics).
    pub fast_path_threshold: usize,
}

impl<T: Real> SolveOptions<T> {
    pub fn new(epsilon: T) -> Self {
        SolveOptions {
            epsilon,
            domain_override: None,
            np_override: None,
            mode_average: false,
            force_lift: false,
            lift_n_s: 256,
            lift_m: 4,
            lift_s_half: None,
            lift_dt_refine: 1,
            fast_path_threshold: 1 << 18,
        }
    }
}

/// Everything a solve produces.
pub struct SolveOutput<T: Real> {
    /// Recovered solution of the original system.
    pub u: CVec<T>,
    /// Recovered enlarged vector `[u; gamma]`.
    pub u_f: CVec<T>,
    pub domain: WarpedDomain<T>,
    pub window: RecoveryWindow<T>,
    pub bounds: SpectralBounds<T>,
    pub n_p: usize,
    pub mu_max: T,
    /// Measurement statistics; absent on the single-node fast path.
    pub probability: Option<SuccessProbability<T>>,
    /// Relative Fourier-norm drift across the evolution (unitarity
    /// witness); absent on the fast path.
    pub norm_drift: Option<T>,
    /// Final physical-space state, kept for window diagnostics when the
    /// full path ran.
    pub state: Option<WarpedState<T>>,
}

/// Prepared ingredients shared by repeated solves of the same system.
pub struct Prepared<T: Real> {
    pub homo: HomogenizedSystem<T>,
    pub split: HermitianSplit<T>,
    pub bounds: SpectralBounds<T>,
    pub n_orig: usize,
    pub horizon: T,
    pub time_dependent: bool,
}

/// Homogenizes and splits once; reusable across grid ladders.
pub fn prepare<T: Real>(sys: &DynamicalSystem<T>) -> Result<Prepared<T>> {
    let homo = homogenize(sys);
    let split = hermitian_split(&homo.a_f, sys.horizon, sys.time_dependent)?;
    let t_grid = uniform_grid(T::zero(), sys.horizon, 33);
    let bounds = spectral_bounds(&split, &t_grid)?;
    Ok(Prepared {
        homo,
        split,
        bounds,
        n_orig: sys.dim,
        horizon: sys.horizon,
        time_dependent: sys.time_dependent,
    })
}

/// Domain for a prepared system, honoring overrides and the compact
/// support of the cut-off family (whose left ramp must stay inside the
/// box together with its leftward transport).
pub fn domain_for<T: Real>(
    prep: &Prepared<T>,
    profile: &InitProfile<T>,
    opts: &SolveOptions<T>,
    n_p: usize,
) -> Result<WarpedDomain<T>> {
    let (mut left, right) = match opts.domain_override {
        Some(pair) => pair,
        None => choose_domain(&prep.bounds, prep.horizon, opts.epsilon)?,
    };
    if let Some(support_left) = profile.support_left() {
        let needed = -support_left + prep.bounds.lambda_minus * prep.horizon + T::one();
        left = left.max(needed);
    }
    WarpedDomain::new(left, right, n_p)
}

/// Picks the grid size from the override or the resolution rule.
pub fn resolution_for<T: Real>(
    prep: &Prepared<T>,
    profile: &InitProfile<T>,
    opts: &SolveOptions<T>,
) -> Result<usize> {
    if let Some(n) = opts.np_override {
        return Ok(n);
    }
    let (left, right) = match opts.domain_override {
        Some(pair) => pair,
        None => choose_domain(&prep.bounds, prep.horizon, opts.epsilon)?,
    };
    choose_resolution(profile, opts.epsilon, left, right)
}

/// Full solve of a dynamical system with the given profile.
pub fn solve<T: Real>(
    sys: &DynamicalSystem<T>,
    profile: &InitProfile<T>,
    opts: &SolveOptions<T>,
) -> Result<SolveOutput<T>> {
    let prep = prepare(sys)?;
    solve_prepared(&prep, profile, opts)
}

/// Solve with precomputed system ingredients.
pub fn solve_prepared<T: Real>(
    prep: &Prepared<T>,
    profile: &InitProfile<T>,
    opts: &SolveOptions<T>,
) -> Result<SolveOutput<T>> {
    let n_p = resolution_for(prep, profile, opts)?;
    let domain = domain_for(prep, profile, opts, n_p)?;
    let window = RecoveryWindow::build(&domain, &prep.bounds, prep.horizon, profile.p_star())?;

    let needs_lift = prep.time_dependent || opts.force_lift;
    let use_fast = !needs_lift && !opts.mode_average && n_p >= opts.fast_path_threshold;
    if use_fast {
        let (u_f, u) = solve_single_node(prep, profile, &domain, &window)?;
        return Ok(SolveOutput {
            u,
            u_f,
            mu_max: domain.mu_max(),
            n_p,
            domain,
            window,
            bounds: prep.bounds,
            probability: None,
            norm_drift: None,
            state: None,
        });
    }

    let w0 = initialize(profile, &domain, &prep.homo.u_i);
    let hat = to_fourier(&w0, &domain)?;
    let norm_before = hat.norm();
    let evolved = if needs_lift {
        let cfg = match opts.lift_s_half {
            Some(s_half) => LiftConfig::new(opts.lift_n_s, opts.lift_m, s_half, prep.horizon)?,
            None => LiftConfig::auto(prep.horizon, opts.lift_n_s, opts.lift_m)?,
        };
        let cfg = LiftConfig { dt_refine: opts.lift_dt_refine, ..cfg };
        lift_and_evolve(&prep.split, &hat, &domain, &cfg, prep.horizon)?
    } else {
        crate::warp::evolve_time_independent(&hat, &prep.split, &domain, prep.horizon)?
    };
    let norm_after = evolved.norm();
    let norm_drift = (norm_after - norm_before).abs() / norm_before.max(T::min_positive_value());
    let back = from_fourier(&evolved, &domain)?;
    let (u_f, u) = recover(&back, &domain, &window, prep.n_orig, opts.mode_average)?;
    let samples = profile_samples(profile, &domain);
    let probability = success_probability(&back, &window, &samples, &prep.homo.u_i, &u_f, &u)?;
    Ok(SolveOutput {
        u,
        u_f,
        mu_max: domain.mu_max(),
        n_p,
        domain,
        window,
        bounds: prep.bounds,
        probability: Some(probability),
        norm_drift: Some(norm_drift),
        state: Some(back),
    })
}

/// Memory-light solve: accumulates `u_f(T) = e^{p*} sum_l psi~_l
/// e^{i mu_l (p* + L)} V_l(T) u_I` without materializing the `n_p x M`
/// state. Exact per-mode propagators, deterministic chunked reduction.
fn solve_single_node<T: Real>(
    prep: &Prepared<T>,
    profile: &InitProfile<T>,
    domain: &WarpedDomain<T>,
    window: &RecoveryWindow<T>,
) -> Result<(CVec<T>, CVec<T>)> {
    let h1 = prep.split.h1.at(T::zero());
    let h2 = prep.split.h2.at(T::zero());
    let m = h1.nrows();
    let n = domain.n_p();
    let p_star = domain.grid_point(window.k_star);
    let u_i = &prep.homo.u_i;

    // Fourier coefficients of the sampled profile: closed form for the
    // kinked profile, one FFT otherwise.
    let coeffs: ProfileCoeffs<T> = match profile.kind() {
        ProfileKind::ExpAbs => ProfileCoeffs::Closed,
        _ => {
            if n > (1 << 24) {
                return Err(SchroError::config(
                    "grid too large for the sampled-profile fast path",
                ));
            }
            let samples = profile_samples(profile, domain);
            let mut mat = crate::linalg::CMat::<T>::zeros((n, 1));
            for (k, &s) in samples.iter().enumerate() {
                mat[(k, 0)] = Complex::new(s, T::zero());
            }
            let state = WarpedState { values: mat, rep: Representation::Physical, time: T::zero() };
            let hat = to_fourier(&state, domain)?;
            ProfileCoeffs::Table(hat.values.column(0).to_owned())
        }
    };

    let chunk = 8192usize;
    let n_chunks = n.div_ceil(chunk);
    let partials: Vec<Result<Vec<Cplx<T>>>> = (0..n_chunks)
        .into_par_iter()
        .map(|ci| {
            let lo = ci * chunk;
            let hi = ((ci + 1) * chunk).min(n);
            let mut acc = vec![Complex::new(T::zero(), T::zero()); m];
            for l in lo..hi {
                let mu = domain.mode(l);
                let c = match &coeffs {
                    ProfileCoeffs::Closed => exp_abs_dft_coeff(domain, l),
                    ProfileCoeffs::Table(t) => t[l],
                };
                if c.norm_sqr() == T::zero() {
                    continue;
                }
                let v = crate::warp::mode_propagator(&h1, &h2, mu, prep.horizon)?;
                let phase_arg = mu * (p_star + domain.left());
                let phase = Complex::new(phase_arg.cos(), phase_arg.sin()) * c;
                for i in 0..m {
                    let mut row = Complex::new(T::zero(), T::zero());
                    for j in 0..m {
                        row = row + v[(i, j)] * u_i[j];
                    }
                    acc[i] = acc[i] + phase * row;
                }
            }
            Ok(acc)
        })
        .collect();
    let mut u_f = CVec::<T>::zeros(m);
    for part in partials {
        let part = part?;
        for i in 0..m {
            u_f[i] = u_f[i] + part[i];
        }
    }
    let scale = Complex::new(p_star.exp(), T::zero());
    u_f.mapv_inplace(|z| z * scale);
    let u = u_f.slice(ndarray::s![..prep.n_orig]).to_owned();
    Ok((u_f, u))
}

enum ProfileCoeffs<T: Real> {
    Closed,
    Table(CVec<T>),
}

/// Relative Euclidean error against a reference vector.
pub fn relative_error<T: Real>(got: &CVec<T>, want: &CVec<T>) -> T {
    let mut num = T::zero();
    let mut den = T::zero();
    for (g, w) in got.iter().zip(want.iter()) {
        num += (g - w).norm_sqr();
        den += w.norm_sqr();
    }
    if den == T::zero() {
        num.sqrt()
    } else {
        (num / den).sqrt()
    }
}
