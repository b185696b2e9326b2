//! Problem definition and the enlargement/splitting steps that precede the
//! warped phase transformation.
//!
//! A dynamical system `du/dt = A(t) u + b(t)` with negative semi-definite
//! Hermitian part is rewritten as a homogeneous system of doubled size by
//! storing a constant auxiliary vector `gamma` next to the state; the
//! enlarged generator then splits into Hermitian and anti-Hermitian parts
//! whose spectral bounds drive domain truncation and recovery windows.

use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex;

use crate::error::{Result, SchroError};
use crate::float::{Cplx, Real};
use crate::linalg::{self, adjoint, hermitian_eigenvalues, CMat, CVec};

/// Matrix-valued function of time; constant matrices keep their samples.
#[derive(Clone)]
pub enum MatrixFn<T: Real> {
    Constant(CMat<T>),
    TimeDependent(Arc<dyn Fn(T) -> CMat<T> + Send + Sync>),
}

impl<T: Real> MatrixFn<T> {
    pub fn at(&self, t: T) -> CMat<T> {
        match self {
            MatrixFn::Constant(m) => m.clone(),
            MatrixFn::TimeDependent(f) => f(t),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, MatrixFn::Constant(_))
    }
}

/// Vector-valued function of time.
#[derive(Clone)]
pub enum VectorFn<T: Real> {
    Constant(CVec<T>),
    TimeDependent(Arc<dyn Fn(T) -> CVec<T> + Send + Sync>),
}

impl<T: Real> VectorFn<T> {
    pub fn at(&self, t: T) -> CVec<T> {
        match self {
            VectorFn::Constant(v) => v.clone(),
            VectorFn::TimeDependent(f) => f(t),
        }
    }
}

/// Default eigenvalue slack for the negativity gate on `(A + A^dag)/2`.
pub const TOL_PSD: f64 = 1e-10;

/// Number of uniform time samples used to estimate suprema over [0, T].
pub const DEFAULT_TIME_SAMPLES: usize = 1024;

/// The problem: `du/dt = A(t) u + b(t)`, `u(0) = u0`, on `[0, T]`.
pub struct DynamicalSystem<T: Real> {
    pub dim: usize,
    pub a_of_t: MatrixFn<T>,
    pub b_of_t: VectorFn<T>,
    pub u0: CVec<T>,
    pub horizon: T,
    pub time_dependent: bool,
}

impl<T: Real> DynamicalSystem<T> {
    /// Validates dimensions and the negativity of the Hermitian part of
    /// `A(t)` on a sampled time grid.
    pub fn new(
        a_of_t: MatrixFn<T>,
        b_of_t: VectorFn<T>,
        u0: CVec<T>,
        horizon: T,
        time_dependent: bool,
    ) -> Result<Self> {
        let dim = u0.len();
        if dim == 0 {
            return Err(SchroError::invalid("system dimension must be at least 1"));
        }
        if horizon <= T::zero() {
            return Err(SchroError::invalid("horizon T must be positive"));
        }
        let sys = DynamicalSystem { dim, a_of_t, b_of_t, u0, horizon, time_dependent };
        for &t in sys.sample_times().iter() {
            let a = sys.a_of_t.at(t);
            if a.nrows() != dim || a.ncols() != dim {
                return Err(SchroError::invalid(format!(
                    "A(t) must be {dim}x{dim}, got {}x{}",
                    a.nrows(),
                    a.ncols()
                )));
            }
            let h1a = (&a + &adjoint(&a)).mapv(|z| z * Complex::new(T::of(0.5), T::zero()));
            let eigs = hermitian_eigenvalues(&h1a)?;
            let max = eigs.last().copied().unwrap_or(T::zero());
            if max > T::of(TOL_PSD) {
                return Err(SchroError::invalid(format!(
                    "Hermitian part of A(t={t}) has positive eigenvalue {max:e}; \
                     the method requires a negative semi-definite real part"
                )));
            }
            let b = sys.b_of_t.at(t);
            if b.len() != dim {
                return Err(SchroError::invalid("b(t) length must match dim"));
            }
        }
        Ok(sys)
    }

    /// Times at which time-dependent data is probed for validation and
    /// suprema; a constant system is probed once.
    pub fn sample_times(&self) -> Vec<T> {
        if self.time_dependent {
            uniform_grid(T::zero(), self.horizon, 33)
        } else {
            vec![T::zero()]
        }
    }
}

/// Uniform closed grid with `n` points.
pub fn uniform_grid<T: Real>(a: T, b: T, n: usize) -> Vec<T> {
    let step = (b - a) / T::of((n - 1) as f64);
    (0..n).map(|i| a + step * T::of(i as f64)).collect()
}

/// The enlarged homogeneous system `du_f/dt = A_f u_f`.
pub struct HomogenizedSystem<T: Real> {
    /// `2N x 2N` generator with the zero bottom rows.
    pub a_f: MatrixFn<T>,
    /// Initial state `[u0; gamma]`.
    pub u_i: CVec<T>,
    /// `gamma_i = T sup_t |b_i(t)|`.
    pub gamma: Vec<T>,
    /// `(sum_i sup_t |b_i|^2)^(1/2)`.
    pub b_norm_smax: T,
    pub horizon: T,
    pub time_dependent: bool,
}

/// Rewrites the inhomogeneous problem as a homogeneous one of doubled
/// size. The enlarged shape is kept even when `b` vanishes so the rest of
/// the pipeline sees one layout.
pub fn homogenize<T: Real>(sys: &DynamicalSystem<T>) -> HomogenizedSystem<T> {
    let n = sys.dim;
    let t_grid = uniform_grid(T::zero(), sys.horizon, DEFAULT_TIME_SAMPLES);
    let mut sup_b = vec![T::zero(); n];
    match &sys.b_of_t {
        VectorFn::Constant(b) => {
            for i in 0..n {
                sup_b[i] = b[i].norm();
            }
        }
        VectorFn::TimeDependent(f) => {
            for &t in &t_grid {
                let b = f(t);
                for i in 0..n {
                    sup_b[i] = sup_b[i].max(b[i].norm());
                }
            }
        }
    }
    let gamma: Vec<T> = sup_b.iter().map(|&s| sys.horizon * s).collect();
    let b_norm_smax = sup_b.iter().fold(T::zero(), |acc, &s| acc + s * s).sqrt();

    let mut u_i = CVec::<T>::zeros(2 * n);
    for i in 0..n {
        u_i[i] = sys.u0[i];
        u_i[n + i] = Complex::new(gamma[i], T::zero());
    }

    let gamma_arc = Arc::new(gamma.clone());
    let assemble = {
        let gamma = Arc::clone(&gamma_arc);
        move |a: CMat<T>, b: CVec<T>| -> CMat<T> {
            let n = b.len();
            let mut af = CMat::<T>::zeros((2 * n, 2 * n));
            for i in 0..n {
                for j in 0..n {
                    af[(i, j)] = a[(i, j)];
                }
                // b_i / gamma_i, with the zero-source convention.
                if gamma[i] > T::zero() {
                    af[(i, n + i)] = b[i] / Complex::new(gamma[i], T::zero());
                }
            }
            af
        }
    };

    let a_f = if sys.time_dependent {
        let a_fn = sys.a_of_t.clone();
        let b_fn = sys.b_of_t.clone();
        MatrixFn::TimeDependent(Arc::new(move |t: T| assemble(a_fn.at(t), b_fn.at(t))))
    } else {
        MatrixFn::Constant(assemble(sys.a_of_t.at(T::zero()), sys.b_of_t.at(T::zero())))
    };

    HomogenizedSystem {
        a_f,
        u_i,
        gamma,
        b_norm_smax,
        horizon: sys.horizon,
        time_dependent: sys.time_dependent,
    }
}

/// Hermitian/anti-Hermitian decomposition `A_f = H1 + i H2`.
pub struct HermitianSplit<T: Real> {
    pub h1: MatrixFn<T>,
    pub h2: MatrixFn<T>,
    /// Upper bound on the spectral norm of `H1` over the horizon.
    pub alpha1: T,
    /// Upper bound on the spectral norm of `H2` over the horizon.
    pub alpha2: T,
}

impl<T: Real> HermitianSplit<T> {
    pub fn is_constant(&self) -> bool {
        self.h1.is_constant() && self.h2.is_constant()
    }

    pub fn dim(&self) -> usize {
        self.h1.at(T::zero()).nrows()
    }
}

fn split_parts<T: Real>(a: &CMat<T>) -> (CMat<T>, CMat<T>) {
    let adj = adjoint(a);
    let half = Complex::new(T::of(0.5), T::zero());
    let h1 = (a + &adj).mapv(|z| z * half);
    // (A - A^dag) / (2i) = -i/2 (A - A^dag)
    let minus_half_i = Complex::new(T::zero(), -T::of(0.5));
    let h2 = (a - &adj).mapv(|z| z * minus_half_i);
    (h1, h2)
}

/// Splits a (possibly time-dependent) generator into `H1 + i H2` and
/// records spectral-norm bounds sampled over the horizon.
pub fn hermitian_split<T: Real>(
    a_f: &MatrixFn<T>,
    horizon: T,
    time_dependent: bool,
) -> Result<HermitianSplit<T>> {
    let sample_times = if time_dependent {
        uniform_grid(T::zero(), horizon, 33)
    } else {
        vec![T::zero()]
    };
    let mut alpha1 = T::zero();
    let mut alpha2 = T::zero();
    for &t in &sample_times {
        let (h1, h2) = split_parts(&a_f.at(t));
        alpha1 = alpha1.max(linalg::hermitian_spectral_norm(&h1)?);
        alpha2 = alpha2.max(linalg::hermitian_spectral_norm(&h2)?);
    }
    let (h1, h2) = if time_dependent {
        let f1 = a_f.clone();
        let f2 = a_f.clone();
        (
            MatrixFn::TimeDependent(Arc::new(move |t: T| split_parts(&f1.at(t)).0)),
            MatrixFn::TimeDependent(Arc::new(move |t: T| split_parts(&f2.at(t)).1)),
        )
    } else {
        let (h1, h2) = split_parts(&a_f.at(T::zero()));
        (MatrixFn::Constant(h1), MatrixFn::Constant(h2))
    };
    Ok(HermitianSplit { h1, h2, alpha1, alpha2 })
}

/// Extremal eigenvalue magnitudes of `H1` over the horizon.
#[derive(Clone, Copy, Debug)]
pub struct SpectralBounds<T> {
    /// Largest positive eigenvalue (0 when the spectrum is nonpositive).
    pub lambda_plus: T,
    /// Largest magnitude among negative eigenvalues (0 when nonnegative).
    pub lambda_minus: T,
    /// `max(lambda_plus, lambda_minus)`.
    pub lambda_abs: T,
}

/// Computes the extremal eigenvalues of `H1(t)` over sampled times.
pub fn spectral_bounds<T: Real>(split: &HermitianSplit<T>, t_grid: &[T]) -> Result<SpectralBounds<T>> {
    let mut plus = T::zero();
    let mut minus = T::zero();
    let times: &[T] = if split.h1.is_constant() { &t_grid[..1] } else { t_grid };
    for &t in times {
        let eigs = hermitian_eigenvalues(&split.h1.at(t))?;
        for &l in &eigs {
            if l > T::zero() {
                plus = plus.max(l);
            } else {
                minus = minus.max(-l);
            }
        }
    }
    Ok(SpectralBounds { lambda_plus: plus, lambda_minus: minus, lambda_abs: plus.max(minus) })
}

/// Dense diagonal generator.
pub fn diag_matrix<T: Real>(values: &[Cplx<T>]) -> CMat<T> {
    let n = values.len();
    let mut m = CMat::<T>::zeros((n, n));
    for (i, &v) in values.iter().enumerate() {
        m[(i, i)] = v;
    }
    m
}

/// Periodic centered-difference semidiscretization of
/// `u_t = nu u_xx - c u_x` on `[0, 1)` with `n` nodes.
pub fn convection_diffusion_1d<T: Real>(n: usize, nu: T, c: T) -> Result<CMat<T>> {
    if n < 3 {
        return Err(SchroError::invalid("convection-diffusion-1d needs dim >= 3"));
    }
    if nu < T::zero() {
        return Err(SchroError::invalid("diffusion coefficient must be >= 0"));
    }
    let h = T::one() / T::of(n as f64);
    let inv_h2 = nu / (h * h);
    let inv_2h = c / (T::of(2.0) * h);
    let mut m = Array2::zeros((n, n));
    for i in 0..n {
        let prev = (i + n - 1) % n;
        let next = (i + 1) % n;
        m[(i, i)] = Complex::new(-T::of(2.0) * inv_h2, T::zero());
        m[(i, next)] = m[(i, next)] + Complex::new(inv_h2 - inv_2h, T::zero());
        m[(i, prev)] = m[(i, prev)] + Complex::new(inv_h2 + inv_2h, T::zero());
    }
    Ok(m)
}
