//! Classical simulator and verification harness for the Schrödingerization
//! of linear non-unitary dynamics.
//!
//! The pipeline rewrites `du/dt = A(t) u + b(t)` as a homogeneous enlarged
//! system, applies the warped phase transformation `w(t, p) = e^{-p} u_f(t)`
//! with a chosen initialization profile `psi(p)`, evolves the Fourier modes
//! of `w` by exactly unitary per-mode propagators, and recovers `u(T)`
//! from the warped field just above the wavefront mark. Experiment
//! drivers measure convergence orders, derivative-growth (Gevrey)
//! exponents, resolution scaling against the target accuracy, truncation
//! behavior, and the query-cost model formulas.
//!
//! Module map:
//!
//! * [`system`]   — problem definition, homogenization, Hermitian split,
//!   spectral bounds;
//! * [`profiles`] — the five initialization families and their analytic
//!   derivatives (log-magnitude form for high orders);
//! * [`warp`]     — truncated domain, transforms, per-mode evolution,
//!   recovery, measurement statistics;
//! * [`lift`]     — clock-coordinate lifting for time-dependent
//!   generators (Strang splitting);
//! * [`oracle`]   — reference solutions (matrix exponential + Duhamel,
//!   adaptive Runge-Kutta);
//! * [`pipeline`] — end-to-end solves;
//! * [`harness`]  — experiment drivers and CSV/JSON reports;
//! * [`config`]   — system files, profile strings, builtin instances.
//!
//! Everything numerical is generic over the scalar type through
//! [`float::Real`] (`f32` or `f64`); the aliases below fix the scalar to
//! `f64`, which all verification tolerances assume.

pub mod config;
pub mod error;
pub mod float;
pub mod harness;
pub mod lift;
pub mod linalg;
pub mod logspace;
pub mod oracle;
pub mod pipeline;
pub mod profiles;
pub mod quad;
pub mod special;
pub mod system;
pub mod warp;

pub use error::{Result, SchroError};
pub use float::{Cplx, Real};

/// Double-precision aliases for the main domain types.
pub type C64 = num_complex::Complex<f64>;
pub type DynamicalSystem64 = system::DynamicalSystem<f64>;
pub type HomogenizedSystem64 = system::HomogenizedSystem<f64>;
pub type HermitianSplit64 = system::HermitianSplit<f64>;
pub type SpectralBounds64 = system::SpectralBounds<f64>;
pub type InitProfile64 = profiles::InitProfile<f64>;
pub type WarpedDomain64 = warp::WarpedDomain<f64>;
pub type WarpedState64 = warp::WarpedState<f64>;
pub type RecoveryWindow64 = warp::RecoveryWindow<f64>;
pub type LiftConfig64 = lift::LiftConfig<f64>;
pub type SolveOptions64 = pipeline::SolveOptions<f64>;
pub type SolveOutput64 = pipeline::SolveOutput<f64>;
