//! Jacobi polynomials whose first parameter grows with the degree,
//! `P_n^{(an+α, β)}(1 - 2λ²)`, evaluated three independent ways.
//!
//! Every route computes the scaled value
//! `S_n = λ^{an+α} (1-λ²)^β P_n^{(an+α,β)}(1-2λ²)`:
//!
//! - [`oracle`]: the explicit binomial sum in extended precision,
//! - [`quadrature`]: a Fourier integral over `|z| = x` plus a Laplace integral on `(0, x)`,
//! - [`asymptotics`]: closed-form leading terms per regime, and exponential bound certificates.
//!
//! The crate is `no_std` and needs only `alloc`.

#![cfg_attr(not(test), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod arith;
pub mod asymptotics;
pub mod error;
pub mod oracle;
pub mod params;
pub mod quadrature;

pub use arith::LogReal;
pub use asymptotics::{
    bound_certificate, estimate, estimate_darboux, estimate_exponential_lower, estimate_oscillatory,
    estimate_saddle_lower, estimate_saddle_upper, psi_beta, AsymptoticEstimate, BoundCertificate, EstimateKind,
};
pub use error::{Error, Result, Warning};
pub use oracle::{binom_real, jacobi_general, scaled_exact, PrecisionConfig, ScaledValue, SummationMode};
pub use params::{
    classify, h_laplace, h_phase, laplace_data, laplace_shape, stationary_data, EvalPoint, LaplaceData, LaplaceShape,
    ParamSet, Rational, Regime, RegimeTag, StationaryData, DEFAULT_SADDLE_TOL,
};
pub use quadrature::{fourier_integrand, laplace_integrand, scaled_via_integrals, IntegralParts, QuadratureConfig};

pub use astro_float::BigFloat;
