//! Numerical laboratory for the Newell–Whitehead–Segel equation
//! `u_t − ν u_xx + α u − ε u^n = 0`.
//!
//! The crate carries the convolution-substitution solution through the
//! Fourier domain (a Bernoulli ODE per frequency), its erf closed form at
//! `n = 2`, the inverse transform, and several alternate reductions. Every
//! asserted identity is checked against an independent route (quadrature,
//! FFT, or a method-of-lines solver) and summarised as a [`ClaimReport`].

// `!(x > 0.0)` is how NaN gets rejected alongside non-positive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod alternates;
pub mod codomain;
pub mod config;
pub mod convolve;
pub mod error;
mod fft;
pub mod fields;
pub mod kernels;
pub mod quadrature;
pub mod refsolver;
pub mod report;
pub mod special;
pub mod suite;

pub use error::{Error, Result};
pub use fields::{discrete_delta, forward_fourier, inverse_fourier, Field, Grid, SpectralField, SpectralGrid};
pub use config::ExperimentConfig;
pub use kernels::NwsParams;
pub use quadrature::QuadResult;
pub use report::{to_ndjson, ClaimReport, Verdict, VerdictPolicy};
pub use suite::{export_sweep, run_claim_suite, SweepQuantity};
