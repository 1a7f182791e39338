//! Generalized von Neumann-Wigner potentials.
//!
//! A bound state embedded in the positive-energy continuum is built by
//! modulating the free S-wave solution `sin(kr)/k` with a positive factor
//! `f(r)` whose logarithmic derivative is `a sin²(kr) / r^β`. The potential
//! that supports it follows algebraically, and the decay law of the wave
//! function is tied to the decay law of the potential:
//!
//! * `0 < β < 1`: stretched-exponential decay `exp(-|a| r^(1-β) / (2(1-β)))`
//! * `β = 1`: power-law decay `r^(-|a|/2)`
//! * `β = 0`: pure exponential decay `exp(-|a| r / 2)`
//! * `β > 1`: no normalizable state
//!
//! All quantities are in reduced units, `2m/ħ² = 1`, so `E = k²`.
//!
//! Modules, bottom up: [`specfun`] and [`quadrature`] supply the numerics,
//! [`model`] builds the potential and wave function, [`ode`] checks the wave
//! function against a Numerov integration of the radial equation, and
//! [`asymptotics`] predicts and fits the decay law.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod error;
pub mod model;
pub mod ode;
pub mod quadrature;
pub mod specfun;

pub use asymptotics::{
    classify, fit_analytic_envelope, fit_envelope, norm_and_moments, DecayClassification,
    DecayKind, EnvelopeFit, EnvelopeModel, MomentBound, MomentResult,
};
pub use error::{Error, Result};
pub use model::{GridSpec, IntegralPath, ModelParams, Quantity, SampledFunction, Settings};
pub use ode::{numerov_integrate, verify_eigenfunction, NumerovSolution, ShootingResult};
pub use quadrature::{QuadConfig, QuadResult};
pub use specfun::{ComplexValue, EvalConfig, EULER_GAMMA};
