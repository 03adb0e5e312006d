//! A numerical laboratory for stochastic quantum mechanics and stochastic
//! electrodynamics in one dimension.
//!
//! * [`grid`], [`params`], [`rng`]: shared domain types and grid calculus.
//! * [`quantum`]: Schrödinger-like solver and the fields ρ, v, u, V_Q.
//! * [`dynamics`]: the kinematic operators 𝒟̂_c, 𝒟̂_s and dynamical residuals.
//! * [`samplers`]: trajectory ensembles for both process branches and the
//!   kinematic estimators recovering v, u and D from raw paths.
//! * [`sed`]: zero-point field synthesis, the radiation-damped oscillator and
//!   the energy balance that fixes D.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod banded;
pub mod dynamics;
pub mod error;
pub mod grid;
pub mod params;
pub mod quadrature;
pub mod quantum;
pub mod rng;
pub mod samplers;
pub mod sed;
pub mod stats;

pub use error::{Error, Result};
pub use grid::{ComplexField, Grid1D, ScalarField};
pub use params::{Branch, PhysicalParams};
pub use rng::RandomStreamSpec;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
