//! Numerical kinetic theory for inelastic hard spheres.
//!
//! The crate is organised bottom-up:
//!
//! * [`collision`] – binary impact rules, their inverses and Jacobians.
//! * [`distribution`] – velocity-grid distributions and analytic Maxwellian mixtures.
//! * [`operator`] – Monte Carlo quadrature of the Boltzmann collision term.
//! * [`dsmc`] – spatially homogeneous direct simulation Monte Carlo.
//! * [`sphere`] – the unit three-sphere, its stereographic chart and one-parameter subgroups.
//! * [`transport`] – collisionless transport by characteristics and a semi-Lagrangian grid solver.
//! * [`audit`] – numerical checks of each analytical claim, emitted as verdict rows.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod audit;
pub mod collision;
pub mod distribution;
pub mod dsmc;
pub mod error;
pub mod operator;
pub mod rng;
pub mod snapshot;
pub mod sphere;
pub mod transport;

pub use error::{KineticsError, Result};

/// Three-component velocity or position.
pub type Vec3 = nalgebra::Vector3<f64>;
