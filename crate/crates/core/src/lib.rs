//! Thermodynamic formalism for locally constant matrix cocycles over
//! subshifts of finite type.
//!
//! The crate computes, with explicit brackets:
//!
//! * the pressure `P(tΦ)` of the norm potential `Φ = {log ‖A_n‖}` and its
//!   slope at infinity ([`pressure`]),
//! * level-`n` Gibbs distributions and their zero-temperature limits
//!   ([`equilibrium`]),
//! * the maximal Lyapunov exponent `β(Φ)` (log of the joint spectral radius)
//!   bracketed between periodic-orbit exponents and per-level norm maxima
//!   ([`periodic`]),
//! * Monte Carlo Lyapunov exponents for Bernoulli measures ([`montecarlo`]).
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases at
//! the crate root fix `f64`, which is what the tolerances in the docs assume.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cocycle;
pub mod equilibrium;
pub mod error;
pub mod montecarlo;
pub mod periodic;
pub mod pressure;
pub mod scalar;
pub mod scan;
pub mod symbolic;

pub use cocycle::{CocycleError, Matrix, MatrixSet, Potential, ScaledMatrix, WeightTable};
pub use error::Error;
pub use scalar::Scalar;
pub use symbolic::{PeriodicOrbit, SftSpec, Symbol, SymbolicError, Word};

pub type Matrix64 = Matrix<f64>;
pub type MatrixSet64 = MatrixSet<f64>;
pub type ScaledMatrix64 = ScaledMatrix<f64>;
pub type Potential64 = Potential<f64>;
pub type PressureCurve64 = pressure::PressureCurve<f64>;
pub type GibbsApproximant64 = equilibrium::GibbsApproximant<f64>;
pub type JsrBracket64 = periodic::JsrBracket<f64>;
pub type ExponentEstimate64 = montecarlo::ExponentEstimate<f64>;

pub type Matrix32 = Matrix<f32>;
pub type MatrixSet32 = MatrixSet<f32>;
pub type Potential32 = Potential<f32>;
