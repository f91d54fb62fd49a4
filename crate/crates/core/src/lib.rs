//! Storage-versus-computation cost models for Horn knowledge systems.
//!
//! The formulas in [`metrics`] and [`thermo`] are generic over a [`num::Scalar`] (`f32` or
//! `f64`), and the pure cost arithmetic also accepts exact rationals. The simulator and the
//! experiments run in `f64`; the aliases below name that instantiation.

// `!(x > 0.0)` guards deliberately reject NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiments;
pub mod kb;
pub mod metrics;
pub mod num;
pub mod policies;
pub mod simulator;
pub mod thermo;
pub mod workload;

pub use error::{Error, Result};

/// Scalar used by the simulator and the experiments.
pub type Real = f64;
pub type ThermoParams64 = thermo::ThermoParams<Real>;
pub type BoundCheck64 = metrics::BoundCheck<Real>;
pub type TrialityCheck64 = thermo::TrialityCheck<Real>;
pub type CostBreakdown64 = thermo::CostBreakdown<Real>;
