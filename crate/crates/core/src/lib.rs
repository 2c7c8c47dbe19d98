//! Simulation and diagnostics for the radially symmetric nonlinear
//! variational wave equation
//!
//! ```text
//! u_tt - c(u) (c(u) u_r)_r - (d - 1) c(u)^2 u_r / r = 0
//! ```
//!
//! The solver evolves the weighted Riemann variables `R`, `S` together with
//! `u` on a uniform radial grid. Diagnostics trace characteristics through the
//! discrete field and check the energy balance, the triangle identity and the
//! growth of `S` along the characteristic launched from the bump centre.

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod characteristics;
pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod initial;
pub mod output;
pub mod riemann;
pub mod solver;
pub mod speed;

pub use characteristics::{CharacteristicPath, Family, PathSample, PathTracer};
pub use error::{Error, Result};
pub use initial::{BumpProfile, Domain, DomainChoice, ProblemSetup, SetupParams};
pub use solver::{Grid, GridState, RunResult, Scheme, SchemeConfig, Solver, StopReason};
pub use speed::WaveSpeedModel;
