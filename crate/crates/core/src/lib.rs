//! Optimal time-varying promotion for the Bass new-product diffusion model on
//! networks.
//!
//! The crate combines the exact master equations of the Bass model with
//! Pontryagin's maximum principle. Each network family reduces to a two-point
//! boundary-value problem (state forward from `t = 0`, costate backward from
//! the horizon) whose stationarity condition yields closed-form control laws
//! for an external spend `s_p(t)` and an internal (word-of-mouth) spend
//! `s_q(t)`:
//!
//! * [`models::general`]: any finite weighted network, `2·(2^M − 1)` equations.
//! * [`models::complete`]: homogeneous complete networks, `2M` equations.
//! * [`models::infcomplete`]: the infinite complete network, 2 equations.
//! * [`models::line`]: the infinite line, 4 equations.
//! * [`models::hetero`]: two equal-size groups, uniform or group-targeted spend.
//!
//! Everything here is `no_std` + `alloc`; file formats, the Monte Carlo oracle
//! and the command-line front end live in the companion `bassopt` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod economics;
pub mod error;
pub mod grid;
pub mod master;
pub(crate) mod math;
pub mod models;
pub mod network;
pub mod policy;
pub mod profit;
pub mod response;
pub mod solution;
pub mod solver;
pub mod subset;
pub mod trajectory;

pub use economics::{Economics, Horizon};
pub use error::{Error, Result};
pub use grid::TimeGrid;
pub use network::{GeneralNetwork, NetworkModel};
pub use policy::{ControlInterp, PromotionPolicy};
pub use profit::{adoption_from_survival, delta_pi, profit};
pub use response::{ResponseForm, ResponseModel};
pub use solution::{Diagnostics, OptimalSolution};
pub use solver::{Method, SolverConfig};
pub use trajectory::Trajectory;

/// Absolute tolerance used for probability and monotonicity assertions.
pub const PROB_TOL: f64 = 1e-9;
