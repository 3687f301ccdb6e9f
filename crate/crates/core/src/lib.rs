//! Long-term beamforming for the massive MU-MIMO uplink.
//!
//! A receiver projects each user's signal onto a rank-`r` subspace computed
//! from spatial covariance estimates, with the aggregate covariance inverse
//! square root replaced by a low-degree minimax polynomial. The crate
//! contains the channel simulator, covariance estimation, the polynomial
//! fit, the projection and SINR formulas, and a Monte Carlo harness with
//! FLOP accounting.

pub mod channel;
pub mod covariance;
pub mod equalize;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod polyinv;
pub mod projection;
pub mod rng;

pub use error::{LtbfError, Result};
