//! Link-level simulation and DoF analysis for the two-cell Network MIMO
//! downlink where each transmitter holds channel estimates of heterogeneous
//! quality (short feedback delay for its own user, feedback plus backhaul
//! delay for the neighbouring user).
//!
//! The crate is organised bottom-up:
//!
//! - [`channel_model`]: Rayleigh channels, Gauss-Markov evolution and the
//!   nested CSIT views held by each transmitter.
//! - [`precoding`]: conventional ZF, modified ZF and Active/Passive ZF beams.
//! - [`schemes`]: one-realization rate evaluation of ZF, MAT, alpha-MAT and
//!   the single-slot vertex scheme.
//! - [`dof_analysis`]: closed-form DoF values, the optimal DoF region and
//!   slope estimation from rate curves.
//! - [`converse_oracle`]: numerical probing of the extremal inequality behind
//!   the outer bound.
//! - [`harness`]: configuration, Monte-Carlo orchestration and CSV output.

pub mod channel_model;
pub mod cli;
pub mod converse_oracle;
pub mod dof_analysis;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod precoding;
pub mod schemes;

pub use error::{Error, Result};
