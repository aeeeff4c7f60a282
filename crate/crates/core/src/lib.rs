//! Planar simulator and learning stack for tip-growing continuum robots.
//!
//! The crate models a growing robot as a constant-curvature arc
//! ([`kinematics`]), resolves its passive deformation against a circular
//! obstacle by constrained strain-energy minimization ([`interaction`]),
//! wraps both in an episodic goal-reaching environment ([`environment`]),
//! and trains a from-scratch deep Q-network on it ([`qlearn`]).
//!
//! See [`presets`] for ready-made experiment configurations and the
//! `vinesim-cli` crate for the command-line front end.

pub mod environment;
pub mod error;
pub mod interaction;
pub mod kinematics;
pub mod presets;
pub mod qlearn;

pub use error::{Error, Result};
