//! Disordered pinning models built on heavy-tailed renewal processes.
//!
//! The crate tabulates renewal laws, computes quenched partition functions by
//! dynamic programming, evaluates the continuum limit of the homogeneous
//! partition function, and estimates free energies and critical points in the
//! weak-coupling regime.

// `!(x > 0.0)` is used on purpose so NaN is rejected
#![allow(
    clippy::neg_cmp_op_on_partial_ord,
    clippy::needless_range_loop,
    clippy::too_many_arguments
)]

pub mod budget;
pub mod cli;
pub mod coarsegrain;
pub mod continuum_psi;
pub mod conv;
pub mod disorder;
pub mod error;
pub mod freenergy;
pub mod partition;
pub mod quad;
pub mod renewal;
pub mod rng;
pub mod slowvar;
pub mod stats;
pub mod weakcoupling;

pub use error::{PinError, Result};
