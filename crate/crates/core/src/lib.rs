//! Core numerics for the `ptide` experiments.
//!
//! The crate is `no_std` (it only needs `alloc`) and holds everything that is
//! pure computation:
//!
//! * [`optim`]: the unified first-order update `θ ← θ − η·m̂ / ((v̂ + ε_v)^p + ε)`
//!   with bias-corrected moments, plus a textbook Adam path used as an oracle.
//! * [`schedule`]: policies mapping a step or time to the exponent `p`.
//! * [`fitops`]: ordinary least squares and the effective-time integral.
//! * [`spectral`]: the 1D locality-modulated error field, Fourier-mode
//!   envelopes, early-time decay fits and the coupling matrix.
//! * [`density`]: the discrete 1D regression under a sloped sample density
//!   and its closed-form early-time envelope.
//! * [`boundary`]: the two-class "angle" dataset and a 2-layer ReLU MLP
//!   trained with the unified optimizer.
//!
//! File formats, the CLI and parallel sweeps live in the `ptide-lab` crate.

#![cfg_attr(not(test), no_std)]
// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod boundary;
pub mod density;
mod error;
pub mod fitops;
pub(crate) mod math;
pub mod optim;
pub mod schedule;
pub mod seed;
pub mod spectral;

pub use error::{Error, Result};
pub use optim::{OptimConfig, OptimState};
pub use schedule::PSchedule;
