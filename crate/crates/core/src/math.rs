//! Thin aliases over `libm` so numeric code reads like `std` float code.

pub use libm::{cos, exp, fabs as abs, floor, fmod, log as ln, pow as powf, sin, sqrt};

pub const TAU: f64 = core::f64::consts::TAU;
pub const SQRT_2: f64 = core::f64::consts::SQRT_2;
