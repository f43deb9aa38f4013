//! The unified p-exponent optimizer.
//!
//! One update rule covers momentum SGD (`p = 0`), Adam/RMSProp (`p = 0.5`)
//! and everything in between or beyond, including negative exponents:
//!
//! ```text
//! m ← β1·m + (1−β1)·g
//! v ← β2·v + (1−β2)·g⊙g
//! θ ← θ − η · m̂ / ((v̂ + ε_v)^p + ε)
//! ```
//!
//! `m̂`, `v̂` are the bias-corrected moments when `bias_correction` is on.
//! The exponent is passed to every step, so a [`crate::PSchedule`] can own it.
//!
//! `ε_v` floors the second moment before exponentiation and `ε` guards the
//! denominator. With `ε_v = 0` and `p < 0` a coordinate with `v̂ = 0` gets a
//! denominator of `+∞` and therefore a zero update, which is the limit of the
//! rule as `v̂ → 0`.

use alloc::vec;
use alloc::vec::Vec;

use crate::math::{powf, sqrt};
use crate::{Error, Result};

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(Serialize, Deserialize),
    serde(default, deny_unknown_fields)
)]
pub struct OptimConfig {
    /// Learning rate η.
    pub eta: f64,
    pub beta1: f64,
    pub beta2: f64,
    /// Denominator guard ε, added after exponentiation.
    pub eps: f64,
    /// Second-moment floor ε_v, added before exponentiation.
    pub eps_v: f64,
    pub bias_correction: bool,
}

impl Default for OptimConfig {
    fn default() -> Self {
        Self {
            eta: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            eps_v: 0.0,
            bias_correction: true,
        }
    }
}

impl OptimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::invalid("eta must be positive and finite"));
        }
        if !(0.0..1.0).contains(&self.beta1) {
            return Err(Error::invalid("beta1 must be in [0, 1)"));
        }
        if !(0.0..1.0).contains(&self.beta2) {
            return Err(Error::invalid("beta2 must be in [0, 1)"));
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::invalid("eps must be positive and finite"));
        }
        if !(self.eps_v >= 0.0 && self.eps_v.is_finite()) {
            return Err(Error::invalid("eps_v must be nonnegative and finite"));
        }
        Ok(())
    }

    /// The preconditioner denominator `(v̂ + ε_v)^p + ε` for one coordinate.
    #[inline]
    pub fn denominator(&self, v_hat: f64, p: f64) -> f64 {
        powf(v_hat + self.eps_v, p) + self.eps
    }
}

/// Moment accumulators and the step counter for one parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimState {
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl OptimState {
    pub fn new(len: usize) -> Self {
        Self {
            m: vec![0.0; len],
            v: vec![0.0; len],
            t: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.m.len()
    }

    pub fn is_empty(&self) -> bool {
        self.m.is_empty()
    }

    pub fn m(&self) -> &[f64] {
        &self.m
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    /// Number of completed steps.
    pub fn t(&self) -> u64 {
        self.t
    }

    /// Bias-correction divisors `(1 − β1^t, 1 − β2^t)` for the current step
    /// count, or `(1, 1)` when correction is off.
    fn corrections(&self, cfg: &OptimConfig) -> (f64, f64) {
        if cfg.bias_correction && self.t > 0 {
            let t = self.t as f64;
            (1.0 - powf(cfg.beta1, t), 1.0 - powf(cfg.beta2, t))
        } else {
            (1.0, 1.0)
        }
    }

    /// Bias-corrected second moment `v̂`. Before the first step this is the
    /// raw (zero) accumulator.
    pub fn v_hat(&self, cfg: &OptimConfig) -> Vec<f64> {
        let (_, c2) = self.corrections(cfg);
        self.v.iter().map(|v| v / c2).collect()
    }

    /// Bias-corrected first moment `m̂`.
    pub fn m_hat(&self, cfg: &OptimConfig) -> Vec<f64> {
        let (c1, _) = self.corrections(cfg);
        self.m.iter().map(|m| m / c1).collect()
    }

    fn check_inputs(&self, params: &[f64], grad: &[f64], cfg: &OptimConfig) -> Result<()> {
        cfg.validate()?;
        if params.len() != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                got: params.len(),
            });
        }
        if grad.len() != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                got: grad.len(),
            });
        }
        if let Some(index) = grad.iter().position(|g| !g.is_finite()) {
            return Err(Error::NonFiniteInput { index });
        }
        Ok(())
    }

    fn accumulate(&mut self, grad: &[f64], cfg: &OptimConfig) {
        for ((m, v), &g) in self.m.iter_mut().zip(self.v.iter_mut()).zip(grad) {
            *m = cfg.beta1 * *m + (1.0 - cfg.beta1) * g;
            *v = cfg.beta2 * *v + (1.0 - cfg.beta2) * g * g;
        }
        self.t += 1;
    }

    /// One unified step with exponent `p`. On error nothing is modified.
    pub fn step(&mut self, params: &mut [f64], grad: &[f64], cfg: &OptimConfig, p: f64) -> Result<()> {
        if !p.is_finite() {
            return Err(Error::invalid("exponent p must be finite"));
        }
        self.check_inputs(params, grad, cfg)?;
        self.accumulate(grad, cfg);

        let (c1, c2) = self.corrections(cfg);
        for ((theta, &m), &v) in params.iter_mut().zip(&self.m).zip(&self.v) {
            let m_hat = m / c1;
            let v_hat = v / c2;
            *theta -= cfg.eta * m_hat / cfg.denominator(v_hat, p);
        }
        Ok(())
    }

    /// Textbook Adam, `θ ← θ − η·m̂ / (√v̂ + ε)`. Ignores `eps_v`.
    ///
    /// Kept as an independent route for checking `step(.., p = 0.5)`.
    pub fn step_reference_adam(&mut self, params: &mut [f64], grad: &[f64], cfg: &OptimConfig) -> Result<()> {
        self.check_inputs(params, grad, cfg)?;
        self.accumulate(grad, cfg);

        let (c1, c2) = self.corrections(cfg);
        for ((theta, &m), &v) in params.iter_mut().zip(&self.m).zip(&self.v) {
            *theta -= cfg.eta * (m / c1) / (sqrt(v / c2) + cfg.eps);
        }
        Ok(())
    }
}
