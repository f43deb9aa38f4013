//! Discrete 1D regression of `y = x` under the sample density
//! `ρ(x) = m(x − 0.5) + 0.5`.
//!
//! Each grid point evolves on its own: `g = 2ρ(w − x)`, `G += g²`,
//! `w −= η(G + ε)^{−p}·g`, starting from `w = 0`. No moments, no momentum.

use alloc::vec;
use alloc::vec::Vec;

use crate::math::{abs, exp, ln, powf, sqrt};
use crate::{Error, Result};

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// Denominator guard for the fractional error.
pub const FRMSE_DELTA: f64 = 1e-6;
/// `|w|` beyond this aborts the run.
pub const DIVERGENCE_LIMIT: f64 = 1e6;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(Serialize, Deserialize),
    serde(default, deny_unknown_fields)
)]
pub struct DensityDemoConfig {
    pub slope_m: f64,
    pub p: f64,
    pub eta: f64,
    pub eps: f64,
    pub n_grid: usize,
    pub n_steps: usize,
    pub checkpoints: Vec<usize>,
    pub eval_band: (f64, f64),
}

impl Default for DensityDemoConfig {
    fn default() -> Self {
        Self {
            slope_m: 0.0,
            p: 0.0,
            eta: 0.01,
            eps: 1e-8,
            n_grid: 201,
            n_steps: 3000,
            checkpoints: vec![200, 500, 1000, 2000, 3000],
            eval_band: (0.8, 1.0),
        }
    }
}

impl DensityDemoConfig {
    pub fn new(slope_m: f64, p: f64) -> Self {
        Self {
            slope_m,
            p,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.slope_m > -1.0 && self.slope_m < 1.0) {
            return Err(Error::invalid("density slope m must lie in (-1, 1)"));
        }
        if !self.p.is_finite() {
            return Err(Error::invalid("p must be finite"));
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::invalid("eta must be positive"));
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::invalid("eps must be positive"));
        }
        if self.n_grid < 2 || self.n_steps == 0 {
            return Err(Error::invalid("n_grid must be ≥ 2 and n_steps ≥ 1"));
        }
        if self.checkpoints.iter().any(|&c| c == 0 || c > self.n_steps) {
            return Err(Error::invalid("checkpoints must lie in 1..=n_steps"));
        }
        let (lo, hi) = self.eval_band;
        if !(lo <= hi && lo >= 0.0 && hi <= 1.0) {
            return Err(Error::invalid("eval band must be a sub-interval of [0, 1]"));
        }
        Ok(())
    }

    /// `ρ(x) = m(x − 0.5) + 0.5`.
    #[inline]
    pub fn rho(&self, x: f64) -> f64 {
        self.slope_m * (x - 0.5) + 0.5
    }

    /// Grid `x_i = i/(n−1)` on `[0, 1]`.
    pub fn grid(&self) -> Vec<f64> {
        let last = (self.n_grid - 1) as f64;
        (0..self.n_grid).map(|i| i as f64 / last).collect()
    }
}

/// Per-point state of the iteration.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
struct Point {
    w: f64,
    g_acc: f64,
}

impl Point {
    #[inline]
    fn step(&mut self, x: f64, rho: f64, cfg: &DensityDemoConfig) {
        let g = 2.0 * rho * (self.w - x);
        self.g_acc += g * g;
        self.w -= cfg.eta * powf(self.g_acc + cfg.eps, -cfg.p) * g;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityRunResult {
    pub x: Vec<f64>,
    /// `(checkpoint, w)` in checkpoint order.
    pub w_snapshots: Vec<(usize, Vec<f64>)>,
    /// fRMSE over the eval band at each checkpoint, same order.
    pub frmse_checkpoints: Vec<(usize, f64)>,
    /// fRMSE at the final step.
    pub frmse_final: f64,
    pub g_acc: Vec<f64>,
}

/// Fractional RMS error of `w` against `y = x` over `band`.
pub fn frmse(x: &[f64], w: &[f64], band: (f64, f64)) -> f64 {
    let (sum, n) =
        x.iter()
            .zip(w)
            .filter(|(&xi, _)| xi >= band.0 && xi <= band.1)
            .fold((0.0, 0usize), |(s, n), (&xi, &wi)| {
                let r = (wi - xi) / abs(xi).max(FRMSE_DELTA);
                (s + r * r, n + 1)
            });
    if n == 0 {
        return 0.0;
    }
    sqrt(sum / n as f64)
}

pub fn run_density_demo(cfg: &DensityDemoConfig) -> Result<DensityRunResult> {
    cfg.validate()?;
    let x = cfg.grid();
    let rho: Vec<f64> = x.iter().map(|&xi| cfg.rho(xi)).collect();
    let mut pts = vec![Point::default(); x.len()];

    let mut checkpoints = cfg.checkpoints.clone();
    checkpoints.sort_unstable();
    checkpoints.dedup();
    let mut next = checkpoints.iter().peekable();

    let mut w_snapshots = Vec::with_capacity(checkpoints.len());
    let mut frmse_checkpoints = Vec::with_capacity(checkpoints.len());
    for step in 1..=cfg.n_steps {
        let mut max_abs = 0.0f64;
        for ((pt, &xi), &r) in pts.iter_mut().zip(&x).zip(&rho) {
            pt.step(xi, r, cfg);
            max_abs = max_abs.max(abs(pt.w));
        }
        if !(max_abs <= DIVERGENCE_LIMIT) {
            return Err(Error::Diverged { step, max_abs });
        }
        if next.peek() == Some(&&step) {
            next.next();
            let w: Vec<f64> = pts.iter().map(|p| p.w).collect();
            frmse_checkpoints.push((step, frmse(&x, &w, cfg.eval_band)));
            w_snapshots.push((step, w));
        }
    }

    let w_final: Vec<f64> = pts.iter().map(|p| p.w).collect();
    Ok(DensityRunResult {
        frmse_final: frmse(&x, &w_final, cfg.eval_band),
        g_acc: pts.iter().map(|p| p.g_acc).collect(),
        x,
        w_snapshots,
        frmse_checkpoints,
    })
}

/// Rate prefactor `F(x; m, p, η) = 2η/(1−p) · 4^{−p} · x^{−2p} · ρ(x)^{1−2p}`.
pub fn decay_prefactor(x: f64, cfg: &DensityDemoConfig) -> Result<f64> {
    if cfg.p == 1.0 {
        return Err(Error::Unsupported("closed form requires p != 1"));
    }
    let p = cfg.p;
    Ok(2.0 * cfg.eta / (1.0 - p) * powf(4.0, -p) * powf(x, -2.0 * p) * powf(cfg.rho(x), 1.0 - 2.0 * p))
}

/// Early-time envelope `|e(x, t)| = x·exp(−F·t^{1−p})`.
pub fn closed_form_error(x: f64, t: f64, cfg: &DensityDemoConfig) -> Result<f64> {
    if cfg.p == 1.0 {
        return Err(Error::Unsupported("closed form requires p != 1"));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::invalid("x must lie in [0, 1]"));
    }
    if !(t >= 0.0) {
        return Err(Error::invalid("t must be nonnegative"));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let f = decay_prefactor(x, cfg)?;
    Ok(x * exp(-f * powf(t, 1.0 - cfg.p)))
}

/// One probe of the early-time comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EarlyTimeProbe {
    pub x: f64,
    pub step: usize,
    pub simulated: f64,
    pub closed_form: f64,
    /// `|simulated − closed_form| / closed_form`.
    pub rel_dev: f64,
    /// False when the simulated error has already fallen below half its
    /// initial value, i.e. outside the early-time regime.
    pub in_regime: bool,
}

pub const EARLY_TIME_PROBES: [f64; 3] = [0.3, 0.5, 0.9];

/// Effective rate multiplier of one unit step of the discrete map relative
/// to the continuous flow, measured on the uniform, `p = 0` case at
/// `x = 0.5`: `κ = −ln(1 − 2ηρ)/(2ηρ)` with `ρ = 0.5`.
pub fn discrete_rate_calibration(cfg: &DensityDemoConfig) -> f64 {
    let reference = DensityDemoConfig {
        slope_m: 0.0,
        p: 0.0,
        ..cfg.clone()
    };
    let mut pt = Point::default();
    pt.step(0.5, reference.rho(0.5), &reference);
    let ratio = abs(pt.w - 0.5) / 0.5;
    let continuous = 2.0 * reference.eta * reference.rho(0.5);
    -ln(ratio) / continuous
}

/// Compares the pointwise iteration against [`closed_form_error`] at
/// [`EARLY_TIME_PROBES`] for every step up to `t_max`, after rescaling the
/// closed-form rate by [`discrete_rate_calibration`].
pub fn verify_early_time(cfg: &DensityDemoConfig, t_max: usize) -> Result<Vec<EarlyTimeProbe>> {
    cfg.validate()?;
    if cfg.p == 1.0 {
        return Err(Error::Unsupported("closed form requires p != 1"));
    }
    let kappa = discrete_rate_calibration(cfg);
    let mut out = Vec::with_capacity(EARLY_TIME_PROBES.len() * t_max);
    for &x in &EARLY_TIME_PROBES {
        let rho = cfg.rho(x);
        let f = kappa * decay_prefactor(x, cfg)?;
        let mut pt = Point::default();
        for step in 1..=t_max {
            pt.step(x, rho, cfg);
            let simulated = abs(pt.w - x);
            let closed_form = x * exp(-f * powf(step as f64, 1.0 - cfg.p));
            out.push(EarlyTimeProbe {
                x,
                step,
                simulated,
                closed_form,
                rel_dev: abs(simulated - closed_form) / closed_form,
                in_regime: simulated >= 0.5 * x,
            });
        }
    }
    Ok(out)
}
