//! One-dimensional spectral dynamics under a locality-modulated step size.
//!
//! The error field `e(x, t)` on a uniform grid over `[0, 1)` evolves as
//!
//! ```text
//! ∂t e = −2η·(G + ε)^{−p(t)}·e,        ∂t G = (energy of the local gradient)
//! ```
//!
//! with forward Euler. The envelopes `|E_k(t)| = |⟨e, φ_k⟩|`, with
//! `φ_k(x) = √2·sin(2πkx)` and `⟨·,·⟩` the grid mean, are recorded at a fixed
//! stride and fitted with `log|E_k| ≈ α − C_k·t^{1−p}` over an early window.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::fitops::{ols, LinFit};
use crate::math::{abs, ln, powf, sin, SQRT_2, TAU};
use crate::schedule::PSchedule;
use crate::{Error, Result};

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// Envelope samples below this are excluded from decay fits.
pub const ENVELOPE_FLOOR: f64 = 1e-14;

/// What the accumulator `G` integrates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(rename_all = "snake_case"))]
pub enum EnergySource {
    /// Squared gradient of the pointwise loss `e²`, i.e. `(2e)²`.
    #[default]
    Gradient,
    /// Squared error `e²`; `G` then equals `A(x, t) = ∫ e² ds`.
    Error,
}

impl EnergySource {
    #[inline]
    fn weight(self) -> f64 {
        match self {
            EnergySource::Gradient => 4.0,
            EnergySource::Error => 1.0,
        }
    }
}

/// Where the `G` update sits relative to the step within one Euler step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(rename_all = "snake_case"))]
pub enum Accumulation {
    /// `G += dt·w·e²`, then the step size is formed from the new `G`
    /// (how an adaptive optimizer consumes its second moment).
    #[default]
    BeforeStep,
    /// Step size from the old `G`; `G` then accumulates the same pre-step `e`.
    Lagged,
    /// Step size from the old `G`; `G` accumulates the post-step `e`.
    AfterStep,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(Serialize, Deserialize),
    serde(default, deny_unknown_fields)
)]
pub struct SpectralConfig {
    pub n_grid: usize,
    pub dt: f64,
    pub n_steps: usize,
    pub eta: f64,
    pub eps: f64,
    pub modes: Vec<u32>,
    pub amps: Vec<f64>,
    pub record_stride: usize,
    pub schedule: PSchedule,
    pub energy: EnergySource,
    pub accumulation: Accumulation,
    /// Decay fits use recorded samples with `0 < t ≤ fit_window`.
    pub fit_window: f64,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        Self {
            n_grid: 4096,
            dt: 0.005,
            n_steps: 4000,
            eta: 0.2,
            eps: 1e-8,
            modes: vec![1, 2, 4, 8, 16, 32],
            amps: vec![1.0, 0.8, 0.6, 0.6, 0.5, 0.4],
            record_stride: 10,
            schedule: PSchedule::constant(0.0),
            energy: EnergySource::default(),
            accumulation: Accumulation::default(),
            fit_window: 6.0,
        }
    }
}

impl SpectralConfig {
    pub fn with_schedule(mut self, schedule: PSchedule) -> Self {
        self.schedule = schedule;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_grid < 4 {
            return Err(Error::invalid("n_grid must be at least 4"));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::invalid("dt must be positive"));
        }
        if self.n_steps == 0 || self.record_stride == 0 {
            return Err(Error::invalid("n_steps and record_stride must be positive"));
        }
        if !(self.eta >= 0.0 && self.eta.is_finite()) {
            return Err(Error::invalid("eta must be nonnegative"));
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::invalid("eps must be positive"));
        }
        if !(self.fit_window > 0.0) {
            return Err(Error::invalid("fit_window must be positive"));
        }
        if self.modes.len() != self.amps.len() {
            return Err(Error::LengthMismatch {
                expected: self.modes.len(),
                got: self.amps.len(),
            });
        }
        for (i, &k) in self.modes.iter().enumerate() {
            if k == 0 || 2 * k as usize >= self.n_grid {
                return Err(Error::invalid(format!(
                    "mode {k} must be in 1..{} (below Nyquist)",
                    self.n_grid / 2
                )));
            }
            if self.modes[..i].contains(&k) {
                return Err(Error::invalid(format!("mode {k} listed twice")));
            }
        }
        if self.amps.iter().any(|a| !a.is_finite()) {
            return Err(Error::invalid("amplitudes must be finite"));
        }
        self.schedule.validate()
    }
}

/// Uniform grid `x_i = i/n` on `[0, 1)`.
pub fn grid(n: usize) -> Vec<f64> {
    (0..n).map(|i| i as f64 / n as f64).collect()
}

/// `φ_k(x) = √2·sin(2πkx)` sampled on `xs`.
pub fn basis(k: u32, xs: &[f64]) -> Vec<f64> {
    xs.iter().map(|&x| SQRT_2 * sin(TAU * k as f64 * x)).collect()
}

/// Grid-mean inner product.
pub fn inner(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / a.len() as f64
}

/// Target `y(x) = Σ a_k sin(2πkx)` on the configured grid.
pub fn make_target(cfg: &SpectralConfig) -> Vec<f64> {
    grid(cfg.n_grid)
        .iter()
        .map(|&x| {
            cfg.modes
                .iter()
                .zip(&cfg.amps)
                .map(|(&k, &a)| a * sin(TAU * k as f64 * x))
                .sum()
        })
        .collect()
}

/// Grid mean of `φ_k² φ_j²`.
pub fn overlap_integral(k: u32, j: u32, n_grid: usize) -> Result<f64> {
    if k == 0 || j == 0 || 2 * k as usize >= n_grid || 2 * j as usize >= n_grid {
        return Err(Error::invalid("overlap modes must be in 1..n_grid/2"));
    }
    let xs = grid(n_grid);
    let pk = basis(k, &xs);
    let pj = basis(j, &xs);
    Ok(pk.iter().zip(&pj).map(|(a, b)| a * a * b * b).sum::<f64>() / n_grid as f64)
}

/// Error field and accumulated energy at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    pub x: Vec<f64>,
    pub e: Vec<f64>,
    pub g_acc: Vec<f64>,
    pub t: f64,
    pub step: usize,
}

impl SpectralField {
    /// Zero predictor: `e = −y`, `G = 0`.
    pub fn new(cfg: &SpectralConfig) -> Result<Self> {
        cfg.validate()?;
        let e = make_target(cfg).into_iter().map(|y| -y).collect();
        Ok(Self {
            x: grid(cfg.n_grid),
            e,
            g_acc: vec![0.0; cfg.n_grid],
            t: 0.0,
            step: 0,
        })
    }

    /// Mean of `G` over the grid.
    pub fn mean_energy(&self) -> f64 {
        self.g_acc.iter().sum::<f64>() / self.g_acc.len() as f64
    }

    /// One forward-Euler step with exponent `p`.
    pub fn advance(&mut self, cfg: &SpectralConfig, p: f64) -> Result<()> {
        let dt = cfg.dt;
        let rate = 2.0 * cfg.eta;
        let w = cfg.energy.weight();
        let mut max_abs = 0.0f64;
        let mut finite = true;
        for (e, g) in self.e.iter_mut().zip(self.g_acc.iter_mut()) {
            let e0 = *e;
            match cfg.accumulation {
                Accumulation::BeforeStep => {
                    *g += dt * w * e0 * e0;
                    *e = e0 - dt * rate * powf(*g + cfg.eps, -p) * e0;
                }
                Accumulation::Lagged => {
                    let gain = powf(*g + cfg.eps, -p);
                    *g += dt * w * e0 * e0;
                    *e = e0 - dt * rate * gain * e0;
                }
                Accumulation::AfterStep => {
                    *e = e0 - dt * rate * powf(*g + cfg.eps, -p) * e0;
                    *g += dt * w * *e * *e;
                }
            }
            finite &= e.is_finite();
            max_abs = max_abs.max(abs(*e));
        }
        self.step += 1;
        self.t = self.step as f64 * dt;
        if !finite || !max_abs.is_finite() {
            return Err(Error::NonFiniteField {
                step: self.step,
                max_abs,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ModeEnvelope {
    pub k: u32,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct DecayFit {
    pub k: u32,
    pub c_k: f64,
    pub intercept: f64,
    pub r2: f64,
    /// Exponent used to build the regressor `t^{1−p}`.
    pub p_used: f64,
    pub n_points: usize,
    /// Samples in the window rejected for being below [`ENVELOPE_FLOOR`].
    pub dropped: usize,
}

/// Envelopes plus the mean-energy series `(t, Ḡ(t))` at the same instants.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub envelopes: Vec<ModeEnvelope>,
    pub mean_energy: Vec<(f64, f64)>,
}

/// Runs `cfg.n_steps` Euler steps from `field`, recording every
/// `record_stride` steps (including step 0 and, when aligned, the last).
pub fn evolve(field: &mut SpectralField, cfg: &SpectralConfig) -> Result<Trajectory> {
    cfg.validate()?;
    if field.e.len() != cfg.n_grid || field.g_acc.len() != cfg.n_grid {
        return Err(Error::LengthMismatch {
            expected: cfg.n_grid,
            got: field.e.len(),
        });
    }
    let bases: Vec<Vec<f64>> = cfg.modes.iter().map(|&k| basis(k, &field.x)).collect();
    let n_records = cfg.n_steps / cfg.record_stride + 1;
    let mut envelopes: Vec<ModeEnvelope> = cfg
        .modes
        .iter()
        .map(|&k| ModeEnvelope {
            k,
            times: Vec::with_capacity(n_records),
            values: Vec::with_capacity(n_records),
        })
        .collect();
    let mut mean_energy = Vec::with_capacity(n_records);

    let start = field.step;
    for s in 0..=cfg.n_steps {
        if s % cfg.record_stride == 0 {
            for (env, phi) in envelopes.iter_mut().zip(&bases) {
                env.times.push(field.t);
                env.values.push(abs(inner(&field.e, phi)));
            }
            mean_energy.push((field.t, field.mean_energy()));
        }
        if s == cfg.n_steps {
            break;
        }
        let p = cfg.schedule.eval(field.t);
        field.advance(cfg, p)?;
    }
    debug_assert_eq!(field.step, start + cfg.n_steps);
    Ok(Trajectory { envelopes, mean_energy })
}

/// Early-time decay fit of one envelope over `0 < t ≤ window`.
///
/// Regresses `log|E_k|` on `−t^{1−p_fit}` (`−log t` when `p_fit = 1`); the
/// slope is `C_k`.
pub fn fit_decay(env: &ModeEnvelope, p_fit: f64, window: f64) -> Result<DecayFit> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut dropped = 0;
    for (&t, &v) in env.times.iter().zip(&env.values) {
        if !(t > 0.0 && t <= window) {
            continue;
        }
        if !(v >= ENVELOPE_FLOOR) || !v.is_finite() {
            dropped += 1;
            continue;
        }
        let x = if p_fit == 1.0 { -ln(t) } else { -powf(t, 1.0 - p_fit) };
        xs.push(x);
        ys.push(ln(v));
    }
    if xs.len() < 3 {
        return Err(Error::InsufficientData {
            usable: xs.len(),
            needed: 3,
        });
    }
    let LinFit {
        slope,
        intercept,
        r2,
        n_points,
    } = ols(&xs, &ys)?;
    Ok(DecayFit {
        k: env.k,
        c_k: slope,
        intercept,
        r2,
        p_used: p_fit,
        n_points,
        dropped,
    })
}

/// `M[k][j] = 2η · mean[(G + ε)^{−p}·φ_k·φ_j]` over the configured modes.
pub fn coupling_matrix(field: &SpectralField, p_now: f64, cfg: &SpectralConfig) -> Vec<Vec<f64>> {
    let bases: Vec<Vec<f64>> = cfg.modes.iter().map(|&k| basis(k, &field.x)).collect();
    let gain: Vec<f64> = field
        .g_acc
        .iter()
        .map(|&g| 2.0 * cfg.eta * powf(g + cfg.eps, -p_now))
        .collect();
    let n = field.x.len() as f64;
    bases
        .iter()
        .map(|pk| {
            bases
                .iter()
                .map(|pj| gain.iter().zip(pk).zip(pj).map(|((g, a), b)| g * a * b).sum::<f64>() / n)
                .collect()
        })
        .collect()
}

/// `Σ_{k≠j} |M_kj| / Σ_k |M_kk|`.
pub fn off_diagonal_ratio(m: &[Vec<f64>]) -> f64 {
    let mut diag = 0.0;
    let mut off = 0.0;
    for (i, row) in m.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            if i == j {
                diag += abs(*v);
            } else {
                off += abs(*v);
            }
        }
    }
    off / diag
}

/// Envelopes, fits and the fit exponent of one complete run.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralRun {
    pub trajectory: Trajectory,
    pub fits: Vec<DecayFit>,
    /// Time-averaged exponent over the fit window, used as `p_fit`.
    pub p_eff: f64,
}

pub fn run(cfg: &SpectralConfig) -> Result<SpectralRun> {
    let mut field = SpectralField::new(cfg)?;
    let trajectory = evolve(&mut field, cfg)?;
    let p_eff = cfg.schedule.p_eff(cfg.fit_window)?;
    let fits = trajectory
        .envelopes
        .iter()
        .map(|env| fit_decay(env, p_eff, cfg.fit_window))
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectralRun {
        trajectory,
        fits,
        p_eff,
    })
}

/// The eight reference configurations: five constant exponents and three
/// cosine swings with period 6 and zero phase.
pub fn reference_schedules() -> Vec<(&'static str, PSchedule)> {
    vec![
        ("p-0.50", PSchedule::constant(-0.5)),
        ("p-0.25", PSchedule::constant(-0.25)),
        ("p+0.00", PSchedule::constant(0.0)),
        ("p+0.25", PSchedule::constant(0.25)),
        ("p+0.50", PSchedule::constant(0.5)),
        ("tidal+0.50-0.50", PSchedule::tidal_range(0.5, -0.5, 6.0)),
        ("tidal+0.50+0.00", PSchedule::tidal_range(0.5, 0.0, 6.0)),
        ("tidal+0.00-0.50", PSchedule::tidal_range(0.0, -0.5, 6.0)),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SpectralConfig {
        SpectralConfig {
            n_grid: 256,
            n_steps: 400,
            modes: vec![1, 4, 16],
            amps: vec![1.0, 0.6, 0.5],
            ..SpectralConfig::default()
        }
    }

    #[test]
    fn target_single_mode() {
        let cfg = SpectralConfig {
            n_grid: 8,
            modes: vec![1],
            amps: vec![1.0],
            ..SpectralConfig::default()
        };
        let y = make_target(&cfg);
        assert!((y[2] - 1.0).abs() < 1e-15); // x = 0.25
        let zero = SpectralConfig {
            amps: vec![0.0; 6],
            ..SpectralConfig::default()
        };
        assert!(make_target(&zero).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn validate_catches_bad_modes() {
        let mut cfg = SpectralConfig::default();
        cfg.modes[1] = 1;
        assert!(cfg.validate().is_err());
        let cfg = SpectralConfig {
            n_grid: 64,
            ..SpectralConfig::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = SpectralConfig {
            amps: vec![1.0],
            ..SpectralConfig::default()
        };
        assert!(matches!(cfg.validate(), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn zero_eta_freezes_the_field() {
        let cfg = SpectralConfig { eta: 0.0, ..small() }.with_schedule(PSchedule::constant(0.5));
        let mut field = SpectralField::new(&cfg).unwrap();
        let e0 = field.e.clone();
        let traj = evolve(&mut field, &cfg).unwrap();
        assert_eq!(field.e, e0);
        for env in &traj.envelopes {
            assert!(env.values.iter().all(|&v| v == env.values[0]));
        }
    }

    #[test]
    fn energy_is_monotone_under_every_convention() {
        for acc in [Accumulation::BeforeStep, Accumulation::Lagged, Accumulation::AfterStep] {
            for energy in [EnergySource::Gradient, EnergySource::Error] {
                let cfg = SpectralConfig {
                    accumulation: acc,
                    energy,
                    ..small()
                }
                .with_schedule(PSchedule::tidal_range(0.5, -0.5, 0.5));
                let mut field = SpectralField::new(&cfg).unwrap();
                let mut prev = field.g_acc.clone();
                for _ in 0..200 {
                    let p = cfg.schedule.eval(field.t);
                    field.advance(&cfg, p).unwrap();
                    assert!(field.g_acc.iter().zip(&prev).all(|(a, b)| a >= b));
                    prev.clone_from(&field.g_acc);
                }
            }
        }
    }

    #[test]
    fn exact_exponential_fit() {
        let times: Vec<f64> = (0..200).map(|i| i as f64 * 0.05).collect();
        let env = ModeEnvelope {
            k: 3,
            values: times.iter().map(|t| libm::exp(-0.4 * t)).collect(),
            times,
        };
        let fit = fit_decay(&env, 0.0, 6.0).unwrap();
        assert!((fit.c_k - 0.4).abs() < 1e-10);
        assert!((fit.r2 - 1.0).abs() < 1e-10);
        assert!((fit.intercept).abs() < 1e-10);
        assert_eq!(fit.n_points, 120);
    }

    #[test]
    fn log_time_regressor_at_unit_exponent() {
        let times: Vec<f64> = (1..100).map(|i| i as f64 * 0.05).collect();
        let env = ModeEnvelope {
            k: 1,
            values: times.iter().map(|t| 2.0 * libm::pow(*t, -0.3)).collect(),
            times,
        };
        let fit = fit_decay(&env, 1.0, 6.0).unwrap();
        assert!((fit.c_k - 0.3).abs() < 1e-10);
    }

    #[test]
    fn fit_drops_tiny_values_and_needs_three_points() {
        let env = ModeEnvelope {
            k: 1,
            times: vec![0.0, 1.0, 2.0, 3.0, 4.0],
            values: vec![1.0, 0.5, 0.0, 1e-20, 0.1],
        };
        assert_eq!(
            fit_decay(&env, 0.0, 6.0),
            Err(Error::InsufficientData { usable: 2, needed: 3 })
        );
        let env = ModeEnvelope {
            k: 1,
            times: vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0],
            values: vec![1.0, 0.5, 0.0, 0.2, 0.1, 0.05],
        };
        let fit = fit_decay(&env, 0.0, 6.0).unwrap();
        assert_eq!(fit.dropped, 1);
        assert_eq!(fit.n_points, 4);
    }

    #[test]
    fn coupling_limits() {
        let cfg = small();
        let mut field = SpectralField::new(&cfg).unwrap();
        for g in field.g_acc.iter_mut() {
            *g = 0.7;
        }
        let m = coupling_matrix(&field, 0.5, &cfg);
        let diag = 2.0 * cfg.eta * libm::pow(0.7 + cfg.eps, -0.5);
        for (i, row) in m.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let want = if i == j { diag } else { 0.0 };
                assert!((v - want).abs() < 1e-12, "{i},{j}: {v}");
            }
        }
        for (i, g) in field.g_acc.iter_mut().enumerate() {
            *g = (i % 17) as f64;
        }
        let m = coupling_matrix(&field, 0.0, &cfg);
        for (i, row) in m.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let want = if i == j { 2.0 * cfg.eta } else { 0.0 };
                assert!((v - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn overlap_rejects_aliasing_modes() {
        assert!(overlap_integral(4, 4, 8).is_err());
        assert!(overlap_integral(0, 1, 8).is_err());
    }

    #[test]
    fn reference_set_has_eight_runs() {
        let s = reference_schedules();
        assert_eq!(s.len(), 8);
        let peffs: Vec<f64> = s[5..].iter().map(|(_, s)| s.p_eff(6.0).unwrap()).collect();
        assert_eq!(peffs, vec![0.0, 0.25, -0.25]);
    }
}
