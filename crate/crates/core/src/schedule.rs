//! Exponent schedules `p(t)`.
//!
//! Schedules are unit-agnostic: the spectral field queries them with
//! continuous time `step·dt`, the training demos with the iteration index.

use crate::math::{cos, floor, fmod, sin, TAU};
use crate::{Error, Result};

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(Serialize, Deserialize),
    serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)
)]
pub enum PSchedule {
    Constant {
        p: f64,
    },
    /// `p_mid + p_amp·sin(2πt/period + phase)`.
    CosineTidal {
        p_mid: f64,
        p_amp: f64,
        period: f64,
        phase: f64,
    },
    /// `pulse_p` for the first `pulse_len` steps, then [`PSchedule::Alternating`]
    /// with its clock restarted at zero. The pulse happens once per run.
    PulseTidal {
        pulse_p: f64,
        pulse_len: u64,
        values: [f64; 2],
        interval: u64,
    },
    /// `values[⌊t/interval⌋ mod 2]`.
    Alternating {
        values: [f64; 2],
        interval: u64,
    },
}

impl Default for PSchedule {
    fn default() -> Self {
        PSchedule::Constant { p: 0.0 }
    }
}

impl PSchedule {
    pub fn constant(p: f64) -> Self {
        PSchedule::Constant { p }
    }

    /// Cosine swing between `hi` and `lo` with zero phase, e.g.
    /// `tidal_range(0.5, -0.5, 6.0)`.
    pub fn tidal_range(hi: f64, lo: f64, period: f64) -> Self {
        PSchedule::CosineTidal {
            p_mid: 0.5 * (hi + lo),
            p_amp: 0.5 * (hi - lo),
            period,
            phase: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |x: f64, what: &str| {
            if x.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(alloc::format!("{what} must be finite")))
            }
        };
        match *self {
            PSchedule::Constant { p } => finite(p, "p"),
            PSchedule::CosineTidal {
                p_mid,
                p_amp,
                period,
                phase,
            } => {
                finite(p_mid, "p_mid")?;
                finite(p_amp, "p_amp")?;
                finite(phase, "phase")?;
                if !(period > 0.0 && period.is_finite()) {
                    return Err(Error::invalid("cosine schedule period must be positive"));
                }
                Ok(())
            }
            PSchedule::PulseTidal {
                pulse_p,
                values,
                interval,
                ..
            } => {
                finite(pulse_p, "pulse_p")?;
                check_alternating(values, interval)
            }
            PSchedule::Alternating { values, interval } => check_alternating(values, interval),
        }
    }

    /// Exponent at time `t ≥ 0`.
    pub fn p_at(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::invalid("schedule time must be nonnegative"));
        }
        self.validate()?;
        Ok(self.eval(t))
    }

    /// [`PSchedule::p_at`] without argument checks; used inside hot loops after
    /// the schedule has been validated once.
    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            PSchedule::Constant { p } => p,
            PSchedule::CosineTidal {
                p_mid,
                p_amp,
                period,
                phase,
            } => p_mid + p_amp * sin(TAU * (fmod(t, period) / period) + phase),
            PSchedule::PulseTidal {
                pulse_p,
                pulse_len,
                values,
                interval,
            } => {
                let pulse = pulse_len as f64;
                if t < pulse {
                    pulse_p
                } else {
                    alternating(values, interval, t - pulse)
                }
            }
            PSchedule::Alternating { values, interval } => alternating(values, interval, t),
        }
    }

    /// Time average of `p(t)` over `[0, horizon]`.
    ///
    /// Exact for every policy: the cosine integral in closed form, the step
    /// policies by summing whole constant pieces.
    pub fn p_eff(&self, horizon: f64) -> Result<f64> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::invalid("p_eff horizon must be positive"));
        }
        self.validate()?;
        Ok(match *self {
            PSchedule::Constant { p } => p,
            PSchedule::CosineTidal {
                p_mid,
                p_amp,
                period,
                phase,
            } => {
                let whole = horizon / period;
                if whole == floor(whole) {
                    p_mid
                } else {
                    let w = TAU / period;
                    p_mid + p_amp * (cos(phase) - cos(w * horizon + phase)) / (w * horizon)
                }
            }
            PSchedule::PulseTidal {
                pulse_p,
                pulse_len,
                values,
                interval,
            } => {
                let pulse = (pulse_len as f64).min(horizon);
                let rest = horizon - pulse;
                (pulse_p * pulse + alternating_integral(values, interval, rest)) / horizon
            }
            PSchedule::Alternating { values, interval } => alternating_integral(values, interval, horizon) / horizon,
        })
    }
}

fn check_alternating(values: [f64; 2], interval: u64) -> Result<()> {
    if interval == 0 {
        return Err(Error::invalid("alternating interval must be positive"));
    }
    if !values.iter().all(|v| v.is_finite()) {
        return Err(Error::invalid("alternating values must be finite"));
    }
    Ok(())
}

#[inline]
fn alternating(values: [f64; 2], interval: u64, t: f64) -> f64 {
    let block = floor(t / interval as f64) as u64;
    values[(block % 2) as usize]
}

/// `∫₀^h values[⌊t/interval⌋ mod 2] dt`.
fn alternating_integral(values: [f64; 2], interval: u64, h: f64) -> f64 {
    if h <= 0.0 {
        return 0.0;
    }
    let len = interval as f64;
    let blocks = floor(h / len);
    let full = blocks as u64;
    let first = full.div_ceil(2);
    let second = full / 2;
    let tail = h - blocks * len;
    values[0] * first as f64 * len + values[1] * second as f64 * len + values[(full % 2) as usize] * tail
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tidal() -> PSchedule {
        PSchedule::CosineTidal {
            p_mid: 0.0,
            p_amp: 0.5,
            period: 6.0,
            phase: 0.0,
        }
    }

    #[test]
    fn cosine_values() {
        assert_eq!(tidal().p_at(0.0).unwrap(), 0.0);
        assert!((tidal().p_at(1.5).unwrap() - 0.5).abs() < 1e-15);
        assert!((tidal().p_at(4.5).unwrap() + 0.5).abs() < 1e-15);
    }

    #[test]
    fn alternating_values() {
        let s = PSchedule::Alternating {
            values: [0.25, -0.15],
            interval: 200,
        };
        assert_eq!(s.p_at(0.0).unwrap(), 0.25);
        assert_eq!(s.p_at(199.0).unwrap(), 0.25);
        assert_eq!(s.p_at(200.0).unwrap(), -0.15);
        assert_eq!(s.p_at(399.0).unwrap(), -0.15);
        assert_eq!(s.p_at(400.0).unwrap(), 0.25);
    }

    #[test]
    fn pulse_then_alternating_with_fresh_clock() {
        let s = PSchedule::PulseTidal {
            pulse_p: -0.05,
            pulse_len: 50,
            values: [0.25, -0.15],
            interval: 200,
        };
        assert_eq!(s.p_at(0.0).unwrap(), -0.05);
        assert_eq!(s.p_at(49.0).unwrap(), -0.05);
        assert_eq!(s.p_at(50.0).unwrap(), 0.25);
        assert_eq!(s.p_at(249.0).unwrap(), 0.25);
        assert_eq!(s.p_at(250.0).unwrap(), -0.15);

        let no_pulse = PSchedule::PulseTidal {
            pulse_p: -0.05,
            pulse_len: 0,
            values: [0.25, -0.15],
            interval: 200,
        };
        assert_eq!(no_pulse.p_at(0.0).unwrap(), 0.25);
    }

    #[test]
    fn rejects_negative_time_and_bad_params() {
        assert!(tidal().p_at(-1e-9).is_err());
        assert!(tidal().p_at(f64::NAN).is_err());
        let zero_period = PSchedule::CosineTidal {
            p_mid: 0.0,
            p_amp: 0.1,
            period: 0.0,
            phase: 0.0,
        };
        assert!(zero_period.p_at(1.0).is_err());
        let zero_interval = PSchedule::Alternating {
            values: [0.0, 1.0],
            interval: 0,
        };
        assert!(zero_interval.p_at(1.0).is_err());
        assert!(tidal().p_eff(0.0).is_err());
    }

    #[test]
    fn p_eff_of_tidal_ranges() {
        let wide = PSchedule::tidal_range(0.5, -0.5, 6.0);
        let upper = PSchedule::tidal_range(0.5, 0.0, 6.0);
        let lower = PSchedule::tidal_range(0.0, -0.5, 6.0);
        assert_eq!(wide.p_eff(6.0).unwrap(), 0.0);
        assert_eq!(upper.p_eff(12.0).unwrap(), 0.25);
        assert_eq!(lower.p_eff(6.0).unwrap(), -0.25);
        assert_eq!(PSchedule::constant(0.3).p_eff(17.3).unwrap(), 0.3);
    }

    #[test]
    fn p_eff_partial_period_matches_quadrature() {
        let s = PSchedule::CosineTidal {
            p_mid: 0.1,
            p_amp: 0.4,
            period: 5.0,
            phase: 0.3,
        };
        let h = 3.7;
        let n = 200_000;
        let dt = h / n as f64;
        // midpoint rule
        let quad: f64 = (0..n).map(|i| s.eval((i as f64 + 0.5) * dt)).sum::<f64>() * dt / h;
        assert!((s.p_eff(h).unwrap() - quad).abs() < 1e-9);
    }

    #[test]
    fn p_eff_of_step_policies_is_discrete_average() {
        let s = PSchedule::PulseTidal {
            pulse_p: -0.05,
            pulse_len: 30,
            values: [0.25, -0.15],
            interval: 200,
        };
        for horizon in [10u64, 30, 230, 431, 1000] {
            let avg = (0..horizon).map(|i| s.eval(i as f64)).sum::<f64>() / horizon as f64;
            assert!((s.p_eff(horizon as f64).unwrap() - avg).abs() < 1e-12, "{horizon}");
        }
    }

    proptest! {
        #[test]
        fn cosine_is_periodic(t in 0.0f64..100.0, mid in -1.0f64..1.0, amp in 0.0f64..1.0,
                              period in 0.5f64..20.0, phase in -3.0f64..3.0) {
            let s = PSchedule::CosineTidal { p_mid: mid, p_amp: amp, period, phase };
            let a = s.p_at(t).unwrap();
            let b = s.p_at(t + period).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
            prop_assert!(a >= mid - amp - 1e-15 && a <= mid + amp + 1e-15);
        }

        #[test]
        fn zero_amplitude_is_constant(t in 0.0f64..1e4, mid in -2.0f64..2.0) {
            let s = PSchedule::CosineTidal { p_mid: mid, p_amp: 0.0, period: 3.0, phase: 1.0 };
            prop_assert_eq!(s.p_at(t).unwrap(), PSchedule::constant(mid).p_at(t).unwrap());
        }

        #[test]
        fn alternating_blocks_have_exact_length(interval in 1u64..50, start in 0u64..500) {
            let s = PSchedule::Alternating { values: [1.0, -1.0], interval };
            let block_start = (start / interval) * interval;
            let v = s.eval(block_start as f64);
            for i in 0..interval {
                prop_assert_eq!(s.eval((block_start + i) as f64), v);
            }
            prop_assert_ne!(s.eval((block_start + interval) as f64), v);
        }
    }
}
