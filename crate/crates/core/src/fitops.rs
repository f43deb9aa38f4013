//! Least squares and the effective-time integral.

use alloc::vec::Vec;

use crate::math::powf;
use crate::{Error, Result};

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct LinFit {
    pub slope: f64,
    pub intercept: f64,
    /// Coefficient of determination, `1 − SS_res/SS_tot`.
    pub r2: f64,
    pub n_points: usize,
}

impl LinFit {
    pub fn predict(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }
}

/// Ordinary least squares fit of `y ≈ intercept + slope·x`.
///
/// Uses centered sums, so shifting `ys` moves only the intercept.
pub fn ols(xs: &[f64], ys: &[f64]) -> Result<LinFit> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch {
            expected: xs.len(),
            got: ys.len(),
        });
    }
    let n = xs.len();
    if n < 2 {
        return Err(Error::InsufficientData { usable: n, needed: 2 });
    }
    if let Some(index) = xs.iter().chain(ys).position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput { index: index % n });
    }

    let nf = n as f64;
    let x_mean = xs.iter().sum::<f64>() / nf;
    let y_mean = ys.iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        let dx = x - x_mean;
        let dy = y - y_mean;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(Error::DegenerateRegressor);
    }

    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    let r2 = if syy == 0.0 {
        if ss_res == 0.0 {
            1.0
        } else {
            f64::NEG_INFINITY
        }
    } else {
        1.0 - ss_res / syy
    };

    Ok(LinFit {
        slope,
        intercept,
        r2: r2.min(1.0),
        n_points: n,
    })
}

/// Effective time `τ(t) = ∫₀^t (Ā(s) + ε)^{−p(s)} ds` by the cumulative
/// trapezoidal rule.
///
/// `samples` are `(t, Ā(t))` pairs with `t` strictly increasing from zero.
pub fn effective_time(samples: &[(f64, f64)], p_of_t: impl Fn(f64) -> f64, eps: f64) -> Result<Vec<(f64, f64)>> {
    let Some(&(t0, _)) = samples.first() else {
        return Ok(Vec::new());
    };
    if t0 != 0.0 {
        return Err(Error::invalid("effective time must start at t = 0"));
    }
    if samples.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(Error::invalid("sample times must be strictly increasing"));
    }
    if samples.iter().any(|&(_, a)| !(a >= 0.0)) {
        return Err(Error::invalid("mean energy must be nonnegative"));
    }

    let integrand = |(t, a): (f64, f64)| powf(a + eps, -p_of_t(t));
    let mut out = Vec::with_capacity(samples.len());
    let mut tau = 0.0;
    let mut prev = samples[0];
    let mut f_prev = integrand(prev);
    out.push((prev.0, 0.0));
    for &s in &samples[1..] {
        let f = integrand(s);
        tau += 0.5 * (f + f_prev) * (s.0 - prev.0);
        out.push((s.0, tau));
        prev = s;
        f_prev = f;
    }
    Ok(out)
}
