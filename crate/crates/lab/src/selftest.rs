//! Quick invariant suite behind `ptide selftest`.

use ptide_core::boundary::{gen_angle_dataset, top30_mask, AngleGeometry, Mlp, Reduction};
use ptide_core::density::{closed_form_error, run_density_demo, DensityDemoConfig};
use ptide_core::fitops::{effective_time, ols};
use ptide_core::seed::{rng_for, Stream};
use ptide_core::spectral::{coupling_matrix, off_diagonal_ratio, overlap_integral, run, SpectralConfig, SpectralField};
use ptide_core::{OptimConfig, OptimState, PSchedule};
use rand::Rng;

pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type Outcome = std::result::Result<String, String>;
type CheckFn = fn() -> Outcome;

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn adam_identity() -> Outcome {
    let cfg = OptimConfig {
        eta: 0.01,
        ..OptimConfig::default()
    };
    let mut rng = rng_for(0, Stream::Test);
    let (mut a, mut b) = (OptimState::new(1), OptimState::new(1));
    let (mut ta, mut tb) = ([0.0], [0.0]);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let g = rng.random::<f64>() * 4.0 - 2.0;
        a.step(&mut ta, &[g], &cfg, 0.5).map_err(|e| e.to_string())?;
        b.step_reference_adam(&mut tb, &[g], &cfg).map_err(|e| e.to_string())?;
        worst = worst.max((ta[0] - tb[0]).abs());
    }
    ensure(worst < 1e-12, format!("max deviation {worst:.3e}"))
}

fn sgd_identity() -> Outcome {
    let cfg = OptimConfig::default();
    let mut s = OptimState::new(2);
    let mut th = [0.3, -0.2];
    s.step(&mut th, &[1.5, -0.5], &cfg, 0.0).map_err(|e| e.to_string())?;
    let m_hat = s.m_hat(&cfg);
    let dev = (0..2)
        .map(|i| ((th[i] - [0.3, -0.2][i]) + cfg.eta * m_hat[i] / (1.0 + cfg.eps)).abs())
        .fold(0.0, f64::max);
    ensure(dev < 1e-15, format!("max deviation {dev:.3e}"))
}

fn overlaps() -> Outcome {
    let modes = SpectralConfig::default().modes;
    let mut worst = 0.0f64;
    for &k in &modes {
        for &j in &modes {
            let want = if k == j { 1.5 } else { 1.0 };
            let got = overlap_integral(k, j, 4096).map_err(|e| e.to_string())?;
            worst = worst.max((got - want).abs());
        }
    }
    ensure(worst < 1e-6, format!("max deviation {worst:.3e}"))
}

fn uniform_coupling_is_diagonal() -> Outcome {
    let cfg = SpectralConfig {
        n_grid: 1024,
        ..SpectralConfig::default()
    };
    let mut field = SpectralField::new(&cfg).map_err(|e| e.to_string())?;
    field.g_acc.iter_mut().for_each(|g| *g = 0.37);
    let ratio = off_diagonal_ratio(&coupling_matrix(&field, 0.5, &cfg));
    ensure(ratio < 1e-12, format!("off-diagonal ratio {ratio:.3e}"))
}

fn neutral_decay() -> Outcome {
    let cfg = SpectralConfig {
        n_grid: 512,
        n_steps: 1200,
        ..SpectralConfig::default()
    };
    let r = run(&cfg).map_err(|e| e.to_string())?;
    let worst = r.fits.iter().map(|f| (f.c_k - 0.4).abs()).fold(0.0, f64::max);
    ensure(worst < 0.005, format!("max |C_k - 0.4| = {worst:.2e}"))
}

fn screening() -> Outcome {
    let bits: Vec<u64> = [-0.8, 0.0, 0.8]
        .iter()
        .map(|&m| closed_form_error(0.9, 50.0, &DensityDemoConfig::new(m, 0.5)).map(f64::to_bits))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    ensure(
        bits.windows(2).all(|w| w[0] == w[1]),
        "closed form at p=0.5 across m".into(),
    )
}

fn density_converges() -> Outcome {
    let r = run_density_demo(&DensityDemoConfig::new(0.0, 0.0)).map_err(|e| e.to_string())?;
    let mono = r.frmse_checkpoints.windows(2).all(|w| w[1].1 < w[0].1);
    ensure(mono, format!("final fRMSE {:.3e}", r.frmse_final))
}

fn ols_exact() -> Outcome {
    let xs: Vec<f64> = (0..20).map(|i| i as f64 * 0.3).collect();
    let ys: Vec<f64> = xs.iter().map(|x| 3.0 - 2.0 * x).collect();
    let fit = ols(&xs, &ys).map_err(|e| e.to_string())?;
    ensure(
        (fit.slope + 2.0).abs() < 1e-12 && (fit.intercept - 3.0).abs() < 1e-12 && fit.r2 == 1.0,
        format!("slope {} intercept {}", fit.slope, fit.intercept),
    )
}

fn tau_identity() -> Outcome {
    let samples: Vec<(f64, f64)> = (0..100).map(|i| (i as f64 * 0.05, (i as f64).sin().abs())).collect();
    let tau = effective_time(&samples, |_| 0.0, 1e-8).map_err(|e| e.to_string())?;
    let worst = tau.iter().map(|(t, v)| (t - v).abs()).fold(0.0, f64::max);
    ensure(worst < 1e-12, format!("max |tau - t| = {worst:.2e}"))
}

fn tidal_mean() -> Outcome {
    let s = PSchedule::tidal_range(0.5, -0.5, 6.0);
    let p = s.p_eff(12.0).map_err(|e| e.to_string())?;
    ensure(p.abs() < 1e-12, format!("p_eff over two periods {p:.2e}"))
}

fn gradient_check() -> Outcome {
    let ds = gen_angle_dataset(1, 10, &AngleGeometry::default()).map_err(|e| e.to_string())?;
    let model = Mlp::init(1);
    let (_, grad) = model
        .loss_and_grad(&ds.points, &ds.labels, Reduction::Mean)
        .map_err(|e| e.to_string())?;
    let h = 1e-5;
    let mut worst = 0.0f64;
    for (k, &g) in grad.iter().enumerate() {
        let (mut up, mut down) = (model.clone(), model.clone());
        up.params[k] += h;
        down.params[k] -= h;
        let fd = (up.loss(&ds.points, &ds.labels) - down.loss(&ds.points, &ds.labels)) / (2.0 * h);
        let rel = (g - fd).abs() / g.abs().max(fd.abs()).max(1e-6);
        worst = worst.max(rel);
    }
    ensure(worst < 1e-4, format!("max relative error {worst:.2e}"))
}

fn mask_size() -> Outcome {
    let labels: Vec<u8> = (0..37).map(|i| u8::from(i % 2 == 0)).collect();
    let norms: Vec<f64> = (0..37).map(|i| (i * 13 % 7) as f64).collect();
    let mask = top30_mask(&norms, &labels).map_err(|e| e.to_string())?;
    let counts: Vec<usize> = (0..2u8)
        .map(|c| mask.iter().zip(&labels).filter(|(m, l)| **m && **l == c).count())
        .collect();
    // 18 and 19 samples: ⌈5.4⌉ = 6, ⌈5.7⌉ = 6.
    ensure(counts == [6, 6], format!("flagged per class {counts:?}"))
}

pub fn run_all() -> Vec<Check> {
    let checks: [(&'static str, CheckFn); 12] = [
        ("optim.adam_identity", adam_identity),
        ("optim.sgd_identity", sgd_identity),
        ("spectral.overlap_constants", overlaps),
        ("spectral.uniform_coupling_diagonal", uniform_coupling_is_diagonal),
        ("spectral.neutral_decay", neutral_decay),
        ("density.screening", screening),
        ("density.uniform_convergence", density_converges),
        ("fitops.ols_exact_line", ols_exact),
        ("fitops.tau_identity", tau_identity),
        ("schedule.tidal_mean", tidal_mean),
        ("boundary.gradient_check", gradient_check),
        ("boundary.mask_size", mask_size),
    ];
    checks
        .iter()
        .map(|(name, f)| {
            let (passed, detail) = match f() {
                Ok(d) => (true, d),
                Err(d) => (false, d),
            };
            Check { name, passed, detail }
        })
        .collect()
}
