//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

#![allow(clippy::needless_range_loop)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use ptide_core::boundary::{
    gen_angle_dataset, median_iterations, train_boundary, AngleGeometry, BoundaryConfig, Mlp, Reduction, HIDDEN,
    N_PARAMS,
};
use ptide_core::density::{closed_form_error, run_density_demo, DensityDemoConfig};
use ptide_core::seed::{derive_seed, rng_for, Stream};
use ptide_core::spectral::{overlap_integral, reference_schedules, run, SpectralConfig};
use ptide_core::{OptimConfig, OptimState, PSchedule};
use rand::Rng;

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

const MODES: [u32; 6] = [1, 2, 4, 8, 16, 32];

/// Reference decay constants, one row per schedule id.
const TABLE: [(&str, [f64; 6]); 8] = [
    ("p-0.50", [0.312, 0.283, 0.366, 0.398, 0.352, 0.285]),
    ("p-0.25", [0.389, 0.374, 0.391, 0.421, 0.421, 0.544]),
    ("p+0.00", [0.400, 0.400, 0.400, 0.400, 0.400, 0.400]),
    ("p+0.25", [0.369, 0.378, 0.393, 0.349, 0.336, 0.313]),
    ("p+0.50", [0.358, 0.377, 0.417, 0.323, 0.295, 0.263]),
    ("tidal+0.50-0.50", [0.634, 0.619, 0.592, 0.672, 0.703, 0.762]),
    ("tidal+0.50+0.00", [0.406, 0.413, 0.424, 0.387, 0.377, 0.356]),
    ("tidal+0.00-0.50", [0.446, 0.426, 0.449, 0.502, 0.502, 0.707]),
];

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

/// C_k per schedule id for the eight reference runs at default resolution.
fn reference_table() -> Result<BTreeMap<String, Vec<f64>>, String> {
    let mut out = BTreeMap::new();
    for (id, schedule) in reference_schedules() {
        let r = run(&SpectralConfig::default().with_schedule(schedule)).map_err(err)?;
        out.insert(id.to_string(), r.fits.iter().map(|f| f.c_k).collect());
    }
    Ok(out)
}

fn c1_neutral_row() -> Outcome {
    let start = Instant::now();
    let r = run(&SpectralConfig::default().with_schedule(PSchedule::constant(0.0))).map_err(err)?;
    let secs = start.elapsed().as_secs_f64();
    let ks: Vec<u32> = r.fits.iter().map(|f| f.k).collect();
    let worst_c = r.fits.iter().map(|f| (f.c_k - 0.4).abs()).fold(0.0, f64::max);
    let worst_r2 = r.fits.iter().map(|f| f.r2).fold(1.0, f64::min);
    ensure(
        ks == MODES && worst_c <= 0.005 && worst_r2 >= 0.999 && secs < 30.0,
        format!("max |C_k-0.4|={worst_c:.2e} min R2={worst_r2:.6} time={secs:.1}s"),
    )
}

fn c2_table(table: &BTreeMap<String, Vec<f64>>) -> Outcome {
    let mut worst = 0.0f64;
    for (id, want) in TABLE
        .iter()
        .filter(|(id, _)| ["p-0.25", "p+0.25", "p+0.50"].contains(id))
    {
        let got = &table[*id];
        for (g, w) in got.iter().zip(want) {
            worst = worst.max((g - w).abs());
        }
    }
    // Informational: the remaining rows.
    let all = TABLE
        .iter()
        .flat_map(|(id, want)| table[*id].iter().zip(want).map(|(g, w)| (g - w).abs()))
        .fold(0.0, f64::max);
    ensure(worst <= 0.03, format!("max deviation {worst:.4} (all rows {all:.4})"))
}

fn c3_orderings(t: &BTreeMap<String, Vec<f64>>) -> Outcome {
    let c = |id: &str, k: u32| t[id][MODES.iter().position(|&m| m == k).unwrap()];
    let half = c("p+0.50", 32) < c("p+0.50", 8) && c("p+0.50", 8) < c("p+0.50", 4) && c("p+0.50", 32) < c("p+0.50", 1);
    let neg = c("p-0.25", 32) > c("p-0.25", 1);
    let tidal = MODES.iter().all(|&k| c("tidal+0.50-0.50", k) > c("p+0.00", k));
    ensure(
        half && neg && tidal,
        format!("p=0.5 falling {half}, p=-0.25 rising {neg}, tidal above p=0 {tidal}"),
    )
}

fn c4_tidal_high_k(t: &BTreeMap<String, Vec<f64>>) -> Outcome {
    let gap = t["tidal+0.00-0.50"][5] - t["p-0.25"][5];
    ensure(gap >= 0.1, format!("C_32 gap {gap:.3}"))
}

fn c5_overlaps() -> Outcome {
    let modes = SpectralConfig::default().modes;
    let mut worst = 0.0f64;
    for &k in &modes {
        for &j in &modes {
            let want = if k == j { 1.5 } else { 1.0 };
            worst = worst.max((overlap_integral(k, j, 4096).map_err(err)? - want).abs());
        }
    }
    ensure(worst < 1e-6, format!("max deviation {worst:.2e}"))
}

fn spread(p: f64) -> Result<f64, String> {
    let f = [-0.8, 0.0, 0.8]
        .iter()
        .map(|&m| run_density_demo(&DensityDemoConfig::new(m, p)).map(|r| r.frmse_final))
        .collect::<Result<Vec<_>, _>>()
        .map_err(err)?;
    let mean = f.iter().sum::<f64>() / 3.0;
    let (lo, hi) = f
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    Ok((hi - lo) / mean)
}

fn c6_screening() -> Outcome {
    let mut bitwise = true;
    for x in [0.05, 0.3, 0.5, 0.77, 0.9, 1.0] {
        for t in [0.0, 1.0, 37.5, 500.0] {
            let bits: Vec<u64> = [-0.8, 0.0, 0.8]
                .iter()
                .map(|&m| closed_form_error(x, t, &DensityDemoConfig::new(m, 0.5)).map(f64::to_bits))
                .collect::<Result<_, _>>()
                .map_err(err)?;
            bitwise &= bits.windows(2).all(|w| w[0] == w[1]);
        }
    }
    let (s_half, s_neg) = (spread(0.5)?, spread(-0.5)?);
    ensure(
        bitwise && 3.0 * s_half <= s_neg,
        format!("bitwise {bitwise}, spread p=0.5 {s_half:.3e} vs p=-0.5 {s_neg:.3e}"),
    )
}

fn c7_optimizer() -> Outcome {
    let cfg = OptimConfig {
        eta: 0.01,
        eps_v: 0.0,
        ..OptimConfig::default()
    };
    let mut rng = rng_for(7, Stream::Test);
    let mut s = OptimState::new(1);
    let mut theta = [0.25];
    // Textbook Adam, written out independently.
    let (mut m, mut v, mut th) = (0.0f64, 0.0f64, 0.25f64);
    let mut adam_dev = 0.0f64;
    for t in 1..=1000 {
        let g: f64 = rng.random::<f64>() * 6.0 - 3.0;
        s.step(&mut theta, &[g], &cfg, 0.5).map_err(err)?;
        m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
        v = cfg.beta2 * v + (1.0 - cfg.beta2) * g * g;
        let mh = m / (1.0 - cfg.beta1.powi(t));
        let vh = v / (1.0 - cfg.beta2.powi(t));
        th -= cfg.eta * mh / (vh.sqrt() + cfg.eps);
        adam_dev = adam_dev.max((theta[0] - th).abs());
    }
    let mut s = OptimState::new(1);
    let mut theta = [0.25];
    let mut m = 0.0f64;
    let mut sgd_dev = 0.0f64;
    for t in 1..=1000 {
        let g: f64 = rng.random::<f64>() * 6.0 - 3.0;
        let before = theta[0];
        s.step(&mut theta, &[g], &cfg, 0.0).map_err(err)?;
        m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
        let mh = m / (1.0 - cfg.beta1.powi(t));
        sgd_dev = sgd_dev.max(((theta[0] - before) + cfg.eta * mh / (1.0 + cfg.eps)).abs());
    }
    ensure(
        adam_dev < 1e-12 && sgd_dev < 1e-15,
        format!("Adam path {adam_dev:.2e}, p=0 update {sgd_dev:.2e}"),
    )
}

fn active_pattern(m: &Mlp, xs: &[[f64; 2]]) -> Vec<bool> {
    xs.iter()
        .flat_map(|x| (0..HIDDEN).map(move |h| m.w1(0, h) * x[0] + m.w1(1, h) * x[1] + m.b1(h) > 0.0))
        .collect()
}

fn c8_gradients() -> Outcome {
    let h = 1e-5;
    let (mut worst, mut checked, mut skipped) = (0.0f64, 0, 0);
    for seed in 0..10u64 {
        let ds = gen_angle_dataset(seed, 15, &AngleGeometry::default()).map_err(err)?;
        let model = Mlp::init(seed);
        let (_, grad) = model
            .loss_and_grad(&ds.points, &ds.labels, Reduction::Mean)
            .map_err(err)?;
        for k in 0..N_PARAMS {
            let (mut up, mut down) = (model.clone(), model.clone());
            up.params[k] += h;
            down.params[k] -= h;
            if active_pattern(&up, &ds.points) != active_pattern(&down, &ds.points) {
                skipped += 1;
                continue;
            }
            let fd = (up.loss(&ds.points, &ds.labels) - down.loss(&ds.points, &ds.labels)) / (2.0 * h);
            worst = worst.max((grad[k] - fd).abs() / grad[k].abs().max(fd.abs()).max(1e-6));
            checked += 1;
        }
    }
    ensure(
        worst < 1e-4 && checked > 0,
        format!("max relative error {worst:.2e} over {checked} params ({skipped} at kinks)"),
    )
}

fn c9_boundary() -> Outcome {
    let start = Instant::now();
    let n_seeds = 5;
    let seeds: Vec<u64> = (0..n_seeds).map(|i| derive_seed(0, i)).collect();
    let mut medians = Vec::new();
    for p in [-0.05, 0.0] {
        let cfg = BoundaryConfig::with_p(p);
        let mut runs = Vec::new();
        for &s in &seeds {
            let ds = gen_angle_dataset(s, cfg.n_per_class, &cfg.geometry).map_err(err)?;
            runs.push(train_boundary(&ds, s, &cfg).map_err(err)?);
        }
        medians.push(median_iterations(&runs, cfg.n_iters).ok_or("no runs")?);
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(
        medians[0] <= medians[1] && secs < 60.0,
        format!(
            "median p=-0.05 {} vs p=0 {} over {n_seeds} seeds, {secs:.1}s",
            medians[0], medians[1]
        ),
    )
}

fn files_under(root: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for e in fs::read_dir(&dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push(p.strip_prefix(root).unwrap().to_path_buf());
            }
        }
    }
    out.sort();
    out
}

fn c10_determinism() -> Outcome {
    let invocations: [&[&str]; 5] = [
        &["spectral", "--svg"],
        &["density", "--svg"],
        &["boundary", "--n-seeds", "2", "--n-iters", "200", "--svg"],
        &[
            "sweep",
            "--experiment",
            "density",
            "--grid",
            "m=-0.5:0.5:0.5",
            "--grid",
            "p=0:0.5:0.5",
        ],
        &["selftest"],
    ];
    let tmp = tempfile::tempdir().map_err(err)?;
    let mut compared = 0;
    for (i, args) in invocations.iter().enumerate() {
        let mut trees = Vec::new();
        for rep in 0..2 {
            let dir = tmp.path().join(format!("{i}-{rep}"));
            let status = Command::new(env!("CARGO_BIN_EXE_ptide"))
                .args(*args)
                .arg("--out")
                .arg(&dir)
                .output()
                .map_err(err)?
                .status;
            if !status.success() {
                return Err(format!("{} exited with {status}", args[0]));
            }
            trees.push(dir);
        }
        let (a, b) = (files_under(&trees[0]), files_under(&trees[1]));
        if a != b {
            return Err(format!("{}: different file sets", args[0]));
        }
        for f in a.iter().filter(|f| f.extension().is_some_and(|e| e == "csv")) {
            if fs::read(trees[0].join(f)).map_err(err)? != fs::read(trees[1].join(f)).map_err(err)? {
                return Err(format!("{}: {} differs", args[0], f.display()));
            }
            compared += 1;
        }
    }
    ensure(
        compared > 0,
        format!("{compared} CSV files identical across repeated runs"),
    )
}

fn main() {
    let table = reference_table();
    let table = &table;
    let from_table =
        |f: fn(&BTreeMap<String, Vec<f64>>) -> Outcome| move || table.as_ref().map_err(Clone::clone).and_then(f);
    let criteria: Vec<Criterion> = vec![
        ("C_k neutral row at p=0", Box::new(c1_neutral_row)),
        ("C_k table, constant p", Box::new(from_table(c2_table))),
        ("sign-law orderings", Box::new(from_table(c3_orderings))),
        ("tidal high-k acceleration", Box::new(from_table(c4_tidal_high_k))),
        ("overlap constants", Box::new(c5_overlaps)),
        ("closed-form screening", Box::new(c6_screening)),
        ("optimizer identities", Box::new(c7_optimizer)),
        ("gradient oracle", Box::new(c8_gradients)),
        ("boundary alignment", Box::new(c9_boundary)),
        ("determinism", Box::new(c10_determinism)),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} criteria failed");
        std::process::exit(1);
    }
}
