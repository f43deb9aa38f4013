//! Experiment runners and their file layouts.
//!
//! Computation happens in parallel on the current rayon pool; results are
//! gathered in input order and written by the caller's thread, so output
//! bytes never depend on scheduling.

use ptide_core::boundary::{
    gen_angle_dataset, median_iterations, train_boundary, AngleDataset, BoundaryConfig, BoundaryRun, Branch,
};
use ptide_core::density::{run_density_demo, DensityDemoConfig, DensityRunResult};
use ptide_core::seed::derive_seed;
use ptide_core::spectral::{reference_schedules, run, SpectralConfig, SpectralRun};
use ptide_core::PSchedule;
use rayon::prelude::*;

use crate::config::{BoundarySection, DensitySection, SpectralPreset, SpectralSection};
use crate::error::Result;
use crate::output::{num, OutputDir};
use crate::svg::{range_of, Panel, Svg, PALETTE};

// ---------------------------------------------------------------- spectral

pub struct SpectralResult {
    pub id: String,
    pub config: SpectralConfig,
    pub run: SpectralRun,
}

pub fn spectral_jobs(sec: &SpectralSection) -> Vec<(String, SpectralConfig)> {
    match sec.preset {
        SpectralPreset::PaperTable => reference_schedules()
            .into_iter()
            .map(|(id, s)| (id.to_string(), sec.sim.clone().with_schedule(s)))
            .collect(),
        SpectralPreset::Single => vec![("single".to_string(), sec.sim.clone())],
    }
}

pub fn run_spectral(sec: &SpectralSection) -> Result<Vec<SpectralResult>> {
    let results = spectral_jobs(sec)
        .into_par_iter()
        .map(|(id, config)| {
            let run = run(&config)?;
            Ok(SpectralResult { id, config, run })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(results)
}

/// `spectral_summary.csv` plus one envelope table per run.
///
/// Summary columns: `schedule,k,c_k,intercept,r2,p_fit,n_points,dropped`.
/// Envelope columns: `t,mean_energy,E_<k>...`.
pub fn write_spectral(out: &mut OutputDir, results: &[SpectralResult], svg: bool) -> Result<()> {
    let rows = results.iter().flat_map(|r| {
        r.run.fits.iter().map(move |f| {
            vec![
                r.id.clone(),
                f.k.to_string(),
                num(f.c_k),
                num(f.intercept),
                num(f.r2),
                num(f.p_used),
                f.n_points.to_string(),
                f.dropped.to_string(),
            ]
        })
    });
    out.write_csv(
        "spectral_summary.csv",
        &[
            "schedule",
            "k",
            "c_k",
            "intercept",
            "r2",
            "p_fit",
            "n_points",
            "dropped",
        ],
        rows,
    )?;

    for r in results {
        let env = &r.run.trajectory.envelopes;
        let mut header = vec!["t".to_string(), "mean_energy".to_string()];
        header.extend(env.iter().map(|e| format!("E_{}", e.k)));
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        let rows = r.run.trajectory.mean_energy.iter().enumerate().map(|(i, &(t, a))| {
            let mut row = vec![num(t), num(a)];
            row.extend(env.iter().map(|e| num(e.values[i])));
            row
        });
        out.write_csv(&format!("spectral/{}.csv", r.id), &header, rows)?;
    }

    if svg {
        for r in results {
            out.write_bytes(&format!("spectral/{}.svg", r.id), envelope_svg(r).as_bytes())?;
        }
        out.write_bytes("spectral_ck.svg", ck_svg(results).as_bytes())?;
    }
    Ok(())
}

fn envelope_svg(r: &SpectralResult) -> String {
    let env = &r.run.trajectory.envelopes;
    let logs = |e: &ptide_core::spectral::ModeEnvelope| -> Vec<(f64, f64)> {
        e.times
            .iter()
            .zip(&e.values)
            .filter(|(_, v)| **v > 0.0)
            .map(|(t, v)| (*t, v.log10()))
            .collect()
    };
    let series: Vec<Vec<(f64, f64)>> = env.iter().map(logs).collect();
    let p = Panel {
        x: 60.0,
        y: 30.0,
        w: 440.0,
        h: 300.0,
        xr: range_of(series.iter().flatten().map(|s| s.0)),
        yr: range_of(series.iter().flatten().map(|s| s.1)),
    };
    let mut svg = Svg::new(620.0, 380.0);
    svg.frame(&p, &format!("mode envelopes, {}", r.id), "t", "log10 |E_k|");
    let mut legend = Vec::new();
    for (i, (e, s)) in env.iter().zip(&series).enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        svg.polyline(&p, s, color, false);
        legend.push((format!("k = {}", e.k), color));
    }
    svg.legend(515.0, 40.0, &legend);
    svg.finish()
}

fn ck_svg(results: &[SpectralResult]) -> String {
    let pts: Vec<Vec<(f64, f64)>> = results
        .iter()
        .map(|r| r.run.fits.iter().map(|f| ((f.k as f64).log2(), f.c_k)).collect())
        .collect();
    let p = Panel {
        x: 60.0,
        y: 30.0,
        w: 420.0,
        h: 300.0,
        xr: range_of(pts.iter().flatten().map(|s| s.0)),
        yr: range_of(pts.iter().flatten().map(|s| s.1)),
    };
    let mut svg = Svg::new(640.0, 380.0);
    svg.frame(&p, "early-time decay constants", "log2 k", "C_k");
    let mut legend = Vec::new();
    for (i, (r, s)) in results.iter().zip(&pts).enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        svg.polyline(&p, s, color, r.id.starts_with("tidal"));
        for &(x, y) in s {
            svg.marker(&p, x, y, 2.5, color, None);
        }
        legend.push((r.id.clone(), color));
    }
    svg.legend(495.0, 40.0, &legend);
    svg.finish()
}

// ----------------------------------------------------------------- density

pub struct DensityResult {
    pub config: DensityDemoConfig,
    pub result: DensityRunResult,
}

fn density_tag(m: f64, p: f64) -> String {
    format!("m{m:+}_p{p:+}")
}

pub fn run_density(sec: &DensitySection) -> Result<Vec<DensityResult>> {
    let cells: Vec<DensityDemoConfig> = sec
        .m_values
        .iter()
        .flat_map(|&m| {
            sec.p_values.iter().map(move |&p| DensityDemoConfig {
                slope_m: m,
                p,
                ..sec.sim.clone()
            })
        })
        .collect();
    let results = cells
        .into_par_iter()
        .map(|config| {
            let result = run_density_demo(&config)?;
            Ok(DensityResult { config, result })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(results)
}

/// One table per cell (`x,rho,w_<step>...`), `density_summary.csv`
/// (`m,p,frmse_final`) and `density_checkpoints.csv` (`m,p,step,frmse`).
pub fn write_density(out: &mut OutputDir, results: &[DensityResult], svg: bool) -> Result<()> {
    for r in results {
        let c = &r.config;
        let mut header = vec!["x".to_string(), "rho".to_string()];
        header.extend(r.result.w_snapshots.iter().map(|(s, _)| format!("w_{s}")));
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        let rows = r.result.x.iter().enumerate().map(|(i, &x)| {
            let mut row = vec![num(x), num(c.rho(x))];
            row.extend(r.result.w_snapshots.iter().map(|(_, w)| num(w[i])));
            row
        });
        out.write_csv(&format!("density/{}.csv", density_tag(c.slope_m, c.p)), &header, rows)?;
    }
    out.write_csv(
        "density_summary.csv",
        &["m", "p", "frmse_final"],
        results
            .iter()
            .map(|r| vec![num(r.config.slope_m), num(r.config.p), num(r.result.frmse_final)]),
    )?;
    out.write_csv(
        "density_checkpoints.csv",
        &["m", "p", "step", "frmse"],
        results.iter().flat_map(|r| {
            r.result
                .frmse_checkpoints
                .iter()
                .map(move |&(s, f)| vec![num(r.config.slope_m), num(r.config.p), s.to_string(), num(f)])
        }),
    )?;
    if svg {
        out.write_bytes("density_grid.svg", density_svg(results).as_bytes())?;
    }
    Ok(())
}

fn density_svg(results: &[DensityResult]) -> String {
    let mut ms: Vec<f64> = Vec::new();
    let mut ps: Vec<f64> = Vec::new();
    for r in results {
        if !ms.contains(&r.config.slope_m) {
            ms.push(r.config.slope_m);
        }
        if !ps.contains(&r.config.p) {
            ps.push(r.config.p);
        }
    }
    let (pw, ph, gap) = (200.0, 150.0, 50.0);
    let mut svg = Svg::new(60.0 + ps.len() as f64 * (pw + gap), 40.0 + ms.len() as f64 * (ph + gap));
    for r in results {
        let row = ms.iter().position(|&m| m == r.config.slope_m).unwrap_or(0) as f64;
        let col = ps.iter().position(|&p| p == r.config.p).unwrap_or(0) as f64;
        let panel = Panel {
            x: 50.0 + col * (pw + gap),
            y: 30.0 + row * (ph + gap),
            w: pw,
            h: ph,
            xr: (0.0, 1.0),
            yr: (-0.05, 1.05),
        };
        svg.frame(
            &panel,
            &format!(
                "m={} p={} fRMSE={:.3e}",
                r.config.slope_m, r.config.p, r.result.frmse_final
            ),
            "x",
            "",
        );
        svg.polyline(&panel, &[(0.0, 0.0), (1.0, 1.0)], "#555", true);
        for (i, (_, w)) in r.result.w_snapshots.iter().enumerate() {
            let pts: Vec<(f64, f64)> = r.result.x.iter().copied().zip(w.iter().copied()).collect();
            svg.polyline(&panel, &pts, PALETTE[i % PALETTE.len()], false);
        }
    }
    svg.finish()
}

// ---------------------------------------------------------------- boundary

pub struct BoundaryCell {
    pub label: String,
    pub config: BoundaryConfig,
    pub seed_index: u64,
    pub seed: u64,
    pub run: BoundaryRun,
}

pub struct BoundaryResults {
    pub datasets: Vec<AngleDataset>,
    pub cells: Vec<BoundaryCell>,
    pub labels: Vec<String>,
}

impl BoundaryResults {
    /// `(label, median first iteration to target)` per exponent, with misses
    /// counted as `n_iters + 1`.
    pub fn medians(&self) -> Vec<(String, u64)> {
        self.labels
            .iter()
            .map(|label| {
                let runs: Vec<BoundaryRun> = self
                    .cells
                    .iter()
                    .filter(|c| &c.label == label)
                    .map(|c| c.run.clone())
                    .collect();
                let n_iters = self
                    .cells
                    .iter()
                    .find(|c| &c.label == label)
                    .map_or(0, |c| c.config.n_iters);
                (label.clone(), median_iterations(&runs, n_iters).unwrap_or(n_iters + 1))
            })
            .collect()
    }
}

fn boundary_variants(sec: &BoundarySection) -> Vec<(String, BoundaryConfig)> {
    if sec.p_values.is_empty() {
        return vec![("schedule".to_string(), sec.train.clone())];
    }
    sec.p_values
        .iter()
        .map(|&p| {
            (
                format!("p{p:+}"),
                BoundaryConfig {
                    schedule: PSchedule::constant(p),
                    ..sec.train.clone()
                },
            )
        })
        .collect()
}

/// Seed `i` of a run is `derive_seed(seed, i)`; data and initialization share
/// it, and every exponent sees the same seeds.
pub fn run_boundary(sec: &BoundarySection, seed: u64) -> Result<BoundaryResults> {
    let seeds: Vec<u64> = (0..sec.n_seeds).map(|i| derive_seed(seed, i)).collect();
    let datasets = seeds
        .iter()
        .map(|&s| gen_angle_dataset(s, sec.train.n_per_class, &sec.train.geometry))
        .collect::<ptide_core::Result<Vec<_>>>()?;
    let variants = boundary_variants(sec);
    let jobs: Vec<(usize, usize)> = (0..variants.len())
        .flat_map(|v| (0..seeds.len()).map(move |s| (v, s)))
        .collect();
    let cells = jobs
        .into_par_iter()
        .map(|(v, s)| {
            let (label, config) = &variants[v];
            let run = train_boundary(&datasets[s], seeds[s], config)?;
            Ok(BoundaryCell {
                label: label.clone(),
                config: config.clone(),
                seed_index: s as u64,
                seed: seeds[s],
                run,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BoundaryResults {
        datasets,
        cells,
        labels: variants.into_iter().map(|(l, _)| l).collect(),
    })
}

fn branch_name(b: Branch) -> &'static str {
    match b {
        Branch::Far => "far",
        Branch::Near => "near",
    }
}

/// Tables for every (exponent, seed); dataset, norms and rasters for seed
/// index 0, which is also the seed drawn in the mosaic.
///
/// * `boundary_summary.csv`: `label,seed_index,seed,first_to_target,final_accuracy,final_loss`
/// * `boundary_medians.csv`: `label,median_first_to_target`
/// * `boundary_accuracy.csv`: `label,seed_index,iteration,accuracy,loss`
/// * `boundary_dataset.csv`: `sample,class,branch,x1,x2`
/// * `boundary_norms.csv`: `label,checkpoint,sample,class,norm,top30`
/// * `boundary/<label>_it<n>.pgm`: class map, class 1 white
pub fn write_boundary(out: &mut OutputDir, res: &BoundaryResults, svg: bool) -> Result<()> {
    out.write_csv(
        "boundary_summary.csv",
        &[
            "label",
            "seed_index",
            "seed",
            "first_to_target",
            "final_accuracy",
            "final_loss",
        ],
        res.cells.iter().map(|c| {
            vec![
                c.label.clone(),
                c.seed_index.to_string(),
                c.seed.to_string(),
                c.run.first_to_target.map_or(String::new(), |v| v.to_string()),
                num(c.run.accuracy_curve.last().map_or(0.0, |a| a.1)),
                num(c.run.loss_curve.last().map_or(0.0, |a| a.1)),
            ]
        }),
    )?;
    out.write_csv(
        "boundary_medians.csv",
        &["label", "median_first_to_target"],
        res.medians().into_iter().map(|(l, m)| vec![l, m.to_string()]),
    )?;
    out.write_csv(
        "boundary_accuracy.csv",
        &["label", "seed_index", "iteration", "accuracy", "loss"],
        res.cells.iter().flat_map(|c| {
            c.run
                .accuracy_curve
                .iter()
                .zip(&c.run.loss_curve)
                .map(move |(&(it, acc), &(_, loss))| {
                    vec![
                        c.label.clone(),
                        c.seed_index.to_string(),
                        it.to_string(),
                        num(acc),
                        num(loss),
                    ]
                })
        }),
    )?;
    let ds = &res.datasets[0];
    out.write_csv(
        "boundary_dataset.csv",
        &["sample", "class", "branch", "x1", "x2"],
        (0..ds.len()).map(|i| {
            vec![
                i.to_string(),
                ds.labels[i].to_string(),
                branch_name(ds.branches[i]).to_string(),
                num(ds.points[i][0]),
                num(ds.points[i][1]),
            ]
        }),
    )?;
    let first: Vec<&BoundaryCell> = res.cells.iter().filter(|c| c.seed_index == 0).collect();
    out.write_csv(
        "boundary_norms.csv",
        &["label", "checkpoint", "sample", "class", "norm", "top30"],
        first.iter().flat_map(|c| {
            c.run.checkpoints.iter().flat_map(move |cp| {
                (0..cp.update_norms.len()).map(move |i| {
                    vec![
                        c.label.clone(),
                        cp.iteration.to_string(),
                        i.to_string(),
                        ds.labels[i].to_string(),
                        num(cp.update_norms[i]),
                        u8::from(cp.top_mask[i]).to_string(),
                    ]
                })
            })
        }),
    )?;
    for c in &first {
        for cp in &c.run.checkpoints {
            let pixels: Vec<u8> = cp.raster.cells.iter().map(|&v| v * 255).collect();
            out.write_pgm(
                &format!("boundary/{}_it{}.pgm", c.label, cp.iteration),
                cp.raster.width,
                cp.raster.height,
                &pixels,
            )?;
        }
    }
    if svg {
        out.write_bytes("boundary_mosaic.svg", mosaic_svg(ds, &first).as_bytes())?;
    }
    Ok(())
}

fn mosaic_svg(ds: &AngleDataset, cells: &[&BoundaryCell]) -> String {
    let cols = cells.first().map_or(0, |c| c.run.checkpoints.len());
    let (size, gap) = (130.0, 26.0);
    let mut svg = Svg::new(
        90.0 + cols as f64 * (size + gap),
        40.0 + cells.len() as f64 * (size + gap),
    );
    for (r, c) in cells.iter().enumerate() {
        let y = 30.0 + r as f64 * (size + gap);
        svg.text(10.0, y + size / 2.0, 11.0, "start", &c.label);
        for (k, cp) in c.run.checkpoints.iter().enumerate() {
            let raster = &cp.raster;
            let panel = Panel {
                x: 80.0 + k as f64 * (size + gap),
                y,
                w: size,
                h: size,
                xr: raster.x_range,
                yr: raster.y_range,
            };
            svg.class_map(
                &panel,
                raster.width,
                raster.height,
                &raster.cells,
                ["#cfe0f3", "#f6d5c8"],
            );
            for i in 0..ds.len() {
                let fill = if ds.labels[i] == 0 { PALETTE[0] } else { PALETTE[1] };
                let stroke = cp.top_mask[i].then_some("black");
                svg.marker(&panel, ds.points[i][0], ds.points[i][1], 1.6, fill, stroke);
            }
            svg.border(&panel, &format!("it {} acc {:.2}", cp.iteration, cp.accuracy));
        }
    }
    svg.finish()
}
