//! Cartesian parameter sweeps over a single experiment.

use ptide_core::density::run_density_demo;
use ptide_core::spectral::run;
use ptide_core::PSchedule;
use rayon::prelude::*;

use crate::config::{Experiment, GridAxis, RunConfig};
use crate::error::{LabError, Result};
use crate::experiments::run_boundary;
use crate::output::{num, OutputDir};

/// Every combination of axis values, first axis slowest.
pub fn cells(axes: &[GridAxis]) -> Vec<Vec<f64>> {
    axes.iter().fold(vec![Vec::new()], |acc, axis| {
        let values = axis.values();
        acc.into_iter()
            .flat_map(|prefix| {
                values.iter().map(move |&v| {
                    let mut c = prefix.clone();
                    c.push(v);
                    c
                })
            })
            .collect()
    })
}

/// The run configuration of one cell.
pub fn cell_config(base: &RunConfig, axes: &[GridAxis], values: &[f64]) -> Result<RunConfig> {
    let mut cfg = base.clone();
    for (axis, &v) in axes.iter().zip(values) {
        match (base.sweep.experiment, axis.name.as_str()) {
            (Experiment::Spectral, "p") => cfg.spectral.sim.schedule = PSchedule::constant(v),
            (Experiment::Spectral, "eta") => cfg.spectral.sim.eta = v,
            (Experiment::Spectral, "eps") => cfg.spectral.sim.eps = v,
            (Experiment::Spectral, "dt") => cfg.spectral.sim.dt = v,
            (Experiment::Spectral, "n_grid") => cfg.spectral.sim.n_grid = v.round() as usize,
            (Experiment::Density, "m") => cfg.density.sim.slope_m = v,
            (Experiment::Density, "p") => cfg.density.sim.p = v,
            (Experiment::Density, "eta") => cfg.density.sim.eta = v,
            (Experiment::Density, "eps") => cfg.density.sim.eps = v,
            (Experiment::Boundary, "p") => cfg.boundary.p_values = vec![v],
            (Experiment::Boundary, "eta") => cfg.boundary.train.optim.eta = v,
            (Experiment::Boundary, "jitter") => cfg.boundary.train.geometry.jitter = v,
            (Experiment::Boundary, "vertex_offset") => cfg.boundary.train.geometry.vertex_offset = v,
            (e, name) => return Err(LabError::Config(format!("sweep over {e}: unknown parameter {name}"))),
        }
    }
    Ok(cfg)
}

fn cell_row(cfg: &RunConfig) -> Result<Vec<String>> {
    Ok(match cfg.sweep.experiment {
        Experiment::Spectral => {
            let r = run(&cfg.spectral.sim)?;
            let mut row: Vec<String> = r.fits.iter().map(|f| num(f.c_k)).collect();
            row.extend(r.fits.iter().map(|f| num(f.r2)));
            row
        }
        Experiment::Density => vec![num(run_density_demo(&cfg.density.sim)?.frmse_final)],
        Experiment::Boundary => {
            let res = run_boundary(&cfg.boundary, cfg.seed)?;
            let mean_acc = res
                .cells
                .iter()
                .map(|c| c.run.accuracy_curve.last().map_or(0.0, |a| a.1))
                .sum::<f64>()
                / res.cells.len() as f64;
            let median = res.medians().first().map_or(0, |m| m.1);
            vec![median.to_string(), num(mean_acc)]
        }
        Experiment::Sweep => return Err(LabError::Config("sweep.experiment cannot be sweep".into())),
    })
}

fn result_columns(cfg: &RunConfig) -> Vec<String> {
    match cfg.sweep.experiment {
        Experiment::Spectral => {
            let modes = &cfg.spectral.sim.modes;
            let mut cols: Vec<String> = modes.iter().map(|k| format!("c_{k}")).collect();
            cols.extend(modes.iter().map(|k| format!("r2_{k}")));
            cols
        }
        Experiment::Density => vec!["frmse_final".into()],
        Experiment::Boundary => vec!["median_first_to_target".into(), "mean_final_accuracy".into()],
        Experiment::Sweep => Vec::new(),
    }
}

/// Runs every cell and writes `sweep_summary.csv`:
/// `cell,<axis names>,<experiment columns>`.
pub fn run_sweep(out: &mut OutputDir, cfg: &RunConfig) -> Result<usize> {
    let axes = &cfg.sweep.grid;
    let grid = cells(axes);
    let configs = grid
        .iter()
        .map(|values| cell_config(cfg, axes, values))
        .collect::<Result<Vec<_>>>()?;
    for c in &configs {
        c.validate()?;
    }
    let rows = configs.par_iter().map(cell_row).collect::<Result<Vec<_>>>()?;

    let mut header = vec!["cell".to_string()];
    header.extend(axes.iter().map(|a| a.name.clone()));
    header.extend(result_columns(cfg));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    out.write_csv(
        "sweep_summary.csv",
        &header,
        grid.iter().zip(rows).enumerate().map(|(i, (values, row))| {
            let mut r = vec![i.to_string()];
            r.extend(values.iter().map(|&v| num(v)));
            r.extend(row);
            r
        }),
    )?;
    Ok(grid.len())
}
