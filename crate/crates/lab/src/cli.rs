use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use ptide_core::PSchedule;

use crate::config::{Experiment, GridAxis, RunConfig, SpectralPreset};
use crate::error::{LabError, Result};
use crate::experiments::{run_boundary, run_density, run_spectral, write_boundary, write_density, write_spectral};
use crate::output::OutputDir;
use crate::selftest;
use crate::sweep::run_sweep;

#[derive(Debug, Parser)]
#[command(name = "ptide", version, about = "Second-moment exponent experiments")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,

    /// Defaults to the experiment named in the config (spectral).
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Args)]
pub struct Common {
    /// JSON run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Also write SVG figures.
    #[arg(long, global = true)]
    pub svg: bool,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fourier-mode decay of the 1D error field.
    Spectral(SpectralArgs),
    /// 1D regression under a sloped sample density.
    Density(DensityArgs),
    /// Decision boundaries of a small MLP on the angle dataset.
    Boundary(BoundaryArgs),
    /// Grid sweep over one experiment.
    Sweep(SweepArgs),
    /// Run the invariant suite.
    Selftest,
}

#[derive(Debug, Args)]
pub struct SpectralArgs {
    #[arg(long, value_enum)]
    pub preset: Option<SpectralPreset>,
    /// Single run at this constant exponent.
    #[arg(long, allow_hyphen_values = true)]
    pub p: Option<f64>,
    #[arg(long)]
    pub n_grid: Option<usize>,
    #[arg(long)]
    pub n_steps: Option<usize>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
}

#[derive(Debug, Args)]
pub struct DensityArgs {
    /// Density slope; replaces the grid's m values.
    #[arg(long, allow_hyphen_values = true)]
    pub m: Option<f64>,
    /// Exponent; replaces the grid's p values.
    #[arg(long, allow_hyphen_values = true)]
    pub p: Option<f64>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub n_grid: Option<usize>,
    #[arg(long)]
    pub n_steps: Option<usize>,
}

#[derive(Debug, Args)]
pub struct BoundaryArgs {
    /// Comma-separated constant exponents.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub p: Vec<f64>,
    #[arg(long)]
    pub n_seeds: Option<u64>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub n_iters: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub experiment: Option<Experiment>,
    /// `name=start:stop:step`, repeatable.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Vec<GridAxis>,
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

/// File (or defaults), then flags.
pub fn resolve(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    set(&mut cfg.seed, cli.common.seed);
    set(&mut cfg.output_dir, cli.common.out.clone());
    set(&mut cfg.jobs, cli.common.jobs);
    cfg.emit_svg |= cli.common.svg;

    match &cli.command {
        Some(Command::Spectral(a)) => {
            cfg.experiment = Experiment::Spectral;
            let sim = &mut cfg.spectral.sim;
            set(&mut sim.n_grid, a.n_grid);
            set(&mut sim.n_steps, a.n_steps);
            set(&mut sim.dt, a.dt);
            set(&mut sim.eta, a.eta);
            set(&mut sim.eps, a.eps);
            if let Some(p) = a.p {
                sim.schedule = PSchedule::constant(p);
                cfg.spectral.preset = SpectralPreset::Single;
            }
            set(&mut cfg.spectral.preset, a.preset);
        }
        Some(Command::Density(a)) => {
            cfg.experiment = Experiment::Density;
            if let Some(m) = a.m {
                cfg.density.m_values = vec![m];
            }
            if let Some(p) = a.p {
                cfg.density.p_values = vec![p];
            }
            set(&mut cfg.density.sim.eta, a.eta);
            set(&mut cfg.density.sim.n_grid, a.n_grid);
            if let Some(n) = a.n_steps {
                cfg.density.sim.n_steps = n;
                cfg.density.sim.checkpoints.retain(|&c| c <= n);
                if !cfg.density.sim.checkpoints.contains(&n) {
                    cfg.density.sim.checkpoints.push(n);
                }
            }
        }
        Some(Command::Boundary(a)) => {
            cfg.experiment = Experiment::Boundary;
            if !a.p.is_empty() {
                cfg.boundary.p_values = a.p.clone();
            }
            set(&mut cfg.boundary.n_seeds, a.n_seeds);
            set(&mut cfg.boundary.train.optim.eta, a.eta);
            if let Some(n) = a.n_iters {
                let train = &mut cfg.boundary.train;
                train.n_iters = n;
                train.checkpoints.retain(|&c| c <= n);
                if !train.checkpoints.contains(&n) {
                    train.checkpoints.push(n);
                }
            }
        }
        Some(Command::Sweep(a)) => {
            cfg.experiment = Experiment::Sweep;
            set(&mut cfg.sweep.experiment, a.experiment);
            if !a.grid.is_empty() {
                cfg.sweep.grid = a.grid.clone();
            }
        }
        Some(Command::Selftest) | None => {}
    }
    cfg.validate()?;
    Ok(cfg)
}

fn execute(cfg: &RunConfig, out: &mut OutputDir) -> Result<()> {
    match cfg.experiment {
        Experiment::Spectral => {
            let results = run_spectral(&cfg.spectral)?;
            for r in &results {
                let cs: Vec<String> = r.run.fits.iter().map(|f| format!("{}:{:.3}", f.k, f.c_k)).collect();
                println!("{:<16} C_k {}", r.id, cs.join(" "));
            }
            write_spectral(out, &results, cfg.emit_svg)
        }
        Experiment::Density => {
            let results = run_density(&cfg.density)?;
            for r in &results {
                println!(
                    "m={} p={} frmse_final={:.6e}",
                    r.config.slope_m, r.config.p, r.result.frmse_final
                );
            }
            write_density(out, &results, cfg.emit_svg)
        }
        Experiment::Boundary => {
            let results = run_boundary(&cfg.boundary, cfg.seed)?;
            for (label, median) in results.medians() {
                println!("{label:<8} median iterations to target accuracy: {median}");
            }
            write_boundary(out, &results, cfg.emit_svg)
        }
        Experiment::Sweep => {
            let n = run_sweep(out, cfg)?;
            println!("sweep: {n} cells");
            Ok(())
        }
    }
}

fn selftest(out: &mut OutputDir) -> Result<()> {
    let checks = selftest::run_all();
    let mut failed = 0;
    for c in &checks {
        println!("{} {:<36} {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        failed += usize::from(!c.passed);
    }
    out.write_csv(
        "selftest.csv",
        &["check", "passed", "detail"],
        checks
            .iter()
            .map(|c| vec![c.name.to_string(), c.passed.to_string(), c.detail.clone()]),
    )?;
    if failed > 0 {
        return Err(LabError::Selftest(failed));
    }
    Ok(())
}

fn run_resolved(cli: &Cli) -> Result<()> {
    let started = Instant::now();
    let cfg = resolve(cli)?;
    let mut out = OutputDir::create(&cfg.output_dir)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| LabError::Config(format!("thread pool: {e}")))?;
    let outcome = match cli.command {
        Some(Command::Selftest) => selftest(&mut out),
        _ => pool.install(|| execute(&cfg, &mut out)),
    };
    outcome.and_then(|()| out.finish(&cfg, started.elapsed()).map(|_| ()))
}

/// Parses `args` (including the program name) and runs. Returns the exit
/// code: 0 success, 1 experiment failure, 2 usage or config error.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run_resolved(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("ptide: {e}");
            e.exit_code()
        }
    }
}
