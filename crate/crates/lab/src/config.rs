//! Run configuration: JSON file, then command-line overrides, then defaults.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ptide_core::boundary::BoundaryConfig;
use ptide_core::density::DensityDemoConfig;
use ptide_core::spectral::SpectralConfig;
use ptide_core::PSchedule;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    #[default]
    Spectral,
    Density,
    Boundary,
    Sweep,
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Experiment::Spectral => "spectral",
            Experiment::Density => "density",
            Experiment::Boundary => "boundary",
            Experiment::Sweep => "sweep",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SpectralPreset {
    /// Five constant exponents and three tidal ranges.
    #[default]
    PaperTable,
    /// One run with `sim.schedule`.
    Single,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectralSection {
    pub preset: SpectralPreset,
    pub sim: SpectralConfig,
}

impl Default for SpectralSection {
    fn default() -> Self {
        Self {
            preset: SpectralPreset::PaperTable,
            sim: SpectralConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DensitySection {
    pub m_values: Vec<f64>,
    pub p_values: Vec<f64>,
    /// `slope_m` and `p` are replaced per grid cell.
    pub sim: DensityDemoConfig,
}

impl Default for DensitySection {
    fn default() -> Self {
        Self {
            m_values: vec![-0.8, -0.4, 0.4, 0.8],
            p_values: vec![0.5, 0.0, -0.5],
            sim: DensityDemoConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundarySection {
    /// Constant exponents to compare. Empty means "use `train.schedule`".
    pub p_values: Vec<f64>,
    /// Number of seeds; seed `i` is `derive_seed(run seed, i)` and is shared
    /// by data and initialization across all exponents.
    pub n_seeds: u64,
    pub train: BoundaryConfig,
}

impl Default for BoundarySection {
    fn default() -> Self {
        Self {
            p_values: vec![-0.1, -0.05, 0.0, 0.25, 0.5],
            n_seeds: 5,
            train: BoundaryConfig::default(),
        }
    }
}

/// One sweep axis, `name=start:stop:step` on the command line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridAxis {
    pub name: String,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl GridAxis {
    /// `start, start + step, …` up to `stop` inclusive (with a small slack).
    pub fn values(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..n).map(|i| self.start + i as f64 * self.step).collect()
    }

    fn validate(&self) -> Result<()> {
        let ok = self.start.is_finite() && self.stop.is_finite() && self.step.is_finite();
        if !ok || self.step <= 0.0 || self.stop < self.start {
            return Err(LabError::Config(format!(
                "grid axis {}: need finite start <= stop and step > 0",
                self.name
            )));
        }
        if self.values().len() > 10_000 {
            return Err(LabError::Config(format!("grid axis {} has too many points", self.name)));
        }
        Ok(())
    }
}

impl FromStr for GridAxis {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let (name, range) = s.split_once('=').ok_or("expected name=start:stop:step")?;
        let parts: Vec<&str> = range.split(':').collect();
        let [start, stop, step] = parts[..] else {
            return Err("expected name=start:stop:step".into());
        };
        let num = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("{v}: {e}"));
        Ok(GridAxis {
            name: name.trim().to_string(),
            start: num(start)?,
            stop: num(stop)?,
            step: num(step)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    /// Experiment run in every cell; cells start from that experiment's section.
    pub experiment: Experiment,
    pub grid: Vec<GridAxis>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            experiment: Experiment::Spectral,
            grid: vec![GridAxis {
                name: "p".into(),
                start: -0.5,
                stop: 0.5,
                step: 0.25,
            }],
        }
    }
}

/// Parameters a sweep axis may name, per experiment.
pub fn sweep_parameters(experiment: Experiment) -> &'static [&'static str] {
    match experiment {
        Experiment::Spectral => &["p", "eta", "eps", "dt", "n_grid"],
        Experiment::Density => &["m", "p", "eta", "eps"],
        Experiment::Boundary => &["p", "eta", "jitter", "vertex_offset"],
        Experiment::Sweep => &[],
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub emit_svg: bool,
    /// Worker threads; 0 lets the pool decide.
    pub jobs: usize,
    pub spectral: SpectralSection,
    pub density: DensitySection,
    pub boundary: BoundarySection,
    pub sweep: SweepSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            experiment: Experiment::Spectral,
            seed: 0,
            output_dir: PathBuf::from("ptide-out"),
            emit_svg: false,
            jobs: 0,
            spectral: SpectralSection::default(),
            density: DensitySection::default(),
            boundary: BoundarySection::default(),
            sweep: SweepSection::default(),
        }
    }
}

impl RunConfig {
    /// Parses JSON text. Blank text gives the defaults.
    pub fn from_json(text: &str) -> Result<Self> {
        if text.trim().is_empty() {
            return Ok(Self::default());
        }
        serde_json::from_str(text).map_err(|e| LabError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            LabError::Config(msg) => LabError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Checks everything that can be checked before computing.
    pub fn validate(&self) -> Result<()> {
        let core = |r: ptide_core::Result<()>, what: &str| r.map_err(|e| LabError::Config(format!("{what}: {e}")));
        core(self.spectral.sim.validate(), "spectral.sim")?;
        core(self.density.sim.validate(), "density.sim")?;
        if self.density.m_values.is_empty() || self.density.p_values.is_empty() {
            return Err(LabError::Config(
                "density: m_values and p_values must be non-empty".into(),
            ));
        }
        for &m in &self.density.m_values {
            core(DensityDemoConfig::new(m, 0.0).validate(), "density.m_values")?;
        }
        if self.density.p_values.iter().any(|p| !p.is_finite()) {
            return Err(LabError::Config("density.p_values must be finite".into()));
        }
        core(self.boundary.train.validate(), "boundary.train")?;
        if self.boundary.n_seeds == 0 {
            return Err(LabError::Config("boundary.n_seeds must be positive".into()));
        }
        // (v̂ + ε_v)^p at v̂ = 0 needs a floor once p can go negative.
        let min_p = self
            .boundary
            .p_values
            .iter()
            .copied()
            .chain(schedule_min(&self.boundary.train.schedule))
            .fold(f64::INFINITY, f64::min);
        if min_p < 0.0 && self.boundary.train.optim.eps_v <= 0.0 {
            return Err(LabError::Config(
                "boundary.train.optim.eps_v must be positive when p < 0".into(),
            ));
        }
        if self.sweep.experiment == Experiment::Sweep {
            return Err(LabError::Config("sweep.experiment cannot be sweep".into()));
        }
        let allowed = sweep_parameters(self.sweep.experiment);
        for axis in &self.sweep.grid {
            axis.validate()?;
            if !allowed.contains(&axis.name.as_str()) {
                return Err(LabError::Config(format!(
                    "sweep over {}: unknown parameter {} (expected one of {})",
                    self.sweep.experiment,
                    axis.name,
                    allowed.join(", ")
                )));
            }
        }
        Ok(())
    }
}

/// Smallest exponent a schedule can produce, when it is cheap to know.
fn schedule_min(s: &PSchedule) -> Option<f64> {
    match *s {
        PSchedule::Constant { p } => Some(p),
        PSchedule::CosineTidal { p_mid, p_amp, .. } => Some(p_mid - p_amp.abs()),
        PSchedule::PulseTidal { pulse_p, values, .. } => Some(pulse_p.min(values[0]).min(values[1])),
        PSchedule::Alternating { values, .. } => Some(values[0].min(values[1])),
    }
}
