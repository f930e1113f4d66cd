//! Run configuration: JSON in, defaults filled, validated with key paths.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::decay::{Monitor, TheoryTable};
use crate::error::{Error, Result};
use crate::ibvp::{InitSpec, Scheme, SolverConfig};
use crate::inverse_laplace::EvolveOpts;
use crate::spectral::{Grid, GridSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub series: String,
    pub report: String,
    /// Times at which `evolve` writes checkpoints.
    pub checkpoint_times: Vec<f64>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("out"), series: "series.csv".into(), report: "report.json".into(), checkpoint_times: vec![] }
    }
}

/// Samples of the dispersion subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DispersionConfig {
    pub xi1: Vec<f64>,
    pub xi2_max: f64,
    pub samples: usize,
}

impl Default for DispersionConfig {
    fn default() -> Self {
        Self { xi1: vec![0.5, 1.0, 3.0], xi2_max: 5.0, samples: 101 }
    }
}

/// (λ, ξ₁) pairs of the resolvent-check subcommand; λ as [re, im].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ResolventConfig {
    pub lambda: Vec<[f64; 2]>,
    pub xi1: Vec<f64>,
}

impl Default for ResolventConfig {
    fn default() -> Self {
        Self { lambda: vec![[0.5, 0.0], [1.0, 2.0], [0.2, -1.5]], xi1: vec![0.5, 1.0, 3.0] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitConfig {
    /// None: the default window from the grid.
    pub window: Option<[f64; 2]>,
    /// Exponent tolerance of the L² rows.
    pub tol: f64,
    /// Exponent tolerance of the derivative and L∞ rows.
    pub tol_d: f64,
    pub delta: f64,
    pub scheme: Scheme,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self { window: None, tol: 0.15, tol_d: 0.2, delta: TheoryTable::DEFAULT_DELTA, scheme: Scheme::Linear }
    }
}

impl FitConfig {
    pub fn table(&self) -> TheoryTable {
        match self.scheme {
            Scheme::Linear => TheoryTable::linear(self.tol, self.tol_d),
            Scheme::Nonlinear => TheoryTable::nonlinear(self.tol_d, self.delta),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub grid: GridSpec,
    pub solver: SolverConfig,
    pub init: InitSpec,
    pub contour: EvolveOpts,
    pub monitors: Vec<Monitor>,
    pub output: OutputConfig,
    /// Final time of `evolve`.
    pub horizon: f64,
    /// Output times of `linear-evolve`.
    pub times: Vec<f64>,
    pub dispersion: DispersionConfig,
    pub resolvent: ResolventConfig,
    pub fit: FitConfig,
    /// Seed of the initial data; overrides `init.seed`.
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            grid: GridSpec::default(),
            solver: SolverConfig::default(),
            init: InitSpec::default(),
            contour: EvolveOpts::default(),
            monitors: Monitor::defaults(),
            output: OutputConfig::default(),
            horizon: 20.0,
            times: vec![0.5, 1.0, 2.0],
            dispersion: DispersionConfig::default(),
            resolvent: ResolventConfig::default(),
            fit: FitConfig::default(),
            seed: 0,
        }
    }
}

fn positive(v: f64, key: &str) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::config(key, "must be positive"))
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        self.solver.validate()?;
        let grid = Grid::new(self.grid)?;
        self.init_spec().validate(&grid)?;
        positive(self.contour.n_per_unit, "contour.n_per_unit")?;
        positive(self.contour.rel_tol, "contour.rel_tol")?;
        positive(self.contour.div_tol, "contour.div_tol")?;
        if let Some(eps) = self.contour.eps {
            positive(eps, "contour.eps")?;
        }
        if self.monitors.is_empty() {
            return Err(Error::config("monitors", "must not be empty"));
        }
        if self.output.series.is_empty() || self.output.report.is_empty() {
            return Err(Error::config("output", "file names must not be empty"));
        }
        if !(self.horizon.is_finite() && self.horizon >= 0.0) {
            return Err(Error::config("horizon", "must be finite and >= 0"));
        }
        for (i, &t) in self.times.iter().enumerate() {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::config(format!("times[{i}]"), "must be positive"));
            }
        }
        for (i, &t) in self.output.checkpoint_times.iter().enumerate() {
            if !(t.is_finite() && (0.0..=self.horizon).contains(&t)) {
                return Err(Error::config(format!("output.checkpoint_times[{i}]"), "must lie in [0, horizon]"));
            }
        }
        if self.dispersion.samples < 2 {
            return Err(Error::config("dispersion.samples", "must be at least 2"));
        }
        positive(self.dispersion.xi2_max, "dispersion.xi2_max")?;
        for (i, &x) in self.resolvent.xi1.iter().enumerate() {
            if !(x.is_finite() && x != 0.0) {
                return Err(Error::config(format!("resolvent.xi1[{i}]"), "must be finite and nonzero"));
            }
        }
        for (i, l) in self.resolvent.lambda.iter().enumerate() {
            if !(l[0].is_finite() && l[1].is_finite() && l[0] > 0.0) {
                return Err(Error::config(format!("resolvent.lambda[{i}]"), "needs Re lambda > 0"));
            }
        }
        if let Some([a, b]) = self.fit.window {
            if !(a > 0.0 && b > a) {
                return Err(Error::config("fit.window", "needs 0 < start < end"));
            }
        }
        positive(self.fit.tol, "fit.tol")?;
        positive(self.fit.tol_d, "fit.tol_d")?;
        if !(self.fit.delta.is_finite() && self.fit.delta >= 0.0) {
            return Err(Error::config("fit.delta", "must be >= 0"));
        }
        if self.init.seed != 0 && self.init.seed != self.seed {
            return Err(Error::config("init.seed", "conflicts with the top-level seed"));
        }
        Ok(())
    }

    /// Initial data parameters with the top-level seed applied.
    pub fn init_spec(&self) -> InitSpec {
        InitSpec { seed: self.seed, ..self.init.clone() }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let key = e.path().to_string();
            Error::config(if key == "." { String::new() } else { key }, e.into_inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

/// Reads, fills defaults and validates.
pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    RunConfig::from_json(&text)
}

/// Writes the effective configuration next to the outputs.
pub fn write_effective_config(cfg: &RunConfig, dir: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join("config.effective.json");
    std::fs::write(&path, cfg.to_json())?;
    Ok(path)
}
