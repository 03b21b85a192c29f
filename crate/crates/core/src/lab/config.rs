//! JSON experiment configuration.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::adiabatic::{DEFAULT_DT, DEFAULT_T};
use crate::error::{Error, Result};
use crate::noise::NoiseSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    DrmsSweep,
    LambdaDist,
    Convergence,
    Adiabatic,
    HolonomySingle,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::DrmsSweep => "drms-sweep",
            ExperimentKind::LambdaDist => "lambda-dist",
            ExperimentKind::Convergence => "convergence",
            ExperimentKind::Adiabatic => "adiabatic",
            ExperimentKind::HolonomySingle => "holonomy-single",
        }
    }
}

/// Θ₀ values, either listed or evenly spaced on [margin, π − margin].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Theta0Grid {
    List(Vec<f64>),
    Uniform { points: usize, margin: f64 },
}

impl Default for Theta0Grid {
    fn default() -> Self {
        Theta0Grid::Uniform {
            points: 13,
            margin: 0.01,
        }
    }
}

impl Theta0Grid {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Theta0Grid::List(v) => v.clone(),
            Theta0Grid::Uniform { points: 1, margin: _ } => vec![PI / 2.0],
            Theta0Grid::Uniform { points, margin } => {
                let span = PI - 2.0 * margin;
                (0..*points)
                    .map(|k| margin + span * k as f64 / (*points - 1) as f64)
                    .collect()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdiabaticConfig {
    /// Total times to run; successive ratios give the convergence rate.
    #[serde(default = "default_t_list")]
    pub t_total: Vec<f64>,
    #[serde(default = "default_dt")]
    pub dt: f64,
    /// Optional leakage scan over single modes with θ_m = σ(1 + i).
    #[serde(default)]
    pub scan_modes: Vec<u32>,
    #[serde(default = "one")]
    pub scan_sigma: f64,
}

impl Default for AdiabaticConfig {
    fn default() -> Self {
        Self {
            t_total: default_t_list(),
            dt: DEFAULT_DT,
            scan_modes: Vec::new(),
            scan_sigma: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    /// File stem; defaults to the experiment name.
    #[serde(default)]
    pub name: Option<String>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: default_dir(),
            name: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub theta0: Theta0Grid,
    #[serde(default = "default_eps")]
    pub eps: f64,
    /// Single modes swept one at a time, each with per-component σ = `sigma`.
    #[serde(default)]
    pub modes: Vec<u32>,
    #[serde(default = "one")]
    pub sigma: f64,
    /// A full spectrum; used as the noise of the run (combined rows in sweeps).
    #[serde(default)]
    pub noise: Option<NoiseSpec>,
    #[serde(default = "default_realizations")]
    pub realizations: usize,
    #[serde(default)]
    pub seed: u64,
    /// RK4 steps on the circle for every exact integration.
    #[serde(default = "default_middle_steps")]
    pub middle_steps: usize,
    /// lambda-dist: also run the exact integrator on every sample.
    #[serde(default)]
    pub exact: bool,
    #[serde(default = "default_eps_list")]
    pub eps_list: Vec<f64>,
    #[serde(default)]
    pub adiabatic: AdiabaticConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

fn one() -> f64 {
    1.0
}
fn default_eps() -> f64 {
    1e-3
}
fn default_realizations() -> usize {
    2000
}
fn default_middle_steps() -> usize {
    2000
}
fn default_eps_list() -> Vec<f64> {
    vec![4e-3, 2e-3, 1e-3]
}
fn default_t_list() -> Vec<f64> {
    vec![DEFAULT_T, 2.0 * DEFAULT_T]
}
fn default_dt() -> f64 {
    DEFAULT_DT
}
fn default_dir() -> PathBuf {
    std::env::var_os("NQR_LAB_OUT").map_or_else(|| PathBuf::from("out"), PathBuf::from)
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn stem(&self) -> String {
        self.output.name.clone().unwrap_or_else(|| self.experiment.name().to_string())
    }

    pub fn validate(&self) -> Result<()> {
        if self.realizations == 0 {
            return Err(Error::config("realizations must be at least 1"));
        }
        if !(self.eps >= 0.0 && self.eps.is_finite()) {
            return Err(Error::config(format!("eps must be finite and >= 0, got {}", self.eps)));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::config("sigma must be finite and >= 0"));
        }
        if let Theta0Grid::Uniform { points, margin } = self.theta0 {
            if points == 0 {
                return Err(Error::config("theta0 grid needs at least one point"));
            }
            if !(margin > 0.0 && margin < PI / 2.0) {
                return Err(Error::config("theta0 margin must lie in (0, pi/2)"));
            }
        }
        let grid = self.theta0.values();
        if grid.is_empty() {
            return Err(Error::config("theta0 grid is empty"));
        }
        if let Some(t) = grid.iter().find(|t| !(**t > 0.0 && **t < PI)) {
            return Err(Error::config(format!("theta0 = {t} outside (0, pi)")));
        }
        if self.middle_steps < crate::holonomy::MIN_STEPS {
            return Err(Error::config("middle_steps must be at least 100"));
        }
        if let Some(spec) = &self.noise {
            spec.validate()?;
        }
        match self.experiment {
            ExperimentKind::DrmsSweep if self.modes.is_empty() && self.noise.is_none() => {
                return Err(Error::config("drms-sweep needs `modes` or `noise`"));
            }
            ExperimentKind::LambdaDist if self.modes.is_empty() && self.noise.is_none() => {
                return Err(Error::config("lambda-dist needs `modes` or `noise`"));
            }
            ExperimentKind::Convergence => {
                if self.eps_list.len() < 3 {
                    return Err(Error::config("convergence needs at least 3 eps values"));
                }
                if self.eps_list.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
                    return Err(Error::config("eps_list values must be positive"));
                }
                let r = self.eps_list[1] / self.eps_list[0];
                let geometric = self.eps_list.windows(2).all(|w| ((w[1] / w[0]) / r - 1.0).abs() < 1e-9);
                if !geometric {
                    return Err(Error::config("eps_list must be a geometric progression"));
                }
            }
            ExperimentKind::Adiabatic => {
                let a = &self.adiabatic;
                if a.t_total.is_empty() || a.t_total.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
                    return Err(Error::config("adiabatic.t_total must list positive times"));
                }
                if !(a.dt > 0.0 && a.dt.is_finite()) {
                    return Err(Error::config("adiabatic.dt must be positive"));
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// The spectrum used for runs that need a single noise model.
    pub fn run_noise(&self) -> NoiseSpec {
        match &self.noise {
            Some(spec) => spec.clone(),
            None => NoiseSpec::from_modes(self.modes.iter().map(|&m| (m, self.sigma))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_defaults() {
        let c = ExperimentConfig::from_json(r#"{"experiment": "drms-sweep", "modes": [1]}"#).unwrap();
        assert_eq!(c.realizations, 2000);
        let g = c.theta0.values();
        assert_eq!(g.len(), 13);
        assert!((g[6] - PI / 2.0).abs() < 1e-15);
        assert!((g[0] - 0.01).abs() < 1e-15 && (g[12] - (PI - 0.01)).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_values() {
        for bad in [
            r#"{"experiment": "drms-sweep", "modes": [1], "realizations": 0}"#,
            r#"{"experiment": "drms-sweep", "modes": [1], "eps": -1}"#,
            r#"{"experiment": "drms-sweep", "modes": [1], "theta0": [0.0, 1.0]}"#,
            r#"{"experiment": "drms-sweep"}"#,
            r#"{"experiment": "convergence", "eps_list": [1e-3, 2e-3, 5e-3]}"#,
            r#"{"experiment": "drms-sweep", "modes": [1], "bogus": 1}"#,
            r#"{"experiment": "nope"}"#,
        ] {
            let e = ExperimentConfig::from_json(bad).unwrap_err();
            assert!(e.is_config_error(), "{bad}");
        }
    }

    #[test]
    fn noise_forms() {
        let c = ExperimentConfig::from_json(
            r#"{"experiment": "lambda-dist", "noise": {"decay": {"amplitude": 1.0, "alpha": 1.0, "cutoff": 5}}}"#,
        )
        .unwrap();
        assert_eq!(c.run_noise().resolved().unwrap().len(), 5);
    }
}
