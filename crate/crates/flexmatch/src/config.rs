//! JSON experiment configuration.
//!
//! Only `mode` and `seed` are required; every other field has a default.
//! ```json
//! { "mode": "sweep", "seed": 42, "n": 400, "k": 2, "trials": 1000 }
//! ```

use std::path::Path;

use flexmatch_core::dualrange::MIN_STEPS;
use flexmatch_core::geom::Parametrization;
use serde::{Deserialize, Serialize};

use crate::family::{family_presets, radius_volume_presets, FamilySpec};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("invalid configuration: `{field}`: {message}")]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: &str, message: String) -> Self {
        Self { field: field.to_string(), message }
    }

    fn within(mut self, prefix: &str) -> Self {
        self.field = format!("{prefix}.{}", self.field);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Sweep,
    RadiusVsVolume,
    Markov,
    Bounds,
    Counterexample,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Geometry {
    #[default]
    Volume,
    Radius,
}

impl From<Geometry> for Parametrization {
    fn from(g: Geometry) -> Self {
        match g {
            Geometry::Volume => Parametrization::Volume,
            Geometry::Radius => Parametrization::Radius,
        }
    }
}

impl Geometry {
    pub fn label(self) -> &'static str {
        match self {
            Geometry::Volume => "volume",
            Geometry::Radius => "radius",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Varied {
    Base,
    Extra,
    P,
}

impl Varied {
    pub fn label(self) -> &'static str {
        match self {
            Varied::Base => "base",
            Varied::Extra => "extra",
            Varied::P => "p",
        }
    }
}

/// One dual-range parameter swept over `values` with the others held.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamSweep {
    pub name: String,
    pub vary: Varied,
    #[serde(default)]
    pub base: f64,
    #[serde(default)]
    pub extra: f64,
    #[serde(default)]
    pub p: f64,
    pub values: Vec<f64>,
}

impl ParamSweep {
    /// `(base, extra, p)` at `value`.
    pub fn at(&self, value: f64) -> (f64, f64, f64) {
        match self.vary {
            Varied::Base => (value, self.extra, self.p),
            Varied::Extra => (self.base, value, self.p),
            Varied::P => (self.base, self.extra, value),
        }
    }

    fn validate(&self) -> Result<(), ConfigError> {
        if self.values.is_empty() {
            return Err(ConfigError::new("values", "at least one value is required".into()));
        }
        for &v in &self.values {
            let (b, e, p) = self.at(v);
            if !(b >= 0.0 && b.is_finite()) {
                return Err(ConfigError::new("base", format!("{b} must be finite and nonnegative")));
            }
            if !(e >= 0.0 && e.is_finite()) {
                return Err(ConfigError::new("extra", format!("{e} must be finite and nonnegative")));
            }
            if !(0.0..=1.0).contains(&p) {
                return Err(ConfigError::new("p", format!("{p} is outside [0, 1]")));
            }
        }
        Ok(())
    }
}

/// Two-cluster instance where uniform allocation matches nothing.
///
/// Supply lives on `[0, eps]` in the first coordinate, demand on
/// `[eps + ell2, eps + ell2 + ell1]`; remaining coordinates are uniform.
/// The uniform arm gives every node the range whose reach is `fill * ell2`;
/// the concentrated arm spends the same budget on nodes of reach `reach`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CounterexampleGeometry {
    pub eps: f64,
    pub ell1: f64,
    pub ell2: f64,
    pub fill: f64,
    pub reach: f64,
}

impl Default for CounterexampleGeometry {
    fn default() -> Self {
        Self { eps: 0.1, ell1: 0.3, ell2: 0.3, fill: 0.9, reach: 0.6 }
    }
}

impl CounterexampleGeometry {
    fn validate(&self) -> Result<(), ConfigError> {
        for (name, v) in [("eps", self.eps), ("ell1", self.ell1), ("ell2", self.ell2), ("reach", self.reach)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ConfigError::new(name, format!("{v} must be positive")));
            }
        }
        if self.eps + self.ell1 + self.ell2 > 1.0 {
            return Err(ConfigError::new("ell1", "eps + ell1 + ell2 must not exceed 1".into()));
        }
        if !(self.fill > 0.0 && self.fill < 1.0) {
            return Err(ConfigError::new("fill", format!("{} is outside (0, 1)", self.fill)));
        }
        if self.reach <= self.ell2 {
            return Err(ConfigError::new("reach", "must exceed the gap ell2".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub seed: u64,
    #[serde(default = "default_n")]
    pub n: usize,
    /// Number of demand points; defaults to `n`.
    #[serde(default)]
    pub m: Option<usize>,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_alphas")]
    pub alphas: Vec<f64>,
    #[serde(default)]
    pub parametrization: Geometry,
    /// Families for `sweep` and the volume arm of `radius-vs-volume`.
    #[serde(default)]
    pub families: Option<Vec<FamilySpec>>,
    #[serde(default)]
    pub radius_families: Option<Vec<FamilySpec>>,
    /// Chain length for `markov`.
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default)]
    pub sweeps: Option<Vec<ParamSweep>>,
    #[serde(default)]
    pub counterexample: CounterexampleGeometry,
}

fn default_n() -> usize {
    400
}

fn default_k() -> usize {
    1
}

fn default_trials() -> usize {
    1000
}

fn default_steps() -> usize {
    1_000_000
}

pub fn default_alphas() -> Vec<f64> {
    linspace(0.0, 1.0, 10)
}

/// `count` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect(),
    }
}

/// Sweeps comparing exact matching with the chain formula, one parameter
/// at a time around `(1, 1, 0.5)`.
pub fn default_markov_sweeps() -> Vec<ParamSweep> {
    vec![
        ParamSweep {
            name: "base".into(),
            vary: Varied::Base,
            base: 0.0,
            extra: 1.0,
            p: 0.5,
            values: linspace(0.1, 3.0, 10),
        },
        ParamSweep {
            name: "extra".into(),
            vary: Varied::Extra,
            base: 1.0,
            extra: 0.0,
            p: 0.5,
            values: linspace(0.0, 3.0, 10),
        },
        ParamSweep {
            name: "p".into(),
            vary: Varied::P,
            base: 1.0,
            extra: 1.0,
            p: 0.0,
            values: linspace(0.05, 0.95, 10),
        },
    ]
}

/// The three bound panels: `extra = 2, p = 0.6` against base;
/// `base = 1/4, p = 1/2` against extra; `base = extra = 1` against p.
pub fn default_bounds_sweeps() -> Vec<ParamSweep> {
    vec![
        ParamSweep {
            name: "vs-base".into(),
            vary: Varied::Base,
            base: 0.0,
            extra: 2.0,
            p: 0.6,
            values: linspace(0.1, 3.0, 10),
        },
        ParamSweep {
            name: "vs-extra".into(),
            vary: Varied::Extra,
            base: 0.25,
            extra: 0.0,
            p: 0.5,
            values: linspace(0.0, 3.0, 10),
        },
        ParamSweep {
            name: "vs-p".into(),
            vary: Varied::P,
            base: 1.0,
            extra: 1.0,
            p: 0.0,
            values: linspace(0.05, 0.95, 10),
        },
    ]
}

impl ExperimentConfig {
    /// Configuration with every optional field at its default.
    pub fn new(mode: Mode, seed: u64) -> Self {
        Self {
            mode,
            seed,
            n: default_n(),
            m: None,
            k: if mode == Mode::RadiusVsVolume { 2 } else { default_k() },
            trials: default_trials(),
            alphas: default_alphas(),
            parametrization: Geometry::Volume,
            families: None,
            radius_families: None,
            steps: default_steps(),
            sweeps: None,
            counterexample: CounterexampleGeometry::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| ConfigError::new("config", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new("config", format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|mut e| {
            e.message = format!("{} ({})", e.message, path.display());
            e
        })
    }

    pub fn demand_count(&self) -> usize {
        self.m.unwrap_or(self.n)
    }

    /// Families for the sweep, or for the volume arm of the comparison.
    pub fn resolved_families(&self) -> Result<Vec<FamilySpec>, ConfigError> {
        if let Some(f) = &self.families {
            return Ok(f.clone());
        }
        match self.mode {
            Mode::RadiusVsVolume => Ok(radius_volume_presets().0.to_vec()),
            _ => family_presets(self.k)
                .map(|t| t.to_vec())
                .ok_or_else(|| ConfigError::new("families", format!("no preset families for k = {}", self.k))),
        }
    }

    pub fn resolved_radius_families(&self) -> Vec<FamilySpec> {
        self.radius_families.clone().unwrap_or_else(|| radius_volume_presets().1.to_vec())
    }

    pub fn resolved_sweeps(&self) -> Vec<ParamSweep> {
        match (&self.sweeps, self.mode) {
            (Some(s), _) => s.clone(),
            (None, Mode::Bounds) => default_bounds_sweeps(),
            (None, _) => default_markov_sweeps(),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n == 0 {
            return Err(ConfigError::new("n", "must be at least 1".into()));
        }
        if self.demand_count() == 0 {
            return Err(ConfigError::new("m", "must be at least 1".into()));
        }
        if self.k == 0 {
            return Err(ConfigError::new("k", "must be at least 1".into()));
        }
        if self.trials == 0 {
            return Err(ConfigError::new("trials", "must be at least 1".into()));
        }
        match self.mode {
            Mode::Sweep | Mode::RadiusVsVolume => {
                if self.alphas.is_empty() {
                    return Err(ConfigError::new("alphas", "at least one value is required".into()));
                }
                if self.alphas.iter().any(|a| !(0.0..=1.0).contains(a)) {
                    return Err(ConfigError::new("alphas", "values must lie in [0, 1]".into()));
                }
                if self.alphas.windows(2).any(|w| !(w[0] < w[1])) {
                    return Err(ConfigError::new("alphas", "values must be strictly increasing".into()));
                }
                for (i, f) in self.resolved_families()?.iter().enumerate() {
                    f.validate().map_err(|e| e.within(&format!("families[{i}]")))?;
                }
                if self.mode == Mode::RadiusVsVolume {
                    if self.k != 2 {
                        return Err(ConfigError::new("k", format!("radius-vs-volume runs at k = 2, got {}", self.k)));
                    }
                    let radius = self.resolved_radius_families();
                    if radius.len() != self.resolved_families()?.len() {
                        return Err(ConfigError::new("radius_families", "must pair one-to-one with families".into()));
                    }
                    for (i, f) in radius.iter().enumerate() {
                        f.validate().map_err(|e| e.within(&format!("radius_families[{i}]")))?;
                    }
                }
            }
            Mode::Markov | Mode::Bounds => {
                if self.k != 1 {
                    return Err(ConfigError::new(
                        "k",
                        format!("the dual-range experiments run at k = 1, got {}", self.k),
                    ));
                }
                if self.mode == Mode::Markov && self.steps < MIN_STEPS {
                    return Err(ConfigError::new("steps", format!("must be at least {MIN_STEPS}")));
                }
                for (i, s) in self.resolved_sweeps().iter().enumerate() {
                    s.validate().map_err(|e| e.within(&format!("sweeps[{i}]")))?;
                }
            }
            Mode::Counterexample => {
                self.counterexample.validate().map_err(|e| e.within("counterexample"))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_fills_defaults() {
        let cfg = ExperimentConfig::from_json(r#"{"mode": "sweep", "seed": 3}"#).unwrap();
        assert_eq!(cfg, ExperimentConfig::new(Mode::Sweep, 3));
        assert_eq!(cfg.alphas.len(), 10);
        assert_eq!(cfg.resolved_families().unwrap().len(), 3);
    }

    #[test]
    fn seed_is_required() {
        let err = ExperimentConfig::from_json(r#"{"mode": "sweep"}"#).unwrap_err();
        assert!(err.message.contains("seed"), "{err}");
    }

    #[test]
    fn errors_name_the_field() {
        let err = ExperimentConfig::from_json(r#"{"mode": "sweep", "seed": 1, "trials": 0}"#).unwrap_err();
        assert_eq!(err.field, "trials");
        let err = ExperimentConfig::from_json(r#"{"mode": "sweep", "seed": 1, "alphas": [0.5, 0.2]}"#).unwrap_err();
        assert_eq!(err.field, "alphas");
        let text = r#"{"mode": "sweep", "seed": 1, "families": [
            {"kind": "fixed-extra", "mean_range": 0.1, "lo": 0.0, "hi": 0.5, "fixed": 1.0}]}"#;
        let err = ExperimentConfig::from_json(text).unwrap_err();
        assert_eq!(err.field, "families[0].mean_range");
        let err = ExperimentConfig::from_json(r#"{"mode": "markov", "seed": 1, "steps": 10}"#).unwrap_err();
        assert_eq!(err.field, "steps");
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(ExperimentConfig::from_json(r#"{"mode": "sweep", "seed": 1, "trails": 5}"#).is_err());
    }

    #[test]
    fn linspace_endpoints() {
        assert_eq!(linspace(0.0, 1.0, 3), vec![0.0, 0.5, 1.0]);
        assert_eq!(linspace(2.0, 5.0, 1), vec![2.0]);
    }
}
