use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

use crate::energy::EnergyParams;
use crate::geom::SegmentDistance;
use crate::ransac::{DetectParams, SamplingMode};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("unknown setting {0:?}")]
    UnknownKey(String),
    #[error("bad value {value:?} for {key}: {reason}")]
    BadValue { key: String, value: String, reason: String },
    #[error("{0}")]
    Invalid(String),
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

/// Every setting of a reconstruction run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineConfig {
    pub detect: DetectParams,
    pub energy: EnergyParams,
    /// Box margin as a fraction of the scene's largest extent.
    pub bbox_margin: f64,
    pub seed: u64,
    /// Occupancies within this distance of 0 or 1 count as integral.
    pub solver_tolerance: f64,
    /// Worker threads; 0 uses every core.
    pub threads: usize,
    /// Leave out faces on the bounding box from the output mesh.
    pub suppress_box_faces: bool,
    /// Improve the rounded labeling with single-cell flips on the exact energy.
    pub polish: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            detect: DetectParams::default(),
            energy: EnergyParams::default(),
            bbox_margin: 0.05,
            seed: 0,
            solver_tolerance: 1e-6,
            threads: 0,
            suppress_box_faces: false,
            polish: true,
        }
    }
}

/// Recognized keys, shared by config files and command-line flags.
pub const CONFIG_KEYS: &[&str] = &[
    "epsilon",
    "epsilon-fus",
    "theta-min",
    "theta-fus",
    "p-fus",
    "n-iter",
    "n-max",
    "min-support",
    "exhaustive",
    "distance",
    "rank-by-length",
    "max-failed-rounds",
    "sigma",
    "lambda-vis",
    "lambda-edge",
    "lambda-corner",
    "viewpoint-cells-empty",
    "bbox-margin",
    "seed",
    "solver-tolerance",
    "threads",
    "suppress-box-faces",
    "polish",
];

/// Raw `key = value` settings. Later assignments override earlier ones.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings(BTreeMap<String, String>);

impl Settings {
    /// Parses a flat `key = value` document; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut s = Settings::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or(ConfigError::Syntax { line: i + 1 })?;
            s.set(k.trim(), v.trim())?;
        }
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Io { path: path.display().to_string(), message: e.to_string() })?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let key = key.replace('_', "-");
        if !CONFIG_KEYS.contains(&key.as_str()) {
            return Err(ConfigError::UnknownKey(key));
        }
        self.0.insert(key, value.to_string());
        Ok(())
    }

    pub fn merge(&mut self, other: &Settings) {
        for (k, v) in &other.0 {
            self.0.insert(k.clone(), v.clone());
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// Builds the configuration; unset keys keep their defaults and
    /// `epsilon-fus` follows `3 * epsilon` unless given.
    pub fn to_config(&self) -> Result<PipelineConfig, ConfigError> {
        let mut c = PipelineConfig::default();
        let d = &mut c.detect;
        let e = &mut c.energy;
        if let Some(v) = self.num("epsilon")? {
            d.epsilon = v;
        }
        d.epsilon_fus = self.num("epsilon-fus")?.unwrap_or(3.0 * d.epsilon);
        set(&mut d.theta_min_deg, self.num("theta-min")?);
        set(&mut d.theta_fus_deg, self.num("theta-fus")?);
        set(&mut d.p_fus, self.num("p-fus")?);
        set(&mut d.n_iter, self.num("n-iter")?);
        set(&mut d.n_max, self.num("n-max")?);
        set(&mut d.min_support, self.num("min-support")?);
        if let Some(b) = self.flag("exhaustive")? {
            d.mode = if b { SamplingMode::Exhaustive } else { SamplingMode::Sampled };
        }
        if let Some(v) = self.get("distance") {
            d.distance = match v {
                "max" => SegmentDistance::Max,
                "mean" => SegmentDistance::Mean,
                _ => return Err(bad("distance", v, "expected max or mean")),
            };
        }
        set(&mut d.rank_by_length, self.flag("rank-by-length")?);
        set(&mut d.max_failed_rounds, self.num("max-failed-rounds")?);
        set(&mut e.sigma, self.num("sigma")?);
        set(&mut e.lambda_vis, self.num("lambda-vis")?);
        set(&mut e.lambda_edge, self.num("lambda-edge")?);
        set(&mut e.lambda_corner, self.num("lambda-corner")?);
        set(&mut e.hard_empty_viewpoints, self.flag("viewpoint-cells-empty")?);
        set(&mut c.bbox_margin, self.num("bbox-margin")?);
        set(&mut c.seed, self.num("seed")?);
        set(&mut c.solver_tolerance, self.num("solver-tolerance")?);
        set(&mut c.threads, self.num("threads")?);
        set(&mut c.suppress_box_faces, self.flag("suppress-box-faces")?);
        set(&mut c.polish, self.flag("polish")?);
        c.detect.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if !(c.energy.sigma > 0.0) {
            return Err(ConfigError::Invalid("sigma must be > 0".into()));
        }
        if [c.energy.lambda_vis, c.energy.lambda_edge, c.energy.lambda_corner].iter().any(|&l| !(l >= 0.0)) {
            return Err(ConfigError::Invalid("weights must be nonnegative".into()));
        }
        if !(c.bbox_margin > 0.0) {
            return Err(ConfigError::Invalid("bbox-margin must be > 0".into()));
        }
        Ok(c)
    }

    fn num<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError> {
        self.get(key)
            .map(|v| v.parse::<T>().map_err(|_| bad(key, v, "not a number")))
            .transpose()
    }

    fn flag(&self, key: &str) -> Result<Option<bool>, ConfigError> {
        self.get(key)
            .map(|v| match v {
                "true" | "yes" | "1" | "on" => Ok(true),
                "false" | "no" | "0" | "off" => Ok(false),
                _ => Err(bad(key, v, "expected true or false")),
            })
            .transpose()
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn bad(key: &str, value: &str, reason: &str) -> ConfigError {
    ConfigError::BadValue { key: key.into(), value: value.into(), reason: reason.into() }
}
