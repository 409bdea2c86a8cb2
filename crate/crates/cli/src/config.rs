//! Experiment configuration: defaults, config-file parsing, flag overrides,
//! and validation.
//!
//! Precedence is defaults < config file < command-line flags. The file format
//! is flat `key=value` text with `#` comments; keys mirror the flag names
//! with underscores. Unknown keys are rejected so typos surface immediately.

use std::fmt;
use std::path::PathBuf;

use namegame_core::{InitMode, Rounding};

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub width: Option<u32>,
    pub height: Option<u32>,
    pub radius: Option<u32>,
    pub p: Option<f64>,
    pub steps_factor: u64,
    pub seed: u64,
    pub init: InitMode,
    pub rounding: Rounding,
    pub p_values: Vec<f64>,
    pub radii: Vec<u32>,
    pub replicates: u32,
    pub threshold: f64,
    pub refine_step: f64,
    pub workers: usize,
    pub out: PathBuf,
    pub sample_stride: Option<u64>,
    pub progress: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            width: None,
            height: None,
            radius: None,
            p: None,
            steps_factor: 200,
            seed: 0,
            init: InitMode::Unique,
            rounding: Rounding::Floor,
            p_values: (0..=10).map(|k| k as f64 / 10.0).collect(),
            radii: vec![1, 2, 3, 4],
            replicates: 10,
            threshold: 0.5,
            refine_step: 0.01,
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            out: PathBuf::from("out"),
            sample_stride: None,
            progress: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

pub fn parse_init(s: &str) -> Result<InitMode, ConfigError> {
    match s {
        "unique" => Ok(InitMode::Unique),
        "uniform" => Ok(InitMode::UniformRandom),
        other => Err(err(format!(
            "init must be \"unique\" or \"uniform\", got \"{other}\""
        ))),
    }
}

pub fn parse_rounding(s: &str) -> Result<Rounding, ConfigError> {
    match s {
        "floor" => Ok(Rounding::Floor),
        "round" => Ok(Rounding::Round),
        "ceil" => Ok(Rounding::Ceil),
        other => Err(err(format!(
            "rounding must be \"floor\", \"round\" or \"ceil\", got \"{other}\""
        ))),
    }
}

fn init_name(mode: InitMode) -> &'static str {
    match mode {
        InitMode::Unique => "unique",
        InitMode::UniformRandom => "uniform",
    }
}

fn rounding_name(mode: Rounding) -> &'static str {
    match mode {
        Rounding::Floor => "floor",
        Rounding::Round => "round",
        Rounding::Ceil => "ceil",
    }
}

fn parse_list<T: std::str::FromStr>(value: &str, key: &str) -> Result<Vec<T>, ConfigError> {
    value
        .split(',')
        .map(|item| {
            item.trim()
                .parse::<T>()
                .map_err(|_| err(format!("{key}: cannot parse \"{}\"", item.trim())))
        })
        .collect()
}

impl ExperimentConfig {
    /// Applies one `key=value` assignment (from a config file).
    fn apply(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let bad = |what: &str| err(format!("{key}: cannot parse \"{what}\""));
        match key {
            "width" => self.width = Some(value.parse().map_err(|_| bad(value))?),
            "height" => self.height = Some(value.parse().map_err(|_| bad(value))?),
            "radius" => self.radius = Some(value.parse().map_err(|_| bad(value))?),
            "p" => self.p = Some(value.parse().map_err(|_| bad(value))?),
            "steps_factor" => self.steps_factor = value.parse().map_err(|_| bad(value))?,
            "seed" => self.seed = value.parse().map_err(|_| bad(value))?,
            "init" => self.init = parse_init(value)?,
            "rounding" => self.rounding = parse_rounding(value)?,
            "p_values" => self.p_values = parse_list(value, key)?,
            "radii" => self.radii = parse_list(value, key)?,
            "replicates" => self.replicates = value.parse().map_err(|_| bad(value))?,
            "threshold" => self.threshold = value.parse().map_err(|_| bad(value))?,
            "refine_step" => self.refine_step = value.parse().map_err(|_| bad(value))?,
            "workers" => self.workers = value.parse().map_err(|_| bad(value))?,
            "out" => self.out = PathBuf::from(value),
            "sample_stride" => self.sample_stride = Some(value.parse().map_err(|_| bad(value))?),
            "progress" => self.progress = value.parse().map_err(|_| bad(value))?,
            other => return Err(err(format!("unknown config key \"{other}\""))),
        }
        Ok(())
    }

    /// Parses a config file's text over the current values.
    pub fn apply_file(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("line {}: expected key=value", i + 1)))?;
            self.apply(key.trim(), value.trim())
                .map_err(|e| err(format!("line {}: {e}", i + 1)))?;
        }
        Ok(())
    }

    /// Range checks shared by every command.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if let Some(p) = self.p {
            if !(0.0..=1.0).contains(&p) {
                return Err(err(format!("p = {p} out of range [0, 1]")));
            }
        }
        for &p in &self.p_values {
            if !(0.0..=1.0).contains(&p) {
                return Err(err(format!("p_values entry {p} out of range [0, 1]")));
            }
        }
        if let (Some(w), Some(h)) = (self.width, self.height) {
            if w < 2 || h < 2 {
                return Err(err(format!("lattice {w}x{h}: sides must be at least 2")));
            }
        }
        // The 2r+1 bound is checked per command against the radii it
        // actually uses; see check_lattice.
        if let Some(r) = self.radius {
            self.check_lattice(r)?;
        }
        if self.steps_factor == 0 {
            return Err(err("steps_factor must be at least 1".to_string()));
        }
        if self.replicates == 0 {
            return Err(err("replicates must be at least 1".to_string()));
        }
        if self.threshold.is_nan() || self.threshold <= 0.0 || self.threshold >= 1.0 {
            return Err(err(format!(
                "threshold = {} out of range (0, 1)",
                self.threshold
            )));
        }
        if self.refine_step.is_nan() || self.refine_step <= 0.0 {
            return Err(err(format!(
                "refine_step = {} must be positive",
                self.refine_step
            )));
        }
        if self.workers == 0 {
            return Err(err("workers must be at least 1".to_string()));
        }
        Ok(())
    }

    /// Checks one radius against the lattice dimensions (when known).
    pub fn check_lattice(&self, radius: u32) -> Result<(), ConfigError> {
        if radius < 1 {
            return Err(err("radius must be at least 1".to_string()));
        }
        if let (Some(w), Some(h)) = (self.width, self.height) {
            if 2 * radius + 1 > w.min(h) {
                return Err(err(format!(
                    "radius {radius}: 2r+1 = {} exceeds lattice side {}",
                    2 * radius + 1,
                    w.min(h)
                )));
            }
        }
        Ok(())
    }

    pub fn require_dims(&self) -> Result<(u32, u32), ConfigError> {
        match (self.width, self.height) {
            (Some(w), Some(h)) => Ok((w, h)),
            _ => Err(err("width and height are required".to_string())),
        }
    }

    pub fn require_radius(&self) -> Result<u32, ConfigError> {
        self.radius
            .ok_or_else(|| err("radius is required".to_string()))
    }

    pub fn require_p(&self) -> Result<f64, ConfigError> {
        self.p.ok_or_else(|| err("p is required".to_string()))
    }

    /// Serializes every setting as config-file text. Re-parsing this over any
    /// base reproduces the config exactly.
    pub fn to_key_values(&self) -> String {
        let mut out = String::new();
        let mut push = |k: &str, v: String| out.push_str(&format!("{k}={v}\n"));
        if let Some(w) = self.width {
            push("width", w.to_string());
        }
        if let Some(h) = self.height {
            push("height", h.to_string());
        }
        if let Some(r) = self.radius {
            push("radius", r.to_string());
        }
        if let Some(p) = self.p {
            push("p", p.to_string());
        }
        push("steps_factor", self.steps_factor.to_string());
        push("seed", self.seed.to_string());
        push("init", init_name(self.init).to_string());
        push("rounding", rounding_name(self.rounding).to_string());
        push(
            "p_values",
            self.p_values
                .iter()
                .map(f64::to_string)
                .collect::<Vec<_>>()
                .join(","),
        );
        push(
            "radii",
            self.radii
                .iter()
                .map(u32::to_string)
                .collect::<Vec<_>>()
                .join(","),
        );
        push("replicates", self.replicates.to_string());
        push("threshold", self.threshold.to_string());
        push("refine_step", self.refine_step.to_string());
        push("workers", self.workers.to_string());
        push("out", self.out.display().to_string());
        if let Some(s) = self.sample_stride {
            push("sample_stride", s.to_string());
        }
        push("progress", self.progress.to_string());
        out
    }
}
