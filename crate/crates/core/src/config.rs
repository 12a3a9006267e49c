//! Experiment configuration: a flat `key = value` text format with `#`
//! comments, plus `key=value` overrides applied on top.
//!
//! ```text
//! # reference run
//! nu = 1
//! alpha = 1
//! epsilon = 1
//! n = 2
//! grid.n_points = 256
//! time.t_samples = 0.25, 0.5, 1
//! ```

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{Field, Grid};
use crate::kernels::NwsParams;
use crate::quadrature::QuadOptions;
use crate::report::VerdictPolicy;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridConfig {
    pub n_points: usize,
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeConfig {
    pub t_end: f64,
    pub dt: f64,
    pub t_samples: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    pub quadrature: f64,
    pub fd_step: f64,
    pub support_factor: f64,
    pub refute_factor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Outputs {
    pub csv_dir: PathBuf,
    /// `None` writes reports to stdout.
    pub report_path: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum InitKind {
    Gaussian,
    Constant,
    Zero,
}

impl FromStr for InitKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(Self::Gaussian),
            "constant" => Ok(Self::Constant),
            "zero" => Ok(Self::Zero),
            other => Err(Error::Config(format!("unknown init.kind '{other}' (gaussian, constant, zero)"))),
        }
    }
}

/// Initial data for `simulate` and the trajectory sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InitConfig {
    pub kind: InitKind,
    pub amplitude: f64,
    pub width: f64,
}

impl InitConfig {
    pub fn field(&self, grid: Grid) -> Result<Field> {
        let (a, w) = (self.amplitude, self.width);
        match self.kind {
            InitKind::Gaussian => Field::from_fn(grid, 0.0, |x| a * (-x * x / (2.0 * w * w)).exp()),
            InitKind::Constant => Field::constant(grid, 0.0, a),
            InitKind::Zero => Ok(Field::zeros(grid, 0.0)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub params: NwsParams,
    pub grid: GridConfig,
    pub time: TimeConfig,
    pub tolerances: Tolerances,
    pub outputs: Outputs,
    pub init: InitConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            params: NwsParams::unit(),
            grid: GridConfig { n_points: 256, length: 32.0 },
            time: TimeConfig { t_end: 1.0, dt: 0.01, t_samples: vec![0.25, 0.5, 1.0] },
            tolerances: Tolerances { quadrature: 1e-12, fd_step: 1e-5, support_factor: 10.0, refute_factor: 100.0 },
            outputs: Outputs { csv_dir: PathBuf::from("out"), report_path: None },
            init: InitConfig { kind: InitKind::Gaussian, amplitude: 0.5, width: 1.0 },
        }
    }
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::Config(format!("{key}: cannot parse '{value}'")))
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>> {
    value.split(',').map(|v| parse_num(key, v.trim())).collect()
}

impl ExperimentConfig {
    /// Defaults overridden by the entries of `text`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut config = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            config
                .apply_override(line)
                .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Applies one `key=value` assignment.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("expected key=value, got '{assignment}'")))?;
        self.set(key.trim(), value.trim())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let p = &mut self.params;
        match key {
            "nu" => p.nu = parse_num(key, value)?,
            "alpha" => p.alpha = parse_num(key, value)?,
            "epsilon" => {
                p.epsilon = parse_num(key, value)?;
                p.gamma = -p.epsilon;
            }
            "n" => p.n = parse_num(key, value)?,
            "grid.n_points" => self.grid.n_points = parse_num(key, value)?,
            "grid.length" => self.grid.length = parse_num(key, value)?,
            "time.t_end" => self.time.t_end = parse_num(key, value)?,
            "time.dt" => self.time.dt = parse_num(key, value)?,
            "time.t_samples" => self.time.t_samples = parse_list(key, value)?,
            "tol.quadrature" => self.tolerances.quadrature = parse_num(key, value)?,
            "tol.fd_step" => self.tolerances.fd_step = parse_num(key, value)?,
            "tol.support_factor" => self.tolerances.support_factor = parse_num(key, value)?,
            "tol.refute_factor" => self.tolerances.refute_factor = parse_num(key, value)?,
            "out.csv_dir" => self.outputs.csv_dir = PathBuf::from(value),
            "out.report_path" => {
                self.outputs.report_path = (!value.is_empty() && value != "-").then(|| PathBuf::from(value))
            }
            "init.kind" => self.init.kind = value.parse()?,
            "init.amplitude" => self.init.amplitude = parse_num(key, value)?,
            "init.width" => self.init.width = parse_num(key, value)?,
            other => return Err(Error::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    /// Checks every invariant; run before any computation.
    pub fn validate(&self) -> Result<()> {
        let p = &self.params;
        NwsParams::new(p.nu, p.alpha, p.epsilon, p.n).map_err(|e| Error::Config(e.to_string()))?;
        Grid::new(self.grid.n_points, self.grid.length).map_err(|e| Error::Config(e.to_string()))?;
        let time = &self.time;
        if !(time.t_end > 0.0 && time.t_end.is_finite()) {
            return Err(Error::Config(format!("time.t_end must be positive, got {}", time.t_end)));
        }
        if !(time.dt > 0.0 && time.dt <= time.t_end) {
            return Err(Error::Config(format!("time.dt must lie in (0, t_end], got {}", time.dt)));
        }
        if time.t_samples.is_empty() || time.t_samples.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
            return Err(Error::Config("time.t_samples must be a nonempty list of positive times".into()));
        }
        let tol = &self.tolerances;
        for (name, v) in [
            ("tol.quadrature", tol.quadrature),
            ("tol.fd_step", tol.fd_step),
            ("tol.support_factor", tol.support_factor),
            ("tol.refute_factor", tol.refute_factor),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if tol.support_factor >= tol.refute_factor {
            return Err(Error::Config("tol.support_factor must be below tol.refute_factor".into()));
        }
        if let Some(&t) = time.t_samples.iter().find(|&&t| t <= 2.0 * tol.fd_step) {
            return Err(Error::Config(format!("t_sample {t} is too close to 0 for tol.fd_step")));
        }
        if !(self.init.amplitude.is_finite() && self.init.width > 0.0) {
            return Err(Error::Config("init.amplitude must be finite and init.width positive".into()));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.grid.n_points, self.grid.length)
    }

    pub fn policy(&self) -> VerdictPolicy {
        VerdictPolicy { support_factor: self.tolerances.support_factor, refute_factor: self.tolerances.refute_factor }
    }

    pub fn quad_options(&self) -> QuadOptions {
        QuadOptions { abs_tol: 0.1 * self.tolerances.quadrature, rel_tol: self.tolerances.quadrature, max_intervals: 2000 }
    }

    /// Canonical text form; parsing it yields this configuration back.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let p = &self.params;
        let samples: Vec<String> = self.time.t_samples.iter().map(f64::to_string).collect();
        let init_kind = match self.init.kind {
            InitKind::Gaussian => "gaussian",
            InitKind::Constant => "constant",
            InitKind::Zero => "zero",
        };
        let report = self.outputs.report_path.as_ref().map_or("-".to_owned(), |p| p.display().to_string());
        let entries: [(&str, String); 18] = [
            ("nu", p.nu.to_string()),
            ("alpha", p.alpha.to_string()),
            ("epsilon", p.epsilon.to_string()),
            ("n", p.n.to_string()),
            ("grid.n_points", self.grid.n_points.to_string()),
            ("grid.length", self.grid.length.to_string()),
            ("time.t_end", self.time.t_end.to_string()),
            ("time.dt", self.time.dt.to_string()),
            ("time.t_samples", samples.join(", ")),
            ("tol.quadrature", self.tolerances.quadrature.to_string()),
            ("tol.fd_step", self.tolerances.fd_step.to_string()),
            ("tol.support_factor", self.tolerances.support_factor.to_string()),
            ("tol.refute_factor", self.tolerances.refute_factor.to_string()),
            ("out.csv_dir", self.outputs.csv_dir.display().to_string()),
            ("out.report_path", report),
            ("init.kind", init_kind.to_owned()),
            ("init.amplitude", self.init.amplitude.to_string()),
            ("init.width", self.init.width.to_string()),
        ];
        for (k, v) in entries {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }
}
