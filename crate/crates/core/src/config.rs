//! Run configuration in a flat `section.key = value` text format.
//!
//! ```text
//! # LRCP pulses, T = 100/m
//! field.delta1 = 1
//! field.delta2 = -1
//! field.t_delay = 100
//! field.phi2 = pi/2
//! grid.n = 256
//! ```
//!
//! Numbers accept products and quotients of literals and `pi` (`3*pi/4`, `-pi/2`).
//! Lists are comma separated. Unknown keys are errors; `meta.*` keys are ignored
//! so configs embedded in output files parse back unchanged.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

use crate::dhw::SolverSettings;
use crate::field::FieldConfig;
use crate::sweep::{Axis, Grid3Spec, GridSpec, SliceSpec};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key `{key}`")]
    DuplicateKey { line: usize, key: String },
    #[error("line {line}: `{key}`: cannot parse `{value}` as {expected}")]
    BadValue {
        line: usize,
        key: String,
        value: String,
        expected: &'static str,
    },
    #[error("invalid {section} configuration: {message}")]
    Invalid { section: &'static str, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanParameter {
    TDelay,
    Phi2,
}

impl ScanParameter {
    pub fn name(self) -> &'static str {
        match self {
            ScanParameter::TDelay => "t_delay",
            ScanParameter::Phi2 => "phi2",
        }
    }

    pub fn apply(self, field: &mut FieldConfig, value: f64) {
        match self {
            ScanParameter::TDelay => field.t_delay = value,
            ScanParameter::Phi2 => field.phi2 = value,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanSpec {
    pub parameter: ScanParameter,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisOptions {
    /// Ring radii; empty selects radii inside the ring support.
    pub radii: Vec<f64>,
    pub min_prominence: f64,
    pub k_min: i64,
    pub k_max: i64,
    /// Radius at which the fringe pitch is measured.
    pub pitch_q: f64,
    /// Rotational symmetry assumed when estimating rotations.
    pub fold: usize,
    /// Spectrum CSV analysed by `analyze`.
    pub input: Option<String>,
    /// Second spectrum CSV; `analyze` reports the rotation of `input` relative to it.
    pub reference: Option<String>,
    /// Compare `compare-table1` peaks against the bundled published positions.
    pub golden: bool,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            radii: Vec::new(),
            min_prominence: crate::analysis::DEFAULT_MIN_PROMINENCE,
            k_min: 33,
            k_max: 43,
            pitch_q: 0.6,
            fold: 1,
            input: None,
            reference: None,
            golden: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictOptions {
    pub q_min: f64,
    pub q_max: f64,
    pub phi_samples: usize,
}

impl Default for PredictOptions {
    fn default() -> Self {
        Self {
            q_min: 0.0,
            q_max: 1.2,
            phi_samples: 361,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub field: FieldConfig,
    pub grid: GridSpec,
    pub solver: SolverSettings,
    pub density: Grid3Spec,
    pub slice: SliceSpec,
    pub analysis: AnalysisOptions,
    pub predict: PredictOptions,
    pub scan: Option<ScanSpec>,
    pub output: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            field: FieldConfig::default(),
            grid: GridSpec::default(),
            solver: SolverSettings::default(),
            density: Grid3Spec::default(),
            slice: SliceSpec {
                axis: Axis::X,
                min: 0.2,
                max: 0.95,
                n: 2000,
            },
            analysis: AnalysisOptions::default(),
            predict: PredictOptions::default(),
            scan: None,
            output: String::from("out"),
        }
    }
}

/// Evaluates `[sign] factor (('*' | '/') factor)*` with factors being literals or `pi`.
pub fn parse_number(text: &str) -> Option<f64> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return None;
    }
    let (sign, body) = match s.as_bytes()[0] {
        b'-' => (-1.0, &s[1..]),
        b'+' => (1.0, &s[1..]),
        _ => (1.0, s.as_str()),
    };
    let mut value = sign;
    let mut op = '*';
    let mut rest = body;
    loop {
        let end = rest.find(['*', '/']).unwrap_or(rest.len());
        let tok = &rest[..end];
        let factor = match tok {
            "pi" | "PI" => PI,
            _ if tok.starts_with(['-', '+']) => return None,
            _ => tok.parse::<f64>().ok()?,
        };
        match op {
            '*' => value *= factor,
            _ => value /= factor,
        }
        if end == rest.len() {
            break;
        }
        op = rest.as_bytes()[end] as char;
        rest = &rest[end + 1..];
    }
    value.is_finite().then_some(value)
}

struct Entry<'a> {
    line: usize,
    key: &'a str,
    value: &'a str,
}

impl Entry<'_> {
    fn bad(&self, expected: &'static str) -> ConfigError {
        ConfigError::BadValue {
            line: self.line,
            key: self.key.to_string(),
            value: self.value.to_string(),
            expected,
        }
    }

    fn number(&self) -> Result<f64, ConfigError> {
        parse_number(self.value).ok_or_else(|| self.bad("a number"))
    }

    fn integer<T: FromStr>(&self) -> Result<T, ConfigError> {
        self.value.trim().parse().map_err(|_| self.bad("an integer"))
    }

    fn list(&self) -> Result<Vec<f64>, ConfigError> {
        self.value
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| parse_number(s).ok_or_else(|| self.bad("a comma-separated list of numbers")))
            .collect()
    }

    fn boolean(&self) -> Result<bool, ConfigError> {
        match self.value.trim() {
            "true" | "yes" | "1" => Ok(true),
            "false" | "no" | "0" => Ok(false),
            _ => Err(self.bad("a boolean")),
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        text.parse()
    }

    /// Parses `(line number, key, value)` triples on top of the defaults.
    fn from_entries<'a>(entries: impl IntoIterator<Item = (usize, &'a str, &'a str)>) -> Result<Self, ConfigError> {
        let mut cfg = RunConfig::default();
        let mut seen: Vec<&str> = Vec::new();
        let mut e1: Option<f64> = None;
        let mut scan_param: Option<ScanParameter> = None;
        let mut scan_values: Option<Vec<f64>> = None;
        for (line, key, value) in entries {
            if key.starts_with("meta.") {
                continue;
            }
            if seen.contains(&key) {
                return Err(ConfigError::DuplicateKey {
                    line,
                    key: key.to_string(),
                });
            }
            seen.push(key);
            let e = Entry { line, key, value };
            let f = &mut cfg.field;
            let g = &mut cfg.grid;
            match key {
                "field.e0" => f.e0 = e.number()?,
                "field.e1" => e1 = Some(e.number()?),
                "field.delta1" => f.delta1 = e.integer()?,
                "field.delta2" => f.delta2 = e.integer()?,
                "field.omega" => f.omega = e.number()?,
                "field.tau" => f.tau = e.number()?,
                "field.phi1" => f.phi1 = e.number()?,
                "field.phi2" => f.phi2 = e.number()?,
                "field.t_delay" => f.t_delay = e.number()?,
                "field.amp2_scale" => f.amp2_scale = e.number()?,
                "grid.n" => {
                    let n = e.integer()?;
                    g.nx = n;
                    g.ny = n;
                }
                "grid.half_width" => {
                    let w = e.number()?;
                    (g.qx_min, g.qx_max, g.qy_min, g.qy_max) = (-w, w, -w, w);
                }
                "grid.nx" => g.nx = e.integer()?,
                "grid.ny" => g.ny = e.integer()?,
                "grid.qx_min" => g.qx_min = e.number()?,
                "grid.qx_max" => g.qx_max = e.number()?,
                "grid.qy_min" => g.qy_min = e.number()?,
                "grid.qy_max" => g.qy_max = e.number()?,
                "grid.qz" => g.qz = e.number()?,
                "solver.rel_tol" => cfg.solver.rel_tol = e.number()?,
                "solver.abs_tol" => cfg.solver.abs_tol = e.number()?,
                "solver.pad" => cfg.solver.pad = e.number()?,
                "solver.max_steps" => cfg.solver.max_steps = e.integer()?,
                "density.min" => cfg.density.min = e.number()?,
                "density.max" => cfg.density.max = e.number()?,
                "density.n" => cfg.density.n = e.integer()?,
                "slice.axis" => {
                    cfg.slice.axis = match value.trim() {
                        "x" | "qx" => Axis::X,
                        "y" | "qy" => Axis::Y,
                        "z" | "qz" => Axis::Z,
                        _ => return Err(e.bad("one of x, y, z")),
                    }
                }
                "slice.min" => cfg.slice.min = e.number()?,
                "slice.max" => cfg.slice.max = e.number()?,
                "slice.n" => cfg.slice.n = e.integer()?,
                "analysis.radii" => cfg.analysis.radii = e.list()?,
                "analysis.min_prominence" => cfg.analysis.min_prominence = e.number()?,
                "analysis.k_min" => cfg.analysis.k_min = e.integer()?,
                "analysis.k_max" => cfg.analysis.k_max = e.integer()?,
                "analysis.pitch_q" => cfg.analysis.pitch_q = e.number()?,
                "analysis.fold" => cfg.analysis.fold = e.integer()?,
                "analysis.input" => cfg.analysis.input = Some(value.trim().to_string()),
                "analysis.reference" => cfg.analysis.reference = Some(value.trim().to_string()),
                "analysis.golden" => cfg.analysis.golden = e.boolean()?,
                "predict.q_min" => cfg.predict.q_min = e.number()?,
                "predict.q_max" => cfg.predict.q_max = e.number()?,
                "predict.phi_samples" => cfg.predict.phi_samples = e.integer()?,
                "scan.parameter" => {
                    scan_param = Some(match value.trim() {
                        "t_delay" | "T" => ScanParameter::TDelay,
                        "phi2" => ScanParameter::Phi2,
                        _ => return Err(e.bad("t_delay or phi2")),
                    })
                }
                "scan.values" => scan_values = Some(e.list()?),
                "output.prefix" => cfg.output = value.trim().to_string(),
                _ => {
                    return Err(ConfigError::UnknownKey {
                        line,
                        key: key.to_string(),
                    })
                }
            }
        }
        if let Some(e1) = e1 {
            if seen.contains(&"field.e0") {
                return Err(ConfigError::Invalid {
                    section: "field",
                    message: "set either field.e0 or field.e1, not both".into(),
                });
            }
            cfg.field.set_amplitude1(e1);
        }
        cfg.scan = match (scan_param, scan_values) {
            (None, None) => None,
            (p, Some(values)) => Some(ScanSpec {
                parameter: p.unwrap_or(ScanParameter::TDelay),
                values,
            }),
            (Some(_), None) => {
                return Err(ConfigError::Invalid {
                    section: "scan",
                    message: "scan.parameter given without scan.values".into(),
                })
            }
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |section, message: String| ConfigError::Invalid { section, message };
        self.field.validate().map_err(|e| invalid("field", e.to_string()))?;
        self.grid.validate().map_err(|e| invalid("grid", e.to_string()))?;
        self.solver.validate().map_err(|e| invalid("solver", e.to_string()))?;
        if self.density.n < 2 || !(self.density.max > self.density.min) {
            return Err(invalid("density", "need n >= 2 and max > min".into()));
        }
        if self.slice.n < 2 || !(self.slice.max > self.slice.min) {
            return Err(invalid("slice", "need n >= 2 and max > min".into()));
        }
        if self.analysis.k_min > self.analysis.k_max {
            return Err(invalid("analysis", "k_min exceeds k_max".into()));
        }
        if self.analysis.fold == 0 {
            return Err(invalid("analysis", "fold must be at least 1".into()));
        }
        if self.predict.phi_samples < 2 || self.predict.q_max <= self.predict.q_min {
            return Err(invalid("predict", "need phi_samples >= 2 and q_max > q_min".into()));
        }
        if let Some(scan) = &self.scan {
            if scan.values.is_empty() {
                return Err(invalid("scan", "scan.values is empty".into()));
            }
        }
        Ok(())
    }

    /// Every setting as `(key, value)`; parsing these back gives an equal config.
    pub fn entries(&self) -> Vec<(String, String)> {
        let num = |v: f64| format!("{v:?}");
        let list = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",");
        let f = &self.field;
        let g = &self.grid;
        let s = &self.solver;
        let a = &self.analysis;
        let mut out: Vec<(&str, String)> = vec![
            ("field.e0", num(f.e0)),
            ("field.delta1", f.delta1.to_string()),
            ("field.delta2", f.delta2.to_string()),
            ("field.omega", num(f.omega)),
            ("field.tau", num(f.tau)),
            ("field.phi1", num(f.phi1)),
            ("field.phi2", num(f.phi2)),
            ("field.t_delay", num(f.t_delay)),
            ("field.amp2_scale", num(f.amp2_scale)),
            ("grid.qx_min", num(g.qx_min)),
            ("grid.qx_max", num(g.qx_max)),
            ("grid.nx", g.nx.to_string()),
            ("grid.qy_min", num(g.qy_min)),
            ("grid.qy_max", num(g.qy_max)),
            ("grid.ny", g.ny.to_string()),
            ("grid.qz", num(g.qz)),
            ("solver.rel_tol", num(s.rel_tol)),
            ("solver.abs_tol", num(s.abs_tol)),
            ("solver.pad", num(s.pad)),
            ("solver.max_steps", s.max_steps.to_string()),
            ("density.min", num(self.density.min)),
            ("density.max", num(self.density.max)),
            ("density.n", self.density.n.to_string()),
            (
                "slice.axis",
                match self.slice.axis {
                    Axis::X => "x",
                    Axis::Y => "y",
                    Axis::Z => "z",
                }
                .to_string(),
            ),
            ("slice.min", num(self.slice.min)),
            ("slice.max", num(self.slice.max)),
            ("slice.n", self.slice.n.to_string()),
            ("analysis.min_prominence", num(a.min_prominence)),
            ("analysis.k_min", a.k_min.to_string()),
            ("analysis.k_max", a.k_max.to_string()),
            ("analysis.pitch_q", num(a.pitch_q)),
            ("analysis.fold", a.fold.to_string()),
            ("analysis.golden", a.golden.to_string()),
            ("predict.q_min", num(self.predict.q_min)),
            ("predict.q_max", num(self.predict.q_max)),
            ("predict.phi_samples", self.predict.phi_samples.to_string()),
            ("output.prefix", self.output.clone()),
        ];
        if !a.radii.is_empty() {
            out.push(("analysis.radii", list(&a.radii)));
        }
        if let Some(p) = &a.input {
            out.push(("analysis.input", p.clone()));
        }
        if let Some(p) = &a.reference {
            out.push(("analysis.reference", p.clone()));
        }
        if let Some(scan) = &self.scan {
            out.push(("scan.parameter", scan.parameter.name().to_string()));
            out.push(("scan.values", list(&scan.values)));
        }
        out.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }

    /// Parses `key = value` pairs such as those returned by [`RunConfig::entries`].
    pub fn from_pairs(pairs: &[(String, String)]) -> Result<Self, ConfigError> {
        Self::from_entries(pairs.iter().enumerate().map(|(i, (k, v))| (i + 1, k.as_str(), v.as_str())))
    }
}

impl FromStr for RunConfig {
    type Err = ConfigError;

    fn from_str(text: &str) -> Result<Self, ConfigError> {
        let mut entries = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: idx + 1,
                text: raw.trim().to_string(),
            })?;
            let key = key.trim();
            if key.is_empty() || key.contains(char::is_whitespace) {
                return Err(ConfigError::Syntax {
                    line: idx + 1,
                    text: raw.trim().to_string(),
                });
            }
            entries.push((idx + 1, key, value.trim()));
        }
        Self::from_entries(entries)
    }
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.entries() {
            writeln!(f, "{k} = {v}")?;
        }
        Ok(())
    }
}
