//! CSV artifacts. Every file starts with `# key = value` lines holding the full
//! run configuration and provenance, then a column header, then data rows.
//! Floats are written in shortest round-trip form.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::Serialize;
use thiserror::Error;

use crate::config::{ConfigError, RunConfig};
use crate::dhw::SolverSettings;
use crate::field::FieldConfig;
use crate::sweep::{GridSpec, Provenance, SpectrumGrid};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}, line {line}: {message}")]
    Parse { path: String, line: usize, message: String },
    #[error("{path}: embedded configuration: {source}")]
    Config {
        path: String,
        #[source]
        source: ConfigError,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn header(cfg: &RunConfig, provenance: &Provenance) -> String {
    let mut out = String::new();
    for (k, v) in cfg.entries() {
        let _ = writeln!(out, "# {k} = {v}");
    }
    let _ = writeln!(out, "# meta.created = {}", provenance.created);
    let _ = writeln!(out, "# meta.code_version = {}", provenance.code_version);
    out
}

/// Configuration with the field, grid and solver of `spec` substituted.
pub fn config_for(spec: &SpectrumGrid, base: &RunConfig) -> RunConfig {
    RunConfig {
        field: spec.field,
        grid: spec.grid,
        solver: spec.solver,
        ..base.clone()
    }
}

#[derive(Serialize)]
struct Sidecar<'a> {
    config: serde_json::Map<String, serde_json::Value>,
    field: &'a FieldConfig,
    grid: &'a GridSpec,
    solver: &'a SolverSettings,
    provenance: &'a Provenance,
}

/// Path of the metadata file written next to `path`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

/// Writes the spectrum CSV and its `.meta.json` sidecar.
pub fn write_spectrum(path: &Path, spec: &SpectrumGrid, base: &RunConfig) -> Result<(), IoError> {
    let cfg = config_for(spec, base);
    let mut out = header(&cfg, &spec.provenance);
    out.push_str("qx,qy,f\n");
    let g = &spec.grid;
    for i in 0..g.nx {
        for j in 0..g.ny {
            let _ = writeln!(out, "{:?},{:?},{:?}", g.qx(i), g.qy(j), spec.values[[i, j]]);
        }
    }
    fs::write(path, out).map_err(io_err(path))?;

    let sidecar = Sidecar {
        config: cfg
            .entries()
            .into_iter()
            .map(|(k, v)| (k, serde_json::Value::String(v)))
            .collect(),
        field: &spec.field,
        grid: &spec.grid,
        solver: &spec.solver,
        provenance: &spec.provenance,
    };
    let side = sidecar_path(path);
    let json = serde_json::to_string_pretty(&sidecar).expect("metadata serializes");
    fs::write(&side, json).map_err(io_err(&side))
}

/// Header entries and data rows of one of our CSV files.
pub struct CsvTable {
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn meta_value(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

pub fn read_table(path: &Path) -> Result<CsvTable, IoError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let parse_err = |line: usize, message: String| IoError::Parse {
        path: path.display().to_string(),
        line,
        message,
    };
    let mut meta = Vec::new();
    let mut columns: Option<Vec<String>> = None;
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if let Some(rest) = line.strip_prefix('#') {
            let (k, v) = rest
                .split_once('=')
                .ok_or_else(|| parse_err(line_no, "metadata line without `=`".into()))?;
            meta.push((k.trim().to_string(), v.trim().to_string()));
        } else if line.trim().is_empty() {
            continue;
        } else if columns.is_none() {
            columns = Some(line.split(',').map(|c| c.trim().to_string()).collect());
        } else {
            let row: Vec<f64> = line
                .split(',')
                .map(|c| c.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| parse_err(line_no, format!("bad number: {e}")))?;
            if row.len() != columns.as_ref().map_or(0, Vec::len) {
                return Err(parse_err(line_no, format!("expected {} columns", columns.as_ref().map_or(0, Vec::len))));
            }
            rows.push(row);
        }
    }
    Ok(CsvTable {
        meta,
        columns: columns.ok_or_else(|| parse_err(0, "missing column header".into()))?,
        rows,
    })
}

/// Reads a spectrum CSV back, returning the grid and the embedded configuration.
pub fn read_spectrum(path: &Path) -> Result<(SpectrumGrid, RunConfig), IoError> {
    let table = read_table(path)?;
    let parse_err = |message: String| IoError::Parse {
        path: path.display().to_string(),
        line: 0,
        message,
    };
    let cfg = RunConfig::from_pairs(&table.meta).map_err(|source| IoError::Config {
        path: path.display().to_string(),
        source,
    })?;
    if table.columns != ["qx", "qy", "f"] {
        return Err(parse_err(format!("expected columns qx,qy,f, got {:?}", table.columns)));
    }
    let g = cfg.grid;
    if table.rows.len() != g.len() {
        return Err(parse_err(format!("expected {} rows for a {}x{} grid, got {}", g.len(), g.nx, g.ny, table.rows.len())));
    }
    let values = Array2::from_shape_vec((g.nx, g.ny), table.rows.iter().map(|r| r[2]).collect())
        .expect("row count checked");
    let provenance = Provenance {
        created: table.meta_value("meta.created").unwrap_or_default().to_string(),
        code_version: table.meta_value("meta.code_version").unwrap_or_default().to_string(),
    };
    Ok((
        SpectrumGrid {
            values,
            grid: g,
            field: cfg.field,
            solver: cfg.solver,
            provenance,
        },
        cfg,
    ))
}

/// Writes a generic table with the metadata header.
pub fn write_table(path: &Path, cfg: &RunConfig, columns: &[&str], rows: &[Vec<f64>]) -> Result<(), IoError> {
    let mut out = header(cfg, &Provenance::now());
    out.push_str(&columns.join(","));
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    fs::write(path, out).map_err(io_err(path))
}
