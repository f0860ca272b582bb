//! Command-line front end. [`run`] parses arguments, executes one command and
//! returns the process exit status.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::analysis::{self, AnalysisError, AnalysisReport, HarmonicOptions, Table1Options};
use crate::config::{ConfigError, RunConfig};
use crate::io::{self, IoError};
use crate::semiclassical::{self, PredictionError, SpiralPrediction};
use crate::sweep::{self, Axis, SpectrumGrid, SweepError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_SOLVER: i32 = 2;
pub const EXIT_ACCEPTANCE: i32 = 3;

/// Largest accepted distance between computed and published fringe positions.
pub const TABLE1_TOLERANCE: f64 = 5e-3;

#[derive(Debug, Parser)]
#[command(name = "pairvortex", version, about = "Pair production spectra in two delayed circularly polarized pulses")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Momentum spectrum on the configured grid.
    Spectrum(Common),
    /// One-dimensional momentum slice along a coordinate axis.
    Slice(Common),
    /// Three-dimensional number density.
    Density(Common),
    /// Semiclassical fringe positions and spiral curves.
    Predict(Common),
    /// Peaks, harmonics, chirality and rotation of a stored spectrum.
    Analyze(Common),
    /// Axis fringes against the Ramsey prediction and the published positions.
    CompareTable1(Common),
    /// One spectrum per value of `scan.parameter`, plus a summary.
    Scan(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// Configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output path prefix (overrides `output.prefix`).
    #[arg(long)]
    out: Option<String>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Grid resolution `NX,NY`.
    #[arg(long, value_parser = parse_grid)]
    grid: Option<(usize, usize)>,
    /// Solver tolerances `REL,ABS`.
    #[arg(long, value_parser = parse_tol)]
    tol: Option<(f64, f64)>,
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or("expected NX,NY")?;
    Ok((
        a.trim().parse().map_err(|_| format!("bad NX `{a}`"))?,
        b.trim().parse().map_err(|_| format!("bad NY `{b}`"))?,
    ))
}

fn parse_tol(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected REL,ABS")?;
    Ok((
        a.trim().parse().map_err(|_| format!("bad REL `{a}`"))?,
        b.trim().parse().map_err(|_| format!("bad ABS `{b}`"))?,
    ))
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Sweep(#[from] SweepError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Prediction(#[from] PredictionError),
    #[error("{0}")]
    Usage(String),
    #[error("acceptance check failed: {0}")]
    Acceptance(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Sweep(_) | CliError::Analysis(AnalysisError::Sweep(_)) => EXIT_SOLVER,
            CliError::Acceptance(_) => EXIT_ACCEPTANCE,
            _ => EXIT_CONFIG,
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match execute(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn load(common: &Common) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::from_file(&common.config)?;
    if let Some(out) = &common.out {
        cfg.output = out.clone();
    }
    if let Some((nx, ny)) = common.grid {
        cfg.grid = cfg.grid.with_resolution(nx, ny);
    }
    if let Some((rel, abs)) = common.tol {
        cfg.solver.rel_tol = rel;
        cfg.solver.abs_tol = abs;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn execute(command: Command) -> Result<(), CliError> {
    let (common, action): (&Common, fn(&RunConfig) -> Result<(), CliError>) = match &command {
        Command::Spectrum(c) => (c, cmd_spectrum),
        Command::Slice(c) => (c, cmd_slice),
        Command::Density(c) => (c, cmd_density),
        Command::Predict(c) => (c, cmd_predict),
        Command::Analyze(c) => (c, cmd_analyze),
        Command::CompareTable1(c) => (c, cmd_compare_table1),
        Command::Scan(c) => (c, cmd_scan),
    };
    let cfg = load(common)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = common.jobs {
        if n == 0 {
            return Err(CliError::Usage("--jobs must be at least 1".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))?;
    pool.install(|| action(&cfg))
}

fn output_path(cfg: &RunConfig, suffix: &str) -> Result<PathBuf, CliError> {
    let path = PathBuf::from(format!("{}_{suffix}", cfg.output));
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|source| IoError::Io {
            path: parent.display().to_string(),
            source,
        })?;
    }
    Ok(path)
}

fn summarize(spec: &SpectrumGrid) {
    println!("density_2d = {:.6e}", sweep::density_2d(spec));
    match analysis::ring_support(spec, analysis::SUPPORT_FRACTION) {
        Ok(s) => println!("q_in = {:.5}, q_out = {:.5}", s.q_in, s.q_out),
        Err(e) => println!("ring support: {e}"),
    }
}

fn cmd_spectrum(cfg: &RunConfig) -> Result<(), CliError> {
    let spec = sweep::compute_spectrum(&cfg.field, &cfg.grid, &cfg.solver)?;
    let path = output_path(cfg, "spectrum.csv")?;
    io::write_spectrum(&path, &spec, cfg)?;
    println!("wrote {}", path.display());
    summarize(&spec);
    Ok(())
}

fn axis_name(axis: Axis) -> &'static str {
    match axis {
        Axis::X => "qx",
        Axis::Y => "qy",
        Axis::Z => "qz",
    }
}

fn cmd_slice(cfg: &RunConfig) -> Result<(), CliError> {
    let slice = sweep::compute_slice_1d(&cfg.field, &cfg.slice, &cfg.solver)?;
    let path = output_path(cfg, "slice.csv")?;
    let rows: Vec<Vec<f64>> = slice.iter().map(|&(q, f)| vec![q, f]).collect();
    io::write_table(&path, cfg, &[axis_name(cfg.slice.axis), "f"], &rows)?;
    println!("wrote {}", path.display());
    if let Ok(peaks) = analysis::find_peaks(&slice, cfg.analysis.min_prominence) {
        println!("{} peaks", peaks.len());
    }
    Ok(())
}

fn cmd_density(cfg: &RunConfig) -> Result<(), CliError> {
    let n = sweep::density_3d(&cfg.field, &cfg.density, &cfg.solver)?;
    let path = output_path(cfg, "density.csv")?;
    io::write_table(&path, cfg, &["density_3d"], &[vec![n]])?;
    println!("density_3d = {n:.6e}");
    Ok(())
}

fn cmd_predict(cfg: &RunConfig) -> Result<(), CliError> {
    let f = &cfg.field;
    let p = &cfg.predict;
    let m_star = semiclassical::effective_mass(f.amplitude1(), f.omega);
    let ell = semiclassical::photon_number(f.omega, m_star);
    println!("m* = {m_star:.5}, photons = {ell}");
    if let Some(r) = semiclassical::multiphoton_ring_radius(ell, f.omega, m_star) {
        println!("multiphoton ring radius = {r:.5}");
    }
    if !f.has_second_pulse() || f.t_delay <= 0.0 {
        return Ok(());
    }
    let peaks: Vec<Vec<f64>> = semiclassical::ramsey_peaks_in(f.t_delay, p.q_min, p.q_max)
        .into_iter()
        .map(|(k, q)| vec![k as f64, q])
        .collect();
    let path = output_path(cfg, "ramsey.csv")?;
    io::write_table(&path, cfg, &["k", "q"], &peaks)?;
    println!("wrote {} ({} fringes)", path.display(), peaks.len());

    let spiral = SpiralPrediction::new(f.t_delay, ell, f.delta1, f.delta2)?;
    if spiral.arm_count() == 0 {
        println!("co-rotating pulses: concentric rings, no spiral");
        return Ok(());
    }
    println!(
        "{} arms, pitch at q = {} is {:.5}",
        spiral.arm_count(),
        cfg.analysis.pitch_q,
        spiral.spiral_pitch(cfg.analysis.pitch_q)?
    );
    let mut rows = Vec::new();
    for k in spiral.kprime_range(p.q_min, p.q_max) {
        for (phi, q) in spiral.spiral_curve(k, p.phi_samples) {
            if (p.q_min..=p.q_max).contains(&q) {
                rows.push(vec![k as f64, phi, q]);
            }
        }
    }
    let path = output_path(cfg, "spiral.csv")?;
    io::write_table(&path, cfg, &["kprime", "phi", "q"], &rows)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn analysis_radii(spec: &SpectrumGrid, cfg: &RunConfig) -> Result<Vec<f64>, AnalysisError> {
    if cfg.analysis.radii.is_empty() {
        analysis::default_radii(spec)
    } else {
        Ok(cfg.analysis.radii.clone())
    }
}

fn rotation_radii(spec: &SpectrumGrid, cfg: &RunConfig) -> Result<Vec<f64>, AnalysisError> {
    if cfg.analysis.radii.is_empty() {
        analysis::support_radii(spec)
    } else {
        Ok(cfg.analysis.radii.clone())
    }
}

/// `f` along the positive `q_x` axis at grid resolution.
fn axis_profile(spec: &SpectrumGrid) -> Vec<(f64, f64)> {
    let g = &spec.grid;
    let lo = g.qx_min.max(0.0);
    (0..g.nx)
        .map(|i| lo + (g.qx_max - lo) * i as f64 / (g.nx - 1) as f64)
        .filter_map(|q| spec.interpolate(q, 0.0).map(|f| (q, f)))
        .collect()
}

/// Harmonic and support analysis shared by `analyze` and `scan`.
fn report_for(spec: &SpectrumGrid, cfg: &RunConfig) -> Result<AnalysisReport, AnalysisError> {
    let support = analysis::ring_support(spec, analysis::SUPPORT_FRACTION).ok();
    let radii = analysis_radii(spec, cfg)?;
    let sig = analysis::arm_count_and_chirality(spec, &radii, &HarmonicOptions::default())?;
    let mid = radii[radii.len() / 2];
    let profile = analysis::angular_profile(spec, mid, analysis::DEFAULT_RING_SAMPLES)?;
    let harmonics = analysis::angular_harmonics(&profile)
        .into_iter()
        .enumerate()
        .take(17)
        .map(|(k, c)| (k, c.re, c.im))
        .collect();
    let peaks = analysis::find_peaks(&axis_profile(spec), cfg.analysis.min_prominence).unwrap_or_default();
    Ok(AnalysisReport {
        peaks,
        harmonics,
        dominant_harmonic: sig.dominant_harmonic,
        chirality: sig.chirality,
        rotation_estimate: None,
        table1_rows: Vec::new(),
        support,
        density_2d: Some(sweep::density_2d(spec)),
    })
}

fn cmd_analyze(cfg: &RunConfig) -> Result<(), CliError> {
    let input = cfg
        .analysis
        .input
        .as_deref()
        .ok_or_else(|| CliError::Usage("analyze needs `analysis.input`".into()))?;
    let (spec, _) = io::read_spectrum(Path::new(input))?;
    let mut report = report_for(&spec, cfg)?;
    if let Some(reference) = cfg.analysis.reference.as_deref() {
        let (base, _) = io::read_spectrum(Path::new(reference))?;
        let radii = rotation_radii(&base, cfg)?;
        report.rotation_estimate = Some(analysis::estimate_rotation_over(&base, &spec, &radii, cfg.analysis.fold)?);
    }
    let path = output_path(cfg, "analysis.json")?;
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    std::fs::write(&path, json).map_err(|source| IoError::Io {
        path: path.display().to_string(),
        source,
    })?;
    print!("{}", report.to_text());
    Ok(())
}

fn cmd_compare_table1(cfg: &RunConfig) -> Result<(), CliError> {
    let opts = Table1Options {
        slice: cfg.slice,
        k_min: cfg.analysis.k_min,
        k_max: cfg.analysis.k_max,
        min_prominence: cfg.analysis.min_prominence,
    };
    let report = match analysis::table1_report(&cfg.field, &cfg.solver, &opts) {
        Err(e @ AnalysisError::PeakCountMismatch { .. }) => return Err(CliError::Acceptance(e.to_string())),
        other => other?,
    };
    println!("{}", report.to_table());
    let rows: Vec<Vec<f64>> = report
        .rows
        .iter()
        .map(|r| vec![r.index as f64, r.k as f64, r.q_num, r.q_eva, r.diff])
        .collect();
    let path = output_path(cfg, "table1.csv")?;
    io::write_table(&path, cfg, &["i", "k", "q_num", "q_eva", "diff"], &rows)?;
    if !report.systematic_offset_holds() {
        println!("note: some predicted positions lie below the computed ones");
    }
    if cfg.analysis.golden {
        match analysis::max_deviation_from_published(&report) {
            Some(d) if d <= TABLE1_TOLERANCE => println!("max deviation from published positions: {d:.5}"),
            Some(d) => {
                return Err(CliError::Acceptance(format!(
                    "deviation {d:.5} from published positions exceeds {TABLE1_TOLERANCE}"
                )))
            }
            None => return Err(CliError::Acceptance("published fringes missing from the computed table".into())),
        }
    }
    Ok(())
}

fn cmd_scan(cfg: &RunConfig) -> Result<(), CliError> {
    let scan = cfg
        .scan
        .as_ref()
        .ok_or_else(|| CliError::Usage("scan needs `scan.values`".into()))?;
    let mut summary = Vec::new();
    let mut first: Option<SpectrumGrid> = None;
    for (idx, &value) in scan.values.iter().enumerate() {
        let mut field = cfg.field;
        scan.parameter.apply(&mut field, value);
        log::info!("{} = {value}", scan.parameter.name());
        let spec = sweep::compute_spectrum(&field, &cfg.grid, &cfg.solver)?;
        let path = output_path(cfg, &format!("{}_{idx}.csv", scan.parameter.name()))?;
        io::write_spectrum(&path, &spec, cfg)?;
        let report = report_for(&spec, cfg)?;
        let (q_in, q_out) = report.support.map_or((f64::NAN, f64::NAN), |s| (s.q_in, s.q_out));
        let pitch = if report.dominant_harmonic > 0 {
            analysis::measure_pitch(&spec, cfg.analysis.pitch_q, report.dominant_harmonic, 4).unwrap_or(f64::NAN)
        } else {
            f64::NAN
        };
        let rotation = match &first {
            Some(base) => {
                let radii = rotation_radii(base, cfg)?;
                analysis::estimate_rotation_over(base, &spec, &radii, cfg.analysis.fold).unwrap_or(f64::NAN)
            }
            None => 0.0,
        };
        let density = report.density_2d.unwrap_or(f64::NAN);
        println!(
            "{} = {value}: density {density:.6e}, dominant harmonic {}, pitch {pitch:.4}, rotation {rotation:.4}",
            scan.parameter.name(),
            report.dominant_harmonic
        );
        summary.push(vec![value, density, q_in, q_out, report.dominant_harmonic as f64, pitch, rotation]);
        if first.is_none() {
            first = Some(spec);
        }
    }
    let path = output_path(cfg, "scan.csv")?;
    io::write_table(
        &path,
        cfg,
        &[scan.parameter.name(), "density_2d", "q_in", "q_out", "dominant_harmonic", "pitch", "rotation"],
        &summary,
    )?;
    println!("wrote {}", path.display());
    Ok(())
}
