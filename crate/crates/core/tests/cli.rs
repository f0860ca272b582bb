use std::fs;
use std::path::Path;
use std::process::Command;

use pairvortex::analysis::{AnalysisReport, Chirality};
use pairvortex::cli::{self, EXIT_ACCEPTANCE, EXIT_CONFIG, EXIT_OK};
use pairvortex::config::RunConfig;
use pairvortex::io;
use pairvortex::semiclassical::SpiralPrediction;
use pairvortex::sweep::{GridSpec, Provenance, SpectrumGrid};

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    let prefix = dir.join("out").join(name.trim_end_matches(".cfg"));
    fs::write(&path, format!("{body}\noutput.prefix = {}\n", prefix.display())).unwrap();
    path.display().to_string()
}

fn run(args: &[&str]) -> i32 {
    let mut full = vec!["pairvortex"];
    full.extend_from_slice(args);
    cli::run(full)
}

const SMALL_SINGLE: &str = "field.e1 = 0.1\ngrid.n = 9\ngrid.half_width = 0.9";

#[test]
fn spectrum_file_round_trips_and_reproduces() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "single.cfg", SMALL_SINGLE);
    assert_eq!(run(&["spectrum", "--config", &cfg, "--jobs", "1"]), EXIT_OK);
    let out = dir.path().join("out/single_spectrum.csv");
    let (spec, embedded) = io::read_spectrum(&out).unwrap();
    assert_eq!(spec.values.dim(), (9, 9));
    assert!(spec.values.iter().all(|&v| v > 0.0 && v < 1e-4));
    assert!(io::sidecar_path(&out).exists());

    // Re-run from the configuration embedded in the output.
    let rerun = dir.path().join("rerun.cfg");
    fs::write(&rerun, format!("{embedded}")).unwrap();
    let prefix = dir.path().join("again");
    assert_eq!(
        run(&["spectrum", "--config", rerun.to_str().unwrap(), "--out", prefix.to_str().unwrap()]),
        EXIT_OK
    );
    let data = |p: &Path| -> Vec<String> {
        fs::read_to_string(p)
            .unwrap()
            .lines()
            .filter(|l| !l.starts_with('#'))
            .map(String::from)
            .collect()
    };
    assert_eq!(data(&out), data(&dir.path().join("again_spectrum.csv")));
}

#[test]
fn zero_field_spectrum_is_all_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "zero.cfg", "field.e0 = 0\ngrid.n = 5");
    assert_eq!(run(&["spectrum", "--config", &cfg]), EXIT_OK);
    let (spec, _) = io::read_spectrum(&dir.path().join("out/zero_spectrum.csv")).unwrap();
    assert!(spec.values.iter().all(|&v| v == 0.0));
}

#[test]
fn grid_and_tolerance_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "single.cfg", SMALL_SINGLE);
    assert_eq!(run(&["spectrum", "--config", &cfg, "--grid", "5,3", "--tol", "1e-7,1e-9"]), EXIT_OK);
    let (spec, embedded) = io::read_spectrum(&dir.path().join("out/single_spectrum.csv")).unwrap();
    assert_eq!(spec.values.dim(), (5, 3));
    assert_eq!(embedded.solver.rel_tol, 1e-7);
    assert_eq!(embedded.solver.abs_tol, 1e-9);
}

#[test]
fn slice_and_density() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "single.cfg",
        "field.e1 = 0.1\nslice.n = 11\nslice.min = 0.5\nslice.max = 0.8\ndensity.n = 5\ndensity.min = -0.9\ndensity.max = 0.9",
    );
    assert_eq!(run(&["slice", "--config", &cfg]), EXIT_OK);
    let t = io::read_table(&dir.path().join("out/single_slice.csv")).unwrap();
    assert_eq!(t.columns, ["qx", "f"]);
    assert_eq!(t.rows.len(), 11);
    assert_eq!(run(&["density", "--config", &cfg]), EXIT_OK);
    let t = io::read_table(&dir.path().join("out/single_density.csv")).unwrap();
    assert!(t.rows[0][0] > 0.0);
}

#[test]
fn predict_writes_fringes_and_spirals() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "lrcp.cfg",
        "field.delta2 = -1\nfield.t_delay = 100\nfield.amp2_scale = 1\npredict.q_min = 0\npredict.q_max = 0.95",
    );
    assert_eq!(run(&["predict", "--config", &cfg]), EXIT_OK);
    let ramsey = io::read_table(&dir.path().join("out/lrcp_ramsey.csv")).unwrap();
    let k33 = ramsey.rows.iter().find(|r| r[0] == 33.0).unwrap();
    assert!((k33[1] - 0.27350).abs() < 5e-6);
    let spiral = io::read_table(&dir.path().join("out/lrcp_spiral.csv")).unwrap();
    let p = SpiralPrediction::new(100.0, 4, 1, -1).unwrap();
    let start = spiral.rows.iter().find(|r| r[0] == 32.0 && r[1] == 0.0).unwrap();
    assert!((start[2] - 0.1032).abs() < 1e-4);
    assert_eq!(start[2], p.spiral_radius(0.0, 32).unwrap());

    let co = write_config(dir.path(), "llcp.cfg", "field.t_delay = 100\nfield.amp2_scale = 1");
    assert_eq!(run(&["predict", "--config", &co]), EXIT_OK);
    assert!(!dir.path().join("out/llcp_spiral.csv").exists());

    let linear = write_config(dir.path(), "lin.cfg", "field.delta2 = 0\nfield.t_delay = 100\nfield.amp2_scale = 1");
    assert_eq!(run(&["predict", "--config", &linear]), EXIT_CONFIG);
}

#[test]
fn analyze_a_stored_spiral() {
    let dir = tempfile::tempdir().unwrap();
    let grid = GridSpec::square(1.2, 161);
    let env = SpiralPrediction::new(100.0, 4, 1, -1).unwrap().envelope();
    let values = ndarray::Array2::from_shape_fn((grid.nx, grid.ny), |(i, j)| {
        let (x, y) = (grid.qx(i), grid.qy(j));
        let q = x.hypot(y);
        env.value(q, y.atan2(x)) * (-((q - 0.6) / 0.15).powi(2)).exp()
    });
    let spec = SpectrumGrid {
        values,
        grid,
        field: Default::default(),
        solver: Default::default(),
        provenance: Provenance::now(),
    };
    let input = dir.path().join("spiral.csv");
    io::write_spectrum(&input, &spec, &RunConfig::default()).unwrap();
    let cfg = write_config(
        dir.path(),
        "an.cfg",
        &format!("analysis.input = {0}\nanalysis.reference = {0}\nanalysis.fold = 8", input.display()),
    );
    assert_eq!(run(&["analyze", "--config", &cfg]), EXIT_OK);
    let report: AnalysisReport =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/an_analysis.json")).unwrap()).unwrap();
    assert_eq!(report.dominant_harmonic, 8);
    assert_eq!(report.chirality, Chirality::Counterclockwise);
    assert!(report.rotation_estimate.unwrap().abs() < 1e-9);
    assert!(report.peaks.windows(2).all(|w| w[0].q < w[1].q));

    let missing = write_config(dir.path(), "none.cfg", "");
    assert_eq!(run(&["analyze", "--config", &missing]), EXIT_CONFIG);
}

#[test]
fn scan_writes_one_spectrum_per_value() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "scan.cfg",
        "field.delta2 = -1\nfield.amp2_scale = 1\ngrid.n = 17\nanalysis.radii = 0.5, 0.6, 0.7\nscan.parameter = phi2\nscan.values = 0, pi/2",
    );
    assert_eq!(run(&["scan", "--config", &cfg]), EXIT_OK);
    assert!(dir.path().join("out/scan_phi2_0.csv").exists());
    assert!(dir.path().join("out/scan_phi2_1.csv").exists());
    let summary = io::read_table(&dir.path().join("out/scan_scan.csv")).unwrap();
    assert_eq!(summary.rows.len(), 2);
    assert_eq!(summary.columns[0], "phi2");
    assert_eq!(summary.rows[1][0], std::f64::consts::FRAC_PI_2);

    let no_scan = write_config(dir.path(), "noscan.cfg", "grid.n = 5");
    assert_eq!(run(&["scan", "--config", &no_scan]), EXIT_CONFIG);
}

#[test]
fn compare_table1_flags_wrong_peak_count() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "t1.cfg",
        "field.t_delay = 100\nfield.amp2_scale = 1\nslice.n = 12",
    );
    assert_eq!(run(&["compare-table1", "--config", &cfg]), EXIT_ACCEPTANCE);
    let counter = write_config(dir.path(), "t1c.cfg", "field.delta2 = -1\nfield.t_delay = 100\nfield.amp2_scale = 1");
    assert_eq!(run(&["compare-table1", "--config", &counter]), EXIT_CONFIG);
}

#[test]
fn binary_reports_config_errors_with_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "field.omega = 0.6\nfield.tua = 10\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_pairvortex"))
        .args(["spectrum", "--config", cfg.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_CONFIG));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("line 2") && stderr.contains("field.tua"), "{stderr}");

    let good = dir.path().join("good.cfg");
    fs::write(&good, "grid.n = 3\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_pairvortex"))
        .args(["spectrum", "--config", good.to_str().unwrap(), "--jobs", "0"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_CONFIG));

    let out = Command::new(env!("CARGO_BIN_EXE_pairvortex")).arg("--help").output().unwrap();
    assert_eq!(out.status.code(), Some(EXIT_OK));
    assert!(String::from_utf8_lossy(&out.stdout).contains("compare-table1"));
}
