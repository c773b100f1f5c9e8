//! CLI behavior: exit codes, file formats, and cross-format consistency.

mod common;

use std::collections::BTreeSet;
use std::f64::consts::TAU;
use std::process::Command;

use common::{synthetic_nv_points, temp_dir};
use diamond_odmr::cli::run;

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_diamond-odmr"))
}

fn run_args(args: &[&str]) -> i32 {
    let mut full = vec!["diamond-odmr"];
    full.extend_from_slice(args);
    run(full)
}

#[test]
fn help_exits_zero() {
    let status = binary().arg("--help").output().unwrap();
    assert!(status.status.success());
    assert!(!status.stdout.is_empty());

    for sub in ["spectrum", "map", "fit-orientation", "steady-state", "cavity"] {
        let out = binary().args([sub, "--help"]).output().unwrap();
        assert!(out.status.success(), "{sub} --help failed");
    }
}

#[test]
fn unknown_flag_exits_two() {
    let out = binary().args(["spectrum", "--bogus"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn spectrum_line_counts() {
    let dir = temp_dir("line-counts");
    let cfg = dir.join("small.cfg");
    // dense enough for the P1 low-field mixing region
    std::fs::write(&cfg, "sweep.n_points = 150\n").unwrap();

    for (system, expected) in [("nv", 12), ("p1", 36), ("nv-c13", 60)] {
        let out = dir.join(format!("{system}.csv"));
        let code = run_args(&[
            "spectrum",
            "--system",
            system,
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        let text = std::fs::read_to_string(&out).unwrap();
        let mut keys = BTreeSet::new();
        for row in text.lines().skip(1) {
            let mut fields = row.split(',');
            let family = fields.next().unwrap().to_string();
            let axis = fields.next().unwrap().to_string();
            keys.insert((family, axis));
        }
        assert_eq!(keys.len(), expected, "{system}");
    }
}

#[test]
fn bad_config_key_exits_two_with_key_name() {
    let dir = temp_dir("bad-key");
    let cfg = dir.join("bad.cfg");
    std::fs::write(&cfg, "nv.D_ghz = 2.88\nspelling.mistake = 1\n").unwrap();
    let out = binary()
        .args([
            "spectrum",
            "--system",
            "nv",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            dir.join("x.csv").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("spelling.mistake"), "stderr: {stderr}");
    assert!(stderr.contains("line 2"), "stderr: {stderr}");
}

#[test]
fn too_coarse_sweep_exits_three() {
    let dir = temp_dir("coarse-grid");
    let cfg = dir.join("coarse.cfg");
    std::fs::write(&cfg, "sweep.n_points = 40\n").unwrap();
    let code = run_args(&[
        "spectrum",
        "--system",
        "p1",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.join("x.csv").to_str().unwrap(),
    ]);
    assert_eq!(code, 3);
}

#[test]
fn negative_rate_exits_two() {
    let dir = temp_dir("neg-rate");
    let cfg = dir.join("neg.cfg");
    std::fs::write(&cfg, "rates.TI_NV_hz = -3\n").unwrap();
    let code = run_args(&[
        "steady-state",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.join("x.csv").to_str().unwrap(),
    ]);
    assert_eq!(code, 2);
}

#[test]
fn missing_input_file_exits_two() {
    let dir = temp_dir("missing-input");
    let code = run_args(&[
        "fit-orientation",
        "--points",
        dir.join("nope.csv").to_str().unwrap(),
        "--out",
        dir.join("x.csv").to_str().unwrap(),
    ]);
    assert_eq!(code, 2);
}

#[test]
fn missing_out_exits_two() {
    assert_eq!(run_args(&["spectrum", "--system", "nv"]), 2);
}

#[test]
fn unconverged_fit_is_soft_failure() {
    let dir = temp_dir("unconverged");
    let params = diamond_odmr::spectra::DefectParams::default();
    let points = synthetic_nv_points(&params, -4.0, 95.0, &[0.03, 0.06]);
    let mut text = String::from("B_tesla,f_hz,weight\n");
    for p in &points {
        text.push_str(&format!("{},{},1\n", p.b_tesla, p.f_hz));
    }
    let points_path = dir.join("points.csv");
    std::fs::write(&points_path, text).unwrap();

    let cfg = dir.join("tight.cfg");
    std::fs::write(&cfg, "fit.max_iterations = 1\n").unwrap();
    let out = dir.join("fit.csv");
    let code = run_args(&[
        "fit-orientation",
        "--points",
        points_path.to_str().unwrap(),
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let report = std::fs::read_to_string(&out).unwrap();
    assert!(report.lines().nth(1).unwrap().ends_with(",false"), "{report}");
}

#[test]
fn extract_with_zero_rate_ratio_exits_three() {
    let dir = temp_dir("extract-zero");
    let data = dir.join("vartheta.csv");
    std::fs::write(&data, "T1O_inv_hz,vartheta\n0,0.1\n").unwrap();
    let code = run_args(&[
        "cavity",
        "extract",
        "--data",
        data.to_str().unwrap(),
        "--out",
        dir.join("x.csv").to_str().unwrap(),
    ]);
    assert_eq!(code, 3);
}

#[test]
fn extract_matches_library_inversion() {
    let dir = temp_dir("extract-values");
    let data = dir.join("vartheta.csv");
    std::fs::write(&data, "T1O_inv_hz,vartheta\n120,0.1497\n").unwrap();
    let out = dir.join("pol.csv");
    let code = run_args(&[
        "cavity",
        "extract",
        "--data",
        data.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(&out).unwrap();
    let row = text.lines().nth(1).unwrap();
    let p_z_so: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
    let expected = diamond_odmr::cavity::extract_polarization(
        0.1497, 0.1, 0.0, 1e-5, 120.0 / 25.0, -9.7e-3,
    )
    .unwrap();
    assert!((p_z_so - expected).abs() <= 1e-12 * expected.abs());
}

#[test]
fn map_of_empty_lines_is_all_zero_and_formats_agree() {
    let dir = temp_dir("map-empty");
    let lines = dir.join("empty.csv");
    std::fs::write(&lines, "family,axis,B_tesla,f_hz,strength\n").unwrap();
    let cfg = dir.join("small.cfg");
    std::fs::write(&cfg, "sweep.n_points = 8\nmap.n_f = 6\n").unwrap();

    let csv_out = dir.join("map.csv");
    let pgm_out = dir.join("map.pgm");
    for (format, out) in [("csv", &csv_out), ("pgm", &pgm_out)] {
        let code = run_args(&[
            "map",
            "--lines",
            lines.to_str().unwrap(),
            "--format",
            format,
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
    }

    let csv = std::fs::read_to_string(&csv_out).unwrap();
    for row in csv.lines().skip(1) {
        for cell in row.split(',').skip(1) {
            assert_eq!(cell, "0");
        }
    }
    let pgm = std::fs::read(&pgm_out).unwrap();
    assert!(pgm.starts_with(b"P5\n6 8\n255\n"));
    assert!(pgm[pgm.len() - 48..].iter().all(|&b| b == 0));
}

#[test]
fn map_formats_are_pixelwise_consistent() {
    let dir = temp_dir("map-consistency");
    let cfg = dir.join("small.cfg");
    std::fs::write(
        &cfg,
        "sweep.n_points = 30\nmap.n_f = 40\nmap.f_start_ghz = 2.5\nmap.f_stop_ghz = 4.5\n",
    )
    .unwrap();
    let lines = dir.join("lines.csv");
    let code = run_args(&[
        "spectrum",
        "--system",
        "nv",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        lines.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);

    let csv_out = dir.join("map.csv");
    let pgm_out = dir.join("map.pgm");
    for (format, out) in [("csv", &csv_out), ("pgm", &pgm_out)] {
        let code = run_args(&[
            "map",
            "--lines",
            lines.to_str().unwrap(),
            "--format",
            format,
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
    }

    let csv = std::fs::read_to_string(&csv_out).unwrap();
    let values: Vec<f64> = csv
        .lines()
        .skip(1)
        .flat_map(|row| row.split(',').skip(1).map(|c| c.parse().unwrap()))
        .collect();
    let pgm = std::fs::read(&pgm_out).unwrap();
    let pixels = &pgm[pgm.len() - values.len()..];
    let mut nonzero = 0usize;
    for (value, &pixel) in values.iter().zip(pixels) {
        assert_eq!((255.0 * value).round() as u8, pixel);
        nonzero += usize::from(pixel > 0);
    }
    assert!(nonzero > 0, "expected visible lines in the map");
}

#[test]
fn cavity_model_round_trips_through_fit() {
    let dir = temp_dir("cavity-roundtrip");
    let model = dir.join("model.csv");
    assert_eq!(
        run_args(&["cavity", "model", "--out", model.to_str().unwrap()]),
        0
    );
    let fit_out = dir.join("fit.csv");
    assert_eq!(
        run_args(&[
            "cavity",
            "fit",
            "--data",
            model.to_str().unwrap(),
            "--out",
            fit_out.to_str().unwrap(),
        ]),
        0
    );
    let report = std::fs::read_to_string(&fit_out).unwrap();
    assert_eq!(report.lines().next().unwrap(), "f0_hz,gamma1_hz,gamma2_hz,rms");
    let fields: Vec<f64> = report
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .map(|f| f.parse().unwrap())
        .collect();
    assert!((fields[0] - 1.464e9).abs() <= 1e-3 * 1.464e9);
    assert!((fields[1] - 1.15e6).abs() <= 1e-3 * 1.15e6);
    assert!((fields[2] - 0.62e6).abs() <= 1e-3 * 0.62e6);
}

#[test]
fn steady_state_laser_off_point_is_thermal() {
    let dir = temp_dir("steady-thermal");
    let out = dir.join("ss.csv");
    assert_eq!(
        run_args(&["steady-state", "--out", out.to_str().unwrap()]),
        0
    );
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().next().unwrap(), "T1O_inv_hz,Pz_NV,Pz_P1");
    let first: Vec<f64> = text
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .map(|f| f.parse().unwrap())
        .collect();
    assert_eq!(first[0], 0.0);
    let thermal = diamond_odmr::dynamics::thermal_polarization(TAU * 1.464e9, 3.6);
    assert!((first[1] - thermal).abs() <= 1e-9);
    assert!((first[2] - thermal).abs() <= 1e-9);
}

#[test]
fn steady_state_b_sweep_flips_above_anticrossing() {
    let dir = temp_dir("steady-b");
    let cfg = dir.join("pump.cfg");
    std::fs::write(
        &cfg,
        "rates.TO_NV_hz = 200\nsweep.b_start_mt = 60\nsweep.b_stop_mt = 140\nsweep.n_points = 17\n",
    )
    .unwrap();
    let out = dir.join("ss.csv");
    assert_eq!(
        run_args(&[
            "steady-state",
            "--sweep-var",
            "b",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]),
        0
    );
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().next().unwrap(), "B_tesla,Pz_NV,Pz_P1");
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|row| row.split(',').map(|f| f.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 17);
    // pumped NV polarization is negative below the anticrossing and
    // positive above it
    let below = rows.iter().find(|r| r[0] < 0.09).unwrap();
    let above = rows.iter().find(|r| r[0] > 0.12).unwrap();
    assert!(below[1] < 0.0, "below: {below:?}");
    assert!(above[1] > 0.0, "above: {above:?}");
}

#[test]
fn spectrum_appends_unidentified_line() {
    let dir = temp_dir("unidentified");
    let cfg = dir.join("small.cfg");
    std::fs::write(&cfg, "sweep.n_points = 50\n").unwrap();
    let out = dir.join("lines.csv");
    let code = run_args(&[
        "spectrum",
        "--system",
        "nv",
        "--unidentified-fs-ghz",
        "2.169",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.lines().any(|row| row.starts_with("UNIDENTIFIED,")));

    // rejected for non-NV systems
    let code = run_args(&[
        "spectrum",
        "--system",
        "p1",
        "--unidentified-fs-ghz",
        "2.169",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.join("x.csv").to_str().unwrap(),
    ]);
    assert_eq!(code, 2);
}
