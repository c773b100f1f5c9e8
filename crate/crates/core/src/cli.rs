//! Command-line surface.
//!
//! Subcommands: `spectrum`, `map`, `fit-orientation`, `steady-state`,
//! `cavity fit|model|extract`. All commands read an optional config file
//! (defaults otherwise), write a single output file given by `--out`, and
//! are fully deterministic: identical config and inputs produce
//! byte-identical outputs.
//!
//! Exit codes: 0 success, 2 config/input error, 3 numeric failure.

use std::f64::consts::TAU;
use std::ffi::OsString;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::cavity::{extract_polarization, fit_s11_curve, read_reflection_csv, s11};
use crate::config::RunConfig;
use crate::dynamics::steady_state;
use crate::error::Error;
use crate::fitting::{fit_orientation, read_points_csv, write_fit_csv, FitOptions};
use crate::hamiltonians::{defect_axes, field_in_defect_frame, nv_hamiltonian, p1_hamiltonian};
use crate::linalg::eigh;
use crate::odmr::synthesize_map;
use crate::spectra::{
    lines_over_sweep, read_lines_csv, unidentified_line, write_lines_csv, Family, System,
};

#[derive(Parser)]
#[command(
    name = "diamond-odmr",
    version,
    about = "Magnetic-resonance spectra, ODMR maps, orientation fits, polarization \
             rate equations and cavity reflection for NV/P1 defects in diamond"
)]
struct Cli {
    /// Config file (flat `key = value`; built-in defaults when omitted)
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output file path
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Worker thread cap (reserved; evaluation is single-threaded)
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    /// Seed for stochastic features (reserved; all commands are deterministic)
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SystemArg {
    Nv,
    NvC13,
    P1,
}

#[derive(Clone, Copy, ValueEnum, Default)]
enum MapFormat {
    #[default]
    Csv,
    Pgm,
}

#[derive(Clone, Copy, ValueEnum, Default)]
enum SweepVar {
    #[default]
    T1oInv,
    B,
}

#[derive(Subcommand)]
enum Command {
    /// Transition-line families of a defect system over the field sweep
    Spectrum {
        #[arg(long, value_enum)]
        system: SystemArg,
        /// Also emit the empirical companion line F_s - F_NV/3 with this
        /// F_s (GHz), derived from the best-aligned NV -1 -> 0 line
        #[arg(long, value_name = "GHZ")]
        unidentified_fs_ghz: Option<f64>,
    },
    /// Synthetic ODMR map rendered from a line CSV
    Map {
        #[arg(long, value_name = "PATH")]
        lines: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        format: MapFormat,
    },
    /// Fit the sample orientation to measured resonance points
    FitOrientation {
        #[arg(long, value_name = "PATH")]
        points: PathBuf,
        /// Unfreeze D and E (4-parameter fit)
        #[arg(long)]
        fit_de: bool,
        /// Include P1 families among the candidate lines
        #[arg(long)]
        include_p1: bool,
    },
    /// Steady state of the coupled polarization rate equations
    SteadyState {
        #[arg(long, value_enum, default_value_t)]
        sweep_var: SweepVar,
    },
    /// Cavity reflection modeling and inversion
    Cavity {
        #[command(subcommand)]
        action: CavityAction,
    },
}

#[derive(Subcommand)]
enum CavityAction {
    /// Fit (f0, gamma1, gamma2) to a reflection sweep CSV
    Fit {
        #[arg(long, value_name = "PATH")]
        data: PathBuf,
    },
    /// Model S11 over the configured frequency span
    Model,
    /// Extract the pumped polarization from measured damping ratios
    Extract {
        #[arg(long, value_name = "PATH")]
        data: PathBuf,
    },
}

enum CliError {
    Usage(String),
    Numeric(String),
}

impl CliError {
    fn usage(e: impl std::fmt::Display) -> Self {
        CliError::Usage(e.to_string())
    }

    fn numeric(e: impl std::fmt::Display) -> Self {
        CliError::Numeric(e.to_string())
    }
}

type CliResult = Result<(), CliError>;

/// Entry point used by the binary and by tests; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.exit_code() == 0 { 0 } else { 2 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(CliError::Usage(message)) => {
            eprintln!("error: {message}");
            2
        }
        Err(CliError::Numeric(message)) => {
            eprintln!("error: {message}");
            3
        }
    }
}

fn execute(cli: Cli) -> CliResult {
    let config = load_config(cli.config.as_deref())?;
    let out = cli
        .out
        .as_deref()
        .ok_or_else(|| CliError::Usage("missing --out PATH".into()))?;

    match cli.command {
        Command::Spectrum {
            system,
            unidentified_fs_ghz,
        } => cmd_spectrum(&config, system, unidentified_fs_ghz, out),
        Command::Map { lines, format } => cmd_map(&config, &lines, format, out),
        Command::FitOrientation {
            points,
            fit_de,
            include_p1,
        } => cmd_fit_orientation(&config, &points, fit_de, include_p1, out),
        Command::SteadyState { sweep_var } => cmd_steady_state(&config, sweep_var, out),
        Command::Cavity { action } => match action {
            CavityAction::Fit { data } => cmd_cavity_fit(&config, &data, out),
            CavityAction::Model => cmd_cavity_model(&config, out),
            CavityAction::Extract { data } => cmd_cavity_extract(&config, &data, out),
        },
    }
}

fn load_config(path: Option<&Path>) -> Result<RunConfig, CliError> {
    match path {
        None => Ok(RunConfig::default()),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
            RunConfig::parse(&text).map_err(CliError::usage)
        }
    }
}

fn open_input(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

fn create_output(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
}

fn write_failed(e: std::io::Error) -> CliError {
    CliError::Usage(format!("write failed: {e}"))
}

/// Defect axis best aligned with the configured field direction.
fn best_aligned_axis(config: &RunConfig) -> usize {
    let n = config.field_config().n_ma();
    let mut best = (0usize, f64::NEG_INFINITY);
    for (k, axis) in defect_axes().iter().enumerate() {
        let c = axis.dot(&n).abs();
        if c > best.1 {
            best = (k, c);
        }
    }
    best.0
}

fn cmd_spectrum(
    config: &RunConfig,
    system: SystemArg,
    unidentified_fs_ghz: Option<f64>,
    out: &Path,
) -> CliResult {
    let system = match system {
        SystemArg::Nv => System::Nv,
        SystemArg::NvC13 => System::NvC13,
        SystemArg::P1 => System::P1,
    };
    let params = config.defect_params();
    let cfg = config.field_config();
    let grid = config.sweep_grid().map_err(CliError::usage)?;
    let mut lines = lines_over_sweep(system, &params, &cfg, &grid).map_err(CliError::numeric)?;

    if let Some(fs_ghz) = unidentified_fs_ghz {
        if system != System::Nv {
            return Err(CliError::Usage(
                "--unidentified-fs-ghz applies to the nv system only".into(),
            ));
        }
        let axis = best_aligned_axis(config);
        let nv_line = lines
            .iter()
            .find(|l| l.axis == axis && l.family == Family::NvZeroToMinus)
            .expect("nv sweep emits the -1 -> 0 family for every axis");
        lines.push(unidentified_line(fs_ghz * 1e9, nv_line));
    }

    let mut writer = create_output(out)?;
    write_lines_csv(&lines, &mut writer).map_err(write_failed)?;
    writer.flush().map_err(write_failed)
}

fn cmd_map(config: &RunConfig, lines_path: &Path, format: MapFormat, out: &Path) -> CliResult {
    let lines = read_lines_csv(&mut open_input(lines_path)?).map_err(CliError::usage)?;
    let f_grid = config.map_f_grid();
    let b_grid = config.sweep_grid().map_err(CliError::usage)?.values();
    let map = synthesize_map(&lines, &f_grid, &b_grid, config.map.linewidth_mhz * 1e6)
        .map_err(CliError::numeric)?;
    let mut writer = create_output(out)?;
    match format {
        MapFormat::Csv => map.write_csv(&mut writer).map_err(write_failed)?,
        MapFormat::Pgm => map.write_pgm(&mut writer).map_err(write_failed)?,
    }
    writer.flush().map_err(write_failed)
}

fn cmd_fit_orientation(
    config: &RunConfig,
    points_path: &Path,
    fit_de: bool,
    include_p1: bool,
    out: &Path,
) -> CliResult {
    let points = read_points_csv(&mut open_input(points_path)?).map_err(CliError::usage)?;
    let options = FitOptions {
        fit_d_e: fit_de,
        include_p1,
        max_iterations: config.fit.max_iterations,
    };
    let initial = (config.fit.initial_theta_deg, config.fit.initial_phi_deg);
    let fit = fit_orientation(&points, initial, &config.defect_params(), &options)
        .map_err(CliError::usage)?;
    let mut writer = create_output(out)?;
    write_fit_csv(&fit, &mut writer).map_err(write_failed)?;
    writer.flush().map_err(write_failed)
}

fn cmd_steady_state(config: &RunConfig, sweep_var: SweepVar, out: &Path) -> CliResult {
    let mut writer = create_output(out)?;
    match sweep_var {
        SweepVar::T1oInv => {
            writeln!(writer, "T1O_inv_hz,Pz_NV,Pz_P1").map_err(write_failed)?;
            let n = config.rates.sweep_points;
            let (lo, hi) = (config.rates.t1o_start_hz, config.rates.t1o_stop_hz);
            for k in 0..n {
                let t1o = lo + (hi - lo) * k as f64 / (n - 1) as f64;
                let mut rates = config.rate_params();
                rates.t_o_nv_inv = t1o;
                let state = steady_state(&rates).map_err(CliError::numeric)?;
                writeln!(writer, "{},{},{}", t1o, state.p_z_nv, state.p_z_p1)
                    .map_err(write_failed)?;
            }
        }
        SweepVar::B => {
            writeln!(writer, "B_tesla,Pz_NV,Pz_P1").map_err(write_failed)?;
            let grid = config.sweep_grid().map_err(CliError::usage)?;
            let axis = defect_axes()[best_aligned_axis(config)];
            let cfg = config.field_config();
            let nv = config.nv_params();
            let p1 = config.p1_params();
            for b in grid.values() {
                let b_defect =
                    field_in_defect_frame(&cfg.with_b(b), &axis).map_err(CliError::numeric)?;
                let nv_levels = eigh(&nv_hamiltonian(&nv, &b_defect))
                    .map_err(CliError::numeric)?
                    .values;
                let p1_levels = eigh(&p1_hamiltonian(&p1, &b_defect).map_err(CliError::numeric)?)
                    .map_err(CliError::numeric)?
                    .values;
                let mut rates = config.rate_params();
                // NV -1 -> 0 transition and the central electronic-like
                // P1 pair (5, 2) at this field
                rates.omega_nv = nv_levels[1] - nv_levels[0];
                rates.omega_p1 = p1_levels[4] - p1_levels[1];
                rates.omega_p = rates.omega_p1;
                rates.p_z_o_nv = config.resolved_pz_o_nv(b);
                let state = steady_state(&rates).map_err(CliError::numeric)?;
                writeln!(writer, "{},{},{}", b, state.p_z_nv, state.p_z_p1)
                    .map_err(write_failed)?;
            }
        }
    }
    writer.flush().map_err(write_failed)
}

fn cmd_cavity_fit(config: &RunConfig, data_path: &Path, out: &Path) -> CliResult {
    let _ = config;
    let data = read_reflection_csv(&mut open_input(data_path)?).map_err(CliError::usage)?;
    let fit = fit_s11_curve(&data).map_err(CliError::numeric)?;
    if fit.coupling_ambiguous {
        eprintln!(
            "note: magnitude-only input; gamma1/gamma2 assignment is ambiguous, \
             reporting the over-coupled convention (gamma1 >= gamma2)"
        );
    }
    let mut writer = create_output(out)?;
    writeln!(writer, "f0_hz,gamma1_hz,gamma2_hz,rms").map_err(write_failed)?;
    writeln!(
        writer,
        "{},{},{},{}",
        fit.params.omega_0 / TAU,
        fit.params.gamma_1 / TAU,
        fit.params.gamma_2 / TAU,
        fit.rms
    )
    .map_err(write_failed)?;
    writer.flush().map_err(write_failed)
}

fn cmd_cavity_model(config: &RunConfig, out: &Path) -> CliResult {
    let params = config.cavity_params();
    let mut writer = create_output(out)?;
    writeln!(writer, "f_hz,re_s11,im_s11").map_err(write_failed)?;
    let n = config.cavity.n_points;
    let f0 = config.cavity.f0_ghz * 1e9;
    let half_span = config.cavity.span_mhz * 1e6 / 2.0;
    for k in 0..n {
        let f = f0 - half_span + 2.0 * half_span * k as f64 / (n - 1) as f64;
        let z = s11(TAU * f, &params);
        writeln!(writer, "{},{},{}", f, z.re, z.im).map_err(write_failed)?;
    }
    writer.flush().map_err(write_failed)
}

fn cmd_cavity_extract(config: &RunConfig, data_path: &Path, out: &Path) -> CliResult {
    if !(config.rates.t1t_nv_hz > 0.0) {
        return Err(CliError::Usage(
            "rates.T1T_NV_hz must be positive for polarization extraction".into(),
        ));
    }
    let rows = read_extract_csv(&mut open_input(data_path)?).map_err(CliError::usage)?;
    let mut writer = create_output(out)?;
    writeln!(writer, "T1O_inv_hz,Pz_SO").map_err(write_failed)?;
    for (t1o_inv, vartheta_measured) in rows {
        let rate_ratio = t1o_inv / config.rates.t1t_nv_hz;
        let p_z_so = extract_polarization(
            vartheta_measured,
            config.cavity.kappa,
            TAU * config.cavity.delta_hz,
            config.cavity.t2_s,
            rate_ratio,
            config.cavity.pz_st,
        )
        .map_err(CliError::numeric)?;
        writeln!(writer, "{},{}", t1o_inv, p_z_so).map_err(write_failed)?;
    }
    writer.flush().map_err(write_failed)
}

/// `T1O_inv_hz,vartheta` rows for the extraction command.
fn read_extract_csv(input: &mut impl std::io::BufRead) -> crate::error::Result<Vec<(f64, f64)>> {
    let mut rows = Vec::new();
    let mut text = String::new();
    let mut line_no = 0usize;
    loop {
        text.clear();
        if input
            .read_line(&mut text)
            .map_err(|e| Error::InvalidArgument(format!("read error: {e}")))?
            == 0
        {
            break;
        }
        line_no += 1;
        let row = text.trim_end_matches(['\n', '\r']);
        if line_no == 1 {
            if row != "T1O_inv_hz,vartheta" {
                return Err(Error::InvalidArgument(format!(
                    "line 1: expected header `T1O_inv_hz,vartheta`, got `{row}`"
                )));
            }
            continue;
        }
        if row.is_empty() {
            continue;
        }
        let (a, b) = row.split_once(',').ok_or_else(|| {
            Error::InvalidArgument(format!("line {line_no}: expected 2 fields"))
        })?;
        let parse_f = |s: &str| -> crate::error::Result<f64> {
            s.parse()
                .map_err(|_| Error::InvalidArgument(format!("line {line_no}: bad number `{s}`")))
        };
        rows.push((parse_f(a)?, parse_f(b)?));
    }
    Ok(rows)
}
