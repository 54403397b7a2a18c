//! The `router` command: configuration, subcommand dispatch and CSV output.
//!
//! Every CSV starts with `#`-prefixed metadata lines holding the subcommand
//! and the full resolved configuration, followed by a header row. Numbers
//! are written with 17 significant digits, so identical inputs give
//! byte-identical files.

mod config;

pub use config::{parse_config, ConfigError, MapParam, RunConfig};

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::analysis::{self, Engine, ParamAxis};
use crate::error::Error;
use crate::model::poles;
use crate::validation;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_VALIDATION: i32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Probabilities over an energy grid
    Spectrum,
    /// One probability over an energy × (rabi | n_atoms) grid
    Map,
    /// Poles of the atomic potential
    Poles,
    /// Flat four-way-split bands around each pole
    Flatband,
    /// Search for a drive-controlled switching point
    Switch,
    /// Closed form vs. direct solve on random devices
    Validate,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Map => "map",
            Command::Poles => "poles",
            Command::Flatband => "flatband",
            Command::Switch => "switch",
            Command::Validate => "validate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EngineArg {
    Closed,
    Oracle,
    Auto,
}

#[derive(Debug, Parser)]
#[command(
    name = "router",
    about = "Single-photon routing spectra for coupled resonator waveguides"
)]
struct Args {
    #[command(subcommand)]
    command: Command,
    /// Flat key = value configuration file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override one configuration key (repeatable)
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,
    /// Write CSV here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, global = true)]
    engine: Option<EngineArg>,
    /// Worker threads for sweeps (0 = all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
}

/// Failure of a run, mapped onto the documented exit codes.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(Error),
    Validation(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Numerical(_) => EXIT_NUMERICAL,
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Io(_) => EXIT_IO,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Numerical(_) => "numerical",
            CliError::Validation(_) => "validation",
            CliError::Io(_) => "io",
        }
    }

    /// `error code=<n> kind=<kind> message="<text>"` on a single line.
    pub fn line(&self) -> String {
        let message = match self {
            CliError::Config(m) | CliError::Validation(m) | CliError::Io(m) => m.clone(),
            CliError::Numerical(e) => e.to_string(),
        };
        let message = message.replace(['\n', '\r'], " ").replace('"', "'");
        format!(
            "error code={} kind={} message=\"{}\"",
            self.exit_code(),
            self.kind(),
            message
        )
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(m) => CliError::Config(m),
            other => CliError::Numerical(other),
        }
    }
}

/// Result of a successful dispatch: the CSV text plus an optional summary
/// for stderr.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub csv: String,
    pub summary: Option<String>,
}

fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

fn metadata(command: Command, cfg: &RunConfig) -> String {
    let mut s = format!("# router {}\n", command.as_str());
    for (key, value) in cfg.entries() {
        let _ = writeln!(s, "# {key} = {value}");
    }
    s
}

fn engine_for(cfg: &RunConfig) -> Engine {
    cfg.engine
}

/// Runs one subcommand and renders its CSV. A failed validation suite
/// returns the rendered report inside [`CliError::Validation`]'s summary.
pub fn run(command: Command, cfg: &RunConfig) -> Result<Output, CliError> {
    let dispatch = || dispatch(command, cfg);
    if cfg.threads > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build()
            .map_err(|e| CliError::Config(format!("cannot start {} threads: {e}", cfg.threads)))?;
        pool.install(dispatch)
    } else {
        dispatch()
    }
}

fn dispatch(command: Command, cfg: &RunConfig) -> Result<Output, CliError> {
    let mut csv = metadata(command, cfg);
    let router = &cfg.router;
    let engine = engine_for(cfg);
    let mut summary = None;
    match command {
        Command::Spectrum => {
            let rows = analysis::spectrum(router, cfg.e_min, cfg.e_max, cfg.n_points, engine)?;
            csv.push_str("E,R_a,T_a,T_bback,T_bfwd,schannel\n");
            for r in rows {
                let p = r.probs;
                let channel = r.channel.map_or("na", |b| b.as_str());
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{},{}",
                    fmt_num(r.energy),
                    fmt_num(p.r_a),
                    fmt_num(p.t_a),
                    fmt_num(p.t_b_back),
                    fmt_num(p.t_b_fwd),
                    channel
                );
            }
        }
        Command::Map => {
            let e_grid = analysis::linspace(cfg.e_min, cfg.e_max, cfg.n_points);
            let axis = match cfg.param {
                MapParam::Rabi => ParamAxis::Rabi(analysis::linspace(
                    cfg.param_min,
                    cfg.param_max,
                    cfg.param_points,
                )),
                MapParam::NAtoms => {
                    ParamAxis::NAtoms((cfg.param_min as usize..=cfg.param_max as usize).collect())
                }
            };
            let grid = analysis::map2d(router, &e_grid, &axis, cfg.observable, engine)?;
            csv.push_str("E,param,value\n");
            for (i, e) in grid.e_axis.iter().enumerate() {
                for (j, p) in grid.param_axis.iter().enumerate() {
                    let _ = writeln!(
                        csv,
                        "{},{},{}",
                        fmt_num(*e),
                        fmt_num(*p),
                        fmt_num(grid.values[i][j])
                    );
                }
            }
        }
        Command::Poles => {
            let (hi, lo) = poles(router);
            csv.push_str("label,E\n");
            let _ = writeln!(csv, "E_plus,{}", fmt_num(hi));
            let _ = writeln!(csv, "E_minus,{}", fmt_num(lo));
        }
        Command::Flatband => {
            let reports =
                analysis::flat_band_width(router, cfg.tol, (cfg.e_min, cfg.e_max), engine)?;
            csv.push_str("pole,center,lo,hi,width,midpoint,max_dev,tol\n");
            for r in reports {
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{},{},{},{}",
                    fmt_num(r.pole),
                    fmt_num(r.center),
                    fmt_num(r.lo),
                    fmt_num(r.hi),
                    fmt_num(r.width()),
                    fmt_num(r.midpoint()),
                    fmt_num(r.max_dev),
                    fmt_num(r.tol)
                );
            }
        }
        Command::Switch => {
            let search = analysis::SwitchSearch {
                e_window: (cfg.e_min, cfg.e_max),
                ..cfg.switch.clone()
            };
            let r = analysis::find_switch(router, &search, engine)?;
            csv.push_str("orientation,E_star,omega_off,omega_on,T_a_off,T_bfwd_off,T_a_on,T_bfwd_on,contrast,target_reached\n");
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{},{},{},{},{}",
                r.orientation,
                fmt_num(r.e_star),
                fmt_num(r.omega_off),
                fmt_num(r.omega_on),
                fmt_num(r.t_a_off),
                fmt_num(r.t_bfwd_off),
                fmt_num(r.t_a_on),
                fmt_num(r.t_bfwd_on),
                fmt_num(r.contrast),
                r.target_reached
            );
            if !r.target_reached {
                summary = Some(format!(
                    "target contrast {} not reached; best {:.6} at E = {:.6}",
                    search.target, r.contrast, r.e_star
                ));
            }
        }
        Command::Validate => {
            let samples = validation::random_samples(cfg.samples, cfg.seed);
            let report = validation::validate(&samples, cfg.validation);
            csv.push_str("metric,value\n");
            let rows = [
                ("samples", report.samples.to_string()),
                ("violations", report.violations.to_string()),
                ("max_equivalence", fmt_num(report.max_equivalence)),
                ("max_closed_sum_dev", fmt_num(report.max_closed_sum)),
                ("max_oracle_sum_dev", fmt_num(report.max_oracle_sum)),
                (
                    "max_relative_residual",
                    fmt_num(report.max_relative_residual),
                ),
                (
                    "max_antisymmetric_dev",
                    fmt_num(report.max_antisymmetric_dev),
                ),
                (
                    "max_symmetric_residual",
                    fmt_num(report.max_symmetric_residual),
                ),
            ];
            for (k, v) in rows {
                let _ = writeln!(csv, "{k},{v}");
            }
            if let Some(w) = &report.worst {
                let c = &w.cfg;
                let _ = writeln!(csv, "worst_E,{}", fmt_num(w.energy));
                let _ = writeln!(csv, "worst_n_atoms,{}", c.n_atoms);
                let _ = writeln!(csv, "worst_g,{}", fmt_num(c.g_a));
                let _ = writeln!(csv, "worst_rabi,{}", fmt_num(c.rabi));
                let _ = writeln!(csv, "worst_omega_e,{}", fmt_num(c.omega_e));
                let _ = writeln!(csv, "worst_omega_s,{}", fmt_num(c.omega_s));
            }
            let text = format!(
                "validate: {} samples, {} violations, max |closed - oracle| = {:e}, max |sum - 1| = {:e} (closed) / {:e} (oracle), max relative residual = {:e}",
                report.samples,
                report.violations,
                report.max_equivalence,
                report.max_closed_sum,
                report.max_oracle_sum,
                report.max_relative_residual
            );
            if !report.passed() {
                return Err(CliError::Validation(format!("{text}\n{csv}")));
            }
            summary = Some(text);
        }
    }
    Ok(Output { csv, summary })
}

fn emit(csv: &str, out: Option<&PathBuf>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, csv)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display()))),
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(csv.as_bytes())
                .map_err(|e| CliError::Io(format!("cannot write stdout: {e}")))
        }
    }
}

fn resolve(args: &Args) -> Result<RunConfig, CliError> {
    let text = match &args.config {
        Some(path) => std::fs::read_to_string(path).map_err(|e| {
            CliError::Config(
                ConfigError::Io {
                    path: path.display().to_string(),
                    message: e.to_string(),
                }
                .to_string(),
            )
        })?,
        None => String::new(),
    };
    let mut overrides = args.set.clone();
    if let Some(engine) = args.engine {
        let name = match engine {
            EngineArg::Closed => "closed",
            EngineArg::Oracle => "oracle",
            EngineArg::Auto => "auto",
        };
        overrides.push(format!("engine={name}"));
    }
    if let Some(threads) = args.threads {
        overrides.push(format!("threads={threads}"));
    }
    if let Some(out) = &args.out {
        overrides.push(format!("out={}", out.display()));
    }
    Ok(parse_config(&text, &overrides)?)
}

/// Entry point shared by the binary and the tests; returns the exit code.
pub fn main_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let outcome = resolve(&args).and_then(|cfg| {
        let command = args.command;
        match run(command, &cfg) {
            Ok(output) => {
                emit(&output.csv, cfg.out.as_ref())?;
                if let Some(s) = output.summary {
                    eprintln!("{s}");
                }
                Ok(())
            }
            Err(CliError::Validation(report)) => {
                let (summary, csv) = report.split_once('\n').unwrap_or((&report, ""));
                emit(csv, cfg.out.as_ref())?;
                Err(CliError::Validation(summary.to_string()))
            }
            Err(e) => Err(e),
        }
    });
    match outcome {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("{}", e.line());
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data_rows(csv: &str) -> Vec<&str> {
        csv.lines()
            .filter(|l| !l.starts_with('#'))
            .skip(1)
            .collect()
    }

    #[test]
    fn spectrum_center_row_is_a_quarter_split() {
        let cfg = parse_config(
            "n_atoms = 5\ng = 0.5\ne_min = -1.9\ne_max = 1.9\nn_points = 381\n",
            &[],
        )
        .unwrap();
        let out = run(Command::Spectrum, &cfg).unwrap();
        assert!(out.csv.contains("\nE,R_a,T_a,T_bback,T_bfwd,schannel\n"));
        let row = data_rows(&out.csv)
            .into_iter()
            .find(|l| l.starts_with(&format!("{},", fmt_num(0.0))))
            .unwrap();
        let fields: Vec<&str> = row.split(',').collect();
        for f in &fields[1..5] {
            let v: f64 = f.parse().unwrap();
            assert!((v - 0.25).abs() < 1e-10);
        }
        assert_eq!(fields[5], "evanescent");
    }

    #[test]
    fn poles_rows() {
        let cfg = parse_config("rabi = 0.2\n", &[]).unwrap();
        let out = run(Command::Poles, &cfg).unwrap();
        let rows = data_rows(&out.csv);
        assert_eq!(
            rows,
            vec![
                format!("E_plus,{}", fmt_num(0.2)),
                format!("E_minus,{}", fmt_num(-0.2))
            ]
        );
    }

    #[test]
    fn numbers_have_seventeen_significant_digits() {
        assert_eq!(fmt_num(0.25), "2.5000000000000000e-1");
        let x = 0.1f64 + 0.2;
        assert_eq!(fmt_num(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn metadata_embeds_resolved_config() {
        let cfg = parse_config("", &["rabi=0.85".into(), "n_atoms=12".into()]).unwrap();
        let out = run(Command::Poles, &cfg).unwrap();
        assert!(out.csv.starts_with("# router poles\n"));
        assert!(out.csv.contains(&format!("# rabi = {}\n", fmt_num(0.85))));
        assert!(out.csv.contains("# n_atoms = 12\n"));
        let replay: Vec<String> = out
            .csv
            .lines()
            .skip(1)
            .filter_map(|l| l.strip_prefix("# "))
            .map(|l| l.replacen(" = ", "=", 1))
            .collect();
        assert_eq!(parse_config("", &replay).unwrap(), cfg);
    }

    #[test]
    fn map_long_format() {
        let cfg = parse_config(
            "n_points = 3\ne_min = -1\ne_max = 1\nparam = n_atoms\nparam_min = 1\nparam_max = 4\nobservable = T_a\n",
            &[],
        )
        .unwrap();
        let out = run(Command::Map, &cfg).unwrap();
        let rows = data_rows(&out.csv);
        assert_eq!(rows.len(), 12);
        assert!(out.csv.contains("\nE,param,value\n"));
        assert!(rows[0].starts_with(&format!("{},{},", fmt_num(-1.0), fmt_num(1.0))));
        assert!(rows[3].starts_with(&format!("{},{},", fmt_num(-1.0), fmt_num(4.0))));
    }

    #[test]
    fn error_classes() {
        let cfg = parse_config("e_min = -2.5\n", &[]).unwrap();
        let err = run(Command::Spectrum, &cfg).unwrap_err();
        assert_eq!(err.exit_code(), EXIT_CONFIG);
        let cfg = parse_config(
            "xi_b = 0.25\nengine = oracle\ne_min = -1\ne_max = 1\nn_points = 5\n",
            &[],
        )
        .unwrap();
        let err = run(Command::Spectrum, &cfg).unwrap_err();
        assert_eq!(err.exit_code(), EXIT_NUMERICAL);
        assert!(!err.line().contains('\n'));
        assert!(err.line().starts_with("error code=3 kind=numerical"));
    }

    #[test]
    fn failing_validation_exits_with_four() {
        let cfg = parse_config("samples = 20\nvalidate_tol = 1e-300\n", &[]).unwrap();
        let err = run(Command::Validate, &cfg).unwrap_err();
        assert_eq!(err.exit_code(), EXIT_VALIDATION);
    }
}
