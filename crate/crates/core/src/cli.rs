//! Command-line front end. Every subcommand prints JSON on stdout; `sweep`
//! also writes CSV. Exit codes: 0 success, 1 usage or configuration error,
//! 2 numerical or validation failure.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::classifier::{classify_unweighted, classify_weighted, Exponent, ExponentPair};
use crate::error::{Error, Result};
use crate::gaussian::mixed_norm_dilated;
use crate::harness::{load_matrix, run_sweep, run_verify, SweepConfig, VerifyOptions};
use crate::linalg::default_tolerance;
use crate::symplectic::{factorize, Factorization};
use crate::tfa::{io, Grid};
use crate::weights::WeightSpec;

#[derive(Debug, Parser)]
#[command(name = "metaplectic", version, about = "Boundedness of metaplectic operators on mixed-norm modulation spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Classify a symplectic matrix for exponents (p, q).
    Check {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        p: Exponent,
        #[arg(long)]
        q: Exponent,
        /// Weight JSON `{family, s, t, d}`.
        #[arg(long)]
        weight: Option<PathBuf>,
    },
    /// Factor into quasi-permutations, a lower shear, a dilation and an upper shear.
    Factor {
        #[arg(long)]
        matrix: PathBuf,
    },
    /// Closed-form mixed norm of the dilated Gaussian profile.
    Norm {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        p: Exponent,
        #[arg(long)]
        q: Exponent,
    },
    /// Sweep eps, write CSV and fit the growth exponent.
    ///
    /// CSV goes to `--csv` (or the config's `csv`), else stdout. The report
    /// goes to `--report` (or the config's `report`); otherwise to stdout,
    /// or to stderr when stdout already carries the CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Run the grid cross-checks for a matrix and report them as JSON.
    Verify {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, default_value = "1")]
        p: Exponent,
        #[arg(long, default_value = "2")]
        q: Exponent,
        #[arg(long, default_value_t = 2.0)]
        eps: f64,
        /// Samples per axis; the default grid depends on d.
        #[arg(long)]
        n: Option<usize>,
        /// Box length.
        #[arg(long = "T")]
        t: Option<f64>,
        /// Binary signal (with JSON sidecar) for the covariance check.
        #[arg(long, requires = "window")]
        signal: Option<PathBuf>,
        #[arg(long, requires = "signal")]
        window: Option<PathBuf>,
    },
}

#[derive(Serialize)]
struct FactorOutput {
    factorization: Factorization,
    reconstruction_error: f64,
}

fn emit<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<()> {
    writeln!(out, "{}", serde_json::to_string_pretty(value)?)?;
    Ok(())
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Usage(_) | Error::Config(_) => 1,
        _ => 2,
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Check { matrix, p, q, weight } => {
            let s = load_matrix(&matrix)?;
            let e = ExponentPair::new(p, q);
            let verdict = match weight {
                Some(path) => {
                    let w: WeightSpec = read_json(&path)?;
                    if w.d != s.dim() {
                        return Err(Error::Config(format!("weight has d={}, matrix has d={}", w.d, s.dim())));
                    }
                    classify_weighted(&s, e, &w)?
                }
                None => classify_unweighted(&s, e),
            };
            emit(out, &verdict)?;
        }
        Command::Factor { matrix } => {
            let s = load_matrix(&matrix)?;
            let f = factorize(&s, default_tolerance())?;
            let reconstruction_error = f.relative_error(&s);
            emit(out, &FactorOutput { factorization: f, reconstruction_error })?;
        }
        Command::Norm { matrix, eps, p, q } => {
            let s = load_matrix(&matrix)?;
            emit(out, &mixed_norm_dilated(&s, eps, ExponentPair::new(p, q))?)?;
        }
        Command::Sweep { config, csv, report } => {
            let (cfg, base) = SweepConfig::from_file(&config)?;
            let resolve = |p: PathBuf| match &base {
                Some(b) if p.is_relative() => b.join(p),
                _ => p,
            };
            let csv_path = csv.or_else(|| cfg.csv.clone().map(&resolve));
            let report_path = report.or_else(|| cfg.report.clone().map(&resolve));
            let result = run_sweep(&cfg, base.as_deref())?;
            let json = serde_json::to_string_pretty(&result)?;
            match &csv_path {
                Some(p) => fs::write(p, result.csv())?,
                None => write!(out, "{}", result.csv())?,
            }
            match (&report_path, &csv_path) {
                (Some(p), _) => fs::write(p, json + "\n")?,
                (None, Some(_)) => writeln!(out, "{json}")?,
                (None, None) => writeln!(err, "{json}")?,
            }
        }
        Command::Verify { matrix, p, q, eps, n, t, signal, window } => {
            let s = load_matrix(&matrix)?;
            let d = s.dim();
            let default = Grid::default_for(d)?;
            let mut grid = Grid::new(d, n.unwrap_or(default.n), t.unwrap_or(default.t))?;
            let signals = match (signal, window) {
                (Some(f), Some(g)) => {
                    let f = io::read_signal(&f)?;
                    let g = io::read_signal(&g)?;
                    grid = f.grid;
                    Some((f, g))
                }
                _ => None,
            };
            let report = run_verify(&s, &VerifyOptions { e: ExponentPair::new(p, q), eps, grid, signals })?;
            emit(out, &report)?;
            if !report.pass {
                return Ok(2);
            }
        }
    }
    Ok(0)
}

/// Parse `args` (including the program name) and run; returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return 1;
            }
            let _ = write!(out, "{}", e.render());
            return 0;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}
