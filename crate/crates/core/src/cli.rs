//! The `ltlf` command line.
//!
//! Exit codes: 0 success, 1 failed check, 2 usage or parse error, 3 data
//! error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path as FsPath, PathBuf};

use clap::{Parser, Subcommand};

use crate::dsl::{parse_with_base, ParsedConstraint};
use crate::error::{Error, Result};
use crate::gradcheck::{gradcheck, DEFAULT_STEP, DEFAULT_TOLERANCE};
use crate::logic::Path;
use crate::loss::{loss_l, CompiledConstraint};
use crate::pathfile::read_path;
use crate::soft::Gamma;
use crate::trainer::{train, write_outputs, ExperimentConfig, Test};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "ltlf", version, about = "Finite-trace LTL constraints with a differentiable loss")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print whether the constraint holds on the path.
    Eval { constraint: PathBuf, path: PathBuf },
    /// Print the soft loss of the constraint on the path.
    Loss {
        constraint: PathBuf,
        path: PathBuf,
        #[arg(long, default_value_t = 0.005)]
        gamma: f64,
    },
    /// Compare the analytic gradient with central finite differences.
    Gradcheck {
        constraint: PathBuf,
        path: PathBuf,
        #[arg(long, default_value_t = 0.01)]
        gamma: f64,
        #[arg(long, default_value_t = DEFAULT_STEP)]
        h: f64,
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tol: f64,
    },
    /// Run one of the trajectory experiments and write its outputs.
    Train {
        #[arg(long, value_enum, required_unless_present = "config")]
        test: Option<Test>,
        /// JSON experiment config; other flags override its fields.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Weight of the constraint loss (0 trains on imitation alone).
        #[arg(long)]
        eta: Option<f64>,
        /// Relaxation factor of the soft loss.
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        epochs: Option<usize>,
        /// Adam learning rate.
        #[arg(long)]
        lr: Option<f64>,
        /// Seed for the demonstrator noise.
        #[arg(long)]
        seed: Option<u64>,
        /// Number of trajectory points.
        #[arg(long)]
        n: Option<usize>,
        /// Output directory (default from the config, else ./out).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Syntax { .. }
        | Error::NonpositiveGamma(_)
        | Error::UnsupportedNegation(_)
        | Error::InvalidArgument(_) => EXIT_USAGE,
        Error::IndexOutOfRange { .. }
        | Error::DimensionMismatch { .. }
        | Error::RaggedRow { .. }
        | Error::BadValue { .. }
        | Error::Io(_)
        | Error::Json(_)
        | Error::Csv(_) => EXIT_DATA,
    }
}

/// Parses the constraint file and the path file and binds the constants,
/// checking that the constraint only reads columns the file provides.
fn load(constraint: &FsPath, path: &FsPath) -> Result<(ParsedConstraint, Path)> {
    let text = std::fs::read_to_string(constraint)?;
    let file = read_path(path)?;
    let pc = match file.width() {
        Some(k) => {
            let pc = parse_with_base(&text, k)?;
            if pc.state_width() != k {
                return Err(Error::IndexOutOfRange {
                    index: pc.state_width() as i64 - 1,
                    width: k,
                });
            }
            pc
        }
        None => parse_with_base(&text, 0)?,
    };
    let p = if file.path.is_empty() {
        Path::new(pc.width)
    } else {
        pc.bind(&file.path)?
    };
    Ok((pc, p))
}

fn execute(command: Command, out: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Eval { constraint, path } => {
            let (pc, p) = load(&constraint, &path)?;
            writeln!(out, "{}", crate::logic::eval(&pc.ast, &p)?)?;
            Ok(EXIT_OK)
        }
        Command::Loss {
            constraint,
            path,
            gamma,
        } => {
            let (pc, p) = load(&constraint, &path)?;
            writeln!(out, "{}", loss_l(&pc.ast, &p, Gamma(gamma))?)?;
            Ok(EXIT_OK)
        }
        Command::Gradcheck {
            constraint,
            path,
            gamma,
            h,
            tol,
        } => {
            Gamma(gamma).require_soft()?;
            if h.is_nan() || h <= 0.0 {
                return Err(Error::InvalidArgument(format!("step must be positive, got {h}")));
            }
            let (pc, p) = load(&constraint, &path)?;
            CompiledConstraint::new(&pc.ast, p.width())?;
            let r = gradcheck(&pc.ast, &p, Gamma(gamma), h)?;
            let (i, j) = r.worst;
            writeln!(out, "entries {}", r.entries)?;
            writeln!(out, "max relative error {} at ({i}, {j})", r.max_error)?;
            writeln!(out, "analytic {} numeric {}", r.analytic, r.numeric)?;
            if r.passes(tol) {
                writeln!(out, "ok")?;
                Ok(EXIT_OK)
            } else {
                writeln!(out, "FAIL: error exceeds tolerance {tol}")?;
                Ok(EXIT_CHECK_FAILED)
            }
        }
        Command::Train {
            test,
            config,
            eta,
            gamma,
            epochs,
            lr,
            seed,
            n,
            out: dir,
        } => {
            let mut cfg = match (&config, test) {
                (Some(file), _) => ExperimentConfig::load(file)?,
                (None, Some(test)) => ExperimentConfig::new(test),
                (None, None) => unreachable!("clap requires --test or --config"),
            };
            if config.is_some() {
                if let Some(test) = test {
                    cfg.test = test;
                }
            }
            cfg.eta = eta.unwrap_or(cfg.eta);
            cfg.gamma = gamma.unwrap_or(cfg.gamma);
            cfg.epochs = epochs.unwrap_or(cfg.epochs);
            cfg.learning_rate = lr.unwrap_or(cfg.learning_rate);
            cfg.seed = seed.unwrap_or(cfg.seed);
            cfg.n = n.unwrap_or(cfg.n);
            if let Some(dir) = dir {
                cfg.output_dir = dir;
            }
            let result = train(&cfg)?;
            write_outputs(&result, &cfg.output_dir)?;
            writeln!(out, "test {} eta {} gamma {}", cfg.test, cfg.eta, cfg.gamma)?;
            writeln!(out, "constraint {}", result.constraint)?;
            writeln!(out, "final imitation loss {}", result.final_imitation)?;
            writeln!(out, "final constraint loss {}", result.final_constraint)?;
            writeln!(out, "satisfied {}", result.satisfied)?;
            writeln!(out, "wrote {}", cfg.output_dir.display())?;
            Ok(EXIT_OK)
        }
    }
}

/// Runs the command line on `args` (program name first) and returns the
/// process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}
