//! `slin`: check, lift, verify and simulate polynomial ODE systems.
//!
//! Exit codes: 0 success, 1 usage/parse/schema error, 2 the mathematical
//! answer is negative (condition fails, verification fails, no certificate),
//! 3 numeric divergence.

pub mod document;
pub mod dot;
pub mod traj;

mod commands;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use commands::Style;

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_NEGATIVE: u8 = 2;
pub const EXIT_DIVERGED: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "slin", version, about = "Super-linearization of polynomial ODE systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Test the cycle condition on the weighted dependency graph.
    Check {
        file: PathBuf,
        /// Write the dependency graph and its skeleton as Graphviz DOT.
        #[arg(long, value_name = "OUT")]
        dot: Option<PathBuf>,
    },
    /// Construct a super-linearization and write it as JSON.
    Lift {
        file: PathBuf,
        /// Output file; the document goes to stdout when omitted.
        #[arg(short, long, value_name = "OUT")]
        output: Option<PathBuf>,
    },
    /// Check a lift document against a system, exactly.
    Verify { file: PathBuf, lift: PathBuf },
    /// Integrate the system with fixed-step RK4 and write the trajectory as CSV.
    Simulate {
        file: PathBuf,
        /// Also integrate this lift and report the largest projection error.
        #[arg(long, value_name = "LIFT")]
        lift: Option<PathBuf>,
        /// Initial state, comma separated.
        #[arg(long, value_name = "X0", allow_hyphen_values = true)]
        x0: String,
        #[arg(long = "t", value_name = "T", default_value_t = 2.0)]
        t_end: f64,
        #[arg(long, value_name = "H", default_value_t = 1e-3)]
        step: f64,
        /// Output file; the CSV goes to stdout when omitted.
        #[arg(short, long, value_name = "OUT")]
        output: Option<PathBuf>,
    },
    /// Search for a linear recurrence among the iterated Lie derivatives of f.
    Xumama {
        file: PathBuf,
        #[arg(long = "max-n", value_name = "N", default_value_t = 10,
              value_parser = clap::value_parser!(u32).range(1..))]
        max_n: u32,
    },
}

/// Parses `args` (program name first) and runs the command. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write, style: Style) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    EXIT_USAGE
                }
            };
        }
    };
    let result = match cli.command {
        Command::Check { file, dot } => commands::check(&file, dot.as_deref(), out, style),
        Command::Lift { file, output } => commands::lift(&file, output.as_deref(), out, err, style),
        Command::Verify { file, lift } => commands::verify(&file, &lift, out, style),
        Command::Simulate {
            file,
            lift,
            x0,
            t_end,
            step,
            output,
        } => commands::simulate(&file, lift.as_deref(), &x0, t_end, step, output.as_deref(), out, err),
        Command::Xumama { file, max_n } => commands::xumama(&file, max_n as usize, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message);
            e.code
        }
    }
}
