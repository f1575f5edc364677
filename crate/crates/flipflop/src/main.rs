//! `flipflop`: run the analyses of the flip-flop map and write CSV, JSON and
//! SVG artifacts.
//!
//! Exit status: 0 on success, 1 on I/O errors, 2 on configuration errors,
//! 3 when a computation is inconclusive (escaped orbit, unconverged curve,
//! under-resolved witness) and 4 when a checked property fails.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod figures;
mod output;
mod svg;

use std::fmt;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use flipflop_core::Error as CoreError;

use config::{CommonArgs, Settings};
use figures::FigureId;

#[derive(Debug, Clone, PartialEq)]
pub enum Failure {
    Io(String),
    Config(String),
    Inconclusive(String),
    Assertion(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Io(_) => 1,
            Failure::Config(_) => 2,
            Failure::Inconclusive(_) => 3,
            Failure::Assertion(_) => 4,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Io(m) => write!(f, "error: {m}"),
            Failure::Config(m) => write!(f, "config error: {m}"),
            Failure::Inconclusive(m) => write!(f, "inconclusive: {m}"),
            Failure::Assertion(m) => write!(f, "check failed: {m}"),
        }
    }
}

impl From<CoreError> for Failure {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Escaped { .. } | CoreError::Collapsed { .. } | CoreError::NoCurve { .. } => {
                Failure::Inconclusive(e.to_string())
            }
            CoreError::NotFixed { .. } => Failure::Assertion(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "flipflop",
    version,
    about = "Orbits, fixed points, invariant curves and chaos checks for the flip-flop map \
             (x, y) -> (1 - x[lambda(1 - x) + y], mu y(x - y))"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Iterate the map from one seed (CSV columns n, x, y).
    Orbit {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// All fixed points with eigenvalues and stability class.
    FixedPoints {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Hopf threshold mu_h(lambda) and the interior fixed point there.
    Hopf {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Invariant closed curve about the interior fixed point.
    Curve {
        #[command(flatten)]
        common: CommonArgs,
        /// Exit with status 4 if the invariance residual exceeds this.
        #[arg(long)]
        max_residual: Option<f64>,
    },
    /// Rotation number about the interior fixed point.
    Rotation {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Scan nu above the threshold and count attracting loops.
    Cascade {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        nu_from: Option<f64>,
        #[arg(long)]
        nu_to: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Lyapunov exponents along an orbit.
    Lyapunov {
        #[command(flatten)]
        common: CommonArgs,
        /// Follow a stagger-and-step pseudo-orbit instead of the plain orbit,
        /// for repelling chaotic sets.
        #[arg(long)]
        stagger: bool,
    },
    /// Forward-image horseshoe check.
    Horseshoe {
        #[command(flatten)]
        common: CommonArgs,
        /// Samples per side of the polar grid on the ellipse.
        #[arg(long)]
        resolution: Option<usize>,
    },
    /// Bifurcation diagram over a mu interval (CSV columns mu, x, y, loops).
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, allow_hyphen_values = true)]
        mu_from: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        mu_to: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Reproduce the data behind one figure.
    Figure {
        #[arg(value_enum)]
        id: FigureId,
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn settings(common: &CommonArgs, extra: Settings) -> Result<Settings, Failure> {
    let flags = Settings::from_common(common).or(extra);
    match &common.config {
        Some(path) => Ok(flags.or(Settings::load(path)?)),
        None => Ok(flags),
    }
}

fn run(command: Command) -> Result<(), Failure> {
    let none = Settings::default;
    match command {
        Command::Orbit { common } => commands::orbit(settings(&common, none())?),
        Command::FixedPoints { common } => commands::fixed_points(settings(&common, none())?),
        Command::Hopf { common } => commands::hopf(settings(&common, none())?),
        Command::Curve { common, max_residual } => commands::curve(settings(
            &common,
            Settings {
                max_residual,
                ..none()
            },
        )?),
        Command::Rotation { common } => commands::rotation(settings(&common, none())?),
        Command::Cascade {
            common,
            nu_from,
            nu_to,
            steps,
        } => commands::cascade(settings(
            &common,
            Settings {
                nu_from,
                nu_to,
                steps,
                ..none()
            },
        )?),
        Command::Lyapunov { common, stagger } => commands::lyapunov(settings(
            &common,
            Settings {
                stagger: stagger.then_some(true),
                ..none()
            },
        )?),
        Command::Horseshoe { common, resolution } => commands::horseshoe(settings(
            &common,
            Settings {
                resolution,
                ..none()
            },
        )?),
        Command::Sweep {
            common,
            mu_from,
            mu_to,
            steps,
        } => commands::sweep(settings(
            &common,
            Settings {
                mu_from,
                mu_to,
                steps,
                ..none()
            },
        )?),
        Command::Figure { id, common } => figures::run(id, settings(&common, none())?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{f}");
            ExitCode::from(f.code())
        }
    }
}
