//! Command-line front end: phase portraits, orbits, surfaces, classification
//! and verification for helicoidal surfaces with prescribed mean curvature.

pub mod commands;
pub mod config;
pub mod svg;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::{CliError, Outcome};
pub use config::{load, ConfigError, Overrides, RunConfig, Start};

#[derive(Debug, Parser)]
#[command(
    name = "helicoid",
    version,
    about = "Helicoidal surfaces of prescribed mean curvature"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Direction field, nullcline, constant-angle curves, markers and seed orbits as SVG + CSV.
    PhasePortrait(CommonArgs),
    /// Integrate and classify one orbit; writes orbit.csv and orbit.svg.
    Orbit(CommonArgs),
    /// Orbit, profile and helicoidal mesh; writes OBJ and sidecar CSV.
    Surface(SurfaceArgs),
    /// Print the orbit classification and surface type as JSON.
    Classify(CommonArgs),
    /// Run every invariant suite; exit 3 if any check fails.
    Verify(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Recipe file (TOML); flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Prescription h(t) on [-1, 1], e.g. "t^2+1".
    #[arg(long)]
    pub h: Option<String>,
    /// Pitch, finite and non-zero.
    #[arg(long, allow_negative_numbers = true)]
    pub c0: Option<f64>,
    /// Orientation sign(z'), 1 or -1.
    #[arg(long, allow_negative_numbers = true)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub xmax: Option<f64>,
    /// Marching-squares cells per side, at least 64.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Arclength to integrate.
    #[arg(long)]
    pub smax: Option<f64>,
    /// Relative and absolute integration tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_step: Option<f64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Start on the axis x = 0.
    #[arg(long)]
    pub from_axis: bool,
    /// Start at the phase point `x,y`.
    #[arg(long, allow_hyphen_values = true)]
    pub start: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct SurfaceArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, allow_negative_numbers = true)]
    pub theta_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub theta_max: Option<f64>,
    #[arg(long)]
    pub n_theta: Option<usize>,
    /// Continue an orbit that ends on the axis into x < 0.
    #[arg(long)]
    pub through_axis: bool,
}

impl CommonArgs {
    pub fn overrides(&self) -> Overrides {
        Overrides {
            h: self.h.clone(),
            c0: self.c0,
            eps: self.eps,
            x_max: self.xmax,
            grid: self.grid,
            s_max: self.smax,
            tol: self.tol,
            max_step: self.max_step,
            out: self.out.clone(),
            from_axis: self.from_axis,
            start: self.start.clone(),
            ..Overrides::default()
        }
    }

    pub fn resolve(&self, extra: impl FnOnce(&mut Overrides)) -> Result<RunConfig, ConfigError> {
        let mut o = self.overrides();
        extra(&mut o);
        load(self.config.as_deref(), &o)
    }
}

/// Runs one subcommand.
pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::PhasePortrait(a) => commands::phase_portrait(&a.resolve(|_| ())?),
        Command::Orbit(a) => commands::orbit(&a.resolve(|_| ())?),
        Command::Classify(a) => commands::classify_cmd(&a.resolve(|_| ())?),
        Command::Verify(a) => commands::verify(&a.resolve(|_| ())?),
        Command::Surface(s) => {
            let cfg = s.common.resolve(|o| {
                o.theta_min = s.theta_min;
                o.theta_max = s.theta_max;
                o.n_theta = s.n_theta;
                o.through_axis = s.through_axis;
            })?;
            commands::surface(&cfg)
        }
    }
}
