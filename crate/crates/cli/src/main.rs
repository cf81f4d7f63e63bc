//! `drspec`: experiment runner for radial spherical analysis on Damek-Ricci
//! spaces and real hyperbolic 3-space.

mod commands;
mod config;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use drspec::spherical::{Backend, DEFAULT_R0};
use drspec::transform::{PropagatorSpec, SpectralShape};
use drspec::SpaceParams;

use config::{
    parse_fhat, parse_space, EvolveConfig, Experiment, GridSpec, H3CheckConfig, MaximalConfig, OscillatoryConfig,
    PairSource, PhiConfig, RadialShape, RoundtripConfig, SharpnessConfig,
};
use table::{write_metadata, Metadata};

#[derive(Debug, Parser)]
#[command(name = "drspec", version, about = "Radial spherical analysis experiments")]
struct Cli {
    /// Worker threads (default: all cores). Output does not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Output {
    /// CSV output path; metadata goes to `<out>.meta.json`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Tabulate spherical functions.
    Phi {
        #[arg(long, value_parser = parse_space)]
        space: SpaceParams,
        #[arg(long)]
        lambda_grid: GridSpec,
        #[arg(long)]
        s_grid: GridSpec,
        #[arg(long, default_value = "ode")]
        backend: Backend,
        #[arg(long, default_value_t = DEFAULT_R0)]
        r0: f64,
        #[command(flatten)]
        out: Output,
    },
    /// Calibrate the inversion constant and report a forward/inverse round trip.
    Roundtrip {
        #[arg(long, value_parser = parse_space)]
        space: SpaceParams,
        #[arg(long, value_enum, default_value = "gaussian")]
        profile: RadialShapeArg,
        #[command(flatten)]
        out: Output,
    },
    /// Schrodinger evolution of spectral data on an (s, t) grid.
    Evolve {
        #[arg(long, value_parser = parse_space)]
        space: SpaceParams,
        #[arg(long, value_parser = parse_fhat)]
        fhat: SpectralShape,
        #[arg(long)]
        t_grid: GridSpec,
        #[arg(long)]
        s_grid: GridSpec,
        #[arg(long, default_value_t = 2.0)]
        a: f64,
        #[arg(long, default_value_t = false, action = clap::ArgAction::Set)]
        shifted: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Maximal-function to Sobolev-norm ratios for several alphas.
    MaximalSweep {
        #[arg(long, value_parser = parse_space)]
        space: SpaceParams,
        #[arg(long, value_parser = parse_fhat)]
        fhat: SpectralShape,
        #[arg(long, value_delimiter = ',', required = true)]
        alphas: Vec<f64>,
        #[arg(long = "R", default_value_t = 2.0)]
        r: f64,
        #[command(flatten)]
        out: Output,
    },
    /// Two-radius oscillatory integrals on given or seeded random pairs.
    Oscillatory {
        #[arg(long, value_parser = parse_space, default_value = r#"{"kind":"h3"}"#)]
        space: SpaceParams,
        /// CSV with header s,s_prime,t_s,t_s_prime.
        #[arg(long)]
        pairs: Option<PathBuf>,
        #[arg(long, default_value_t = 200)]
        draws: usize,
        #[arg(long, default_value_t = 5.0)]
        s_max: f64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_R0)]
        r0: f64,
        #[command(flatten)]
        out: Output,
    },
    /// Ratios for band-limited data moving to high frequency on H^3.
    Sharpness {
        #[arg(long, value_delimiter = ',', required = true)]
        alphas: Vec<f64>,
        #[arg(long = "N", value_delimiter = ',', required = true)]
        n: Vec<f64>,
        #[arg(long = "R", default_value_t = 2.0)]
        r: f64,
        #[command(flatten)]
        out: Output,
    },
    /// Compare H^3 evolution with the radial Euclidean evolution on R^3.
    H3Check {
        #[arg(long, value_parser = parse_fhat, default_value = "builtin:gaussian")]
        fhat: SpectralShape,
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.3,0.9")]
        t: Vec<f64>,
        #[arg(long, default_value = "0:3:61")]
        s_grid: GridSpec,
        #[command(flatten)]
        out: Output,
    },
    /// Run an experiment described by a JSON config file.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, clap::ValueEnum)]
enum RadialShapeArg {
    Gaussian,
    Moment,
    Oscillating,
}

impl From<RadialShapeArg> for RadialShape {
    fn from(a: RadialShapeArg) -> Self {
        match a {
            RadialShapeArg::Gaussian => RadialShape::Gaussian,
            RadialShapeArg::Moment => RadialShape::Moment,
            RadialShapeArg::Oscillating => RadialShape::Oscillating,
        }
    }
}

impl Command {
    fn into_experiment(self) -> Result<(Experiment, PathBuf)> {
        let (experiment, out) = match self {
            Command::Phi {
                space,
                lambda_grid,
                s_grid,
                backend,
                r0,
                out,
            } => (
                Experiment::Phi(PhiConfig {
                    space,
                    lambda_grid,
                    s_grid,
                    backend,
                    r0,
                }),
                out.out,
            ),
            Command::Roundtrip { space, profile, out } => (
                Experiment::Roundtrip(RoundtripConfig {
                    space,
                    profile: profile.into(),
                }),
                out.out,
            ),
            Command::Evolve {
                space,
                fhat,
                t_grid,
                s_grid,
                a,
                shifted,
                out,
            } => (
                Experiment::Evolve(EvolveConfig {
                    space,
                    fhat,
                    t_grid,
                    s_grid,
                    propagator: PropagatorSpec::new(a, shifted)?,
                }),
                out.out,
            ),
            Command::MaximalSweep {
                space,
                fhat,
                alphas,
                r,
                out,
            } => (
                Experiment::MaximalSweep(MaximalConfig { space, fhat, alphas, r }),
                out.out,
            ),
            Command::Oscillatory {
                space,
                pairs,
                draws,
                s_max,
                seed,
                r0,
                out,
            } => (
                Experiment::Oscillatory(OscillatoryConfig {
                    space,
                    pairs: pairs.map(PairSource::File),
                    draws,
                    s_max,
                    seed,
                    r0,
                    tolerance: Default::default(),
                }),
                out.out,
            ),
            Command::Sharpness { alphas, n, r, out } => {
                (Experiment::Sharpness(SharpnessConfig { alphas, n, r }), out.out)
            }
            Command::H3Check { fhat, t, s_grid, out } => {
                (Experiment::H3Check(H3CheckConfig { fhat, t, s_grid }), out.out)
            }
            Command::Run { config } => {
                let file = config::load_config(&config)?;
                return Ok((file.experiment, file.out));
            }
        };
        Ok((experiment.resolve()?, out))
    }
}

/// Failures of the numerical kernels exit with 2; everything else is a
/// configuration problem and exits with 1.
fn exit_code(err: &anyhow::Error) -> u8 {
    match err.chain().find_map(|e| e.downcast_ref::<drspec::Error>()) {
        Some(e) if !e.is_input_error() => 2,
        _ => 1,
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .context("cannot configure the thread pool")?;
    }
    let (experiment, out) = cli.command.into_experiment()?;
    let start = Instant::now();
    let (table, summary) = commands::execute(&experiment)?;
    table.write_csv(&out)?;
    write_metadata(
        &out,
        &Metadata {
            command: experiment.name(),
            schema: table.schema,
            version: env!("CARGO_PKG_VERSION"),
            config_hash: experiment.hash(),
            config: serde_json::to_value(&experiment)?,
            rows: table.rows().len(),
            wall_time_s: start.elapsed().as_secs_f64(),
            summary,
        },
    )?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let code = exit_code(&err);
            match err.chain().find_map(|e| e.downcast_ref::<drspec::Error>()) {
                Some(e) if code == 2 => eprintln!("error: numerical failure in {}: {err:#}", e.operation()),
                _ => eprintln!("error: {err:#}"),
            }
            ExitCode::from(code)
        }
    }
}
