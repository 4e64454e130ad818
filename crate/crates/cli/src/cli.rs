use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};

use crate::commands::{self, ActionAngleArgs, IntegrateArgs};
use crate::config::load_config;
use crate::error::CliResult;
use crate::report::Outcome;

/// Contact Hamiltonian systems: integrability checks, flows,
/// symplectization and action-angle coordinates.
#[derive(Debug, Parser)]
#[command(name = "contactkit", version)]
pub struct Cli {
    /// System definition (JSON).
    #[arg(long, short, global = true)]
    pub config: Option<PathBuf>,
    /// RNG seed; overrides the config's seed and $CONTACT_SEED.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,
    /// Add wall-clock time to the report (reruns are then no longer
    /// byte-identical).
    #[arg(long, global = true)]
    pub timing: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Contact condition, involution and rank of the integrals.
    Check,
    /// Coisotropy of the preimage of the ray through LAMBDA.
    Coisotropy {
        /// Integral values, comma-separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        lambda: Vec<f64>,
        /// Seeds to project onto the ray preimage (default: the config's sample count).
        #[arg(long)]
        points: Option<usize>,
    },
    /// Integrate the Hamiltonian field of one integral.
    Integrate {
        /// Index of the integral.
        #[arg(long = "f")]
        index: usize,
        /// Initial point, comma-separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        x0: Vec<f64>,
        /// Flow time; negative integrates backwards.
        #[arg(long, allow_negative_numbers = true)]
        t: f64,
        /// Trajectory CSV (`t` then one column per coordinate).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Stop when the flow leaves the config's region.
        #[arg(long)]
        clamp_to_region: bool,
    },
    /// Bracket, field and homogeneity correspondences with the symplectization.
    SymplectizeVerify {
        /// Sample count (default: the config's).
        #[arg(long)]
        samples: Option<usize>,
        /// Replace the lift -r f by -r^K f (for exercising the failure path).
        #[arg(long, hide = true, default_value_t = 1)]
        lift_exponent: i32,
    },
    /// Angles and actions of the points in a JSON file.
    ActionAngle {
        /// Name of a section in the config.
        #[arg(long)]
        section: String,
        /// JSON array of points, `(x)` or `(x, r)`.
        #[arg(long)]
        points: PathBuf,
        /// Also write the per-point results here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Verify the Darboux forms by differentiating the solved angles.
        #[arg(long)]
        darboux: bool,
    },
}

pub fn run(cli: &Cli) -> CliResult<Outcome> {
    let start = Instant::now();
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| crate::error::CliError::Input("--config is required".into()))?;
    let loaded = load_config(path)?;
    let seed = commands::resolve_seed(cli.seed, loaded.config.seed)?;
    let mut outcome = match &cli.command {
        Command::Check => commands::cmd_check(&loaded, seed)?,
        Command::Coisotropy { lambda, points } => {
            commands::cmd_coisotropy(&loaded, lambda, points.unwrap_or(loaded.config.samples), seed)?
        }
        Command::Integrate {
            index,
            x0,
            t,
            out,
            clamp_to_region,
        } => commands::cmd_integrate(
            &loaded,
            &IntegrateArgs {
                index: *index,
                x0,
                t: *t,
                out: out.as_deref(),
                clamp_to_region: *clamp_to_region,
            },
        )?,
        Command::SymplectizeVerify { samples, lift_exponent } => commands::cmd_symplectize_verify(
            &loaded,
            samples.unwrap_or(loaded.config.samples),
            seed,
            *lift_exponent,
        )?,
        Command::ActionAngle {
            section,
            points,
            out,
            darboux,
        } => {
            let pts = commands::load_points(points, loaded.system.chart().dim())?;
            let outcome = commands::cmd_action_angle(
                &loaded,
                &ActionAngleArgs {
                    section,
                    points: &pts,
                    darboux: *darboux,
                },
                seed,
            )?;
            if let Some(out) = out {
                let results = &outcome.report.details.as_ref().map(|d| d["results"].clone());
                let mut s = serde_json::to_string_pretty(&results.clone().unwrap_or_default()).expect("serializes");
                s.push('\n');
                std::fs::write(out, s)?;
            }
            outcome
        }
    };
    if cli.timing {
        outcome.report.timing_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    Ok(outcome)
}

/// Runs and emits the report; returns the exit code.
pub fn main_with(cli: &Cli) -> i32 {
    match run(cli) {
        Ok(outcome) => {
            let json = outcome.report.to_json();
            match &cli.report {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, json) {
                        eprintln!("error: cannot write {}: {e}", path.display());
                        return crate::error::EXIT_INPUT;
                    }
                }
                None => print!("{json}"),
            }
            outcome.exit_code
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
