//! Command-line pipeline over the `bayesedge` library: read PGM images and
//! noise models, run the detectors, write probability maps and reports.
//!
//! Every subcommand computes its outputs in memory first and writes files only
//! once the whole run has succeeded.

pub mod analyze;
pub mod deconvolve;
pub mod detect;
pub mod error;
pub mod generate;
pub mod manifest;
pub mod noise;

use clap::{Parser, Subcommand};

pub use error::{CliError, CliResult};

#[derive(Parser, Debug)]
#[command(
    name = "bayesedge",
    version,
    about = "Bayesian boundary and interior detection on PGM images"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Posterior map of a feature over an image
    Detect(detect::DetectArgs),
    /// Check whether the two-pixel boundary posterior is monotonic in the gradient
    AnalyzeGradient(analyze::AnalyzeArgs),
    /// Generate a seeded rectangle scene with its noisy view and boundary mask
    Generate(generate::GenerateArgs),
    /// Estimate the actual-color prior from an observed histogram
    DeconvolveHistogram(deconvolve::DeconvolveArgs),
}

pub fn run(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Detect(a) => detect::run(a),
        Command::AnalyzeGradient(a) => analyze::run(a),
        Command::Generate(a) => generate::run(a),
        Command::DeconvolveHistogram(a) => deconvolve::run(a),
    }
}
