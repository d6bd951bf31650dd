//! `deconvolve-histogram`: estimate the actual-color prior from an observed
//! histogram.

use std::path::PathBuf;

use bayesedge::noise::BoundaryMode;
use bayesedge::pgm::Pgm;
use bayesedge::prior::{
    deconvolve_histogram_with, observed_histogram, ColorDistribution, DEFAULT_MAX_CONDITION,
};
use clap::Args;

use crate::error::{in_file, read, read_text, write, CliError, CliResult};
use crate::noise::NoiseArgs;

#[derive(Args, Debug, Clone)]
pub struct DeconvolveArgs {
    /// Image whose histogram is deconvolved
    #[arg(long, conflicts_with = "histogram")]
    pub input: Option<PathBuf>,
    /// Observed histogram as one CSV line of N probabilities
    #[arg(long)]
    pub histogram: Option<PathBuf>,
    #[arg(long)]
    pub colors: Option<usize>,
    #[command(flatten)]
    pub noise: NoiseArgs,
    /// Largest accepted condition estimate of the noise matrix
    #[arg(long, default_value_t = DEFAULT_MAX_CONDITION)]
    pub max_condition: f64,
    /// Output CSV (stdout if omitted)
    #[arg(long)]
    pub output: Option<PathBuf>,
}

pub fn compute(args: &DeconvolveArgs) -> CliResult<ColorDistribution> {
    let observed = match (&args.input, &args.histogram) {
        (Some(path), None) => {
            let n = args
                .colors
                .ok_or_else(|| CliError::Usage("--colors is required with --input".into()))?;
            let img = in_file(path, Pgm::parse(&read(path)?))?.quantize(n)?;
            observed_histogram(&img, n)?
        }
        (None, Some(path)) => in_file(path, ColorDistribution::from_csv(&read_text(path)?))?,
        _ => {
            return Err(CliError::Usage(
                "give exactly one of --input and --histogram".into(),
            ))
        }
    };
    let colors = args.colors.or(Some(observed.len()));
    let source = args.noise.source(colors)?.ok_or_else(|| {
        CliError::Usage(
            "a noise model is required (--noise, --sigma, --replacement or --noise-matrix)".into(),
        )
    })?;
    let mode = args
        .noise
        .boundary_mode
        .unwrap_or(BoundaryMode::Renormalize);
    let m = source.matrix(colors, mode)?;
    Ok(deconvolve_histogram_with(
        &observed,
        &m,
        args.max_condition,
    )?)
}

pub fn run(args: &DeconvolveArgs) -> CliResult<()> {
    let csv = compute(args)?.to_csv();
    match &args.output {
        Some(path) => write(path, csv),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}
