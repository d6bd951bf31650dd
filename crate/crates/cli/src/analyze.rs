//! `analyze-gradient`: monotonicity report, condition check and lookup table
//! for a noise matrix.

use std::path::PathBuf;

use bayesedge::gradient::{
    build_lookup_table, check_monotonicity, check_paper_condition, condition_csv,
    DEFAULT_TIE_TOLERANCE,
};
use bayesedge::noise::BoundaryMode;
use clap::Args;

use crate::error::{create_dir, write, CliError, CliResult};

use crate::noise::NoiseArgs;

#[derive(Args, Debug, Clone)]
pub struct AnalyzeArgs {
    /// Number of gray-levels (not needed with --noise-matrix)
    #[arg(long)]
    pub colors: Option<usize>,
    #[command(flatten)]
    pub noise: NoiseArgs,
    /// Boundary prior used for the lookup table
    #[arg(long, default_value_t = 0.5)]
    pub p_b: f64,
    /// Tie tolerance of the monotonicity check
    #[arg(long, default_value_t = DEFAULT_TIE_TOLERANCE)]
    pub tolerance: f64,
    /// Directory for the report files (created if missing)
    #[arg(long)]
    pub output_dir: PathBuf,
}

/// File name and contents of each report.
pub fn compute(args: &AnalyzeArgs) -> CliResult<(bool, Vec<(&'static str, String)>)> {
    let source = args.noise.source(args.colors)?.ok_or_else(|| {
        CliError::Usage(
            "a noise model is required (--noise, --sigma, --replacement or --noise-matrix)".into(),
        )
    })?;
    let mode = args
        .noise
        .boundary_mode
        .unwrap_or(BoundaryMode::Renormalize);
    let m = source.matrix(args.colors, mode)?;
    let report = check_monotonicity(&m, args.tolerance)?;
    let literal = check_paper_condition(&m, args.tolerance)?;
    let table = build_lookup_table(&m, args.p_b)?;
    let files = vec![
        ("monotonicity.txt", report.to_text()),
        ("condition.csv", condition_csv(&literal)),
        ("lookup.csv", table.to_csv()),
        ("noise_matrix.csv", m.to_csv()),
    ];
    Ok((report.passed, files))
}

pub fn run(args: &AnalyzeArgs) -> CliResult<()> {
    let (passed, files) = compute(args)?;
    create_dir(&args.output_dir)?;
    for (name, text) in &files {
        write(&args.output_dir.join(name), text)?;
    }
    println!(
        "gradient monotonicity: {}; reports in {}",
        if passed { "passed" } else { "failed" },
        args.output_dir.display()
    );
    Ok(())
}
