//! `detect`: posterior map of a feature over a PGM image.

use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use bayesedge::bayes::{posterior_map_labeled, FeatureSet, PriorVector};
use bayesedge::detector::{scan_image, BoundaryDetector, DetectorConfig, ScanFeature};
use bayesedge::noise::BoundaryMode;
use bayesedge::pgm::Pgm;
use bayesedge::prior::{deconvolve_histogram, observed_histogram, ColorDistribution};
use clap::{Args, ValueEnum};

use crate::error::{in_file, read, read_text, write, CliError, CliResult};
use crate::manifest::{sha256_hex, Manifest};
use crate::noise::{NoiseArgs, NoiseSource};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PriorMode {
    /// Every color equally likely
    Uniform,
    /// Observed histogram deconvolved through the noise matrix
    Histogram,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Feature {
    /// Boundary against interior
    Boundary,
    /// Interior against exterior
    Interior,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DetectorArg {
    #[value(name = "constant_approx", alias = "constant-approx")]
    ConstantApprox,
    #[value(name = "exact_bimodal", alias = "exact-bimodal")]
    ExactBimodal,
}

impl From<DetectorArg> for BoundaryDetector {
    fn from(d: DetectorArg) -> Self {
        match d {
            DetectorArg::ConstantApprox => BoundaryDetector::ConstantApprox,
            DetectorArg::ExactBimodal => BoundaryDetector::ExactBimodal,
        }
    }
}

fn value_name<T: ValueEnum>(v: T) -> String {
    v.to_possible_value()
        .expect("no skipped variants")
        .get_name()
        .to_string()
}

fn parse_value<T: ValueEnum>(key: &str, text: &str) -> CliResult<T> {
    T::from_str(text, false).map_err(|e| CliError::Usage(format!("manifest {key}: {e}")))
}

/// Flags of `detect`. Unset flags fall back to `--from-manifest`, then to defaults.
#[derive(Args, Debug, Clone, Default)]
pub struct DetectArgs {
    /// Input image (PGM, P2 or P5)
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Output posterior PGM; the CSV and manifest are written next to it
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Number of gray-levels N the input is quantized to
    #[arg(long)]
    pub colors: Option<usize>,
    #[command(flatten)]
    pub noise: NoiseArgs,
    /// Prior over actual colors [default: uniform]
    #[arg(long, value_enum)]
    pub prior: Option<PriorMode>,
    /// Feature to detect [default: boundary]
    #[arg(long, value_enum)]
    pub feature: Option<Feature>,
    /// Boundary likelihood [default: constant_approx]
    #[arg(long, value_enum)]
    pub boundary_detector: Option<DetectorArg>,
    /// Prior probability of the feature [default: 0.5]
    #[arg(long)]
    pub p_feature: Option<f64>,
    /// Pruning threshold for the interior sum, 0 disables [default: 0]
    #[arg(long)]
    pub prune_eps: Option<f64>,
    /// Odd window side length [default: 3]
    #[arg(long)]
    pub window_size: Option<usize>,
    /// Take unset parameters from an earlier run's manifest
    #[arg(long)]
    pub from_manifest: Option<PathBuf>,
}

/// Fully resolved `detect` parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectSettings {
    pub input: PathBuf,
    pub output: PathBuf,
    pub colors: usize,
    pub noise: NoiseSource,
    pub boundary_mode: BoundaryMode,
    pub prior: PriorMode,
    pub feature: Feature,
    pub boundary_detector: DetectorArg,
    pub p_feature: f64,
    pub prune_eps: f64,
    pub window_size: usize,
}

impl DetectSettings {
    pub fn csv_path(&self) -> PathBuf {
        self.output.with_extension("csv")
    }

    pub fn manifest_path(&self) -> PathBuf {
        self.output.with_extension("manifest.txt")
    }
}

fn manifest_value<T: FromStr>(m: Option<&Manifest>, key: &str) -> CliResult<Option<T>>
where
    T::Err: std::fmt::Display,
{
    match m.and_then(|m| m.get(key)) {
        None => Ok(None),
        Some(v) => v
            .parse()
            .map(Some)
            .map_err(|e| CliError::Usage(format!("manifest {key}: {e}"))),
    }
}

fn enum_or<T: ValueEnum>(
    given: Option<T>,
    m: Option<&Manifest>,
    key: &str,
) -> CliResult<Option<T>> {
    match given {
        Some(v) => Ok(Some(v)),
        None => m
            .and_then(|m| m.get(key))
            .map(|v| parse_value(key, v))
            .transpose(),
    }
}

impl DetectArgs {
    pub fn resolve(&self) -> CliResult<DetectSettings> {
        let manifest = match &self.from_manifest {
            None => None,
            Some(path) => {
                let m = Manifest::parse(&read_text(path)?)
                    .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
                if m.get("command") != Some("detect") {
                    return Err(CliError::Usage(format!(
                        "{} is not a detect manifest",
                        path.display()
                    )));
                }
                Some(m)
            }
        };
        let m = manifest.as_ref();
        let missing = |flag: &str| CliError::Usage(format!("--{flag} is required"));

        let input = self
            .input
            .clone()
            .or(manifest_value(m, "input")?)
            .ok_or_else(|| missing("input"))?;
        let output = self
            .output
            .clone()
            .or(manifest_value(m, "output")?)
            .ok_or_else(|| missing("output"))?;
        let colors = self
            .colors
            .or(manifest_value(m, "colors")?)
            .ok_or_else(|| missing("colors"))?;
        let noise = match self.noise.source(Some(colors))? {
            Some(s) => s,
            None => match m.and_then(|m| m.get("noise")) {
                Some(text) => NoiseSource::parse(text, colors)?,
                None => return Err(CliError::Usage(
                    "a noise model is required (--noise, --sigma, --replacement or --noise-matrix)"
                        .into(),
                )),
            },
        };
        let boundary_mode = match self.noise.boundary_mode {
            Some(b) => b,
            None => manifest_value(m, "boundary_mode")?.unwrap_or(BoundaryMode::Renormalize),
        };
        let p_feature = self
            .p_feature
            .or(manifest_value(m, "p_feature")?)
            .unwrap_or(0.5);
        if !(0.0..=1.0).contains(&p_feature) {
            return Err(CliError::Usage(format!(
                "--p-feature must lie in [0, 1], got {p_feature}"
            )));
        }
        Ok(DetectSettings {
            input,
            output,
            colors,
            noise,
            boundary_mode,
            prior: enum_or(self.prior, m, "prior")?.unwrap_or(PriorMode::Uniform),
            feature: enum_or(self.feature, m, "feature")?.unwrap_or(Feature::Boundary),
            boundary_detector: enum_or(self.boundary_detector, m, "boundary_detector")?
                .unwrap_or(DetectorArg::ConstantApprox),
            p_feature,
            prune_eps: self
                .prune_eps
                .or(manifest_value(m, "prune_eps")?)
                .unwrap_or(0.0),
            window_size: self
                .window_size
                .or(manifest_value(m, "window_size")?)
                .unwrap_or(3),
        })
    }
}

/// Everything `detect` writes, held in memory until the run succeeds.
#[derive(Debug, Clone)]
pub struct DetectOutputs {
    pub pgm: Vec<u8>,
    pub csv: String,
    pub manifest: Manifest,
}

pub fn compute(s: &DetectSettings) -> CliResult<DetectOutputs> {
    let start = Instant::now();
    let input_bytes = read(&s.input)?;
    let source = in_file(&s.input, Pgm::parse(&input_bytes))?;
    let img = source.quantize(s.colors)?;
    let m = s.noise.matrix(Some(s.colors), s.boundary_mode)?;
    let read_secs = start.elapsed().as_secs_f64();

    let color_prior = match s.prior {
        PriorMode::Uniform => ColorDistribution::uniform(s.colors)?,
        PriorMode::Histogram => deconvolve_histogram(&observed_histogram(&img, s.colors)?, &m)?,
    };
    let matrix_hash = sha256_hex(m.to_csv().as_bytes());
    let cfg = DetectorConfig::new(m, color_prior.clone())?
        .with_window_size(s.window_size)?
        .with_prune_eps(s.prune_eps)?
        .with_boundary_detector(s.boundary_detector.into());
    let (scan, labels) = match s.feature {
        Feature::Boundary => (ScanFeature::BoundaryVsNot, ["boundary", "not_boundary"]),
        Feature::Interior => (ScanFeature::InteriorVsExterior, ["interior", "exterior"]),
    };
    let prior = PriorVector::binary(s.p_feature)?;
    let detect_start = Instant::now();
    let lik = scan_image(&img, &cfg, scan)?;
    let pmap = posterior_map_labeled(&lik, &prior, FeatureSet::new(labels)?)?;
    let detect_secs = detect_start.elapsed().as_secs_f64();

    let pgm = pmap.to_pgm(0).to_p2();
    let csv = pmap.to_csv();

    let mut man = Manifest::new();
    man.push("command", "detect");
    man.push("version", env!("CARGO_PKG_VERSION"));
    man.push("input", s.input.display());
    man.push("output", s.output.display());
    man.push("csv", s.csv_path().display());
    man.push("colors", s.colors);
    man.push("noise", s.noise.describe());
    man.push("boundary_mode", s.boundary_mode);
    man.push("prior", value_name(s.prior));
    man.push("feature", value_name(s.feature));
    man.push("boundary_detector", value_name(s.boundary_detector));
    man.push("p_feature", format!("{:?}", s.p_feature));
    man.push("prune_eps", format!("{:?}", s.prune_eps));
    man.push("window_size", s.window_size);
    man.push("source_size", format!("{}x{}", source.width, source.height));
    man.push("source_maxval", source.maxval);
    man.push(
        "quantization",
        "floor(level * colors / (source_maxval + 1))",
    );
    man.push("color_prior", color_prior.to_csv().trim_end());
    man.push("defined_pixels", lik.defined_count());
    man.push("time_read_s", format!("{read_secs:.6}"));
    man.push("time_detect_s", format!("{detect_secs:.6}"));
    man.push(
        "time_total_s",
        format!("{:.6}", start.elapsed().as_secs_f64()),
    );
    man.push("sha256_input", sha256_hex(&input_bytes));
    man.push("sha256_noise_matrix_csv", matrix_hash);
    man.push("sha256_output", sha256_hex(&pgm));
    man.push("sha256_csv", sha256_hex(csv.as_bytes()));
    Ok(DetectOutputs {
        pgm,
        csv,
        manifest: man,
    })
}

pub fn run(args: &DetectArgs) -> CliResult<()> {
    let s = args.resolve()?;
    let out = compute(&s)?;
    write_outputs(&s, &out)?;
    println!(
        "wrote {}, {} and {}",
        s.output.display(),
        s.csv_path().display(),
        s.manifest_path().display()
    );
    Ok(())
}

fn write_outputs(s: &DetectSettings, out: &DetectOutputs) -> CliResult<()> {
    write(&s.output, &out.pgm)?;
    write(&s.csv_path(), &out.csv)?;
    write(&s.manifest_path(), out.manifest.to_text())
}
