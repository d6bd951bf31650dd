//! `generate`: seeded rectangle scene, its noisy observation and boundary mask.

use std::path::PathBuf;

use bayesedge::noise::BoundaryMode;
use bayesedge::oracle::{apply_noise, generate_scene, SceneSpec};
use bayesedge::pgm::Pgm;
use clap::Args;

use crate::error::{create_dir, write, CliError, CliResult};
use crate::manifest::{sha256_hex, Manifest};
use crate::noise::{NoiseArgs, NoiseSource};

#[derive(Args, Debug, Clone)]
pub struct GenerateArgs {
    #[arg(long, default_value_t = 64)]
    pub width: usize,
    #[arg(long, default_value_t = 64)]
    pub height: usize,
    /// Number of rectangles painted over the background
    #[arg(long, default_value_t = 3)]
    pub rects: usize,
    #[arg(long, default_value_t = 16)]
    pub colors: usize,
    #[command(flatten)]
    pub noise: NoiseArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Directory for the scene files (created if missing)
    #[arg(long)]
    pub output_dir: PathBuf,
}

pub fn compute(args: &GenerateArgs) -> CliResult<Vec<(&'static str, Vec<u8>)>> {
    let spec = match args.noise.source(Some(args.colors))? {
        Some(NoiseSource::Spec(spec)) => spec,
        Some(_) => {
            return Err(CliError::Usage(
                "generate takes a parametric noise model, not identity or a matrix file".into(),
            ))
        }
        None => {
            return Err(CliError::Usage(
                "a noise model is required (--noise, --sigma or --replacement)".into(),
            ))
        }
    };
    let scene_spec = SceneSpec {
        width: args.width,
        height: args.height,
        num_rects: args.rects,
        num_colors: args.colors,
        noise: spec,
        boundary_mode: args
            .noise
            .boundary_mode
            .unwrap_or(BoundaryMode::Renormalize),
        seed: args.seed,
    };
    let scene = generate_scene(&scene_spec)?;
    let noisy = apply_noise(
        &scene.noiseless,
        &scene_spec.noise_matrix()?,
        scene_spec.noise_seed(),
    )?;

    let noiseless = Pgm::from_image(&scene.noiseless).to_p2();
    let noisy = Pgm::from_image(&noisy).to_p2();
    let truth = Pgm::from_mask(&scene.truth).to_p2();

    let mut man = Manifest::new();
    man.push("command", "generate");
    man.push("version", env!("CARGO_PKG_VERSION"));
    man.push("width", args.width);
    man.push("height", args.height);
    man.push("rects", args.rects);
    man.push("colors", args.colors);
    man.push("noise", scene_spec.noise.to_string());
    man.push("boundary_mode", scene_spec.boundary_mode);
    man.push("seed", args.seed);
    man.push("noise_seed", scene_spec.noise_seed());
    man.push("rng", "ChaCha8 (rand_chacha 0.3, seed_from_u64)");
    man.push("background", scene.background);
    for (i, r) in scene.rects.iter().enumerate() {
        man.push(
            &format!("rect_{i}"),
            format!(
                "x {}..{} y {}..{} color {}",
                r.x0, r.x1, r.y0, r.y1, r.color
            ),
        );
    }
    man.push("boundary_pixels", scene.truth.count());
    man.push("sha256_noiseless", sha256_hex(&noiseless));
    man.push("sha256_noisy", sha256_hex(&noisy));
    man.push("sha256_truth", sha256_hex(&truth));
    Ok(vec![
        ("noiseless.pgm", noiseless),
        ("noisy.pgm", noisy),
        ("truth.pgm", truth),
        ("manifest.txt", man.to_text().into_bytes()),
    ])
}

pub fn run(args: &GenerateArgs) -> CliResult<()> {
    let files = compute(args)?;
    create_dir(&args.output_dir)?;
    for (name, bytes) in &files {
        write(&args.output_dir.join(name), bytes)?;
    }
    println!("wrote scene to {}", args.output_dir.display());
    Ok(())
}
