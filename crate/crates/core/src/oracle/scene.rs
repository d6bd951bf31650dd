//! Seeded scenes of overlapping uniformly colored rectangles.
//!
//! Randomness comes from `ChaCha8Rng::seed_from_u64`, whose output stream is
//! fixed across platforms, so a `(spec, seed)` pair always gives the same scene.

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::image::{BoundaryMask, GrayImage};
use crate::noise::{BoundaryMode, NoiseMatrix, NoiseSpec};

/// Half-open rectangle `[x0, x1) x [y0, y1)` painted in one color.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rect {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
    pub color: u16,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneSpec {
    pub width: usize,
    pub height: usize,
    pub num_rects: usize,
    pub num_colors: usize,
    pub noise: NoiseSpec,
    pub boundary_mode: BoundaryMode,
    pub seed: u64,
}

impl SceneSpec {
    pub fn noise_matrix(&self) -> Result<NoiseMatrix> {
        NoiseMatrix::build(&self.noise, self.num_colors, self.boundary_mode)
    }

    /// Seed used for the noise pass of [`Self::render`].
    pub fn noise_seed(&self) -> u64 {
        self.seed.wrapping_add(1)
    }

    /// The noiseless scene plus its noisy observation.
    pub fn render(&self) -> Result<(Scene, GrayImage)> {
        let scene = generate_scene(self)?;
        let noisy = apply_noise(&scene.noiseless, &self.noise_matrix()?, self.noise_seed())?;
        Ok((scene, noisy))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub noiseless: GrayImage,
    /// Pixels with a 4-neighbour of a different noiseless color.
    pub truth: BoundaryMask,
    pub background: u16,
    pub rects: Vec<Rect>,
}

/// Paints `rects` in order over a constant background, clipping to the image.
pub fn paint_scene(
    width: usize,
    height: usize,
    num_colors: usize,
    background: u16,
    rects: &[Rect],
) -> Result<Scene> {
    let mut img = GrayImage::filled(width, height, num_colors, background)?;
    for r in rects {
        if r.color as usize >= num_colors {
            return Err(Error::ColorOutOfRange {
                color: r.color as usize,
                num_colors,
            });
        }
        for y in r.y0.min(height)..r.y1.min(height) {
            for x in r.x0.min(width)..r.x1.min(width) {
                img.set(x, y, r.color);
            }
        }
    }
    Ok(Scene {
        truth: BoundaryMask::from_color_changes(&img),
        noiseless: img,
        background,
        rects: rects.to_vec(),
    })
}

/// Random background and `num_rects` random rectangles. Each rectangle spans
/// two uniformly drawn corners; colors are uniform over the gray-levels.
pub fn generate_scene(spec: &SceneSpec) -> Result<Scene> {
    if spec.width == 0 || spec.height == 0 {
        return Err(Error::InvalidGeometry(format!(
            "scene must be non-empty, got {}x{}",
            spec.width, spec.height
        )));
    }
    if spec.num_colors < 2 || spec.num_colors > u16::MAX as usize + 1 {
        return Err(Error::InvalidConfig(format!(
            "unsupported color count {}",
            spec.num_colors
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.num_colors as u16;
    let background = rng.gen_range(0..n);
    let mut span = |len: usize| {
        let a = rng.gen_range(0..len);
        let b = rng.gen_range(0..len);
        (a.min(b), a.max(b) + 1)
    };
    let mut rects = Vec::with_capacity(spec.num_rects);
    for _ in 0..spec.num_rects {
        let (x0, x1) = span(spec.width);
        let (y0, y1) = span(spec.height);
        rects.push(Rect {
            x0,
            y0,
            x1,
            y1,
            color: 0,
        });
    }
    for r in &mut rects {
        r.color = rng.gen_range(0..n);
    }
    paint_scene(spec.width, spec.height, spec.num_colors, background, &rects)
}

/// Replaces every pixel by a draw from `P(· | actual)`.
pub fn apply_noise(img: &GrayImage, m: &NoiseMatrix, seed: u64) -> Result<GrayImage> {
    let n = m.num_colors();
    if img.num_colors() > n {
        return Err(Error::InvalidConfig(format!(
            "image has {} colors, noise matrix {}",
            img.num_colors(),
            n
        )));
    }
    let samplers = (0..n)
        .map(|a| {
            WeightedIndex::new(m.column(a))
                .map_err(|e| Error::InvalidDistribution(format!("column {a}: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pixels = img
        .pixels()
        .iter()
        .map(|&a| samplers[a as usize].sample(&mut rng) as u16)
        .collect();
    GrayImage::new(img.width(), img.height(), n, pixels)
}
