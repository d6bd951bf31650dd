//! Distributions of actual (pre-noise) gray-levels.
//!
//! The detectors need `P(actual = c)`. Two estimates are provided: the uniform
//! distribution, and the deconvolved image histogram, which inverts the
//! forward relation `observed histogram = noise matrix x actual histogram`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::noise::NoiseMatrix;

/// Tolerance on `sum == 1` for a valid distribution.
pub const SUM_TOLERANCE: f64 = 1e-12;

/// Default ceiling on the condition estimate accepted by [`deconvolve_histogram`].
pub const DEFAULT_MAX_CONDITION: f64 = 1e12;

/// Probability vector over `N` gray-levels.
#[derive(Debug, Clone, PartialEq)]
pub struct ColorDistribution {
    probs: Vec<f64>,
}

impl ColorDistribution {
    /// Wraps `probs`, which must be non-negative and sum to 1 within [`SUM_TOLERANCE`].
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("empty".into()));
        }
        if let Some((i, p)) = probs
            .iter()
            .enumerate()
            .find(|(_, p)| !p.is_finite() || **p < 0.0)
        {
            return Err(Error::InvalidDistribution(format!("entry {i} is {p}")));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidDistribution(format!("sums to {sum}")));
        }
        Ok(Self { probs })
    }

    /// Normalizes non-negative weights into a distribution.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidDistribution(
                "weights must be finite and non-negative".into(),
            ));
        }
        let sum: f64 = weights.iter().sum();
        if sum <= 0.0 {
            return Err(Error::InvalidDistribution("weights sum to zero".into()));
        }
        Self::new(weights.iter().map(|w| w / sum).collect())
    }

    pub fn uniform(num_colors: usize) -> Result<Self> {
        uniform_distribution(num_colors)
    }

    /// All mass on one gray-level.
    pub fn delta(num_colors: usize, color: usize) -> Result<Self> {
        if color >= num_colors {
            return Err(Error::ColorOutOfRange { color, num_colors });
        }
        let mut probs = vec![0.0; num_colors];
        probs[color] = 1.0;
        Ok(Self { probs })
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn get(&self, color: usize) -> f64 {
        self.probs[color]
    }

    /// Single CSV line of `N` decimals.
    pub fn to_csv(&self) -> String {
        let cells: Vec<String> = self.probs.iter().map(|p| format!("{p:?}")).collect();
        format!("{}\n", cells.join(","))
    }

    /// Parses the single-line CSV form. The values are renormalized, so
    /// rounded decimals are accepted.
    pub fn from_csv(text: &str) -> Result<Self> {
        let line = text
            .lines()
            .map(str::trim)
            .find(|l| !l.is_empty())
            .ok_or_else(|| Error::Parse("empty distribution file".into()))?;
        let weights = line
            .split(',')
            .map(|cell| {
                cell.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("bad probability {cell:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_weights(&weights)
    }
}

/// Uniform gray-level distribution: every entry `1/N`.
pub fn uniform_distribution(num_colors: usize) -> Result<ColorDistribution> {
    if num_colors == 0 {
        return Err(Error::TooFewColors { min: 1, got: 0 });
    }
    let p = 1.0 / num_colors as f64;
    let mut probs = vec![p; num_colors];
    // Put any rounding residue on the last entry so the sum is 1.
    let residue = 1.0 - probs.iter().sum::<f64>();
    probs[num_colors - 1] += residue;
    Ok(ColorDistribution { probs })
}

/// Normalized frequency of each gray-level in `img`.
pub fn observed_histogram(img: &GrayImage, num_colors: usize) -> Result<ColorDistribution> {
    if num_colors == 0 {
        return Err(Error::TooFewColors { min: 1, got: 0 });
    }
    let mut counts = vec![0u64; num_colors];
    for &p in img.pixels() {
        let p = p as usize;
        if p >= num_colors {
            return Err(Error::ColorOutOfRange {
                color: p,
                num_colors,
            });
        }
        counts[p] += 1;
    }
    let total = img.pixels().len() as f64;
    ColorDistribution::new(counts.iter().map(|&c| c as f64 / total).collect())
}

/// Estimates the actual-color distribution from an observed histogram by
/// solving `m * x = observed`, with the default condition ceiling.
pub fn deconvolve_histogram(
    observed: &ColorDistribution,
    m: &NoiseMatrix,
) -> Result<ColorDistribution> {
    deconvolve_histogram_with(observed, m, DEFAULT_MAX_CONDITION)
}

/// As [`deconvolve_histogram`] with an explicit ceiling on the 2-norm
/// condition estimate. Negative components of the solution are clamped to 0
/// and the result renormalized.
pub fn deconvolve_histogram_with(
    observed: &ColorDistribution,
    m: &NoiseMatrix,
    max_condition: f64,
) -> Result<ColorDistribution> {
    let n = m.num_colors();
    if observed.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: observed.len(),
        });
    }
    let a = DMatrix::from_row_slice(n, n, m.entries());
    let condition = condition_estimate(&a);
    if !(condition <= max_condition) {
        return Err(Error::SingularMatrix { condition });
    }
    let b = DVector::from_column_slice(observed.probs());
    let x = a
        .lu()
        .solve(&b)
        .ok_or(Error::SingularMatrix { condition })?;
    let clamped: Vec<f64> = x.iter().map(|v| v.max(0.0)).collect();
    ColorDistribution::from_weights(&clamped)
}

/// Ratio of largest to smallest singular value; infinite when singular.
pub fn condition_estimate(a: &DMatrix<f64>) -> f64 {
    let sv = a.clone().svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}
