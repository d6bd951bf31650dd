//! Window likelihoods for the interior, exterior and boundary propositions.
//!
//! All detectors look at a `k x k` window (3 x 3 by default) and treat its
//! pixels as an unordered ensemble. The kernels walk the window in sorted
//! order, so any rearrangement of the pixels gives bit-identical results.
//!
//! * interior: `sum_c P(c) prod_ij P(o_ij | c)`, one region color behind the whole window;
//! * exterior: `N^(-k^2)`, every pixel independent and uniform;
//! * boundary, constant approximation: also `N^(-k^2)`;
//! * boundary, exact bimodal: average over ordered pairs of distinct region
//!   colors of `prod_ij (P(o_ij | c1) + P(o_ij | c2)) / 2`.

use rayon::prelude::*;

use crate::cost::{OpCount, Tally};
use crate::error::{Error, Result};
use crate::image::{GrayImage, Window};
use crate::noise::NoiseMatrix;
use crate::prior::ColorDistribution;

/// Which likelihood stands in for `P(O | boundary)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryDetector {
    /// The flat `N^(-k^2)` approximation.
    ConstantApprox,
    /// Full sum over pairs of region colors.
    ExactBimodal,
}

impl BoundaryDetector {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundaryDetector::ConstantApprox => "constant_approx",
            BoundaryDetector::ExactBimodal => "exact_bimodal",
        }
    }
}

/// Which proposition pair [`scan_image`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScanFeature {
    /// Feature = not exterior (interior), alternative = exterior.
    InteriorVsExterior,
    /// Feature = boundary, alternative = not boundary (interior).
    BoundaryVsNot,
}

/// Everything the detectors assume about an image.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorConfig {
    pub noise: NoiseMatrix,
    pub color_prior: ColorDistribution,
    pub window_size: usize,
    /// Allowed absolute error of the pruned interior likelihood; 0 disables pruning.
    pub prune_eps: f64,
    pub boundary_detector: BoundaryDetector,
}

impl DetectorConfig {
    /// 3 x 3 windows, no pruning, constant boundary approximation.
    pub fn new(noise: NoiseMatrix, color_prior: ColorDistribution) -> Result<Self> {
        let cfg = Self {
            noise,
            color_prior,
            window_size: 3,
            prune_eps: 0.0,
            boundary_detector: BoundaryDetector::ConstantApprox,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_window_size(mut self, k: usize) -> Result<Self> {
        self.window_size = k;
        self.validate()?;
        Ok(self)
    }

    pub fn with_prune_eps(mut self, eps: f64) -> Result<Self> {
        self.prune_eps = eps;
        self.validate()?;
        Ok(self)
    }

    pub fn with_boundary_detector(mut self, detector: BoundaryDetector) -> Self {
        self.boundary_detector = detector;
        self
    }

    pub fn num_colors(&self) -> usize {
        self.noise.num_colors()
    }

    pub fn validate(&self) -> Result<()> {
        if self.window_size == 0 || self.window_size.is_multiple_of(2) {
            return Err(Error::InvalidWindowSize(self.window_size));
        }
        if !(0.0..1.0).contains(&self.prune_eps) {
            return Err(Error::InvalidConfig(format!(
                "prune_eps must lie in [0, 1), got {}",
                self.prune_eps
            )));
        }
        if self.color_prior.len() != self.noise.num_colors() {
            return Err(Error::LengthMismatch {
                expected: self.noise.num_colors(),
                got: self.color_prior.len(),
            });
        }
        Ok(())
    }

    fn check_window(&self, w: &Window) -> Result<Vec<u16>> {
        if w.size() != self.window_size {
            return Err(Error::InvalidConfig(format!(
                "window is {0}x{0}, detector expects {1}x{1}",
                w.size(),
                self.window_size
            )));
        }
        let n = self.num_colors();
        if let Some(&v) = w.values().iter().find(|&&v| v as usize >= n) {
            return Err(Error::ColorOutOfRange {
                color: v as usize,
                num_colors: n,
            });
        }
        Ok(w.sorted_values())
    }
}

/// `P(O | feature)` and `P(O | not feature)` for one window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LikelihoodPair {
    pub p_obs_given_feature: f64,
    pub p_obs_given_not_feature: f64,
}

/// Result of a pruned evaluation with its bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrunedLikelihood {
    pub value: f64,
    /// Color terms whose product was skipped.
    pub skipped_terms: usize,
    /// Color terms whose product was computed.
    pub evaluated_terms: usize,
}

/// Likelihood of observing `observed` at a pixel whose actual color is `c`.
pub fn pixel_really_is(observed: usize, c: usize, cfg: &DetectorConfig) -> Result<f64> {
    cfg.noise.corruption_prob(observed, c)
}

/// `P(window | interior)`: probability of the window given that it lies in a
/// uniformly colored region.
pub fn interior_likelihood(w: &Window, cfg: &DetectorConfig) -> Result<f64> {
    interior_likelihood_counted(w, cfg, &mut ())
}

pub fn interior_likelihood_counted(
    w: &Window,
    cfg: &DetectorConfig,
    tally: &mut impl Tally,
) -> Result<f64> {
    let sorted = cfg.check_window(w)?;
    Ok(interior_kernel(&sorted, cfg, 0.0, tally).value)
}

/// `P(window | exterior)`: every pixel independent and uniform.
pub fn exterior_likelihood(w: &Window, cfg: &DetectorConfig) -> Result<f64> {
    cfg.check_window(w)?;
    Ok(flat_likelihood(cfg.num_colors(), w.size(), &mut ()))
}

/// The constant stand-in for `P(window | boundary)`; identical to the exterior value.
pub fn boundary_likelihood_constant(w: &Window, cfg: &DetectorConfig) -> Result<f64> {
    boundary_likelihood_constant_counted(w, cfg, &mut ())
}

pub fn boundary_likelihood_constant_counted(
    w: &Window,
    cfg: &DetectorConfig,
    tally: &mut impl Tally,
) -> Result<f64> {
    cfg.check_window(w)?;
    Ok(flat_likelihood(cfg.num_colors(), w.size(), tally))
}

/// `P(window | boundary)` under the two-region model: each pixel shows one of
/// two distinct region colors, chosen with probability 1/2.
///
/// Ordered pairs `(c1, c2)`, `c1 != c2`, are weighted by
/// `P(c1) P(c2) / (1 - sum_c P(c)^2)`.
pub fn boundary_likelihood_exact(w: &Window, cfg: &DetectorConfig) -> Result<f64> {
    boundary_likelihood_exact_counted(w, cfg, &mut ())
}

pub fn boundary_likelihood_exact_counted(
    w: &Window,
    cfg: &DetectorConfig,
    tally: &mut impl Tally,
) -> Result<f64> {
    let n = cfg.num_colors();
    if n < 2 {
        return Err(Error::TooFewColors { min: 2, got: n });
    }
    let sorted = cfg.check_window(w)?;
    let prior = cfg.color_prior.probs();
    let distinct_mass = 1.0 - prior.iter().map(|p| p * p).sum::<f64>();
    if distinct_mass <= 0.0 {
        return Ok(0.0);
    }
    let rows: Vec<&[f64]> = sorted.iter().map(|&o| cfg.noise.row(o as usize)).collect();
    let mut sum = 0.0;
    for c1 in 0..n {
        for c2 in 0..n {
            if c1 == c2 {
                continue;
            }
            let mut term = prior[c1] * prior[c2];
            for row in &rows {
                term *= 0.5 * (row[c1] + row[c2]);
            }
            sum += term;
        }
    }
    tally.muls((n * (n - 1)) as u64 * (1 + 2 * rows.len() as u64));
    Ok(sum / distinct_mass)
}

/// The boundary likelihood selected by `cfg.boundary_detector`.
pub fn boundary_likelihood(w: &Window, cfg: &DetectorConfig) -> Result<f64> {
    match cfg.boundary_detector {
        BoundaryDetector::ConstantApprox => boundary_likelihood_constant(w, cfg),
        BoundaryDetector::ExactBimodal => boundary_likelihood_exact(w, cfg),
    }
}

/// Interior likelihood with color terms skipped when some pixel factor falls
/// below `prune_eps / N`. The result is within `prune_eps` of
/// [`interior_likelihood`]; with `prune_eps == 0` it is identical.
pub fn pruned_interior_likelihood(w: &Window, cfg: &DetectorConfig) -> Result<f64> {
    Ok(pruned_interior_stats(w, cfg, &mut ())?.value)
}

pub fn pruned_interior_stats(
    w: &Window,
    cfg: &DetectorConfig,
    tally: &mut impl Tally,
) -> Result<PrunedLikelihood> {
    let sorted = cfg.check_window(w)?;
    let threshold = cfg.prune_eps / cfg.num_colors() as f64;
    Ok(interior_kernel(&sorted, cfg, threshold, tally))
}

/// Interior likelihood as used by the scans: pruned when `prune_eps > 0`.
fn interior_for_scan(sorted: &[u16], cfg: &DetectorConfig) -> f64 {
    let threshold = cfg.prune_eps / cfg.num_colors() as f64;
    interior_kernel(sorted, cfg, threshold, &mut ()).value
}

fn interior_kernel(
    sorted: &[u16],
    cfg: &DetectorConfig,
    threshold: f64,
    tally: &mut impl Tally,
) -> PrunedLikelihood {
    let prior = cfg.color_prior.probs();
    let rows: Vec<&[f64]> = sorted.iter().map(|&o| cfg.noise.row(o as usize)).collect();
    let mut sum = 0.0;
    let mut skipped = 0;
    let mut evaluated = 0;
    'colors: for (c, &p) in prior.iter().enumerate() {
        if threshold > 0.0 && rows.iter().any(|row| row[c] < threshold) {
            skipped += 1;
            continue 'colors;
        }
        let mut term = p;
        for row in &rows {
            term *= row[c];
        }
        sum += term;
        evaluated += 1;
    }
    tally.muls(evaluated as u64 * rows.len() as u64);
    PrunedLikelihood {
        value: sum,
        skipped_terms: skipped,
        evaluated_terms: evaluated,
    }
}

fn flat_likelihood(num_colors: usize, k: usize, tally: &mut impl Tally) -> f64 {
    let p = 1.0 / num_colors as f64;
    let cells = k * k;
    let mut value = 1.0;
    for _ in 0..cells {
        value *= p;
    }
    tally.muls(cells as u64);
    value
}

/// Likelihood pair for one window under `feature`.
pub fn window_likelihoods(
    w: &Window,
    cfg: &DetectorConfig,
    feature: ScanFeature,
) -> Result<LikelihoodPair> {
    let sorted = cfg.check_window(w)?;
    Ok(pair_from_sorted(&sorted, w, cfg, feature))
}

fn pair_from_sorted(
    sorted: &[u16],
    w: &Window,
    cfg: &DetectorConfig,
    feature: ScanFeature,
) -> LikelihoodPair {
    let interior = interior_for_scan(sorted, cfg);
    let flat = flat_likelihood(cfg.num_colors(), cfg.window_size, &mut ());
    match feature {
        ScanFeature::InteriorVsExterior => LikelihoodPair {
            p_obs_given_feature: interior,
            p_obs_given_not_feature: flat,
        },
        ScanFeature::BoundaryVsNot => {
            let boundary = match cfg.boundary_detector {
                BoundaryDetector::ConstantApprox => flat,
                // Window already validated.
                BoundaryDetector::ExactBimodal => {
                    boundary_likelihood_exact(w, cfg).expect("validated window")
                }
            };
            LikelihoodPair {
                p_obs_given_feature: boundary,
                p_obs_given_not_feature: interior,
            }
        }
    }
}

/// Multiplications per pixel of the whole boundary-vs-not detector (both
/// likelihoods) at an arbitrary window, for cost comparisons.
pub fn boundary_detector_cost(w: &Window, cfg: &DetectorConfig) -> Result<OpCount> {
    let mut count = OpCount::default();
    interior_likelihood_counted(w, cfg, &mut count)?;
    match cfg.boundary_detector {
        BoundaryDetector::ConstantApprox => {
            boundary_likelihood_constant_counted(w, cfg, &mut count)?;
        }
        BoundaryDetector::ExactBimodal => {
            boundary_likelihood_exact_counted(w, cfg, &mut count)?;
        }
    }
    Ok(count)
}

/// Image-shaped array of likelihood pairs; `None` where the window does not fit.
#[derive(Debug, Clone, PartialEq)]
pub struct LikelihoodMap {
    width: usize,
    height: usize,
    cells: Vec<Option<LikelihoodPair>>,
}

impl LikelihoodMap {
    pub fn new(width: usize, height: usize, cells: Vec<Option<LikelihoodPair>>) -> Result<Self> {
        if cells.len() != width * height {
            return Err(Error::LengthMismatch {
                expected: width * height,
                got: cells.len(),
            });
        }
        Ok(Self {
            width,
            height,
            cells,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> Option<LikelihoodPair> {
        self.cells[y * self.width + x]
    }

    pub fn cells(&self) -> &[Option<LikelihoodPair>] {
        &self.cells
    }

    pub fn defined_count(&self) -> usize {
        self.cells.iter().filter(|c| c.is_some()).count()
    }

    /// One line per pixel, row-major: `p_feature,p_not_feature`, or `nan,nan`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for cell in &self.cells {
            match cell {
                Some(p) => out.push_str(&format!(
                    "{:?},{:?}\n",
                    p.p_obs_given_feature, p.p_obs_given_not_feature
                )),
                None => out.push_str("nan,nan\n"),
            }
        }
        out
    }
}

/// Evaluates `feature` at every pixel whose window fits inside `img`.
///
/// Rows are processed in parallel; the output does not depend on the number
/// of threads.
pub fn scan_image(
    img: &GrayImage,
    cfg: &DetectorConfig,
    feature: ScanFeature,
) -> Result<LikelihoodMap> {
    cfg.validate()?;
    let k = cfg.window_size;
    let (w, h) = (img.width(), img.height());
    if w < k || h < k {
        return Err(Error::ImageTooSmall {
            width: w,
            height: h,
            window: k,
        });
    }
    if img.num_colors() > cfg.num_colors() {
        return Err(Error::InvalidConfig(format!(
            "image has {} colors, detector expects {}",
            img.num_colors(),
            cfg.num_colors()
        )));
    }
    let rows: Vec<Vec<Option<LikelihoodPair>>> = (0..h)
        .into_par_iter()
        .map(|y| {
            (0..w)
                .map(|x| {
                    img.window(x, y, k).map(|win| {
                        let sorted = win.sorted_values();
                        pair_from_sorted(&sorted, &win, cfg, feature)
                    })
                })
                .collect()
        })
        .collect();
    LikelihoodMap::new(w, h, rows.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::{BoundaryMode, NoiseSpec};
    use proptest::prelude::*;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cfg_identity(n: usize) -> DetectorConfig {
        DetectorConfig::new(
            NoiseMatrix::identity(n).unwrap(),
            ColorDistribution::uniform(n).unwrap(),
        )
        .unwrap()
    }

    fn cfg_gaussian(sigma: f64, n: usize, mode: BoundaryMode) -> DetectorConfig {
        DetectorConfig::new(
            NoiseMatrix::build(&NoiseSpec::gaussian(sigma), n, mode).unwrap(),
            ColorDistribution::uniform(n).unwrap(),
        )
        .unwrap()
    }

    fn win(values: [u16; 9]) -> Window {
        Window::new(3, values.to_vec()).unwrap()
    }

    /// Normalized Gaussian column evaluated directly, independent of `NoiseMatrix`.
    fn gaussian_column(sigma: f64, n: usize, actual: usize, wrap: bool) -> Vec<f64> {
        let raw: Vec<f64> = (0..n)
            .map(|o| {
                let mut d = (o as f64 - actual as f64).abs();
                if wrap {
                    d = d.min(n as f64 - d);
                }
                (-d * d / (2.0 * sigma * sigma)).exp()
            })
            .collect();
        let z: f64 = raw.iter().sum();
        raw.into_iter().map(|v| v / z).collect()
    }

    #[test]
    fn pixel_really_is_lookups() {
        let id = cfg_identity(4);
        assert_eq!(pixel_really_is(3, 3, &id), Ok(1.0));
        assert_eq!(pixel_really_is(2, 3, &id), Ok(0.0));
        assert!(pixel_really_is(4, 0, &id).is_err());

        let g = cfg_gaussian(4.0, 16, BoundaryMode::Renormalize);
        let col = gaussian_column(4.0, 16, 5, false);
        let got = pixel_really_is(5, 5, &g).unwrap();
        assert!((got - col[5]).abs() < 1e-15);
        assert!((0..16).all(|o| pixel_really_is(o, 5, &g).unwrap() <= got));
        assert!(col.iter().all(|&v| v <= got + 1e-15));
    }

    #[test]
    fn interior_at_delta_noise() {
        let cfg = cfg_identity(4);
        assert_eq!(interior_likelihood(&win([2; 9]), &cfg), Ok(0.25));
        assert_eq!(
            interior_likelihood(&win([2, 2, 2, 2, 1, 2, 2, 2, 2]), &cfg),
            Ok(0.0)
        );
    }

    #[test]
    fn interior_matches_direct_sum() {
        let cfg = cfg_gaussian(4.0, 8, BoundaryMode::Wraparound);
        let w = win([1, 1, 2, 1, 1, 1, 0, 1, 1]);
        let mut oracle = 0.0;
        for c in 0..8 {
            let col = gaussian_column(4.0, 8, c, true);
            oracle += 0.125 * w.values().iter().map(|&o| col[o as usize]).product::<f64>();
        }
        let got = interior_likelihood(&w, &cfg).unwrap();
        assert!((got - oracle).abs() < 1e-12, "{got} vs {oracle}");
    }

    #[test]
    fn exterior_and_constant_values() {
        let w2 = win([0, 1, 0, 1, 0, 1, 0, 1, 0]);
        let c2 = cfg_identity(2);
        assert_eq!(exterior_likelihood(&w2, &c2), Ok(1.0 / 512.0));
        assert_eq!(boundary_likelihood_constant(&w2, &c2), Ok(1.0 / 512.0));
        let c16 = cfg_identity(16);
        assert_eq!(exterior_likelihood(&win([3; 9]), &c16), Ok(16f64.powi(-9)));
        let c4 = cfg_identity(4);
        assert_eq!(
            boundary_likelihood_constant(&win([3; 9]), &c4),
            Ok(4f64.powi(-9))
        );
    }

    #[test]
    fn single_color_window_is_certain_exterior() {
        // N = 1 cannot carry a noise matrix; the flat value itself is 1.
        assert_eq!(flat_likelihood(1, 3, &mut ()), 1.0);
    }

    #[test]
    fn exact_boundary_at_delta_noise() {
        let c2 = cfg_identity(2);
        let w = win([0, 0, 0, 0, 0, 1, 1, 1, 1]);
        assert_eq!(boundary_likelihood_exact(&w, &c2), Ok(2f64.powi(-9)));
        let c4 = cfg_identity(4);
        assert_eq!(
            boundary_likelihood_exact(&win([0, 1, 2, 0, 1, 2, 0, 1, 2]), &c4),
            Ok(0.0)
        );
    }

    #[test]
    fn exact_boundary_matches_pair_sum() {
        let cfg = cfg_gaussian(4.0, 8, BoundaryMode::Wraparound);
        let w = win([0, 7, 3, 3, 4, 0, 6, 5, 1]);
        // 28 unordered pairs, uniform weight 1/28.
        let mut oracle = 0.0;
        for c1 in 0..8 {
            for c2 in c1 + 1..8 {
                let a = gaussian_column(4.0, 8, c1, true);
                let b = gaussian_column(4.0, 8, c2, true);
                let prod: f64 = w
                    .values()
                    .iter()
                    .map(|&o| 0.5 * a[o as usize] + 0.5 * b[o as usize])
                    .product();
                oracle += prod / 28.0;
            }
        }
        let got = boundary_likelihood_exact(&w, &cfg).unwrap();
        assert!((got - oracle).abs() < 1e-12, "{got} vs {oracle}");
    }

    #[test]
    fn pruning_disabled_and_at_delta_noise() {
        let cfg = cfg_gaussian(4.0, 16, BoundaryMode::Renormalize);
        let w = win([0, 3, 9, 15, 2, 2, 7, 7, 1]);
        assert_eq!(
            pruned_interior_likelihood(&w, &cfg).unwrap().to_bits(),
            interior_likelihood(&w, &cfg).unwrap().to_bits()
        );
        let id = cfg_identity(4).with_prune_eps(0.001).unwrap();
        for w in [win([1; 9]), win([0, 1, 1, 1, 1, 1, 1, 1, 1])] {
            assert_eq!(
                pruned_interior_likelihood(&w, &id),
                interior_likelihood(&w, &id)
            );
        }
    }

    #[test]
    fn pruning_error_bound_on_random_windows() {
        let cfg = cfg_gaussian(4.0, 32, BoundaryMode::Renormalize)
            .with_prune_eps(0.001)
            .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut skipped = 0;
        let mut worst: f64 = 0.0;
        for _ in 0..1000 {
            let values: Vec<u16> = (0..9).map(|_| rng.gen_range(0..32)).collect();
            let w = Window::new(3, values).unwrap();
            let stats = pruned_interior_stats(&w, &cfg, &mut ()).unwrap();
            let exact = interior_likelihood(&w, &cfg).unwrap();
            worst = worst.max((stats.value - exact).abs());
            skipped += stats.skipped_terms;
        }
        assert!(worst <= 0.001);
        assert!(skipped > 0);
    }

    #[test]
    fn config_validation() {
        let cfg = cfg_identity(4);
        assert!(cfg.clone().with_window_size(4).is_err());
        assert!(cfg.clone().with_prune_eps(1.0).is_err());
        assert!(cfg.clone().with_prune_eps(-0.1).is_err());
        assert!(DetectorConfig::new(
            NoiseMatrix::identity(4).unwrap(),
            ColorDistribution::uniform(5).unwrap()
        )
        .is_err());
        let w5 = Window::new(5, vec![0; 25]).unwrap();
        assert!(interior_likelihood(&w5, &cfg).is_err());
        assert!(interior_likelihood(&win([4; 9]), &cfg).is_err());
    }

    #[test]
    fn scan_geometry_and_constant_image() {
        let cfg = cfg_identity(4);
        let img = GrayImage::new(3, 3, 4, vec![1; 9]).unwrap();
        let map = scan_image(&img, &cfg, ScanFeature::InteriorVsExterior).unwrap();
        assert_eq!(map.defined_count(), 1);
        assert!(map.get(1, 1).is_some());

        let flat = GrayImage::filled(6, 5, 4, 2).unwrap();
        let map = scan_image(&flat, &cfg, ScanFeature::InteriorVsExterior).unwrap();
        for y in 0..5 {
            for x in 0..6 {
                let border = x == 0 || y == 0 || x == 5 || y == 4;
                match map.get(x, y) {
                    None => assert!(border),
                    Some(p) => {
                        assert!(!border);
                        assert_eq!(p.p_obs_given_feature, 0.25);
                        assert_eq!(p.p_obs_given_not_feature, 4f64.powi(-9));
                    }
                }
            }
        }

        let tiny = GrayImage::filled(2, 5, 4, 0).unwrap();
        assert!(matches!(
            scan_image(&tiny, &cfg, ScanFeature::BoundaryVsNot),
            Err(Error::ImageTooSmall { .. })
        ));
    }

    #[test]
    fn scan_csv_marks_absent_cells() {
        let cfg = cfg_identity(2);
        let img = GrayImage::filled(3, 3, 2, 0).unwrap();
        let csv = scan_image(&img, &cfg, ScanFeature::BoundaryVsNot)
            .unwrap()
            .to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 9);
        assert_eq!(lines[0], "nan,nan");
        assert_eq!(lines[4], "0.001953125,0.5");
    }

    #[test]
    fn monotone_degradation_at_eight_colors() {
        let cfg = cfg_gaussian(4.0, 8, BoundaryMode::Wraparound);
        for a in 0..8u16 {
            let base = interior_likelihood(&win([a; 9]), &cfg).unwrap();
            for b in 0..8u16 {
                let mut v = [a; 9];
                v[4] = b;
                let replaced = interior_likelihood(&win(v), &cfg).unwrap();
                assert!(base >= replaced - 1e-18, "a={a} b={b}");
            }
        }
    }

    fn entropy(p: &[f64]) -> f64 {
        p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.ln()).sum()
    }

    #[test]
    fn bimodal_pixel_distribution_is_flatter() {
        for mode in [BoundaryMode::Wraparound, BoundaryMode::Renormalize] {
            let m = NoiseMatrix::build(&NoiseSpec::gaussian(4.0), 8, mode).unwrap();
            for c1 in 0..8 {
                for c2 in 0..8 {
                    if c1 == c2 {
                        continue;
                    }
                    let a = m.column(c1);
                    let b = m.column(c2);
                    let mix: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 0.5 * x + 0.5 * y).collect();
                    let h_mix = entropy(&mix);
                    let (ha, hb) = (entropy(&a), entropy(&b));
                    // Wraparound columns share one entropy. Truncated columns
                    // near the ends are sharper, so there only the lower
                    // component entropy is a guaranteed floor.
                    let floor = match mode {
                        BoundaryMode::Wraparound => ha.max(hb),
                        BoundaryMode::Renormalize => ha.min(hb),
                    };
                    assert!(h_mix >= floor - 1e-12, "{mode} {c1} {c2}");
                }
            }
        }
    }

    #[test]
    fn likelihoods_are_probabilities() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (sigma, mode) in [
            (0.5, BoundaryMode::Renormalize),
            (6.0, BoundaryMode::Wraparound),
        ] {
            let cfg = cfg_gaussian(sigma, 12, mode);
            for _ in 0..200 {
                let values: Vec<u16> = (0..9).map(|_| rng.gen_range(0..12)).collect();
                let w = Window::new(3, values).unwrap();
                for v in [
                    interior_likelihood(&w, &cfg).unwrap(),
                    exterior_likelihood(&w, &cfg).unwrap(),
                    boundary_likelihood_exact(&w, &cfg).unwrap(),
                    boundary_likelihood_constant(&w, &cfg).unwrap(),
                ] {
                    assert!(v.is_finite() && (0.0..=1.0).contains(&v));
                }
            }
        }
    }

    proptest! {
        #[test]
        fn permutation_leaves_every_likelihood_unchanged(
            values in proptest::collection::vec(0u16..10, 9),
            seed in any::<u64>(),
        ) {
            let cfg = cfg_gaussian(3.0, 10, BoundaryMode::Renormalize);
            let mut shuffled = values.clone();
            shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            let a = Window::new(3, values).unwrap();
            let b = Window::new(3, shuffled).unwrap();
            type Op = fn(&Window, &DetectorConfig) -> Result<f64>;
            let ops: [Op; 4] = [
                interior_likelihood,
                exterior_likelihood,
                boundary_likelihood_constant,
                boundary_likelihood_exact,
            ];
            for op in ops {
                prop_assert_eq!(op(&a, &cfg).unwrap().to_bits(), op(&b, &cfg).unwrap().to_bits());
            }
        }

        #[test]
        fn constant_boundary_equals_exterior(values in proptest::collection::vec(0u16..6, 9)) {
            let cfg = cfg_gaussian(1.5, 6, BoundaryMode::Wraparound);
            let w = Window::new(3, values).unwrap();
            prop_assert_eq!(
                boundary_likelihood_constant(&w, &cfg).unwrap(),
                exterior_likelihood(&w, &cfg).unwrap()
            );
        }
    }
}
