//! Exact posteriors of tiny worlds by brute-force enumeration.
//!
//! A circumstance is a structure (with its parameters), the latent region
//! colors it needs, and the resulting actual color of every pixel. Its
//! probability is
//!
//! ```text
//! P(structure) * P(latent colors | structure) * prod_i P(o_i | actual_i)
//! ```
//!
//! with latent colors uniform. The posterior of a feature is the probability
//! of the circumstances where the feature holds and the observation occurs,
//! divided by the probability of all circumstances where the observation
//! occurs.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::noise::{BoundaryMode, NoiseMatrix, NoiseSpec};

pub const MAX_PIXELS: usize = 12;
pub const MAX_COLORS: usize = 8;
/// Upper bound on the number of circumstances summed per query.
pub const ENUMERATION_GUARD: u128 = 100_000_000;

const BLOCK: u64 = 1 << 12;

/// How the actual colors of the pixels arise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Structure {
    /// All pixels share one region color.
    SingleRegion,
    /// Two distinct region colors; each pixel takes one of them with probability 1/2.
    BimodalWindow,
    /// Every pixel has its own uniformly drawn color.
    RandomField,
    /// A strip with pixels `0..boundary_at` in one region and the rest in
    /// another; both region colors uniform and independent.
    TwoRegionStrip { boundary_at: usize },
}

impl Structure {
    fn name(&self) -> &'static str {
        match self {
            Structure::SingleRegion => "single_region",
            Structure::BimodalWindow => "bimodal_window",
            Structure::RandomField => "random_field",
            Structure::TwoRegionStrip { .. } => "two_region_strip",
        }
    }

    fn circumstance_count(&self, pixels: usize, colors: usize) -> u128 {
        let (p, n) = (pixels as u32, colors as u128);
        match self {
            Structure::SingleRegion => n,
            Structure::BimodalWindow => n * (n - 1) * (1u128 << p),
            Structure::RandomField => n.pow(p),
            Structure::TwoRegionStrip { .. } => n * n,
        }
    }

    /// Probability of one latent assignment given the structure.
    fn latent_weight(&self, pixels: usize, colors: usize) -> f64 {
        let n = colors as f64;
        match self {
            Structure::SingleRegion => 1.0 / n,
            Structure::BimodalWindow => 1.0 / (n * (n - 1.0)) / (1u64 << pixels) as f64,
            Structure::RandomField => 1.0 / n.powi(pixels as i32),
            Structure::TwoRegionStrip { .. } => 1.0 / (n * n),
        }
    }

    /// Decodes circumstance `index` into latent colors and actual pixel colors.
    fn decode(&self, index: u64, colors: usize, latent: &mut Vec<usize>, actual: &mut [usize]) {
        let n = colors as u64;
        latent.clear();
        match *self {
            Structure::SingleRegion => {
                latent.push(index as usize);
                actual.fill(index as usize);
            }
            Structure::RandomField => {
                let mut rest = index;
                for a in actual.iter_mut() {
                    *a = (rest % n) as usize;
                    rest /= n;
                }
                latent.extend_from_slice(actual);
            }
            Structure::TwoRegionStrip { boundary_at } => {
                let (left, right) = ((index % n) as usize, (index / n) as usize);
                latent.extend([left, right]);
                for (i, a) in actual.iter_mut().enumerate() {
                    *a = if i < boundary_at { left } else { right };
                }
            }
            Structure::BimodalWindow => {
                let pixels = actual.len();
                let selectors = index & ((1u64 << pixels) - 1);
                let pair = index >> pixels;
                let c1 = (pair / (n - 1)) as usize;
                let mut c2 = (pair % (n - 1)) as usize;
                if c2 >= c1 {
                    c2 += 1;
                }
                latent.extend([c1, c2]);
                for (i, a) in actual.iter_mut().enumerate() {
                    *a = if selectors >> i & 1 == 0 { c1 } else { c2 };
                }
            }
        }
    }
}

/// One world state, as seen by a feature predicate.
#[derive(Debug, Clone, Copy)]
pub struct Circumstance<'a> {
    pub structure: &'a Structure,
    /// Region colors (per-pixel colors for [`Structure::RandomField`]).
    pub latent_colors: &'a [usize],
    /// Actual (noise-free) color of every pixel.
    pub actual: &'a [usize],
}

/// A finite world small enough to enumerate.
#[derive(Debug, Clone, PartialEq)]
pub struct TinyModelSpec {
    pub num_pixels: usize,
    pub num_colors: usize,
    /// Structures and their prior probabilities (normalized on construction).
    pub structure_prior: Vec<(Structure, f64)>,
    pub noise: NoiseMatrix,
}

impl TinyModelSpec {
    pub fn new(
        num_pixels: usize,
        structure_prior: Vec<(Structure, f64)>,
        noise: NoiseMatrix,
    ) -> Result<Self> {
        let num_colors = noise.num_colors();
        if num_pixels == 0 || num_pixels > MAX_PIXELS {
            return Err(Error::InvalidConfig(format!(
                "tiny models have 1..={MAX_PIXELS} pixels, got {num_pixels}"
            )));
        }
        if num_colors > MAX_COLORS {
            return Err(Error::InvalidConfig(format!(
                "tiny models have at most {MAX_COLORS} colors, got {num_colors}"
            )));
        }
        if structure_prior.is_empty() {
            return Err(Error::InvalidConfig("no structures given".into()));
        }
        for (s, w) in &structure_prior {
            if !(w.is_finite() && *w >= 0.0) {
                return Err(Error::InvalidConfig(format!("structure weight {w}")));
            }
            if let Structure::TwoRegionStrip { boundary_at } = s {
                if *boundary_at == 0 || *boundary_at >= num_pixels {
                    return Err(Error::InvalidConfig(format!(
                        "strip boundary {boundary_at} must lie in 1..{num_pixels}"
                    )));
                }
            }
        }
        let total: f64 = structure_prior.iter().map(|(_, w)| w).sum();
        if !(total > 0.0) {
            return Err(Error::InvalidConfig("structure weights sum to zero".into()));
        }
        let structure_prior = structure_prior
            .into_iter()
            .map(|(s, w)| (s, w / total))
            .collect();
        let spec = Self {
            num_pixels,
            num_colors,
            structure_prior,
            noise,
        };
        let needed = spec.circumstance_count();
        if needed > ENUMERATION_GUARD {
            return Err(Error::GuardExceeded {
                needed,
                guard: ENUMERATION_GUARD,
            });
        }
        Ok(spec)
    }

    /// Total number of circumstances over all structures.
    pub fn circumstance_count(&self) -> u128 {
        self.structure_prior
            .iter()
            .map(|(s, _)| s.circumstance_count(self.num_pixels, self.num_colors))
            .sum()
    }

    /// Key-value text form.
    ///
    /// ```text
    /// num_pixels = 9
    /// boundary_mode = wraparound
    /// noise = gaussian(4.0)
    /// structure = single_region 0.5
    /// structure = two_region_strip 0.5 boundary_at=2
    /// ```
    ///
    /// Instead of `noise`, the matrix may be given row by row with
    /// `noise_row = p0,p1,...` (row index = observed color); [`Self::to_text`]
    /// always writes rows. `num_colors` is implied by the noise.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "num_pixels = {}", self.num_pixels);
        let _ = writeln!(s, "num_colors = {}", self.num_colors);
        let _ = writeln!(s, "boundary_mode = {}", self.noise.boundary_mode());
        for (st, w) in &self.structure_prior {
            match st {
                Structure::TwoRegionStrip { boundary_at } => {
                    let _ = writeln!(
                        s,
                        "structure = {} {w:?} boundary_at={boundary_at}",
                        st.name()
                    );
                }
                _ => {
                    let _ = writeln!(s, "structure = {} {w:?}", st.name());
                }
            }
        }
        for o in 0..self.num_colors {
            let cells: Vec<String> = self.noise.row(o).iter().map(|p| format!("{p:?}")).collect();
            let _ = writeln!(s, "noise_row = {}", cells.join(","));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut num_pixels = None;
        let mut num_colors = None;
        let mut mode = BoundaryMode::Renormalize;
        let mut noise_spec = None;
        let mut rows: Vec<Vec<f64>> = Vec::new();
        let mut structures = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |what: &str| Error::Parse(format!("line {}: {what}", lineno + 1));
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| bad("expected key = value"))?;
            let value = value.trim();
            match key.trim() {
                "num_pixels" => {
                    num_pixels = Some(value.parse().map_err(|_| bad("bad num_pixels"))?)
                }
                "num_colors" => {
                    num_colors = Some(value.parse().map_err(|_| bad("bad num_colors"))?)
                }
                "boundary_mode" => mode = value.parse()?,
                "noise" => noise_spec = Some(value.to_string()),
                "noise_row" => rows.push(
                    value
                        .split(',')
                        .map(|c| c.trim().parse::<f64>().map_err(|_| bad("bad noise entry")))
                        .collect::<Result<_>>()?,
                ),
                "structure" => {
                    let mut parts = value.split_whitespace();
                    let name = parts.next().ok_or_else(|| bad("missing structure name"))?;
                    let weight: f64 = parts
                        .next()
                        .ok_or_else(|| bad("missing structure weight"))?
                        .parse()
                        .map_err(|_| bad("bad structure weight"))?;
                    let structure = match name {
                        "single_region" => Structure::SingleRegion,
                        "bimodal_window" => Structure::BimodalWindow,
                        "random_field" => Structure::RandomField,
                        "two_region_strip" => {
                            let at = parts
                                .next()
                                .and_then(|p| p.strip_prefix("boundary_at="))
                                .ok_or_else(|| bad("two_region_strip needs boundary_at=K"))?;
                            Structure::TwoRegionStrip {
                                boundary_at: at.parse().map_err(|_| bad("bad boundary_at"))?,
                            }
                        }
                        other => return Err(bad(&format!("unknown structure {other:?}"))),
                    };
                    structures.push((structure, weight));
                }
                other => return Err(bad(&format!("unknown key {other:?}"))),
            }
        }
        let num_pixels = num_pixels.ok_or_else(|| Error::Parse("missing num_pixels".into()))?;
        let noise = match (noise_spec, rows.is_empty()) {
            (Some(spec), true) => {
                let n = num_colors.ok_or_else(|| Error::Parse("noise needs num_colors".into()))?;
                if spec == "identity" {
                    NoiseMatrix::identity(n)?
                } else {
                    NoiseMatrix::build(&NoiseSpec::parse(&spec, n)?, n, mode)?
                }
            }
            (None, false) => {
                let n = rows.len();
                if num_colors.is_some_and(|c| c != n) {
                    return Err(Error::Parse("num_colors disagrees with noise rows".into()));
                }
                NoiseMatrix::from_entries(n, mode, rows.into_iter().flatten().collect())?
            }
            _ => {
                return Err(Error::Parse(
                    "give exactly one of `noise` or `noise_row` lines".into(),
                ))
            }
        };
        Self::new(num_pixels, structures, noise)
    }
}

/// Sums of circumstance probabilities for one observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointProbability {
    /// `P(O & F)` summed over circumstances where the feature holds.
    pub p_obs_and_feature: f64,
    /// `P(O)`.
    pub p_obs: f64,
}

/// `P(O & F)` and `P(O)` by enumeration. Blocks of circumstances are summed in
/// parallel and the block sums added in a fixed order, so results are
/// independent of the thread count.
pub fn enumerate_joint<F>(
    spec: &TinyModelSpec,
    observation: &[usize],
    feature: F,
) -> Result<JointProbability>
where
    F: Fn(&Circumstance) -> bool + Sync,
{
    let (pixels, n) = (spec.num_pixels, spec.num_colors);
    if observation.len() != pixels {
        return Err(Error::LengthMismatch {
            expected: pixels,
            got: observation.len(),
        });
    }
    if let Some(&o) = observation.iter().find(|&&o| o >= n) {
        return Err(Error::ColorOutOfRange {
            color: o,
            num_colors: n,
        });
    }
    let needed = spec.circumstance_count();
    if needed > ENUMERATION_GUARD {
        return Err(Error::GuardExceeded {
            needed,
            guard: ENUMERATION_GUARD,
        });
    }
    let rows: Vec<&[f64]> = observation.iter().map(|&o| spec.noise.row(o)).collect();

    let mut joint = 0.0;
    let mut total = 0.0;
    for (structure, prior) in &spec.structure_prior {
        if *prior == 0.0 {
            continue;
        }
        let count = structure.circumstance_count(pixels, n) as u64;
        let weight = prior * structure.latent_weight(pixels, n);
        let blocks = count.div_ceil(BLOCK);
        let sums: Vec<(f64, f64)> = (0..blocks)
            .into_par_iter()
            .map(|b| {
                let mut latent = Vec::with_capacity(pixels);
                let mut actual = vec![0usize; pixels];
                let (mut yes, mut all) = (0.0, 0.0);
                for index in b * BLOCK..((b + 1) * BLOCK).min(count) {
                    structure.decode(index, n, &mut latent, &mut actual);
                    let mut p = weight;
                    for (row, &a) in rows.iter().zip(&actual) {
                        p *= row[a];
                    }
                    all += p;
                    let c = Circumstance {
                        structure,
                        latent_colors: &latent,
                        actual: &actual,
                    };
                    if feature(&c) {
                        yes += p;
                    }
                }
                (yes, all)
            })
            .collect();
        for (yes, all) in sums {
            joint += yes;
            total += all;
        }
    }
    Ok(JointProbability {
        p_obs_and_feature: joint,
        p_obs: total,
    })
}

/// Exact posterior `P(F | O)` of the feature predicate.
pub fn enumerate_posterior<F>(
    spec: &TinyModelSpec,
    observation: &[usize],
    feature: F,
) -> Result<f64>
where
    F: Fn(&Circumstance) -> bool + Sync,
{
    let j = enumerate_joint(spec, observation, feature)?;
    if !(j.p_obs > 0.0) {
        return Err(Error::ZeroEvidence);
    }
    Ok(j.p_obs_and_feature / j.p_obs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::NoiseSpec;

    fn gaussian(sigma: f64, n: usize) -> NoiseMatrix {
        NoiseMatrix::build(&NoiseSpec::gaussian(sigma), n, BoundaryMode::Wraparound).unwrap()
    }

    fn is(s: Structure) -> impl Fn(&Circumstance) -> bool + Sync {
        move |c: &Circumstance| *c.structure == s
    }

    #[test]
    fn identity_single_region_is_certain() {
        let spec = TinyModelSpec::new(
            4,
            vec![(Structure::SingleRegion, 1.0)],
            NoiseMatrix::identity(3).unwrap(),
        )
        .unwrap();
        let p = enumerate_posterior(&spec, &[2, 2, 2, 2], |c| c.latent_colors[0] == 2).unwrap();
        assert_eq!(p, 1.0);
        assert_eq!(
            enumerate_posterior(&spec, &[2, 1, 2, 2], |_| true),
            Err(Error::ZeroEvidence)
        );
    }

    #[test]
    fn decode_covers_each_circumstance_once() {
        let (pixels, n) = (3, 3);
        for s in [
            Structure::SingleRegion,
            Structure::BimodalWindow,
            Structure::RandomField,
            Structure::TwoRegionStrip { boundary_at: 1 },
        ] {
            let count = s.circumstance_count(pixels, n) as u64;
            let mut seen = std::collections::HashSet::new();
            let mut latent = Vec::new();
            let mut actual = vec![0; pixels];
            for i in 0..count {
                s.decode(i, n, &mut latent, &mut actual);
                let mut key = latent.clone();
                key.extend(&actual);
                assert!(seen.insert(key), "{s:?} repeats at {i}");
                assert!(actual.iter().all(|&a| a < n));
            }
            // Latent weights times counts cover the structure's whole mass.
            let mass = s.latent_weight(pixels, n) * count as f64;
            assert!((mass - 1.0).abs() < 1e-15, "{s:?}");
        }
    }

    #[test]
    fn bimodal_never_repeats_a_region_color() {
        let spec =
            TinyModelSpec::new(3, vec![(Structure::BimodalWindow, 1.0)], gaussian(1.0, 4)).unwrap();
        let p = enumerate_posterior(&spec, &[0, 1, 2], |c| {
            c.latent_colors[0] == c.latent_colors[1]
        })
        .unwrap();
        assert_eq!(p, 0.0);
    }

    #[test]
    fn posteriors_over_a_partition_sum_to_one() {
        let structures = vec![
            (Structure::SingleRegion, 0.2),
            (Structure::RandomField, 0.3),
            (Structure::BimodalWindow, 0.4),
            (Structure::TwoRegionStrip { boundary_at: 2 }, 0.1),
        ];
        let spec = TinyModelSpec::new(4, structures.clone(), gaussian(2.0, 5)).unwrap();
        let obs = [0, 3, 3, 4];
        let total: f64 = structures
            .iter()
            .map(|(s, _)| enumerate_posterior(&spec, &obs, is(*s)).unwrap())
            .sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn guards_and_validation() {
        let big = TinyModelSpec::new(12, vec![(Structure::RandomField, 1.0)], gaussian(1.0, 8));
        assert!(matches!(big, Err(Error::GuardExceeded { .. })));
        assert!(
            TinyModelSpec::new(13, vec![(Structure::SingleRegion, 1.0)], gaussian(1.0, 2)).is_err()
        );
        assert!(
            TinyModelSpec::new(3, vec![(Structure::SingleRegion, 1.0)], gaussian(1.0, 9)).is_err()
        );
        assert!(TinyModelSpec::new(
            3,
            vec![(Structure::TwoRegionStrip { boundary_at: 3 }, 1.0)],
            gaussian(1.0, 2)
        )
        .is_err());
        let spec =
            TinyModelSpec::new(2, vec![(Structure::SingleRegion, 1.0)], gaussian(1.0, 2)).unwrap();
        assert!(enumerate_joint(&spec, &[0], |_| true).is_err());
        assert!(enumerate_joint(&spec, &[0, 2], |_| true).is_err());
    }

    #[test]
    fn text_round_trip() {
        let spec = TinyModelSpec::new(
            4,
            vec![
                (Structure::SingleRegion, 0.25),
                (Structure::TwoRegionStrip { boundary_at: 2 }, 0.75),
            ],
            gaussian(1.5, 3),
        )
        .unwrap();
        let back = TinyModelSpec::from_text(&spec.to_text()).unwrap();
        assert_eq!(back, spec);

        let text = "# two colors\nnum_pixels = 2\nnum_colors = 2\nnoise = identity\n\
                    structure = single_region 1\nstructure = random_field 1\n";
        let parsed = TinyModelSpec::from_text(text).unwrap();
        assert_eq!(parsed.structure_prior[1], (Structure::RandomField, 0.5));
        assert_eq!(parsed.noise, NoiseMatrix::identity(2).unwrap());

        let spec_text = "num_pixels = 3\nnum_colors = 4\nboundary_mode = wraparound\n\
                         noise = gaussian(2)\nstructure = bimodal_window 1\n";
        let parsed = TinyModelSpec::from_text(spec_text).unwrap();
        assert_eq!(parsed.noise, gaussian(2.0, 4));

        assert!(TinyModelSpec::from_text("num_pixels = 2\nstructure = single_region 1\n").is_err());
        assert!(TinyModelSpec::from_text(
            "num_pixels = 2\nnum_colors = 2\nnoise = identity\nstructure = blob 1\n"
        )
        .is_err());
    }
}
