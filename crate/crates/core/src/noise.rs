//! The structure of noise: a table `P(observe o | actual a)` over `N` gray-levels.
//!
//! Entries are stored with the observed color as the row and the actual color
//! as the column, so the observed histogram is `matrix * actual histogram`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::prior::ColorDistribution;

/// Column sums must equal 1 within this tolerance.
pub const STOCHASTIC_TOLERANCE: f64 = 1e-12;

/// How additive noise treats the ends of the gray-level range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryMode {
    /// Mass falling outside `[0, N)` is dropped and each column renormalized.
    Renormalize,
    /// Gray-levels are treated as a cycle; differences are taken mod `N`.
    Wraparound,
}

impl BoundaryMode {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundaryMode::Renormalize => "renormalize",
            BoundaryMode::Wraparound => "wraparound",
        }
    }

    /// Distance between two gray-levels under this mode.
    pub fn distance(self, a: usize, b: usize, num_colors: usize) -> usize {
        let d = a.abs_diff(b);
        match self {
            BoundaryMode::Renormalize => d,
            BoundaryMode::Wraparound => d.min(num_colors - d),
        }
    }
}

impl fmt::Display for BoundaryMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BoundaryMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "renormalize" => Ok(BoundaryMode::Renormalize),
            "wraparound" => Ok(BoundaryMode::Wraparound),
            other => Err(Error::Parse(format!("unknown boundary mode {other:?}"))),
        }
    }
}

/// Recipe for a noise matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum NoiseSpec {
    /// Gaussian kernel of standard deviation `sigma` (in gray-levels) around the actual color.
    GaussianAdditive { sigma: f64 },
    /// The observation is drawn from `dist` whatever the actual color.
    Replacement(ColorDistribution),
    /// `weight * additive + (1 - weight) * replacement`, columnwise.
    Mixture {
        weight: f64,
        additive: Box<NoiseSpec>,
        replacement: Box<NoiseSpec>,
    },
}

impl NoiseSpec {
    pub fn gaussian(sigma: f64) -> Self {
        NoiseSpec::GaussianAdditive { sigma }
    }

    pub fn mixture(weight: f64, additive: NoiseSpec, replacement: NoiseSpec) -> Self {
        NoiseSpec::Mixture {
            weight,
            additive: Box::new(additive),
            replacement: Box::new(replacement),
        }
    }

    fn validate(&self, num_colors: usize) -> Result<()> {
        match self {
            NoiseSpec::GaussianAdditive { sigma } => {
                if !(sigma.is_finite() && *sigma > 0.0) {
                    return Err(Error::InvalidSigma(*sigma));
                }
            }
            NoiseSpec::Replacement(dist) => {
                if dist.len() != num_colors {
                    return Err(Error::LengthMismatch {
                        expected: num_colors,
                        got: dist.len(),
                    });
                }
            }
            NoiseSpec::Mixture {
                weight,
                additive,
                replacement,
            } => {
                if !(0.0..=1.0).contains(weight) {
                    return Err(Error::InvalidWeight(*weight));
                }
                additive.validate(num_colors)?;
                replacement.validate(num_colors)?;
            }
        }
        Ok(())
    }

    /// Parses the textual form used on the command line and in model files.
    ///
    /// ```text
    /// gaussian(4)
    /// replacement(uniform)
    /// replacement(delta 0)
    /// replacement(0.5 0.25 0.25)
    /// mixture(0.5, gaussian(1), replacement(delta 0))
    /// ```
    ///
    /// `num_colors` is needed to expand `uniform` and `delta`.
    pub fn parse(text: &str, num_colors: usize) -> Result<Self> {
        let mut p = SpecParser {
            src: text.as_bytes(),
            pos: 0,
            num_colors,
        };
        let spec = p.spec()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(Error::Parse(format!(
                "trailing input in noise spec {text:?}"
            )));
        }
        Ok(spec)
    }
}

impl fmt::Display for NoiseSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NoiseSpec::GaussianAdditive { sigma } => write!(f, "gaussian({sigma:?})"),
            NoiseSpec::Replacement(dist) => {
                let n = dist.len();
                let probs = dist.probs();
                if probs.iter().all(|&p| p == probs[0]) {
                    write!(f, "replacement(uniform)")
                } else if let Some(c) = (0..n).find(|&c| probs[c] == 1.0) {
                    write!(f, "replacement(delta {c})")
                } else {
                    let cells: Vec<String> = probs.iter().map(|p| format!("{p:?}")).collect();
                    write!(f, "replacement({})", cells.join(" "))
                }
            }
            NoiseSpec::Mixture {
                weight,
                additive,
                replacement,
            } => write!(f, "mixture({weight:?}, {additive}, {replacement})"),
        }
    }
}

struct SpecParser<'a> {
    src: &'a [u8],
    pos: usize,
    num_colors: usize,
}

impl SpecParser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn expect(&mut self, byte: u8) -> Result<()> {
        self.skip_ws();
        if self.src.get(self.pos) == Some(&byte) {
            self.pos += 1;
            Ok(())
        } else {
            Err(Error::Parse(format!(
                "expected '{}' at offset {} in noise spec",
                byte as char, self.pos
            )))
        }
    }

    fn token(&mut self) -> &str {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() {
            let b = self.src[self.pos];
            if b.is_ascii_alphanumeric() || b == b'.' || b == b'_' || b == b'-' || b == b'+' {
                self.pos += 1;
            } else {
                break;
            }
        }
        std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("")
    }

    fn number(&mut self) -> Result<f64> {
        let tok = self.token().to_string();
        tok.parse()
            .map_err(|_| Error::Parse(format!("expected a number, found {tok:?}")))
    }

    fn spec(&mut self) -> Result<NoiseSpec> {
        let head = self.token().to_string();
        self.expect(b'(')?;
        let spec = match head.as_str() {
            "gaussian" => NoiseSpec::gaussian(self.number()?),
            "replacement" => NoiseSpec::Replacement(self.replacement_dist()?),
            "mixture" => {
                let weight = self.number()?;
                self.expect(b',')?;
                let additive = self.spec()?;
                self.expect(b',')?;
                let replacement = self.spec()?;
                NoiseSpec::mixture(weight, additive, replacement)
            }
            other => return Err(Error::Parse(format!("unknown noise kind {other:?}"))),
        };
        self.expect(b')')?;
        Ok(spec)
    }

    fn replacement_dist(&mut self) -> Result<ColorDistribution> {
        self.skip_ws();
        let save = self.pos;
        match self.token() {
            "uniform" => return ColorDistribution::uniform(self.num_colors),
            "delta" => {
                let c = self.number()?;
                if c < 0.0 || c.fract() != 0.0 {
                    return Err(Error::Parse(format!("bad delta color {c}")));
                }
                return ColorDistribution::delta(self.num_colors, c as usize);
            }
            _ => self.pos = save,
        }
        let mut weights = Vec::new();
        loop {
            self.skip_ws();
            if self.src.get(self.pos) == Some(&b')') {
                break;
            }
            weights.push(self.number()?);
        }
        ColorDistribution::from_weights(&weights)
    }
}

/// Column-stochastic matrix of corruption probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseMatrix {
    num_colors: usize,
    mode: BoundaryMode,
    /// Row-major: `entries[o * N + a] = P(o | a)`.
    entries: Vec<f64>,
}

impl NoiseMatrix {
    /// Builds the matrix for `spec` over `num_colors` gray-levels.
    pub fn build(spec: &NoiseSpec, num_colors: usize, mode: BoundaryMode) -> Result<Self> {
        if num_colors < 2 {
            return Err(Error::TooFewColors {
                min: 2,
                got: num_colors,
            });
        }
        spec.validate(num_colors)?;
        Ok(Self {
            num_colors,
            mode,
            entries: build_entries(spec, num_colors, mode),
        })
    }

    /// Noise-free matrix.
    pub fn identity(num_colors: usize) -> Result<Self> {
        if num_colors < 2 {
            return Err(Error::TooFewColors {
                min: 2,
                got: num_colors,
            });
        }
        let mut entries = vec![0.0; num_colors * num_colors];
        for c in 0..num_colors {
            entries[c * num_colors + c] = 1.0;
        }
        Ok(Self {
            num_colors,
            mode: BoundaryMode::Renormalize,
            entries,
        })
    }

    /// Wraps explicit row-major `(observed, actual)` entries after validation.
    pub fn from_entries(num_colors: usize, mode: BoundaryMode, entries: Vec<f64>) -> Result<Self> {
        if num_colors < 2 {
            return Err(Error::TooFewColors {
                min: 2,
                got: num_colors,
            });
        }
        if entries.len() != num_colors * num_colors {
            return Err(Error::LengthMismatch {
                expected: num_colors * num_colors,
                got: entries.len(),
            });
        }
        if let Some(v) = entries
            .iter()
            .find(|v| !v.is_finite() || **v < 0.0 || **v > 1.0)
        {
            return Err(Error::InvalidDistribution(format!(
                "noise entry {v} outside [0, 1]"
            )));
        }
        for a in 0..num_colors {
            let sum: f64 = (0..num_colors).map(|o| entries[o * num_colors + a]).sum();
            if (sum - 1.0).abs() > STOCHASTIC_TOLERANCE {
                return Err(Error::NotColumnStochastic { column: a, sum });
            }
        }
        Ok(Self {
            num_colors,
            mode,
            entries,
        })
    }

    pub fn num_colors(&self) -> usize {
        self.num_colors
    }

    pub fn boundary_mode(&self) -> BoundaryMode {
        self.mode
    }

    /// Row-major `(observed, actual)` entries.
    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// `P(observed | actual)` without range checks beyond slice indexing.
    #[inline]
    pub fn get(&self, observed: usize, actual: usize) -> f64 {
        self.entries[observed * self.num_colors + actual]
    }

    /// `P(observed | ·)` as a function of the actual color.
    #[inline]
    pub fn row(&self, observed: usize) -> &[f64] {
        let n = self.num_colors;
        &self.entries[observed * n..(observed + 1) * n]
    }

    /// `P(· | actual)`: the observation distribution for one actual color.
    pub fn column(&self, actual: usize) -> Vec<f64> {
        (0..self.num_colors).map(|o| self.get(o, actual)).collect()
    }

    /// Checked lookup of `P(observed | actual)`.
    pub fn corruption_prob(&self, observed: usize, actual: usize) -> Result<f64> {
        let n = self.num_colors;
        for c in [observed, actual] {
            if c >= n {
                return Err(Error::ColorOutOfRange {
                    color: c,
                    num_colors: n,
                });
            }
        }
        Ok(self.get(observed, actual))
    }

    /// True iff `P(o | a)` depends only on `o - a` (mod `N` under wraparound)
    /// within `tol`.
    pub fn is_additive(&self, tol: f64) -> bool {
        let n = self.num_colors;
        match self.mode {
            BoundaryMode::Wraparound => (0..n).all(|a| {
                (0..n).all(|o| (self.get(o, a) - self.get((o + n - a) % n, 0)).abs() <= tol)
            }),
            BoundaryMode::Renormalize => {
                // Compare every entry with the first one on the same diagonal.
                (0..n).all(|o| {
                    (0..n).all(|a| {
                        let shift = o.min(a);
                        (self.get(o, a) - self.get(o - shift, a - shift)).abs() <= tol
                    })
                })
            }
        }
    }

    /// Forward model: the distribution of observed colors when actual colors
    /// follow `actual`.
    pub fn observe(&self, actual: &ColorDistribution) -> Result<ColorDistribution> {
        let n = self.num_colors;
        if actual.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: actual.len(),
            });
        }
        let t = actual.probs();
        let h: Vec<f64> = (0..n)
            .map(|o| self.row(o).iter().zip(t).map(|(m, p)| m * p).sum())
            .collect();
        ColorDistribution::from_weights(&h)
    }

    /// CSV form: a header line `N,boundary_mode`, then `N` rows of `N`
    /// probabilities, row index = observed color.
    pub fn to_csv(&self) -> String {
        let mut out = format!("{},{}\n", self.num_colors, self.mode);
        for o in 0..self.num_colors {
            let cells: Vec<String> = self.row(o).iter().map(|p| format!("{p:?}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty noise matrix file".into()))?;
        let (n, mode) = header
            .split_once(',')
            .ok_or_else(|| Error::Parse(format!("bad noise matrix header {header:?}")))?;
        let n: usize = n
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad color count {n:?}")))?;
        let mode: BoundaryMode = mode.parse()?;
        let mut entries = Vec::with_capacity(n * n);
        for (row, line) in lines.enumerate() {
            let cells = line
                .split(',')
                .map(|c| {
                    c.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Parse(format!("bad entry {c:?} in row {row}")))
                })
                .collect::<Result<Vec<_>>>()?;
            if cells.len() != n {
                return Err(Error::Parse(format!(
                    "row {row} has {} entries, expected {n}",
                    cells.len()
                )));
            }
            entries.extend(cells);
        }
        Self::from_entries(n, mode, entries)
    }
}

fn build_entries(spec: &NoiseSpec, n: usize, mode: BoundaryMode) -> Vec<f64> {
    let mut entries = vec![0.0; n * n];
    match spec {
        NoiseSpec::GaussianAdditive { sigma } => {
            let denom = 2.0 * sigma * sigma;
            for a in 0..n {
                let column: Vec<f64> = (0..n)
                    .map(|o| {
                        let d = mode.distance(o, a, n) as f64;
                        (-d * d / denom).exp()
                    })
                    .collect();
                // Summing in sorted order gives mirrored and shifted columns
                // bitwise identical normalizers.
                let mut sorted = column.clone();
                sorted.sort_by(f64::total_cmp);
                let total: f64 = sorted.iter().sum();
                for (o, w) in column.into_iter().enumerate() {
                    entries[o * n + a] = w / total;
                }
            }
        }
        NoiseSpec::Replacement(dist) => {
            for o in 0..n {
                entries[o * n..(o + 1) * n].fill(dist.get(o));
            }
        }
        NoiseSpec::Mixture {
            weight,
            additive,
            replacement,
        } => {
            let add = build_entries(additive, n, mode);
            let rep = build_entries(replacement, n, mode);
            for ((e, x), y) in entries.iter_mut().zip(&add).zip(&rep) {
                *e = weight * x + (1.0 - weight) * y;
            }
        }
    }
    entries
}
