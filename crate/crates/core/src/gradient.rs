//! The one-dimensional gradient as a boundary detector.
//!
//! For two adjacent pixels `(o1, o2)` the optimal detector compares
//!
//! * `P(W | B)  = (1/N^2) [sum_c P(o1|c)] [sum_c P(o2|c)]` (two independent regions),
//! * `P(W | NB) = (1/N) sum_c P(o1|c) P(o2|c)` (one region),
//!
//! and the gradient `|o1 - o2|` is a valid surrogate exactly when the
//! resulting posterior is monotonic in it. [`check_monotonicity`] decides that
//! by exhaustive enumeration; [`build_lookup_table`] gives the posterior per
//! gradient magnitude.

use std::cmp::Ordering;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::noise::{BoundaryMode, NoiseMatrix};

/// Largest color count the exhaustive checkers accept.
pub const MAX_ENUMERATED_COLORS: usize = 4096;

/// Posterior ties closer than this are treated as equal.
pub const DEFAULT_TIE_TOLERANCE: f64 = 1e-9;

/// Boundary prior used for the monotonicity sweep. The ordering of the
/// posteriors does not depend on it.
pub const REFERENCE_P_B: f64 = 0.5;

/// Caps the number of witnesses stored in a report; totals are still counted.
pub const MAX_RECORDED_VIOLATIONS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PixelPair {
    pub o1: usize,
    pub o2: usize,
}

impl PixelPair {
    pub fn new(o1: usize, o2: usize) -> Self {
        Self { o1, o2 }
    }

    fn check(self, n: usize) -> Result<()> {
        for c in [self.o1, self.o2] {
            if c >= n {
                return Err(Error::ColorOutOfRange {
                    color: c,
                    num_colors: n,
                });
            }
        }
        Ok(())
    }
}

/// `|o1 - o2|`.
pub fn gradient_magnitude(p: PixelPair) -> usize {
    p.o1.abs_diff(p.o2)
}

/// Gradient magnitude under the matrix's boundary mode: plain difference, or
/// circular distance under wraparound.
pub fn gradient_distance(p: PixelPair, m: &NoiseMatrix) -> usize {
    m.boundary_mode().distance(p.o1, p.o2, m.num_colors())
}

/// Sums in ascending order, so symmetric pairs tie exactly.
fn sorted_sum(mut terms: Vec<f64>) -> f64 {
    terms.sort_by(f64::total_cmp);
    terms.iter().sum()
}

fn row_sum(m: &NoiseMatrix, o: usize) -> f64 {
    sorted_sum(m.row(o).to_vec())
}

fn overlap(m: &NoiseMatrix, o1: usize, o2: usize) -> f64 {
    sorted_sum(
        m.row(o1)
            .iter()
            .zip(m.row(o2))
            .map(|(a, b)| a * b)
            .collect(),
    )
}

/// `P(W | NB)`: both pixels show the same uniformly chosen region color.
pub fn same_region_likelihood(p: PixelPair, m: &NoiseMatrix) -> Result<f64> {
    p.check(m.num_colors())?;
    Ok(overlap(m, p.o1, p.o2) / m.num_colors() as f64)
}

/// `P(W | B)`: the pixels come from two independently colored regions.
pub fn diff_region_likelihood(p: PixelPair, m: &NoiseMatrix) -> Result<f64> {
    p.check(m.num_colors())?;
    let n = m.num_colors() as f64;
    Ok(row_sum(m, p.o1) * row_sum(m, p.o2) / (n * n))
}

fn posterior_from(diff: f64, same: f64, p_b: f64) -> Result<f64> {
    let num = diff * p_b;
    let den = num + same * (1.0 - p_b);
    if !(den > 0.0) {
        return Err(Error::ZeroEvidence);
    }
    Ok(num / den)
}

fn check_p_b(p_b: f64) -> Result<()> {
    if !(p_b > 0.0 && p_b < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "boundary prior must lie in (0, 1), got {p_b}"
        )));
    }
    Ok(())
}

/// Probability that a boundary separates the two pixels, given prior `p_b`.
pub fn boundary_posterior_two_pixel(p: PixelPair, m: &NoiseMatrix, p_b: f64) -> Result<f64> {
    check_p_b(p_b)?;
    let diff = diff_region_likelihood(p, m)?;
    let same = same_region_likelihood(p, m)?;
    posterior_from(diff, same, p_b)
}

/// Posteriors of every ordered pair, row-major by `(o1, o2)`.
fn all_posteriors(m: &NoiseMatrix, p_b: f64) -> Result<Vec<f64>> {
    let n = m.num_colors();
    let sums: Vec<f64> = (0..n).map(|o| row_sum(m, o)).collect();
    let nf = n as f64;
    let rows: Vec<Result<Vec<f64>>> = (0..n)
        .into_par_iter()
        .map(|o1| {
            (0..n)
                .map(|o2| {
                    let diff = sums[o1] * sums[o2] / (nf * nf);
                    let same = overlap(m, o1, o2) / nf;
                    posterior_from(diff, same, p_b)
                })
                .collect()
        })
        .collect();
    let mut out = Vec::with_capacity(n * n);
    for row in rows {
        out.extend(row?);
    }
    Ok(out)
}

fn guard(m: &NoiseMatrix) -> Result<()> {
    let n = m.num_colors();
    if n > MAX_ENUMERATED_COLORS {
        return Err(Error::GuardExceeded {
            needed: n as u128,
            guard: MAX_ENUMERATED_COLORS as u128,
        });
    }
    Ok(())
}

/// Two pairs whose posterior order disagrees with their gradient order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Counterexample {
    pub pair_a: PixelPair,
    pub pair_b: PixelPair,
    /// Gradient of `pair_a` compared with that of `pair_b`.
    pub gradient_relation: Ordering,
    /// Posterior of `pair_a` compared with that of `pair_b`.
    pub posterior_relation: Ordering,
}

/// A pixel `o` and two partners; `lhs` belongs to `o_double_prime`, `rhs` to `o_prime`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionTriple {
    pub o: usize,
    pub o_prime: usize,
    pub o_double_prime: usize,
    pub lhs: f64,
    pub rhs: f64,
}

/// Outcome of the exhaustive gradient check.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityReport {
    pub passed: bool,
    pub num_colors: usize,
    pub boundary_mode: BoundaryMode,
    pub tolerance: f64,
    pub reference_p_b: f64,
    /// Witness pairs, at most one per violating pair of gradient classes.
    pub counterexamples: Vec<Counterexample>,
    pub counterexample_total: usize,
    /// Largest posterior difference between two pairs with the same gradient.
    pub max_equal_gradient_posterior_spread: f64,
    /// `(o, o', o'')` with `o''` farther from `o` than `o'` but a smaller
    /// boundary posterior (beyond tolerance).
    pub condition_violations: Vec<ConditionTriple>,
    pub condition_violation_total: usize,
    /// Violations of the strict raw-gray-level reading ([`check_paper_condition`]).
    pub literal_condition_violations: usize,
    /// Whether the raw-gray-level reading reaches the same verdict as `passed`.
    pub literal_condition_agrees: bool,
}

impl MonotonicityReport {
    /// Human-readable summary, listing the recorded witnesses.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let verdict = if self.passed { "passed" } else { "failed" };
        let _ = writeln!(s, "gradient monotonicity: {verdict}");
        let _ = writeln!(s, "colors: {}", self.num_colors);
        let _ = writeln!(s, "boundary_mode: {}", self.boundary_mode);
        let _ = writeln!(s, "tolerance: {:e}", self.tolerance);
        let _ = writeln!(s, "reference_p_b: {}", self.reference_p_b);
        let _ = writeln!(
            s,
            "max_equal_gradient_posterior_spread: {:e}",
            self.max_equal_gradient_posterior_spread
        );
        let _ = writeln!(s, "counterexamples: {}", self.counterexample_total);
        for c in &self.counterexamples {
            let _ = writeln!(
                s,
                "  ({}, {}) vs ({}, {}): gradient {:?}, posterior {:?}",
                c.pair_a.o1,
                c.pair_a.o2,
                c.pair_b.o1,
                c.pair_b.o2,
                c.gradient_relation,
                c.posterior_relation
            );
        }
        let _ = writeln!(
            s,
            "condition_violations: {}",
            self.condition_violation_total
        );
        for t in &self.condition_violations {
            let _ = writeln!(
                s,
                "  o={} o'={} o''={}: {:e} < {:e}",
                t.o, t.o_prime, t.o_double_prime, t.lhs, t.rhs
            );
        }
        let _ = writeln!(
            s,
            "literal_condition_violations: {}",
            self.literal_condition_violations
        );
        let _ = writeln!(
            s,
            "literal_condition_agrees: {}",
            self.literal_condition_agrees
        );
        s
    }
}

#[derive(Clone, Copy)]
struct Extreme {
    value: f64,
    pair: PixelPair,
}

#[derive(Clone, Copy)]
struct GradientClass {
    min: Extreme,
    max: Extreme,
}

/// Exhaustively checks whether the two-pixel boundary posterior is monotonic
/// in the gradient magnitude (circular distance under wraparound).
///
/// Checked at `p_b = 0.5`: pairs with equal gradient must have posteriors
/// within `tolerance`, and a pair with a smaller gradient must never have a
/// larger posterior by more than `tolerance`.
pub fn check_monotonicity(m: &NoiseMatrix, tolerance: f64) -> Result<MonotonicityReport> {
    guard(m)?;
    let n = m.num_colors();
    let post = all_posteriors(m, REFERENCE_P_B)?;
    let dist = |a: usize, b: usize| m.boundary_mode().distance(a, b, n);

    let mut classes: Vec<Option<GradientClass>> = vec![None; n];
    for o1 in 0..n {
        for o2 in 0..n {
            let value = post[o1 * n + o2];
            let e = Extreme {
                value,
                pair: PixelPair::new(o1, o2),
            };
            let class = &mut classes[dist(o1, o2)];
            match class {
                None => *class = Some(GradientClass { min: e, max: e }),
                Some(c) => {
                    if value < c.min.value {
                        c.min = e;
                    }
                    if value > c.max.value {
                        c.max = e;
                    }
                }
            }
        }
    }
    let classes: Vec<GradientClass> = classes.into_iter().flatten().collect();

    let mut counterexamples = Vec::new();
    let mut counterexample_total = 0;
    let mut record = |c: Counterexample, list: &mut Vec<Counterexample>| {
        counterexample_total += 1;
        if list.len() < MAX_RECORDED_VIOLATIONS {
            list.push(c);
        }
    };
    let mut spread: f64 = 0.0;
    for c in &classes {
        let s = c.max.value - c.min.value;
        spread = spread.max(s);
        if s > tolerance {
            record(
                Counterexample {
                    pair_a: c.min.pair,
                    pair_b: c.max.pair,
                    gradient_relation: Ordering::Equal,
                    posterior_relation: Ordering::Less,
                },
                &mut counterexamples,
            );
        }
    }
    for (i, lo) in classes.iter().enumerate() {
        for hi in &classes[i + 1..] {
            if lo.max.value > hi.min.value + tolerance {
                record(
                    Counterexample {
                        pair_a: lo.max.pair,
                        pair_b: hi.min.pair,
                        gradient_relation: Ordering::Less,
                        posterior_relation: Ordering::Greater,
                    },
                    &mut counterexamples,
                );
            }
        }
    }

    // Pairs sharing a pixel: moving the partner farther away must not lower
    // the posterior.
    let mut condition_violations = Vec::new();
    let mut condition_violation_total = 0;
    for o in 0..n {
        let mut by_distance: Vec<Vec<usize>> = vec![Vec::new(); n];
        for partner in 0..n {
            by_distance[dist(o, partner)].push(partner);
        }
        let mut best: Option<(usize, f64)> = None;
        for partners in by_distance.iter().filter(|p| !p.is_empty()) {
            if let Some((o_prime, rhs)) = best {
                for &o_dp in partners {
                    let lhs = post[o * n + o_dp];
                    if lhs < rhs - tolerance {
                        condition_violation_total += 1;
                        if condition_violations.len() < MAX_RECORDED_VIOLATIONS {
                            condition_violations.push(ConditionTriple {
                                o,
                                o_prime,
                                o_double_prime: o_dp,
                                lhs,
                                rhs,
                            });
                        }
                    }
                }
            }
            for &p in partners {
                let v = post[o * n + p];
                if best.is_none_or(|(_, b)| v > b) {
                    best = Some((p, v));
                }
            }
        }
    }

    let passed = counterexample_total == 0 && condition_violation_total == 0 && spread <= tolerance;
    let literal_condition_violations = literal_condition(m, tolerance, |_| {});
    Ok(MonotonicityReport {
        passed,
        num_colors: n,
        boundary_mode: m.boundary_mode(),
        tolerance,
        reference_p_b: REFERENCE_P_B,
        counterexamples,
        counterexample_total,
        max_equal_gradient_posterior_spread: spread,
        condition_violations,
        condition_violation_total,
        literal_condition_violations,
        literal_condition_agrees: (literal_condition_violations == 0) == passed,
    })
}

/// The pairwise condition read literally on raw gray-levels: for every `o`
/// and `o'' > o' >= 0`,
///
/// `sum_c P(o''|c) P(o|c) / sum_c P(o''|c)  <  sum_c P(o'|c) P(o|c) / sum_c P(o'|c)`.
///
/// Returns every triple where the strict inequality does not hold with a
/// margin of `tolerance` (ties are violations).
pub fn check_paper_condition(m: &NoiseMatrix, tolerance: f64) -> Result<Vec<ConditionTriple>> {
    guard(m)?;
    let mut out = Vec::new();
    literal_condition(m, tolerance, |t| out.push(t));
    Ok(out)
}

fn literal_condition(
    m: &NoiseMatrix,
    tolerance: f64,
    mut sink: impl FnMut(ConditionTriple),
) -> usize {
    let n = m.num_colors();
    let sums: Vec<f64> = (0..n).map(|o| row_sum(m, o)).collect();
    let mut count = 0;
    for o in 0..n {
        let ratio: Vec<f64> = (0..n).map(|x| overlap(m, x, o) / sums[x]).collect();
        for o_prime in 0..n {
            for o_dp in o_prime + 1..n {
                let (lhs, rhs) = (ratio[o_dp], ratio[o_prime]);
                if !(lhs < rhs - tolerance) {
                    count += 1;
                    sink(ConditionTriple {
                        o,
                        o_prime,
                        o_double_prime: o_dp,
                        lhs,
                        rhs,
                    });
                }
            }
        }
    }
    count
}

/// CSV of condition triples: `o,o_prime,o_double_prime,lhs,rhs`.
pub fn condition_csv(triples: &[ConditionTriple]) -> String {
    let mut s = String::from("o,o_prime,o_double_prime,lhs,rhs\n");
    for t in triples {
        let _ = writeln!(
            s,
            "{},{},{},{:?},{:?}",
            t.o, t.o_prime, t.o_double_prime, t.lhs, t.rhs
        );
    }
    s
}

/// Posterior statistics of all pairs sharing one gradient magnitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LookupRow {
    pub gradient: usize,
    pub pairs: usize,
    pub min: f64,
    pub mean: f64,
    pub max: f64,
}

impl LookupRow {
    pub fn spread(&self) -> f64 {
        self.max - self.min
    }
}

/// Gradient magnitude to boundary posterior. Rows cover the magnitudes that
/// occur: `0..N` in renormalize mode, `0..=N/2` under wraparound.
#[derive(Debug, Clone, PartialEq)]
pub struct LookupTable {
    pub p_b: f64,
    pub rows: Vec<LookupRow>,
}

impl LookupTable {
    /// Mean posterior for `gradient`, if that magnitude occurs.
    pub fn lookup(&self, gradient: usize) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.gradient == gradient)
            .map(|r| r.mean)
    }

    /// `g,min,mean,max,spread` per row.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("g,min,mean,max,spread\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{:?},{:?},{:?},{:?}",
                r.gradient,
                r.min,
                r.mean,
                r.max,
                r.spread()
            );
        }
        s
    }
}

/// Aggregates the two-pixel posterior over all pairs of each gradient magnitude.
pub fn build_lookup_table(m: &NoiseMatrix, p_b: f64) -> Result<LookupTable> {
    check_p_b(p_b)?;
    guard(m)?;
    let n = m.num_colors();
    let post = all_posteriors(m, p_b)?;
    let mut acc: Vec<Option<(usize, f64, f64, f64)>> = vec![None; n];
    for o1 in 0..n {
        for o2 in 0..n {
            let v = post[o1 * n + o2];
            let g = gradient_distance(PixelPair::new(o1, o2), m);
            acc[g] = Some(match acc[g] {
                None => (1, v, v, v),
                Some((count, sum, lo, hi)) => (count + 1, sum + v, lo.min(v), hi.max(v)),
            });
        }
    }
    let rows = acc
        .into_iter()
        .enumerate()
        .filter_map(|(g, a)| {
            a.map(|(count, sum, min, max)| LookupRow {
                gradient: g,
                pairs: count,
                min,
                mean: sum / count as f64,
                max,
            })
        })
        .collect();
    Ok(LookupTable { p_b, rows })
}
