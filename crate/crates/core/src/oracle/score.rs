//! Scoring a boundary probability map against a known boundary mask.

use crate::bayes::ProbabilityMap;
use crate::error::{Error, Result};
use crate::image::BoundaryMask;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryScore {
    /// Probability that a random boundary pixel outranks a random
    /// non-boundary one, ties counting half.
    pub auc: f64,
    pub mean_on: f64,
    pub mean_off: f64,
}

/// Ranks the defined pixels of `pmap` by the posterior of its first feature.
pub fn score_boundary_map(pmap: &ProbabilityMap, truth: &BoundaryMask) -> Result<BoundaryScore> {
    if pmap.width() != truth.width() || pmap.height() != truth.height() {
        return Err(Error::InvalidGeometry(format!(
            "map is {}x{}, truth {}x{}",
            pmap.width(),
            pmap.height(),
            truth.width(),
            truth.height()
        )));
    }
    let mut scored: Vec<(f64, bool)> = pmap
        .feature_plane(0)
        .into_iter()
        .zip(truth.bits())
        .filter_map(|(p, &t)| p.map(|p| (p, t)))
        .collect();
    let n_on = scored.iter().filter(|s| s.1).count();
    let n_off = scored.len() - n_on;
    if n_on == 0 || n_off == 0 {
        return Err(Error::SingleClassTruth);
    }
    let sum = |on: bool| -> f64 {
        scored
            .iter()
            .filter(|s| s.1 == on)
            .map(|s| s.0)
            .sum::<f64>()
    };
    let mean_on = sum(true) / n_on as f64;
    let mean_off = sum(false) / n_off as f64;

    // Mann-Whitney U from average ranks.
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut rank_sum_on = 0.0;
    let mut i = 0;
    while i < scored.len() {
        let mut j = i;
        while j < scored.len() && scored[j].0 == scored[i].0 {
            j += 1;
        }
        let avg_rank = (i + 1 + j) as f64 / 2.0;
        let on = scored[i..j].iter().filter(|s| s.1).count();
        rank_sum_on += avg_rank * on as f64;
        i = j;
    }
    let (a, b) = (n_on as f64, n_off as f64);
    let u = rank_sum_on - a * (a + 1.0) / 2.0;
    Ok(BoundaryScore {
        auc: u / (a * b),
        mean_on,
        mean_off,
    })
}
