//! Posteriors from detector likelihoods, and the combination rule for
//! detectors built on disjoint domains.

use rayon::prelude::*;

use crate::detector::LikelihoodMap;
use crate::error::{Error, Result};
use crate::pgm::Pgm;

/// Tolerance on `sum == 1` for priors and posteriors.
pub const PRIOR_TOLERANCE: f64 = 1e-12;

/// Names of mutually exclusive, all-encompassing feature propositions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureSet {
    labels: Vec<String>,
}

impl FeatureSet {
    pub fn new<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.len() < 2 {
            return Err(Error::InvalidConfig(
                "a feature set needs at least two propositions".into(),
            ));
        }
        for (i, a) in labels.iter().enumerate() {
            if labels[..i].contains(a) {
                return Err(Error::InvalidConfig(format!(
                    "duplicate feature label {a:?}"
                )));
            }
        }
        Ok(Self { labels })
    }

    /// `{name, not name}`.
    pub fn binary(name: &str) -> Self {
        Self {
            labels: vec![name.to_string(), format!("not {name}")],
        }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Probabilities over a feature set: non-negative, summing to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorVector {
    probs: Vec<f64>,
}

impl PriorVector {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(Error::InvalidDistribution(
                "need at least two propositions".into(),
            ));
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidDistribution(format!(
                "negative or non-finite prior {probs:?}"
            )));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > PRIOR_TOLERANCE {
            return Err(Error::InvalidDistribution(format!("priors sum to {sum}")));
        }
        Ok(Self { probs })
    }

    /// `(p, 1 - p)`.
    pub fn binary(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidDistribution(format!(
                "prior {p} outside [0, 1]"
            )));
        }
        Self::new(vec![p, 1.0 - p])
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

/// `P(O | F_i)` for each proposition.
#[derive(Debug, Clone, PartialEq)]
pub struct LikelihoodSet {
    values: Vec<f64>,
}

impl LikelihoodSet {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values
            .iter()
            .find(|v| !v.is_finite() || !(0.0..=1.0).contains(*v))
        {
            return Err(Error::InvalidDistribution(format!(
                "likelihood {v} outside [0, 1]"
            )));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Bayes' rule: `P(F_i | O) = P(O | F_i) P(F_i) / sum_j P(O | F_j) P(F_j)`.
pub fn posterior(lik: &LikelihoodSet, prior: &PriorVector) -> Result<PriorVector> {
    posterior_slice(lik.values(), prior.probs()).map(|probs| PriorVector { probs })
}

fn posterior_slice(lik: &[f64], prior: &[f64]) -> Result<Vec<f64>> {
    if lik.len() != prior.len() {
        return Err(Error::LengthMismatch {
            expected: prior.len(),
            got: lik.len(),
        });
    }
    let joint: Vec<f64> = lik.iter().zip(prior).map(|(l, p)| l * p).collect();
    let evidence: f64 = joint.iter().sum();
    if !(evidence > 0.0) {
        return Err(Error::ZeroEvidence);
    }
    Ok(joint.into_iter().map(|j| j / evidence).collect())
}

/// Relative prior mass `P(D_i)` of a domain. Only ratios between domains matter.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainWeight {
    pub label: String,
    pub weight: f64,
}

impl DomainWeight {
    pub fn new(label: impl Into<String>, weight: f64) -> Result<Self> {
        if !(weight.is_finite() && weight > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "domain weight must be positive, got {weight}"
            )));
        }
        Ok(Self {
            label: label.into(),
            weight,
        })
    }
}

/// What one domain's detector reports about an observation.
///
/// `p_obs_and_feature` is the joint `P(O & F | D)`, i.e. the likelihood
/// `P(O | F & D)` multiplied by the feature prior inside the domain
/// `P(F | D)`. Passing the bare likelihood is rejected when it exceeds
/// `p_obs`.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainEvidence {
    pub p_obs_and_feature: f64,
    pub p_obs: f64,
    pub weight: DomainWeight,
}

/// Posterior of a feature given the observation and that one of several
/// disjoint domains holds:
///
/// `sum_i P(O & F | D_i) P(D_i) / sum_i P(O | D_i) P(D_i)`.
pub fn combine_disjoint(per_domain: &[DomainEvidence]) -> Result<f64> {
    if per_domain.len() < 2 {
        return Err(Error::InvalidConfig(
            "combination needs at least two domains".into(),
        ));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for d in per_domain {
        for v in [d.p_obs_and_feature, d.p_obs] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidDistribution(format!(
                    "probability {v} outside [0, 1] in domain {}",
                    d.weight.label
                )));
            }
        }
        if !(d.weight.weight.is_finite() && d.weight.weight > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "domain {} has weight {}",
                d.weight.label, d.weight.weight
            )));
        }
        if d.p_obs_and_feature > d.p_obs {
            return Err(Error::JointExceedsEvidence {
                domain: d.weight.label.clone(),
                joint: d.p_obs_and_feature,
                evidence: d.p_obs,
            });
        }
        num += d.p_obs_and_feature * d.weight.weight;
        den += d.p_obs * d.weight.weight;
    }
    if !(den > 0.0) {
        return Err(Error::ZeroEvidence);
    }
    Ok((num / den).min(1.0))
}

/// Image-shaped array of posterior vectors; `None` at pixels without a window.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityMap {
    width: usize,
    height: usize,
    features: FeatureSet,
    cells: Vec<Option<Vec<f64>>>,
}

impl ProbabilityMap {
    pub fn new(
        width: usize,
        height: usize,
        features: FeatureSet,
        cells: Vec<Option<Vec<f64>>>,
    ) -> Result<Self> {
        if cells.len() != width * height {
            return Err(Error::LengthMismatch {
                expected: width * height,
                got: cells.len(),
            });
        }
        if let Some(bad) = cells.iter().flatten().find(|c| c.len() != features.len()) {
            return Err(Error::LengthMismatch {
                expected: features.len(),
                got: bad.len(),
            });
        }
        Ok(Self {
            width,
            height,
            features,
            cells,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn features(&self) -> &FeatureSet {
        &self.features
    }

    pub fn get(&self, x: usize, y: usize) -> Option<&[f64]> {
        self.cells[y * self.width + x].as_deref()
    }

    pub fn cells(&self) -> &[Option<Vec<f64>>] {
        &self.cells
    }

    /// Posterior of feature `index` at every pixel (`None` where absent).
    pub fn feature_plane(&self, index: usize) -> Vec<Option<f64>> {
        self.cells
            .iter()
            .map(|c| c.as_ref().map(|v| v[index]))
            .collect()
    }

    /// One line per image row; each cell the probability of the first
    /// feature, `nan` where absent.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in self.cells.chunks(self.width) {
            let cells: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Some(v) => format!("{:?}", v[0]),
                    None => "nan".to_string(),
                })
                .collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    /// 8-bit graymap of feature `index`: `round(255 p)`, absent pixels 0.
    pub fn to_pgm(&self, index: usize) -> Pgm {
        Pgm {
            width: self.width,
            height: self.height,
            maxval: 255,
            data: self
                .feature_plane(index)
                .into_iter()
                .map(|p| p.map_or(0, |p| (255.0 * p).round() as u16))
                .collect(),
        }
    }
}

/// Applies [`posterior`] at every defined pixel of a likelihood map. The
/// first feature is the detector's feature proposition, the second its negation.
pub fn posterior_map(lik_map: &LikelihoodMap, prior: &PriorVector) -> Result<ProbabilityMap> {
    posterior_map_labeled(lik_map, prior, FeatureSet::binary("feature"))
}

/// [`posterior_map`] with explicit proposition names.
pub fn posterior_map_labeled(
    lik_map: &LikelihoodMap,
    prior: &PriorVector,
    features: FeatureSet,
) -> Result<ProbabilityMap> {
    if prior.len() != 2 || features.len() != 2 {
        return Err(Error::LengthMismatch {
            expected: 2,
            got: prior.len().max(features.len()),
        });
    }
    let w = lik_map.width();
    let cells = lik_map
        .cells()
        .par_iter()
        .enumerate()
        .map(|(i, cell)| match cell {
            None => Ok(None),
            Some(pair) => posterior_slice(
                &[pair.p_obs_given_feature, pair.p_obs_given_not_feature],
                prior.probs(),
            )
            .map(Some)
            .map_err(|e| match e {
                Error::ZeroEvidence => Error::ZeroEvidenceAt { x: i % w, y: i / w },
                other => other,
            }),
        })
        .collect::<Result<Vec<_>>>()?;
    ProbabilityMap::new(w, lik_map.height(), features, cells)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detector::LikelihoodPair;
    use proptest::prelude::*;

    fn lik(v: &[f64]) -> LikelihoodSet {
        LikelihoodSet::new(v.to_vec()).unwrap()
    }

    fn prior(v: &[f64]) -> PriorVector {
        PriorVector::new(v.to_vec()).unwrap()
    }

    fn dom(joint: f64, evidence: f64, weight: f64) -> DomainEvidence {
        DomainEvidence {
            p_obs_and_feature: joint,
            p_obs: evidence,
            weight: DomainWeight::new("d", weight).unwrap(),
        }
    }

    #[test]
    fn posterior_arithmetic() {
        let p = posterior(&lik(&[0.2, 0.1]), &prior(&[0.5, 0.5])).unwrap();
        assert!((p.probs()[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((p.probs()[1] - 1.0 / 3.0).abs() < 1e-15);

        let p = posterior(&lik(&[0.3, 0.9]), &prior(&[1.0, 0.0])).unwrap();
        assert_eq!(p.probs(), &[1.0, 0.0]);

        // Exterior vs interior at N = 2 for a constant 3x3 window.
        let p = posterior(&lik(&[1.0 / 512.0, 0.25]), &prior(&[0.9, 0.1])).unwrap();
        let want = (0.9 / 512.0) / (0.9 / 512.0 + 0.025);
        assert!((p.probs()[0] - want).abs() < 1e-15);
    }

    #[test]
    fn posterior_errors() {
        assert_eq!(
            posterior(&lik(&[0.0, 0.0]), &prior(&[0.5, 0.5])),
            Err(Error::ZeroEvidence)
        );
        assert_eq!(
            posterior(&lik(&[0.0, 0.7]), &prior(&[1.0, 0.0])),
            Err(Error::ZeroEvidence)
        );
        assert!(posterior(&lik(&[0.1, 0.2, 0.3]), &prior(&[0.5, 0.5])).is_err());
        assert!(PriorVector::new(vec![0.5, 0.6]).is_err());
        assert!(LikelihoodSet::new(vec![1.5]).is_err());
        assert!(FeatureSet::new(["a", "a"]).is_err());
        assert!(FeatureSet::new(["a"]).is_err());
    }

    #[test]
    fn combine_two_domains() {
        let v = combine_disjoint(&[dom(0.06, 0.2, 1.0), dom(0.02, 0.4, 1.0)]).unwrap();
        assert!((v - 2.0 / 15.0).abs() < 1e-15);
    }

    #[test]
    fn combine_with_equal_entries_reduces_to_single_domain() {
        let v = combine_disjoint(&[dom(0.03, 0.12, 1.0), dom(0.03, 0.12, 1e-9)]).unwrap();
        assert!((v - 0.25).abs() < 1e-15);
    }

    #[test]
    fn combine_errors() {
        assert!(combine_disjoint(&[dom(0.1, 0.2, 1.0)]).is_err());
        assert!(matches!(
            combine_disjoint(&[dom(0.3, 0.2, 1.0), dom(0.1, 0.2, 1.0)]),
            Err(Error::JointExceedsEvidence { .. })
        ));
        assert_eq!(
            combine_disjoint(&[dom(0.0, 0.0, 1.0), dom(0.0, 0.0, 2.0)]),
            Err(Error::ZeroEvidence)
        );
        assert!(DomainWeight::new("x", 0.0).is_err());
    }

    #[test]
    fn map_with_equal_likelihoods_keeps_prior() {
        let pair = LikelihoodPair {
            p_obs_given_feature: 0.3,
            p_obs_given_not_feature: 0.3,
        };
        let map = LikelihoodMap::new(2, 2, vec![Some(pair), None, Some(pair), Some(pair)]).unwrap();
        let pm = posterior_map(&map, &PriorVector::binary(0.2).unwrap()).unwrap();
        assert!(pm.get(1, 0).is_none());
        for (x, y) in [(0, 0), (0, 1), (1, 1)] {
            let p = pm.get(x, y).unwrap();
            assert!((p[0] - 0.2).abs() < 1e-15 && (p[1] - 0.8).abs() < 1e-15);
        }
        assert_eq!(pm.to_csv(), "0.2,nan\n0.2,0.2\n");
        assert_eq!(pm.to_pgm(0).data, vec![51, 0, 51, 51]);
    }

    #[test]
    fn map_matches_pointwise_posterior_and_reports_coordinates() {
        let pair = LikelihoodPair {
            p_obs_given_feature: 1.0 / 512.0,
            p_obs_given_not_feature: 0.25,
        };
        let map = LikelihoodMap::new(1, 1, vec![Some(pair)]).unwrap();
        let pr = PriorVector::binary(0.5).unwrap();
        let pm = posterior_map_labeled(&map, &pr, FeatureSet::binary("e")).unwrap();
        assert_eq!(pm.features().labels()[1], "not e");
        let direct = posterior(&lik(&[1.0 / 512.0, 0.25]), &pr).unwrap();
        assert_eq!(pm.get(0, 0).unwrap(), direct.probs());

        let zero = LikelihoodPair {
            p_obs_given_feature: 0.0,
            p_obs_given_not_feature: 0.0,
        };
        let map = LikelihoodMap::new(3, 2, vec![None, None, None, None, None, Some(zero)]).unwrap();
        assert_eq!(
            posterior_map(&map, &pr),
            Err(Error::ZeroEvidenceAt { x: 2, y: 1 })
        );
    }

    proptest! {
        #[test]
        fn posterior_is_normalized_and_scale_free(
            l in proptest::collection::vec(1e-6f64..1.0, 2..6),
            w in proptest::collection::vec(0.01f64..1.0, 6),
            scale in 1e-6f64..1.0,
        ) {
            let m = l.len();
            let z: f64 = w[..m].iter().sum();
            let pr = PriorVector::new(w[..m].iter().map(|v| v / z).collect());
            prop_assume!(pr.is_ok());
            let pr = pr.unwrap();
            let a = posterior(&lik(&l), &pr).unwrap();
            prop_assert!((a.probs().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            let scaled: Vec<f64> = l.iter().map(|v| v * scale).collect();
            let b = posterior(&lik(&scaled), &pr).unwrap();
            for (x, y) in a.probs().iter().zip(b.probs()) {
                prop_assert!((x - y).abs() <= 1e-12);
            }
        }

        #[test]
        fn combination_depends_only_on_weight_ratio(
            e in proptest::collection::vec((0.0f64..1.0, 0.01f64..1.0, 0.01f64..10.0), 2..5),
            scale in 0.001f64..1000.0,
        ) {
            let doms: Vec<DomainEvidence> = e.iter().map(|&(f, p, w)| dom(f * p, p, w)).collect();
            let scaled: Vec<DomainEvidence> =
                e.iter().map(|&(f, p, w)| dom(f * p, p, w * scale)).collect();
            let a = combine_disjoint(&doms).unwrap();
            let b = combine_disjoint(&scaled).unwrap();
            prop_assert!((0.0..=1.0).contains(&a));
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }
}
