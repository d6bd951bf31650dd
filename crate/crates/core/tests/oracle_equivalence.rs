use bayesedge::bayes::{posterior, posterior_map, LikelihoodSet, PriorVector};
use bayesedge::detector::{
    boundary_likelihood_exact, interior_likelihood, scan_image, window_likelihoods,
    BoundaryDetector, DetectorConfig, ScanFeature,
};
use bayesedge::gradient::{boundary_posterior_two_pixel, PixelPair};
use bayesedge::noise::{BoundaryMode, NoiseMatrix, NoiseSpec};
use bayesedge::oracle::{enumerate_posterior, Circumstance, SceneSpec, Structure, TinyModelSpec};
use bayesedge::prior::ColorDistribution;

fn gaussian(sigma: f64, n: usize, mode: BoundaryMode) -> NoiseMatrix {
    NoiseMatrix::build(&NoiseSpec::gaussian(sigma), n, mode).unwrap()
}

fn config(m: NoiseMatrix) -> DetectorConfig {
    let n = m.num_colors();
    DetectorConfig::new(m, ColorDistribution::uniform(n).unwrap()).unwrap()
}

#[test]
fn two_pixel_posterior_matches_strip_enumeration() {
    for mode in [BoundaryMode::Renormalize, BoundaryMode::Wraparound] {
        let m = gaussian(1.5, 6, mode);
        for p_b in [0.1, 0.5, 0.9] {
            let strip = Structure::TwoRegionStrip { boundary_at: 1 };
            let spec = TinyModelSpec::new(
                2,
                vec![(strip, p_b), (Structure::SingleRegion, 1.0 - p_b)],
                m.clone(),
            )
            .unwrap();
            for o1 in 0..6 {
                for o2 in 0..6 {
                    let oracle = enumerate_posterior(&spec, &[o1, o2], |c: &Circumstance| {
                        *c.structure == strip
                    })
                    .unwrap();
                    let direct =
                        boundary_posterior_two_pixel(PixelPair::new(o1, o2), &m, p_b).unwrap();
                    assert!((oracle - direct).abs() < 1e-12, "{mode} {p_b} {o1} {o2}");
                }
            }
        }
    }
}

#[test]
fn interior_posterior_matches_enumeration_with_skewed_priors() {
    let m = gaussian(4.0, 4, BoundaryMode::Wraparound);
    let cfg = config(m.clone());
    let spec = TinyModelSpec::new(
        9,
        vec![
            (Structure::SingleRegion, 0.2),
            (Structure::RandomField, 0.8),
        ],
        m,
    )
    .unwrap();
    let obs = [0usize, 1, 1, 2, 1, 1, 0, 3, 1];
    let w = bayesedge::image::Window::new(3, obs.iter().map(|&o| o as u16).collect()).unwrap();
    let lik = LikelihoodSet::new(vec![
        interior_likelihood(&w, &cfg).unwrap(),
        bayesedge::detector::exterior_likelihood(&w, &cfg).unwrap(),
    ])
    .unwrap();
    let detector = posterior(&lik, &PriorVector::new(vec![0.2, 0.8]).unwrap()).unwrap();
    let oracle = enumerate_posterior(&spec, &obs, |c: &Circumstance| {
        *c.structure == Structure::SingleRegion
    })
    .unwrap();
    assert!((detector.probs()[0] - oracle).abs() < 1e-12);
}

#[test]
fn exact_boundary_matches_enumeration_against_random_field() {
    // The flat exterior value is the random-field evidence only when every
    // row sums to 1, as under wraparound.
    let m = gaussian(2.0, 3, BoundaryMode::Wraparound);
    let cfg = config(m.clone());
    let spec = TinyModelSpec::new(
        9,
        vec![
            (Structure::BimodalWindow, 0.3),
            (Structure::RandomField, 0.7),
        ],
        m,
    )
    .unwrap();
    for seed in 0..5u16 {
        let obs: Vec<usize> = (0..9u16)
            .map(|i| ((i * 7 + seed * 5) % 3) as usize)
            .collect();
        let w = bayesedge::image::Window::new(3, obs.iter().map(|&o| o as u16).collect()).unwrap();
        let lik = LikelihoodSet::new(vec![
            boundary_likelihood_exact(&w, &cfg).unwrap(),
            bayesedge::detector::exterior_likelihood(&w, &cfg).unwrap(),
        ])
        .unwrap();
        let detector = posterior(&lik, &PriorVector::new(vec![0.3, 0.7]).unwrap()).unwrap();
        let oracle = enumerate_posterior(&spec, &obs, |c: &Circumstance| {
            *c.structure == Structure::BimodalWindow
        })
        .unwrap();
        assert!((detector.probs()[0] - oracle).abs() < 1e-12, "{obs:?}");
    }
}

#[test]
fn scan_equals_direct_window_calls_on_a_scene() {
    let spec = SceneSpec {
        width: 16,
        height: 16,
        num_rects: 3,
        num_colors: 16,
        noise: NoiseSpec::gaussian(4.0),
        boundary_mode: BoundaryMode::Renormalize,
        seed: 3,
    };
    let (_, noisy) = spec.render().unwrap();
    for detector in [
        BoundaryDetector::ConstantApprox,
        BoundaryDetector::ExactBimodal,
    ] {
        let cfg = config(spec.noise_matrix().unwrap()).with_boundary_detector(detector);
        for feature in [ScanFeature::InteriorVsExterior, ScanFeature::BoundaryVsNot] {
            let map = scan_image(&noisy, &cfg, feature).unwrap();
            assert_eq!(map.defined_count(), 14 * 14);
            for y in 0..16 {
                for x in 0..16 {
                    let direct = noisy
                        .window(x, y, 3)
                        .map(|w| window_likelihoods(&w, &cfg, feature).unwrap());
                    assert_eq!(map.get(x, y), direct);
                }
            }
        }
    }
}

#[test]
fn posterior_maps_are_normalized() {
    let spec = SceneSpec {
        width: 20,
        height: 12,
        num_rects: 2,
        num_colors: 8,
        noise: NoiseSpec::gaussian(1.0),
        boundary_mode: BoundaryMode::Wraparound,
        seed: 11,
    };
    let (_, noisy) = spec.render().unwrap();
    let cfg = config(spec.noise_matrix().unwrap());
    let lik = scan_image(&noisy, &cfg, ScanFeature::BoundaryVsNot).unwrap();
    let pmap = posterior_map(&lik, &PriorVector::binary(0.3).unwrap()).unwrap();
    for cell in pmap.cells().iter().flatten() {
        assert!((cell.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(cell.iter().all(|p| (0.0..=1.0).contains(p)));
    }
    let csv = pmap.to_csv();
    assert_eq!(csv.lines().count(), 12);
    assert!(csv.lines().next().unwrap().starts_with("nan,"));
}
