use topometric_core::simulator::{detect_nodes, DetectorModel, PathKind, Scenario, ScenarioParams};
use topometric_core::{integrate, TopoMap};

#[test]
fn wrong_id_fraction_matches_false_rate() {
    // a loop of 1000 one-meter steps passes each of its ~1000 nodes once
    let params = ScenarioParams::new(PathKind::Loop, 1000.0, 21);
    let sc = Scenario::generate(&params).unwrap();
    let detections = &sc.detections;
    assert!(detections.len() >= 1000, "{} passes", detections.len());
    let wrong = detections
        .iter()
        .filter(|d| {
            let (nearest, _) = sc
                .map
                .nearest_node(&sc.ground_truth.poses()[d.timestep])
                .unwrap();
            d.node_id != nearest
        })
        .count();
    let n = detections.len() as f64;
    let p = 0.1;
    let frac = wrong as f64 / n;
    // 99.9 % two-sided normal interval for a binomial proportion
    let half_width = 3.29 * (p * (1.0 - p) / n).sqrt();
    assert!(
        (frac - p).abs() < half_width,
        "wrong fraction {frac}, allowed ±{half_width}"
    );
}

#[test]
fn zero_radius_never_detects() {
    let params = ScenarioParams::new(PathKind::FigureEight, 120.0, 2);
    let sc = Scenario::generate(&params).unwrap();
    let model = DetectorModel {
        detect_radius: 0.0,
        ..params.detector
    };
    assert!(detect_nodes(&sc.ground_truth, &sc.map, &model)
        .unwrap()
        .is_empty());
}

#[test]
fn clean_detector_reports_nearest_node_with_mean_confidence() {
    let params = ScenarioParams::new(PathKind::RandomWalk, 200.0, 4);
    let sc = Scenario::generate(&params).unwrap();
    let model = DetectorModel {
        false_rate: 0.0,
        confidence_sigma: 0.0,
        ..params.detector
    };
    let dets = detect_nodes(&sc.ground_truth, &sc.map, &model).unwrap();
    for d in &dets {
        let pose = sc.ground_truth.poses()[d.timestep];
        let (nearest, dist) = sc.map.nearest_node(&pose).unwrap();
        assert_eq!(d.node_id, nearest);
        assert!(dist < model.detect_radius);
        assert_eq!(d.confidence(), 0.95);
    }
    // every node is created on the path, so each one is passed at least once
    let mut seen = vec![false; sc.map.len()];
    for d in &dets {
        seen[d.node_id] = true;
    }
    assert!(seen.iter().all(|s| *s));
}

#[test]
fn scenarios_are_bit_identical_per_seed() {
    for kind in [PathKind::Loop, PathKind::FigureEight, PathKind::RandomWalk] {
        let p = ScenarioParams::new(kind, 150.0, 77);
        let a = Scenario::generate(&p).unwrap();
        let b = Scenario::generate(&p).unwrap();
        assert_eq!(a, b);
        let c = Scenario::generate(&ScenarioParams::new(kind, 150.0, 78)).unwrap();
        assert_ne!(a.motions, c.motions);
    }
}

#[test]
fn map_is_built_from_ground_truth() {
    let sc = Scenario::generate(&ScenarioParams::new(PathKind::Loop, 100.0, 1)).unwrap();
    assert_eq!(sc.map, TopoMap::build(&sc.ground_truth, 1.0).unwrap());
    assert_eq!(sc.motions.len() + 1, sc.ground_truth.len());
    assert_eq!(
        integrate(sc.origin(), &sc.motions).len(),
        sc.ground_truth.len()
    );
}
