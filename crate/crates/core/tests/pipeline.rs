//! End-to-end library pipeline: scene -> optimized map -> locations.

use hausloc_core::geometry::{euclidean, GridSpec, PointSet};
use hausloc_core::loss::WhdParams;
use hausloc_core::metrics::{evaluate_points, match_at_radius, precision_recall_f};
use hausloc_core::optim::{generate_scene, optimize_map, OptimizerConfig, SceneSpec};
use hausloc_core::postprocess::{localize, LocalizationResult, ThresholdMethod};
use hausloc_core::ProbMap;

fn optimized_scene(seed: u64, num_points: usize) -> (PointSet, ProbMap) {
    let grid = GridSpec::new(64, 64).unwrap();
    let scene = generate_scene(&SceneSpec {
        grid,
        num_points,
        min_separation: 12.0,
        seed,
    })
    .unwrap();
    let cfg = OptimizerConfig {
        seed,
        ..OptimizerConfig::adam(2000)
    };
    let (map, trace) = optimize_map(&scene, grid, &WhdParams::default(), &cfg).unwrap();
    assert!(trace.final_total().unwrap() <= trace.first_total().unwrap());
    (scene, map)
}

fn fscore_of(result: &LocalizationResult, scene: &PointSet) -> f64 {
    precision_recall_f(&match_at_radius(&result.locations, scene, 5.0))
        .fscore
        .unwrap_or(0.0)
}

#[test]
fn three_point_scene_localizes_perfectly() {
    let (scene, map) = optimized_scene(2, 3);
    let result = localize(&map, ThresholdMethod::Bmm, None, 2).unwrap();
    assert_eq!(result.locations.len(), 3);
    // Every true point has an estimate within r = 5 px and vice versa.
    for &truth in scene.points() {
        let nearest = result
            .locations
            .iter()
            .map(|&e| euclidean(truth, e))
            .fold(f64::INFINITY, f64::min);
        assert!(nearest <= 5.0, "true point missed by {nearest} px");
    }
    assert_eq!(fscore_of(&result, &scene), 1.0);

    let report = evaluate_points(&result.locations, &scene, 5.0, Some(map.grid()));
    assert!(report.ahd.unwrap() < 3.0);
}

#[test]
fn bmm_threshold_dominates_fixed_threshold_sweep() {
    for (seed, num_points) in [(0u64, 2usize), (5, 3), (11, 4)] {
        let (scene, map) = optimized_scene(seed, num_points);
        let bmm = localize(&map, ThresholdMethod::Bmm, None, seed).unwrap();
        let bmm_f = fscore_of(&bmm, &scene);

        let mut best_fixed = 0.0_f64;
        for step in 1..20 {
            let tau = step as f64 * 0.05;
            let Ok(result) = localize(&map, ThresholdMethod::Fixed(tau), None, seed) else {
                continue;
            };
            best_fixed = best_fixed.max(fscore_of(&result, &scene));
        }
        assert!(
            bmm_f >= best_fixed - 0.05,
            "seed {seed}: bmm {bmm_f} vs best fixed {best_fixed}"
        );
    }
}

#[test]
fn forced_overcount_splits_a_blob() {
    // With one more component than blobs, the mixture still places every
    // mean inside the grid and the count honors the override.
    let (scene, map) = optimized_scene(3, 1);
    let result = localize(&map, ThresholdMethod::Bmm, Some(2), 3).unwrap();
    assert_eq!(result.count_estimate, 2);
    assert_eq!(result.locations.len(), 2);
    for p in result.locations.iter() {
        assert!(map.grid().contains(*p));
        let nearest = scene
            .iter()
            .map(|&t| euclidean(*p, t))
            .fold(f64::INFINITY, f64::min);
        assert!(nearest <= 5.0, "split means should straddle the one blob");
    }
}
