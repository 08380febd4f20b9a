//! Property tests for the energy terms, the generators, and the solvers.

use proptest::prelude::*;

use stmatch::energy::{circular_diff, geometric_distortion, spatial_angle, temporal_delta, unary_cost};
use stmatch::solver::{solve_parallel, solve_sequential};
use stmatch::synth::{gen_instance, random_chain, random_scene};
use stmatch::{chain_energy, EnergyParams, ModelChain, PerturbSpec, SceneBlock, SolverConfig, SpaceTimePoint};

fn finite_feature() -> impl Strategy<Value = f64> {
    -100.0..100.0f64
}

fn feature_vec(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(finite_feature(), dim)
}

/// Applies a sequence of Givens rotations, an orthonormal transform of
/// feature space.
fn rotate_features(features: &[f64], rotations: &[(usize, usize, f64)]) -> Vec<f64> {
    let mut out = features.to_vec();
    let dim = out.len();
    for &(a, b, theta) in rotations {
        let (i, j) = (a % dim, b % dim);
        if i == j {
            continue;
        }
        let (c, s) = (theta.cos(), theta.sin());
        let (fi, fj) = (out[i], out[j]);
        out[i] = c * fi - s * fj;
        out[j] = s * fi + c * fj;
    }
    out
}

fn point(frame: u32, x: f64, y: f64, features: Vec<f64>) -> SpaceTimePoint {
    SpaceTimePoint::new(frame, x, y, 0.5, features)
}

proptest! {
    #[test]
    fn unary_cost_is_nonnegative_and_finite(
        a in feature_vec(4),
        b in feature_vec(4),
        wd in 0.0..10.0f64,
    ) {
        let params = EnergyParams { dummy_penalty: wd, ..Default::default() };
        let m = point(0, 0.0, 0.0, a);
        let s = point(3, 1.0, 1.0, b);
        let real = unary_cost(&m, Some(&s), &params).unwrap();
        prop_assert!(real >= 0.0 && real.is_finite());
        let dummy = unary_cost(&m, None, &params).unwrap();
        prop_assert!(dummy == wd);
    }

    /// A common orthonormal transform of all feature vectors is an L2
    /// isometry, so every unary cost is unchanged.
    #[test]
    fn unary_cost_invariant_under_feature_rotation(
        a in feature_vec(4),
        b in feature_vec(4),
        rotations in prop::collection::vec((0usize..4, 0usize..4, -3.14..3.14f64), 1..5),
    ) {
        let params = EnergyParams::default();
        let before = unary_cost(&point(0, 0.0, 0.0, a.clone()), Some(&point(1, 0.0, 0.0, b.clone())), &params).unwrap();
        let ra = rotate_features(&a, &rotations);
        let rb = rotate_features(&b, &rotations);
        let after = unary_cost(&point(0, 0.0, 0.0, ra), Some(&point(1, 0.0, 0.0, rb)), &params).unwrap();
        prop_assert!((before - after).abs() <= 1e-9 * before.max(1.0));
    }

    #[test]
    fn temporal_delta_is_shift_invariant(
        ti in 0u32..1000, tj in 0u32..1000,
        tzi in 0u32..1000, tzj in 0u32..1000,
        shift in 0u32..100000,
    ) {
        let base = temporal_delta(ti, tj, tzi, tzj);
        prop_assert!(base >= 0.0);
        // integer arithmetic: a constant scene shift changes nothing at all
        let shifted = temporal_delta(ti, tj, tzi + shift, tzj + shift);
        prop_assert_eq!(base.to_bits(), shifted.to_bits());
    }

    #[test]
    fn circular_diff_stays_in_range_and_preserves_phase(
        a in -10.0..10.0f64,
        b in -10.0..10.0f64,
    ) {
        let d = circular_diff(a, b);
        prop_assert!((-std::f64::consts::PI..=std::f64::consts::PI).contains(&d));
        // the dropped part is a whole number of turns
        let turns = ((a - b) - d) / std::f64::consts::TAU;
        prop_assert!((turns - turns.round()).abs() < 1e-9);
    }

    #[test]
    fn spatial_angle_range(
        px in -50.0..50.0f64, py in -50.0..50.0f64,
        vx in -50.0..50.0f64, vy in -50.0..50.0f64,
        qx in -50.0..50.0f64, qy in -50.0..50.0f64,
    ) {
        let angle = spatial_angle(
            &point(0, px, py, vec![0.0]),
            &point(0, vx, vy, vec![0.0]),
            &point(0, qx, qy, vec![0.0]),
        );
        prop_assert!((0.0..=std::f64::consts::PI).contains(&angle));
    }

    /// Angles are invariant under translation, rotation, and uniform
    /// scaling of the scene.
    #[test]
    fn geometric_distortion_invariant_under_similarity(
        coords in prop::collection::vec((-40.0..40.0f64, -40.0..40.0f64), 6),
        dx in -100.0..100.0f64,
        dy in -100.0..100.0f64,
        theta in -3.14..3.14f64,
        scale in 0.1..10.0f64,
    ) {
        let model_pts: Vec<SpaceTimePoint> = coords[..3]
            .iter()
            .enumerate()
            .map(|(k, &(x, y))| point(k as u32, x, y, vec![0.0]))
            .collect();
        let scene_pts: Vec<SpaceTimePoint> = coords[3..]
            .iter()
            .enumerate()
            .map(|(k, &(x, y))| point(k as u32, x, y, vec![0.0]))
            .collect();
        let model = ModelChain::from_points(&model_pts).unwrap();
        let scene = SceneBlock::from_points(&scene_pts).unwrap();
        let before = geometric_distortion((2, 1, 0), (2, 1, 0), &model, &scene);
        prop_assert!((0.0..=std::f64::consts::PI * 2f64.sqrt() + 1e-12).contains(&before));

        let (c, s) = (theta.cos(), theta.sin());
        let moved: Vec<SpaceTimePoint> = scene_pts
            .iter()
            .map(|p| {
                let x = scale * (c * p.x - s * p.y) + dx;
                let y = scale * (s * p.x + c * p.y) + dy;
                point(p.frame, x, y, p.features.clone())
            })
            .collect();
        let moved_scene = SceneBlock::from_points(&moved).unwrap();
        let after = geometric_distortion((2, 1, 0), (2, 1, 0), &model, &moved_scene);
        prop_assert!((before - after).abs() <= 1e-7, "{before} vs {after}");
    }

    /// The planted assignment is always feasible, so its energy bounds the
    /// solver's optimum from above.
    #[test]
    fn ground_truth_energy_bounds_the_optimum(
        seed in any::<u64>(),
        clutter in 0u32..12,
        feature_noise in 0.0..0.5f64,
        spatial_noise in 0.0..2.0f64,
    ) {
        let params = EnergyParams::default();
        let model = random_chain(5, 3, seed ^ 0xA5A5);
        let spec = PerturbSpec {
            feature_noise_sigma: feature_noise,
            spatial_noise_sigma: spatial_noise,
            clutter_points: clutter,
            seed,
            ..Default::default()
        };
        let (scene, truth) = gen_instance(&model, &spec, &params).unwrap();
        let truth_energy = chain_energy(&truth, &model, &scene, &params).unwrap();
        let solved = solve_sequential(&model, &scene, &params, &SolverConfig::default()).unwrap();
        prop_assert!(solved.energy <= truth_energy + 1e-9 * truth_energy.max(1.0));
    }

    /// Any worker count returns the sequential result, bit for bit.
    #[test]
    fn worker_count_never_changes_results(
        seed in any::<u64>(),
        workers in 1usize..6,
        t in 1u32..8,
    ) {
        let model = random_chain(4, 2, seed);
        let scene = random_scene(9, 2, 10, seed ^ 0xC3C3);
        let params = EnergyParams { temporal_window: t, ..Default::default() };
        let seq = solve_sequential(&model, &scene, &params, &SolverConfig::default()).unwrap();
        let config = SolverConfig::default().with_parallelism(workers);
        let par = solve_parallel(&model, &scene, &params, &config).unwrap();
        prop_assert_eq!(seq.energy.to_bits(), par.energy.to_bits());
        prop_assert_eq!(seq.assignment, par.assignment);
        prop_assert_eq!(seq.counters, par.counters);
    }

    /// Scene energies are non-negative and finite whatever the assignment
    /// the solver returns.
    #[test]
    fn solver_energy_is_nonnegative_and_consistent(
        seed in any::<u64>(),
        s in 4usize..10,
    ) {
        let model = random_chain(4, 3, seed);
        let scene = random_scene(s, 3, (s + 2) as u32, seed ^ 0x77);
        let params = EnergyParams::default();
        let result = solve_sequential(&model, &scene, &params, &SolverConfig::default()).unwrap();
        prop_assert!(result.energy >= 0.0 && result.energy.is_finite());
        let recomputed = chain_energy(&result.assignment, &model, &scene, &params).unwrap();
        prop_assert!((result.energy - recomputed).abs() <= 1e-9 * recomputed.max(1.0));
    }
}
