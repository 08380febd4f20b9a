//! Minimal end-to-end match: build a model chain and a scene block from raw
//! points, solve, and inspect the result.
//!
//! ```bash
//! cargo run --example match_basic
//! ```

use stmatch::solver::solve_sequential;
use stmatch::{EnergyParams, ModelChain, SceneBlock, SolverConfig, SpaceTimePoint};

fn main() {
    // a short "gesture": four detections sweeping right and up
    let model_points = vec![
        SpaceTimePoint::new(0, 10.0, 10.0, 0.9, vec![0.0, 1.0]),
        SpaceTimePoint::new(1, 20.0, 12.0, 0.8, vec![0.2, 0.9]),
        SpaceTimePoint::new(2, 30.0, 16.0, 0.7, vec![0.4, 0.8]),
        SpaceTimePoint::new(3, 40.0, 22.0, 0.9, vec![0.6, 0.7]),
    ];
    let model = ModelChain::from_points(&model_points).expect("valid model");

    // the same gesture appears in the scene two frames later, surrounded by
    // unrelated detections
    let mut scene_points: Vec<SpaceTimePoint> = model_points
        .iter()
        .map(|p| SpaceTimePoint::new(p.frame + 2, p.x + 5.0, p.y - 3.0, p.saliency, p.features.clone()))
        .collect();
    scene_points.push(SpaceTimePoint::new(0, 70.0, 70.0, 0.5, vec![9.0, 9.0]));
    scene_points.push(SpaceTimePoint::new(3, 80.0, 20.0, 0.5, vec![8.0, 9.0]));
    scene_points.push(SpaceTimePoint::new(6, 15.0, 60.0, 0.5, vec![9.0, 8.0]));
    let scene = SceneBlock::from_points(&scene_points).expect("valid scene");

    let params = EnergyParams::default();
    let config = SolverConfig::default();
    let result = solve_sequential(&model, &scene, &params, &config).expect("solvable");

    println!("model nodes: {}, scene nodes: {}", model.len(), scene.len());
    println!("energy: {:.6}", result.energy);
    for (i, pick) in result.assignment.picks().iter().enumerate() {
        match pick {
            Some(n) => println!(
                "  model node {i} (frame {}) -> scene node {n} (frame {})",
                model.frame(i),
                scene.frame(*n)
            ),
            None => println!("  model node {i} (frame {}) -> unmatched", model.frame(i)),
        }
    }
    println!(
        "cells computed: {}, min-loop iterations: {}, unary evaluations: {}",
        result.counters.cells_computed,
        result.counters.min_iterations,
        result.counters.unary_evaluations
    );
}
