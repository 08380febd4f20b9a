//! Cross-check the trellis solver against exhaustive enumeration on a batch
//! of small random instances.
//!
//! ```bash
//! cargo run --example oracle_check
//! ```

use stmatch::solver::{solve_brute_force, solve_sequential};
use stmatch::synth::{random_chain, random_scene};
use stmatch::{EnergyParams, SolverConfig};

fn main() {
    let config = SolverConfig::default();
    let mut worst_gap = 0.0f64;
    let trials = 200;
    for seed in 0..trials {
        let m = 3 + (seed % 4) as usize;
        let s = 5 + (seed % 6) as usize;
        let params = EnergyParams {
            temporal_window: 1 + (seed % 5) as u32,
            dummy_penalty: 0.2 + (seed % 5) as f64,
            ..Default::default()
        };
        let model = random_chain(m, 3, seed);
        let scene = random_scene(s, 3, (s + 3) as u32, seed + 1_000);

        let dp = solve_sequential(&model, &scene, &params, &config).unwrap();
        let exact = solve_brute_force(&model, &scene, &params).unwrap();
        let gap = (dp.energy - exact.energy).abs();
        worst_gap = worst_gap.max(gap);
        assert!(
            gap <= 1e-9 * exact.energy.abs().max(1.0),
            "seed {seed}: trellis {} vs exhaustive {}",
            dp.energy,
            exact.energy
        );
    }
    println!("{trials} instances verified against exhaustive search");
    println!("largest energy gap: {worst_gap:.3e}");
}
