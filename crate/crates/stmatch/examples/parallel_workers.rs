//! Layer-parallel solving: the result is bit-identical for every worker
//! count, so the worker knob is purely a throughput choice. Wall times are
//! printed for comparison; the speed-up you see depends on how many real
//! cores the machine offers.
//!
//! ```bash
//! cargo run --release --example parallel_workers
//! ```

use stmatch::solver::solve_parallel;
use stmatch::synth::{plant_in_uniform_scene, random_chain};
use stmatch::{EnergyParams, SolverConfig};

fn main() {
    let model = random_chain(30, 162, 1);
    let (scene, _) = plant_in_uniform_scene(&model, 754, 0.01, 0.3, 2).expect("valid plant");
    let params = EnergyParams::default();

    println!(
        "matching a {}-node model against a {}-node scene ({} frames)",
        model.len(),
        scene.len(),
        scene.max_frame() + 1
    );

    let mut reference: Option<(u64, String)> = None;
    for workers in [1usize, 2, 4, 8] {
        let config = SolverConfig::default().with_parallelism(workers);
        // take the best of three runs to smooth scheduling noise
        let mut best_ms = f64::INFINITY;
        let mut last = None;
        for _ in 0..3 {
            let r = solve_parallel(&model, &scene, &params, &config).unwrap();
            best_ms = best_ms.min(r.wall_time.as_secs_f64() * 1e3);
            last = Some(r);
        }
        let result = last.unwrap();
        let signature = format!("{:?}", result.assignment.picks());
        match &reference {
            None => reference = Some((result.energy.to_bits(), signature)),
            Some((bits, picks)) => {
                assert_eq!(*bits, result.energy.to_bits(), "energy changed with worker count");
                assert_eq!(*picks, signature, "assignment changed with worker count");
            }
        }
        println!(
            "  {workers} worker(s): {best_ms:7.1} ms, energy {:.6}, matched {}/{} nodes",
            result.energy,
            result.assignment.real_count(),
            model.len()
        );
    }
    println!("all worker counts returned bit-identical energies and assignments");
}
