//! Plant a perturbed copy of a model into clutter and check that the solver
//! digs it back out.
//!
//! ```bash
//! cargo run --example planted_recovery
//! ```

use stmatch::solver::solve_sequential;
use stmatch::synth::{gen_instance, random_chain};
use stmatch::{chain_energy, EnergyParams, PerturbSpec, SolverConfig};

fn main() {
    let params = EnergyParams::default();
    let model = random_chain(8, 3, 42);
    // no warping here: a strongly warped node can legitimately be cheaper
    // to skip than to pay its temporal distortion for
    let spec = PerturbSpec {
        time_shift: 5,
        max_warp_per_step: 0,
        spatial_noise_sigma: 0.5,
        feature_noise_sigma: 0.01,
        clutter_points: 16,
        clutter_feature_scale: 10.0,
        seed: 7,
    };
    let (scene, truth) = gen_instance(&model, &spec, &params).expect("valid spec");
    let truth_energy = chain_energy(&truth, &model, &scene, &params).expect("feasible truth");

    let result = solve_sequential(&model, &scene, &params, &SolverConfig::default()).unwrap();

    println!("planted energy: {:.6}", truth_energy);
    println!("solved  energy: {:.6}", result.energy);
    let recovered = result.assignment == truth;
    println!("ground truth recovered exactly: {recovered}");
    for (i, (got, want)) in result
        .assignment
        .picks()
        .iter()
        .zip(truth.picks().iter())
        .enumerate()
    {
        let mark = if got == want { ' ' } else { '!' };
        println!("  {mark} node {i}: solved {got:?}, planted {want:?}");
    }
    assert!(result.energy <= truth_energy + 1e-9);
}
