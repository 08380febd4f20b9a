//! Nearest-prototype classification of a continuous point stream: two
//! different actions occur one after the other; blocking localizes each.
//!
//! ```bash
//! cargo run --example classify_stream
//! ```

use stmatch::recognition::{classify, split_blocks};
use stmatch::synth::{gen_instance, random_chain};
use stmatch::{BlockingPolicy, EnergyParams, PerturbSpec, PrototypeSet, SolverConfig, SpaceTimePoint};

fn main() {
    let params = EnergyParams::default();
    let config = SolverConfig::default();

    let wave = random_chain(8, 4, 100);
    let clap = random_chain(8, 4, 200);
    let jump = random_chain(8, 4, 300);
    let dict = PrototypeSet::new(vec![
        ("wave".into(), wave.clone()),
        ("clap".into(), clap.clone()),
        ("jump".into(), jump.clone()),
    ])
    .unwrap();

    // a 100-frame stream: a "wave" near the start, a "clap" near the end
    let noise = PerturbSpec {
        feature_noise_sigma: 0.02,
        spatial_noise_sigma: 0.5,
        clutter_points: 10,
        ..Default::default()
    };
    let (early, _) = gen_instance(&wave, &PerturbSpec { time_shift: 4, seed: 1, ..noise.clone() }, &params).unwrap();
    let (late, _) = gen_instance(&clap, &PerturbSpec { time_shift: 70, seed: 2, ..noise }, &params).unwrap();
    let mut stream: Vec<SpaceTimePoint> = early.points().to_vec();
    stream.extend(late.points().iter().cloned());

    let policy = BlockingPolicy { block_frames: 60, stride_frames: 30 };
    let blocks = split_blocks(&stream, &policy).unwrap();
    println!("stream of {} points cut into {} blocks", stream.len(), blocks.len());

    let mut votes: Vec<(String, usize)> = Vec::new();
    for (index, block) in blocks.iter().enumerate() {
        let outcome = classify(block, &dict, &params, &config).unwrap();
        let scores: Vec<String> = outcome
            .scores
            .iter()
            .map(|(l, d)| format!("{l}={d:.2}"))
            .collect();
        println!("  block {index}: {:10} ({})", outcome.label, scores.join(", "));
        match votes.iter_mut().find(|(l, _)| *l == outcome.label) {
            Some((_, n)) => *n += 1,
            None => votes.push((outcome.label, 1)),
        }
    }
    votes.sort_by(|a, b| b.1.cmp(&a.1));
    println!("per-stream majority: {}", votes[0].0);
}
