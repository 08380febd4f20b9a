//! Run a small benchmark suite and print the CSV report, then summarize
//! what pruning and the unary table buy.
//!
//! ```bash
//! cargo run --release --example bench_counters
//! ```

use stmatch::bench::{run_suite, write_csv, BenchSuite, Implementation};

fn main() {
    let suite = BenchSuite {
        model_nodes: vec![30],
        scene_nodes: vec![60, 120],
        temporal_windows: vec![10],
        parallelism: vec![1, 2, 4],
        feature_dim: 162,
        repetitions: 3,
        include_variants: true,
        include_bruteforce: true,
        seed: 1,
    };
    let rows = run_suite(&suite, &mut |w| eprintln!("warning: {w}")).unwrap();

    let mut csv = Vec::new();
    write_csv(&rows, &mut csv).unwrap();
    print!("{}", String::from_utf8(csv).unwrap());

    for s in [60usize, 120] {
        let find = |pruning: bool, table: bool| {
            rows.iter()
                .find(|r| {
                    r.implementation == Implementation::Sequential
                        && r.scene_nodes == s
                        && r.use_pruning == pruning
                        && r.use_unary_table == table
                })
                .unwrap()
        };
        let full = find(true, true);
        let no_table = find(true, false);
        let unpruned = find(false, true);
        eprintln!(
            "S={s}: pruning cuts candidate evaluations {:.0}x, the table cuts feature distances {:.0}x",
            unpruned.min_iterations as f64 / full.min_iterations as f64,
            no_table.unary_evaluations as f64 / full.unary_evaluations as f64,
        );
    }
}
