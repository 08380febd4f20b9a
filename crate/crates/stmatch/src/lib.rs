//! Exact matching of short space-time point chains against unstructured
//! scene point sets.
//!
//! A model activity is a chain of space-time interest points, one per
//! occupied frame, with second-order connectivity: every node forms a
//! triangle with its two predecessors. Matching against a scene minimizes a
//! mixed energy of appearance distances and space-time distortion over all
//! causal, temporally close assignments, exactly, by dynamic programming
//! over a layered trellis. The trellis admits a simple layer-parallel
//! schedule whose results are bit-identical for any worker count.
//!
//! The crate also ships:
//!
//! - a nearest-prototype classifier over a dictionary of model chains, with
//!   stream blocking for long scenes ([`recognition`]);
//! - a seeded generator of planted instances with ground truth ([`synth`]);
//! - an exhaustive reference solver for verification ([`solver::oracle`]);
//! - an instrumented benchmark harness with CSV reporting ([`bench`]);
//! - JSON file formats and a `stmatch` binary with `match`, `classify`,
//!   `bench`, and `gen` subcommands ([`io`], [`cli`]).
//!
//! Every capability has a runnable example under `examples/`.

pub mod assignment;
pub mod bench;
pub mod chain;
pub mod cli;
pub mod energy;
pub mod error;
pub mod io;
pub mod params;
pub mod point;
pub mod recognition;
pub mod rng;
pub mod scene;
pub mod solver;
pub mod synth;

pub use assignment::{Assignment, Pick};
pub use chain::ModelChain;
pub use energy::{chain_energy, UnaryTable};
pub use error::{Error, Result};
pub use params::{EnergyParams, SolverConfig};
pub use point::SpaceTimePoint;
pub use recognition::{BlockingPolicy, PrototypeSet};
pub use scene::SceneBlock;
pub use solver::{
    solve_brute_force, solve_parallel, solve_sequential, Counters, MatchResult, Trellis,
};
pub use synth::PerturbSpec;
