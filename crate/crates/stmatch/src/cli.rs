//! Command-line surface: `match`, `classify`, `bench`, and `gen`
//! subcommands over the library. The binary in `src/bin` only parses
//! arguments and dispatches here.
//!
//! Exit codes: 0 success, 2 input parse error, 3 semantic error (dimension
//! mismatches, invalid specs), 4 resource guard.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::bench::{run_suite, write_csv, BenchSuite};
use crate::error::Error;
use crate::io::{
    assignment_to_wire, fmt_sig9, point_set_to_string, read_dictionary, read_point_set,
    truth_to_string, PointSetFile, TruthFile, WirePick,
};
use crate::params::{EnergyParams, SolverConfig};
use crate::recognition::{classify, split_blocks, BlockingPolicy};
use crate::solver::{solve_brute_force, solve_parallel, Counters};
use crate::synth::{gen_instance, PerturbSpec};

/// Environment variable that overrides the default worker count.
pub const PARALLELISM_ENV: &str = "STMATCH_PARALLELISM";

#[derive(Debug, Parser)]
#[command(name = "stmatch", version, about = "Space-time chain matching and classification")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Match a model point set against a scene point set.
    Match(MatchArgs),
    /// Classify a scene stream against a prototype dictionary.
    Classify(ClassifyArgs),
    /// Run the instrumented benchmark suite and emit CSV.
    Bench(BenchArgs),
    /// Generate a planted instance with a ground-truth sidecar.
    Gen(GenArgs),
}

#[derive(Debug, Args)]
pub struct ParamFlags {
    /// Weight of the appearance sum.
    #[arg(long, default_value_t = 0.6)]
    pub lambda1: f64,
    /// Weight of the distortion sum.
    #[arg(long, default_value_t = 0.2)]
    pub lambda2: f64,
    /// Weight of the angle distortion inside each distortion term.
    #[arg(long, default_value_t = 5.0)]
    pub lambda3: f64,
    /// Temporal closeness window, frames.
    #[arg(long = "T", default_value_t = 10)]
    pub temporal_window: u32,
    /// Penalty for assigning a model node to nothing.
    #[arg(long = "Wd", default_value_t = 1.0)]
    pub dummy_penalty: f64,
}

impl ParamFlags {
    pub fn to_params(&self) -> EnergyParams {
        EnergyParams {
            lambda1: self.lambda1,
            lambda2: self.lambda2,
            lambda3: self.lambda3,
            temporal_window: self.temporal_window,
            dummy_penalty: self.dummy_penalty,
        }
    }
}

#[derive(Debug, Args)]
pub struct SolverFlags {
    /// Worker count; defaults to $STMATCH_PARALLELISM or the number of cores.
    #[arg(long)]
    pub parallelism: Option<usize>,
    /// Solve the unconstrained problem: no causality or closeness pruning.
    #[arg(long = "no-pruning")]
    pub no_pruning: bool,
    /// Evaluate feature distances inside the loops instead of precomputing.
    #[arg(long = "no-unary-table")]
    pub no_unary_table: bool,
}

impl SolverFlags {
    pub fn to_config(&self) -> SolverConfig {
        SolverConfig {
            parallelism: self.parallelism.unwrap_or_else(default_parallelism),
            use_pruning: !self.no_pruning,
            use_unary_table: !self.no_unary_table,
            instrumentation: true,
        }
    }
}

fn default_parallelism() -> usize {
    if let Ok(v) = std::env::var(PARALLELISM_ENV) {
        if let Ok(q) = v.parse::<usize>() {
            if q >= 1 {
                return q;
            }
        }
    }
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

#[derive(Debug, Args)]
pub struct MatchArgs {
    /// Model point-set JSON file.
    pub model: PathBuf,
    /// Scene point-set JSON file.
    pub scene: PathBuf,
    #[command(flatten)]
    pub params: ParamFlags,
    #[command(flatten)]
    pub solver: SolverFlags,
    /// Also run the exhaustive solver and report both energies.
    #[arg(long)]
    pub oracle: bool,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    /// Scene point-set JSON file.
    pub scene: PathBuf,
    /// Prototype dictionary JSON file.
    pub dict: PathBuf,
    #[command(flatten)]
    pub params: ParamFlags,
    #[command(flatten)]
    pub solver: SolverFlags,
    /// Frames per scene block.
    #[arg(long = "block-frames", default_value_t = 60)]
    pub block_frames: u32,
    /// Frames between consecutive block starts.
    #[arg(long = "stride-frames", default_value_t = 30)]
    pub stride_frames: u32,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Model sizes to sweep.
    #[arg(long = "M", value_delimiter = ',', default_value = "30")]
    pub model_nodes: Vec<usize>,
    /// Scene sizes to sweep.
    #[arg(long = "S", value_delimiter = ',', default_value = "60")]
    pub scene_nodes: Vec<usize>,
    /// Temporal windows to sweep.
    #[arg(long = "T", value_delimiter = ',', default_value = "10")]
    pub temporal_windows: Vec<u32>,
    /// Worker counts for the parallel rows.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub parallelism: Vec<usize>,
    /// Feature dimension of the generated instances.
    #[arg(long = "F", default_value_t = 162)]
    pub feature_dim: usize,
    /// Repetitions per row; the smallest wall time is reported.
    #[arg(long, default_value_t = 3)]
    pub repetitions: usize,
    /// Skip the pruning/table on-off variants.
    #[arg(long = "no-variants")]
    pub no_variants: bool,
    /// Skip the exhaustive reference rows.
    #[arg(long = "no-bruteforce")]
    pub no_bruteforce: bool,
    /// Instance seed.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Output CSV path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Model point-set JSON file.
    pub model: PathBuf,
    /// Output prefix; writes <prefix>.scene.json and <prefix>.truth.json.
    pub out_prefix: String,
    #[command(flatten)]
    pub params: ParamFlags,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Constant shift of all planted frames.
    #[arg(long = "time-shift", default_value_t = 0)]
    pub time_shift: i64,
    /// Bound on per-step frame-gap warping; must stay below the window.
    #[arg(long = "max-warp", default_value_t = 0)]
    pub max_warp: u32,
    /// Spatial jitter sigma, pixels.
    #[arg(long = "spatial-noise", default_value_t = 0.0)]
    pub spatial_noise: f64,
    /// Per-component feature jitter sigma.
    #[arg(long = "feature-noise", default_value_t = 0.0)]
    pub feature_noise: f64,
    /// Number of clutter points.
    #[arg(long, default_value_t = 0)]
    pub clutter: u32,
    /// Scale of clutter feature components.
    #[arg(long = "clutter-scale", default_value_t = 10.0)]
    pub clutter_scale: f64,
}

/// Command failure with its exit code.
#[derive(Debug)]
pub enum CmdError {
    /// A file failed to read or parse. Exit 2.
    Parse(String),
    /// Inputs parsed but are semantically unusable. Exit 3.
    Semantic(String),
    /// A resource guard refused the work. Exit 4.
    Guard(String),
}

impl CmdError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CmdError::Parse(_) => 2,
            CmdError::Semantic(_) => 3,
            CmdError::Guard(_) => 4,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CmdError::Parse(m) | CmdError::Semantic(m) | CmdError::Guard(m) => m,
        }
    }
}

impl From<Error> for CmdError {
    fn from(e: Error) -> Self {
        match e {
            Error::OracleSizeExceeded { .. } => CmdError::Guard(e.to_string()),
            other => CmdError::Semantic(other.to_string()),
        }
    }
}

/// Runs a parsed command line, printing the result to stdout. Returns the
/// process exit code.
pub fn run(cli: Cli) -> i32 {
    let outcome = match cli.command {
        Command::Match(args) => cmd_match(&args),
        Command::Classify(args) => cmd_classify(&args),
        Command::Bench(args) => cmd_bench(&args),
        Command::Gen(args) => cmd_gen(&args),
    };
    match outcome {
        Ok(output) => {
            print!("{output}");
            0
        }
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.exit_code()
        }
    }
}

fn wire_to_json(wire: &[WirePick]) -> String {
    let parts: Vec<String> = wire
        .iter()
        .map(|w| match w {
            WirePick::Node(n) => n.to_string(),
            WirePick::Token(t) => format!("{t:?}"),
        })
        .collect();
    format!("[{}]", parts.join(", "))
}

fn counters_to_json(c: &Counters) -> String {
    format!(
        "{{\"cellsComputed\": {}, \"minIterations\": {}, \"unaryEvaluations\": {}}}",
        c.cells_computed, c.min_iterations, c.unary_evaluations
    )
}

pub fn cmd_match(args: &MatchArgs) -> Result<String, CmdError> {
    let model_file = read_point_set(&args.model).map_err(CmdError::Parse)?;
    let scene_file = read_point_set(&args.scene).map_err(CmdError::Parse)?;
    let model = model_file.to_model_chain()?;
    let scene = scene_file.to_scene_block()?;
    let params = args.params.to_params();
    let config = args.solver.to_config();

    let result = solve_parallel(&model, &scene, &params, &config)?;
    let appearance = crate::recognition::appearance_distance(&result, &model, &scene, &params);

    let mut out = String::new();
    out.push_str("{\n");
    let _ = writeln!(out, "  \"assignment\": {},", wire_to_json(&assignment_to_wire(&result.assignment)));
    let _ = writeln!(out, "  \"energy\": {},", fmt_sig9(result.energy));
    let _ = writeln!(out, "  \"appearanceDistance\": {},", fmt_sig9(appearance));
    if args.oracle {
        let _ = writeln!(out, "  \"counters\": {},", counters_to_json(&result.counters));
        let oracle = solve_brute_force(&model, &scene, &params)?;
        let tol = 1e-9 * result.energy.abs().max(1.0);
        let agrees = (oracle.energy - result.energy).abs() <= tol;
        let _ = writeln!(out, "  \"oracle\": {{");
        let _ = writeln!(out, "    \"energy\": {},", fmt_sig9(oracle.energy));
        let _ = writeln!(
            out,
            "    \"assignment\": {},",
            wire_to_json(&assignment_to_wire(&oracle.assignment))
        );
        let _ = writeln!(out, "    \"agrees\": {agrees}");
        let _ = writeln!(out, "  }}");
    } else {
        let _ = writeln!(out, "  \"counters\": {}", counters_to_json(&result.counters));
    }
    out.push_str("}\n");
    Ok(out)
}

pub fn cmd_classify(args: &ClassifyArgs) -> Result<String, CmdError> {
    let scene_file = read_point_set(&args.scene).map_err(CmdError::Parse)?;
    scene_file.validate()?;
    let dict_file = read_dictionary(&args.dict).map_err(CmdError::Parse)?;
    let dict = dict_file.to_prototype_set()?;
    let params = args.params.to_params();
    let config = args.solver.to_config();
    let policy = BlockingPolicy {
        block_frames: args.block_frames,
        stride_frames: args.stride_frames,
    };

    let blocks = split_blocks(&scene_file.points, &policy)?;
    if blocks.is_empty() {
        return Err(CmdError::Semantic("scene contains no points".into()));
    }

    let proto_index: HashMap<&str, usize> = dict
        .entries()
        .iter()
        .enumerate()
        .map(|(i, (label, _))| (label.as_str(), i))
        .collect();

    let mut out = String::new();
    out.push_str("{\n  \"blocks\": [\n");
    let mut votes: HashMap<String, usize> = HashMap::new();
    let n_blocks = blocks.len();
    for (index, block) in blocks.iter().enumerate() {
        let outcome = classify(block, &dict, &params, &config)?;
        *votes.entry(outcome.label.clone()).or_insert(0) += 1;
        let scores: Vec<String> = outcome
            .scores
            .iter()
            .map(|(label, d)| format!("{{\"label\": {label:?}, \"distance\": {}}}", fmt_sig9(*d)))
            .collect();
        let _ = write!(
            out,
            "    {{\"index\": {index}, \"label\": {:?}, \"scores\": [{}]}}",
            outcome.label,
            scores.join(", ")
        );
        out.push_str(if index + 1 < n_blocks { ",\n" } else { "\n" });
    }
    // majority over block labels; ties go to the earliest dictionary entry
    let majority = votes
        .iter()
        .min_by_key(|(label, count)| (std::cmp::Reverse(**count), proto_index[label.as_str()]))
        .map(|(label, _)| label.clone())
        .expect("at least one block");
    out.push_str("  ],\n");
    let _ = writeln!(out, "  \"majorityLabel\": {majority:?}");
    out.push_str("}\n");
    Ok(out)
}

pub fn cmd_bench(args: &BenchArgs) -> Result<String, CmdError> {
    let suite = BenchSuite {
        model_nodes: args.model_nodes.clone(),
        scene_nodes: args.scene_nodes.clone(),
        temporal_windows: args.temporal_windows.clone(),
        parallelism: args.parallelism.clone(),
        feature_dim: args.feature_dim,
        repetitions: args.repetitions,
        include_variants: !args.no_variants,
        include_bruteforce: !args.no_bruteforce,
        seed: args.seed,
    };
    let rows = run_suite(&suite, &mut |w| eprintln!("warning: {w}"))?;
    let mut buf = Vec::new();
    write_csv(&rows, &mut buf)?;
    let csv = String::from_utf8(buf).expect("csv output is utf-8");
    match &args.out {
        Some(path) => {
            fs::write(path, &csv).map_err(|e| CmdError::Semantic(format!("{}: {e}", path.display())))?;
            Ok(format!("wrote {} rows to {}\n", rows.len(), path.display()))
        }
        None => Ok(csv),
    }
}

pub fn cmd_gen(args: &GenArgs) -> Result<String, CmdError> {
    let model_file = read_point_set(&args.model).map_err(CmdError::Parse)?;
    let model = model_file.to_model_chain()?;
    let params = args.params.to_params();
    let spec = PerturbSpec {
        time_shift: args.time_shift,
        max_warp_per_step: args.max_warp,
        spatial_noise_sigma: args.spatial_noise,
        feature_noise_sigma: args.feature_noise,
        clutter_points: args.clutter,
        clutter_feature_scale: args.clutter_scale,
        seed: args.seed,
    };
    let (scene, truth) = gen_instance(&model, &spec, &params)?;

    let scene_path = format!("{}.scene.json", args.out_prefix);
    let truth_path = format!("{}.truth.json", args.out_prefix);
    let scene_file = PointSetFile::new(scene.feature_dim(), scene.points().to_vec());
    fs::write(&scene_path, point_set_to_string(&scene_file))
        .map_err(|e| CmdError::Semantic(format!("{scene_path}: {e}")))?;
    let truth_file = TruthFile { z: assignment_to_wire(&truth) };
    fs::write(&truth_path, truth_to_string(&truth_file))
        .map_err(|e| CmdError::Semantic(format!("{truth_path}: {e}")))?;

    Ok(format!("{{\"scene\": {scene_path:?}, \"truth\": {truth_path:?}}}\n"))
}
