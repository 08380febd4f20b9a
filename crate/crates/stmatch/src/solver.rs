//! Exact minimization of the chain-matching energy over a layered trellis.
//!
//! The search state at model node i is the pair of predecessor picks
//! (z_{i-1}, z_{i-2}). Each trellis layer holds, for every such pair, the
//! best achievable cost of the tail of the chain (alpha) and the pick that
//! achieves it (beta). Layers are filled from the last model node backwards:
//!
//! ```text
//! alpha_i(z_{i-1}, z_{i-2}) = min over z_i of
//!     lambda1 * U(z_i) + lambda2 * D(z_i, z_{i-1}, z_{i-2}) + alpha_{i+1}(z_i, z_{i-1})
//! ```
//!
//! with the alpha term absent at the last node. A final search over the
//! first two picks selects the optimum, which backtracking then recovers
//! forwards through the beta tables.
//!
//! With pruning enabled, cells whose predecessor pair is not admissible
//! (causality or temporal closeness violated) are skipped and hold an
//! infinite sentinel, and the candidate loop runs only over the node
//! interval allowed by the pair, derived in O(1) from the scene's
//! frame-to-node table. With pruning disabled the full unconstrained
//! problem is solved: every cell, every candidate.
//!
//! Every minimization loop iterates candidates in ascending node order with
//! the dummy last, and per-candidate arithmetic has a fixed expression
//! order. Results are therefore bit-identical for any worker count.

use std::ops::{AddAssign, Range};
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::assignment::{Assignment, Pick};
use crate::chain::ModelChain;
use crate::energy::{angle_pair_norm, feature_distance, spatial_angle, temporal_delta, UnaryTable};
use crate::error::{Error, Result};
use crate::params::{EnergyParams, SolverConfig};
use crate::scene::SceneBlock;

pub mod oracle;

pub use oracle::{solve_brute_force, solve_brute_force_detailed, EXHAUSTIVE_LIMIT};

/// Execution counters. Counts are a pure function of the instance and the
/// configuration; worker count and scheduling never change them.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Counters {
    /// Trellis cells whose minimization ran (skipped inadmissible cells do
    /// not count).
    #[serde(rename = "cellsComputed")]
    pub cells_computed: u64,
    /// Candidate cost evaluations across all minimization loops, including
    /// the initial search over the first two picks.
    #[serde(rename = "minIterations")]
    pub min_iterations: u64,
    /// Fresh feature-distance evaluations. Building the unary table counts
    /// one evaluation per table entry; table reads count nothing.
    #[serde(rename = "unaryEvaluations")]
    pub unary_evaluations: u64,
}

impl AddAssign for Counters {
    fn add_assign(&mut self, rhs: Self) {
        self.cells_computed += rhs.cells_computed;
        self.min_iterations += rhs.min_iterations;
        self.unary_evaluations += rhs.unary_evaluations;
    }
}

/// Outcome of one model-against-scene match.
#[derive(Debug, Clone)]
pub struct MatchResult {
    pub assignment: Assignment,
    /// Minimal energy found; equals the chain energy of `assignment`.
    pub energy: f64,
    pub counters: Counters,
    pub wall_time: Duration,
}

/// One trellis layer: alpha values and backtracking picks for every
/// (z_{i-1}, z_{i-2}) pair. Rows are indexed by z_{i-1} and stored
/// contiguously; index S (one past the last scene node) encodes the dummy.
#[derive(Debug, Clone)]
pub struct Layer {
    s_prime: usize,
    alpha: Vec<f64>,
    beta: Vec<u32>,
}

impl Layer {
    /// Allocates zeroed; `fill_rows` writes every cell of its band, so no
    /// sentinel pre-fill (and no serial page touching) is needed here.
    fn new(s_prime: usize) -> Self {
        Self {
            s_prime,
            alpha: vec![0.0; s_prime * s_prime],
            beta: vec![0; s_prime * s_prime],
        }
    }

    /// Scene nodes plus one dummy slot per axis.
    pub fn s_prime(&self) -> usize {
        self.s_prime
    }

    #[inline]
    pub fn alpha_at(&self, row: usize, col: usize) -> f64 {
        self.alpha[row * self.s_prime + col]
    }

    #[inline]
    fn beta_raw(&self, row: usize, col: usize) -> usize {
        self.beta[row * self.s_prime + col] as usize
    }

    /// Argmin pick stored for the given predecessor pair.
    pub fn beta_at(&self, row: usize, col: usize) -> Pick {
        index_to_pick(self.beta_raw(row, col), self.s_prime - 1)
    }
}

/// The filled trellis: one layer per model node from the third onwards, plus
/// the admissibility mask shared by all layers (absent when pruning is off).
#[derive(Debug, Clone)]
pub struct Trellis {
    s_prime: usize,
    /// `layers[k]` belongs to model node k + 2; the last layer is the
    /// initialization at the final node.
    layers: Vec<Layer>,
    admissible: Option<Vec<bool>>,
}

impl Trellis {
    pub fn s_prime(&self) -> usize {
        self.s_prime
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    /// Layer of model node `i` (0-based, i >= 2).
    pub fn layer_for_node(&self, i: usize) -> &Layer {
        &self.layers[i - 2]
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    /// Whether the predecessor pair (row = z_{i-1}, col = z_{i-2}) survives
    /// pruning. Always true when pruning is off.
    pub fn is_admissible(&self, row: usize, col: usize) -> bool {
        match &self.admissible {
            Some(mask) => mask[row * self.s_prime + col],
            None => true,
        }
    }
}

#[inline]
fn index_to_pick(idx: usize, s: usize) -> Pick {
    if idx == s {
        None
    } else {
        Some(idx)
    }
}

/// True when the predecessor pair (z_{i-1}, z_{i-2}) is admissible: pairs
/// involving a dummy always are; two real picks must have strictly
/// increasing node indices and scene frames within the temporal window.
pub fn admissible_pair(prev: Pick, prevprev: Pick, scene: &SceneBlock, params: &EnergyParams) -> bool {
    match (prev, prevprev) {
        (Some(b), Some(a)) => {
            a < b && (scene.frame(b) as u64) < scene.frame(a) as u64 + params.temporal_window as u64
        }
        _ => true,
    }
}

/// Contiguous range of real scene nodes that may extend the given
/// predecessor pair; the dummy is always an additional candidate on top of
/// the returned range.
///
/// Each real predecessor bounds the candidates: the node index must exceed
/// it and the candidate's frame must fall inside its temporal window. With
/// both predecessors real the index bound from the nearer one and the window
/// bound from the farther one are the binding constraints; a dummy
/// predecessor simply drops out. Both bounds come from the scene's
/// frame-to-node table.
pub fn candidate_bounds(prev: Pick, prevprev: Pick, scene: &SceneBlock, params: &EnergyParams) -> Range<usize> {
    let w = params.temporal_window as u64;
    let (lo, hi) = match (prev, prevprev) {
        (Some(p), Some(pp)) => (
            scene.min_node_at(scene.frame(p) as u64).max(p + 1),
            scene.min_node_at(scene.frame(pp) as u64 + w),
        ),
        (None, Some(pp)) => (
            scene.min_node_at(scene.frame(pp) as u64).max(pp + 1),
            scene.min_node_at(scene.frame(pp) as u64 + w),
        ),
        (Some(p), None) => (
            scene.min_node_at(scene.frame(p) as u64).max(p + 1),
            scene.min_node_at(scene.frame(p) as u64 + w),
        ),
        (None, None) => (0, scene.len()),
    };
    lo..hi.max(lo)
}

fn build_mask(scene: &SceneBlock, params: &EnergyParams) -> Vec<bool> {
    let s = scene.len();
    let sp = s + 1;
    let mut mask = vec![false; sp * sp];
    for row in 0..sp {
        for col in 0..sp {
            mask[row * sp + col] =
                admissible_pair(index_to_pick(row, s), index_to_pick(col, s), scene, params);
        }
    }
    mask
}

#[inline]
fn unary_value(
    model: &ModelChain,
    scene: &SceneBlock,
    unary: Option<&UnaryTable>,
    scene_node: usize,
    model_node: usize,
    counters: &mut Counters,
) -> f64 {
    match unary {
        Some(t) => t.get(scene_node, model_node),
        None => {
            counters.unary_evaluations += 1;
            feature_distance(&model.node(model_node).features, &scene.point(scene_node).features)
        }
    }
}

/// Everything one layer's cells read: the instance, per-node model geometry,
/// and the already filled successor layer.
struct LayerCtx<'a> {
    model: &'a ModelChain,
    scene: &'a SceneBlock,
    params: &'a EnergyParams,
    unary: Option<&'a UnaryTable>,
    mask: Option<&'a [bool]>,
    alpha_next: Option<&'a Layer>,
    /// Model node index i (0-based, >= 2).
    node: usize,
    frame_i: u32,
    frame_j: u32,
    frame_k: u32,
    /// Model angle at node i-1 of the triple (i, i-1, i-2).
    model_mid: f64,
    /// Model angle at node i of the triple (i, i-1, i-2).
    model_end: f64,
    s: usize,
    s_prime: usize,
}

impl<'a> LayerCtx<'a> {
    fn new(
        model: &'a ModelChain,
        scene: &'a SceneBlock,
        params: &'a EnergyParams,
        unary: Option<&'a UnaryTable>,
        mask: Option<&'a [bool]>,
        alpha_next: Option<&'a Layer>,
        node: usize,
    ) -> Self {
        let (i, j, k) = (node, node - 1, node - 2);
        Self {
            model,
            scene,
            params,
            unary,
            mask,
            alpha_next,
            node,
            frame_i: model.frame(i),
            frame_j: model.frame(j),
            frame_k: model.frame(k),
            model_mid: spatial_angle(model.node(i), model.node(j), model.node(k)),
            model_end: spatial_angle(model.node(j), model.node(i), model.node(k)),
            s: scene.len(),
            s_prime: scene.len() + 1,
        }
    }
}

/// Runs one cell's minimization and returns (alpha, beta).
#[inline]
fn minimize_cell(ctx: &LayerCtx, row: usize, col: usize, counters: &mut Counters) -> (f64, u32) {
    let s = ctx.s;
    let l1 = ctx.params.lambda1;
    let l2 = ctx.params.lambda2;
    let l3 = ctx.params.lambda3;
    let row_real = row < s;
    let col_real = col < s;
    let bounds = match ctx.mask {
        Some(_) => candidate_bounds(
            index_to_pick(row, s),
            index_to_pick(col, s),
            ctx.scene,
            ctx.params,
        ),
        None => 0..s,
    };

    let mut best = f64::INFINITY;
    let mut arg = s as u32;
    for zi in bounds {
        let u = unary_value(ctx.model, ctx.scene, ctx.unary, zi, ctx.node, counters);
        let d = if row_real && col_real {
            let dt = temporal_delta(ctx.frame_i, ctx.frame_j, ctx.scene.frame(zi), ctx.scene.frame(row))
                + temporal_delta(ctx.frame_j, ctx.frame_k, ctx.scene.frame(row), ctx.scene.frame(col));
            let scene_mid = spatial_angle(ctx.scene.point(zi), ctx.scene.point(row), ctx.scene.point(col));
            let scene_end = spatial_angle(ctx.scene.point(row), ctx.scene.point(zi), ctx.scene.point(col));
            dt + l3 * angle_pair_norm(ctx.model_mid, scene_mid, ctx.model_end, scene_end)
        } else {
            0.0
        };
        let a = match ctx.alpha_next {
            Some(l) => l.alpha_at(zi, row),
            None => 0.0,
        };
        let cost = l1 * u + l2 * d + a;
        counters.min_iterations += 1;
        if cost < best {
            best = cost;
            arg = zi as u32;
        }
    }
    // the dummy candidate comes last; ties keep the earlier winner
    {
        let a = match ctx.alpha_next {
            Some(l) => l.alpha_at(s, row),
            None => 0.0,
        };
        let cost = l1 * ctx.params.dummy_penalty + l2 * 0.0 + a;
        counters.min_iterations += 1;
        if cost < best {
            best = cost;
            arg = s as u32;
        }
    }
    counters.cells_computed += 1;
    (best, arg)
}

/// Fills the cells of `rows` into `alpha_out`/`beta_out`, which start at row
/// `rows.start`. Workers call this on disjoint row bands; the per-cell
/// arithmetic is identical regardless of the banding.
///
/// With pruning on, only admissible cells are visited: for a real row r the
/// admissible real columns form the contiguous interval of nodes whose
/// frames lie within the window before r, derived from the frame-to-node
/// table; the dummy column and the dummy row are always admissible.
/// Untouched cells keep the infinite sentinel they were initialized with.
fn fill_rows(
    ctx: &LayerCtx,
    rows: Range<usize>,
    alpha_out: &mut [f64],
    beta_out: &mut [u32],
    counters: &mut Counters,
) {
    let sp = ctx.s_prime;
    let s = ctx.s;
    let w = ctx.params.temporal_window as u64;
    let base = rows.start;

    for row in rows {
        let row_base = (row - base) * sp;
        if ctx.mask.is_some() && row < s {
            // real columns admissible for this row: index below r, frame
            // strictly within the window before r's frame; everything else
            // keeps the infinite sentinel
            alpha_out[row_base..row_base + sp].fill(f64::INFINITY);
            beta_out[row_base..row_base + sp].fill(s as u32);
            let lo = ctx.scene.min_node_at((ctx.scene.frame(row) as u64 + 1).saturating_sub(w));
            for col in lo..row {
                let (alpha, beta) = minimize_cell(ctx, row, col, counters);
                alpha_out[row_base + col] = alpha;
                beta_out[row_base + col] = beta;
            }
            let (alpha, beta) = minimize_cell(ctx, row, s, counters);
            alpha_out[row_base + s] = alpha;
            beta_out[row_base + s] = beta;
        } else {
            // the dummy row, or unpruned mode: every column
            for col in 0..sp {
                let (alpha, beta) = minimize_cell(ctx, row, col, counters);
                alpha_out[row_base + col] = alpha;
                beta_out[row_base + col] = beta;
            }
        }
    }
}

fn check_instance(model: &ModelChain, scene: &SceneBlock, params: &EnergyParams, config: &SolverConfig) -> Result<()> {
    params.validate()?;
    config.validate()?;
    if model.feature_dim() != scene.feature_dim() {
        return Err(Error::DimensionMismatch {
            expected: model.feature_dim(),
            got: scene.feature_dim(),
        });
    }
    Ok(())
}

/// Computes one trellis layer for `model_node` (0-based, >= 2). The
/// successor layer must be supplied for every node except the last one,
/// where the recursion bottoms out.
pub fn compute_layer(
    model_node: usize,
    alpha_next: Option<&Layer>,
    model: &ModelChain,
    scene: &SceneBlock,
    unary: Option<&UnaryTable>,
    params: &EnergyParams,
    config: &SolverConfig,
) -> Result<(Layer, Counters)> {
    check_instance(model, scene, params, config)?;
    if model_node < 2 || model_node >= model.len() {
        return Err(Error::InvalidParams(format!(
            "model node {model_node} out of layer range 2..{}",
            model.len()
        )));
    }
    let last = model_node == model.len() - 1;
    if last != alpha_next.is_none() {
        return Err(Error::InvalidParams(
            "the successor layer must be absent exactly at the last model node".into(),
        ));
    }
    let mask = config.use_pruning.then(|| build_mask(scene, params));
    let ctx = LayerCtx::new(model, scene, params, unary, mask.as_deref(), alpha_next, model_node);
    let mut layer = Layer::new(ctx.s_prime);
    let mut counters = Counters::default();
    let sp = ctx.s_prime;
    fill_rows(&ctx, 0..sp, &mut layer.alpha, &mut layer.beta, &mut counters);
    Ok((layer, counters))
}

/// Fills all trellis layers, from the last model node down to the third,
/// using `config.parallelism` workers. Within a layer, work is partitioned
/// into bands of rows (fixed z_{i-1} values); layers are separated by a full
/// barrier since every cell reads a row of the successor layer.
pub fn fill_trellis(
    model: &ModelChain,
    scene: &SceneBlock,
    unary: Option<&UnaryTable>,
    params: &EnergyParams,
    config: &SolverConfig,
) -> Result<(Trellis, Counters)> {
    check_instance(model, scene, params, config)?;
    if model.len() < 3 {
        return Err(Error::InvalidParams(
            "the trellis needs at least 3 model nodes; shorter models are solved directly".into(),
        ));
    }
    let s = scene.len();
    let sp = s + 1;
    let workers = config.parallelism.max(1);
    let mask = config.use_pruning.then(|| build_mask(scene, params));
    let mut counters = Counters::default();
    let mut layers_rev: Vec<Layer> = Vec::with_capacity(model.len() - 2);

    for node in (2..model.len()).rev() {
        let ctx = LayerCtx::new(
            model,
            scene,
            params,
            unary,
            mask.as_deref(),
            layers_rev.last(),
            node,
        );
        let mut layer = Layer::new(sp);
        if workers == 1 {
            fill_rows(&ctx, 0..sp, &mut layer.alpha, &mut layer.beta, &mut counters);
        } else {
            let rows_per = sp.div_ceil(workers);
            let alpha_chunks = layer.alpha.chunks_mut(rows_per * sp);
            let beta_chunks = layer.beta.chunks_mut(rows_per * sp);
            let ctx = &ctx;
            std::thread::scope(|scope| {
                let mut handles = Vec::new();
                for (w, (ac, bc)) in alpha_chunks.zip(beta_chunks).enumerate() {
                    let start = w * rows_per;
                    let end = (start + rows_per).min(sp);
                    handles.push(scope.spawn(move || {
                        let mut local = Counters::default();
                        fill_rows(ctx, start..end, ac, bc, &mut local);
                        local
                    }));
                }
                for h in handles {
                    counters += h.join().expect("trellis worker panicked");
                }
            });
        }
        layers_rev.push(layer);
    }

    layers_rev.reverse();
    Ok((
        Trellis { s_prime: sp, layers: layers_rev, admissible: mask },
        counters,
    ))
}

/// Search over the first two picks. Iterates z_1 in the outer loop and z_2
/// in the inner one, both in ascending node order with the dummy last, so
/// ties resolve to the lexicographically smallest pair.
fn init_search(
    alpha3: Option<&Layer>,
    mask: Option<&[bool]>,
    model: &ModelChain,
    scene: &SceneBlock,
    unary: Option<&UnaryTable>,
    params: &EnergyParams,
    counters: &mut Counters,
) -> (usize, usize, f64) {
    let s = scene.len();
    let sp = s + 1;
    let l1 = params.lambda1;
    let wd = params.dummy_penalty;
    let mut best = f64::INFINITY;
    let (mut best1, mut best2) = (s, s);
    for z1 in 0..sp {
        let u1 = if z1 < s {
            unary_value(model, scene, unary, z1, 0, counters)
        } else {
            wd
        };
        for z2 in 0..sp {
            if let Some(mask) = mask {
                if !mask[z2 * sp + z1] {
                    continue;
                }
            }
            let u2 = if z2 < s {
                unary_value(model, scene, unary, z2, 1, counters)
            } else {
                wd
            };
            let a = match alpha3 {
                Some(l) => l.alpha_at(z2, z1),
                None => 0.0,
            };
            let cost = l1 * u1 + l1 * u2 + a;
            counters.min_iterations += 1;
            if cost < best {
                best = cost;
                best1 = z1;
                best2 = z2;
            }
        }
    }
    (best1, best2, best)
}

/// Recovers the optimal assignment from a filled trellis: the initial search
/// picks the first two nodes, then each beta table supplies the next pick.
/// Returns the assignment, its energy, and the counters of the search.
pub fn backtrack(
    trellis: &Trellis,
    model: &ModelChain,
    scene: &SceneBlock,
    unary: Option<&UnaryTable>,
    params: &EnergyParams,
) -> (Assignment, f64, Counters) {
    let s = trellis.s_prime - 1;
    let mut counters = Counters::default();
    let (z1, z2, best) = init_search(
        Some(&trellis.layers[0]),
        trellis.admissible.as_deref(),
        model,
        scene,
        unary,
        params,
        &mut counters,
    );
    let mut indices = Vec::with_capacity(model.len());
    indices.push(z1);
    indices.push(z2);
    let (mut prev, mut prevprev) = (z2, z1);
    for layer in &trellis.layers {
        let zi = layer.beta_raw(prev, prevprev);
        indices.push(zi);
        prevprev = prev;
        prev = zi;
    }
    let picks = indices.into_iter().map(|i| index_to_pick(i, s)).collect();
    (Assignment::new(picks), best, counters)
}

/// Direct enumeration for models of one or two nodes, where the recursion
/// has no triple to work on.
fn solve_short(
    model: &ModelChain,
    scene: &SceneBlock,
    unary: Option<&UnaryTable>,
    params: &EnergyParams,
    config: &SolverConfig,
    counters: &mut Counters,
) -> (Assignment, f64) {
    let s = scene.len();
    match model.len() {
        1 => {
            let l1 = params.lambda1;
            let mut best = f64::INFINITY;
            let mut arg = s;
            for z in 0..=s {
                let u = if z < s {
                    unary_value(model, scene, unary, z, 0, counters)
                } else {
                    params.dummy_penalty
                };
                let cost = l1 * u;
                counters.min_iterations += 1;
                if cost < best {
                    best = cost;
                    arg = z;
                }
            }
            (Assignment::new(vec![index_to_pick(arg, s)]), best)
        }
        2 => {
            let mask = config.use_pruning.then(|| build_mask(scene, params));
            let (z1, z2, best) =
                init_search(None, mask.as_deref(), model, scene, unary, params, counters);
            (
                Assignment::new(vec![index_to_pick(z1, s), index_to_pick(z2, s)]),
                best,
            )
        }
        m => unreachable!("solve_short called with {m} model nodes"),
    }
}

fn solve_impl(
    model: &ModelChain,
    scene: &SceneBlock,
    params: &EnergyParams,
    config: &SolverConfig,
) -> Result<MatchResult> {
    check_instance(model, scene, params, config)?;
    let start = Instant::now();
    let mut counters = Counters::default();
    let unary = if config.use_unary_table {
        let table = UnaryTable::precompute(model, scene)?;
        counters.unary_evaluations += table.evaluations();
        Some(table)
    } else {
        None
    };

    let (assignment, energy) = if model.len() < 3 {
        solve_short(model, scene, unary.as_ref(), params, config, &mut counters)
    } else {
        let (trellis, fill_counters) = fill_trellis(model, scene, unary.as_ref(), params, config)?;
        counters += fill_counters;
        let (assignment, energy, search_counters) =
            backtrack(&trellis, model, scene, unary.as_ref(), params);
        counters += search_counters;
        (assignment, energy)
    };

    if !config.instrumentation {
        counters = Counters::default();
    }
    Ok(MatchResult { assignment, energy, counters, wall_time: start.elapsed() })
}

/// Solves the matching problem on a single worker, filling layers from the
/// last model node down to the third and then backtracking.
pub fn solve_sequential(
    model: &ModelChain,
    scene: &SceneBlock,
    params: &EnergyParams,
    config: &SolverConfig,
) -> Result<MatchResult> {
    let sequential = SolverConfig { parallelism: 1, ..config.clone() };
    solve_impl(model, scene, params, &sequential)
}

/// Solves the matching problem with `config.parallelism` workers. Returns
/// the same assignment and bit-identical energy as [`solve_sequential`] for
/// every worker count.
pub fn solve_parallel(
    model: &ModelChain,
    scene: &SceneBlock,
    params: &EnergyParams,
    config: &SolverConfig,
) -> Result<MatchResult> {
    solve_impl(model, scene, params, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assignment::follows;
    use crate::energy::{chain_energy, ternary_cost, unary_cost};
    use crate::point::SpaceTimePoint;
    use crate::synth::{gen_instance, random_chain, random_scene, PerturbSpec};

    fn params_with_window(window: u32) -> EnergyParams {
        EnergyParams { temporal_window: window, ..Default::default() }
    }

    #[test]
    fn admissible_pair_examples() {
        // two nodes in the same frame, increasing index
        let pts = vec![
            SpaceTimePoint::new(5, 0.0, 0.0, 0.5, vec![0.0]),
            SpaceTimePoint::new(5, 1.0, 0.0, 0.5, vec![1.0]),
            SpaceTimePoint::new(20, 2.0, 0.0, 0.5, vec![2.0]),
        ];
        let scene = SceneBlock::from_points(&pts).unwrap();
        let params = params_with_window(10);
        assert!(admissible_pair(Some(1), Some(0), &scene, &params));
        // frames 20 and 5 are 15 apart, beyond the window
        assert!(!admissible_pair(Some(2), Some(0), &scene, &params));
        // anything involving a dummy is admissible
        assert!(admissible_pair(Some(2), None, &scene, &params));
        assert!(admissible_pair(None, Some(0), &scene, &params));
        assert!(admissible_pair(None, None, &scene, &params));
        // decreasing indices are not
        assert!(!admissible_pair(Some(0), Some(1), &scene, &params));
    }

    /// Independent oracle for the candidate range: filter every node by the
    /// raw constraint predicate and compare sets.
    fn assert_bounds_match_filter(scene: &SceneBlock, params: &EnergyParams) {
        let s = scene.len();
        for row in 0..=s {
            for col in 0..=s {
                let prev = index_to_pick(row, s);
                let prevprev = index_to_pick(col, s);
                if !admissible_pair(prev, prevprev, scene, params) {
                    continue;
                }
                let got: Vec<usize> = candidate_bounds(prev, prevprev, scene, params).collect();
                let want: Vec<usize> = (0..s)
                    .filter(|&z| {
                        [prev, prevprev].iter().all(|p| match p {
                            Some(p) => follows(z, *p, scene, params.temporal_window),
                            None => true,
                        })
                    })
                    .collect();
                assert_eq!(got, want, "row={row} col={col}");
            }
        }
    }

    #[test]
    fn candidate_bounds_equal_predicate_filter() {
        for (seed, s, span, t) in [(1u64, 9, 12, 10), (2, 12, 6, 3), (3, 7, 20, 1), (4, 15, 15, 4)] {
            let scene = random_scene(s, 2, span, seed);
            assert_bounds_match_filter(&scene, &params_with_window(t));
        }
    }

    #[test]
    fn candidate_bounds_unconstrained_when_both_dummy() {
        let scene = random_scene(6, 2, 8, 5);
        let params = params_with_window(2);
        let got: Vec<usize> = candidate_bounds(None, None, &scene, &params).collect();
        assert_eq!(got, (0..6).collect::<Vec<_>>());
    }

    #[test]
    fn candidate_bounds_tight_window_same_frame() {
        // with window 1, only nodes in the predecessor's own frame remain
        let pts = vec![
            SpaceTimePoint::new(4, 0.0, 0.0, 0.5, vec![0.0]),
            SpaceTimePoint::new(4, 1.0, 0.0, 0.5, vec![1.0]),
            SpaceTimePoint::new(4, 2.0, 0.0, 0.5, vec![2.0]),
            SpaceTimePoint::new(5, 3.0, 0.0, 0.5, vec![3.0]),
        ];
        let scene = SceneBlock::from_points(&pts).unwrap();
        let params = params_with_window(1);
        let got: Vec<usize> = candidate_bounds(Some(1), Some(0), &scene, &params).collect();
        assert_eq!(got, vec![2]);
    }

    /// Every trellis cell must equal a direct re-evaluation of its
    /// minimization through the public energy operations.
    #[test]
    fn trellis_cells_match_direct_recomputation() {
        let model = random_chain(5, 3, 11);
        let spec = PerturbSpec { clutter_points: 4, feature_noise_sigma: 0.2, seed: 21, ..Default::default() };
        let params = params_with_window(6);
        let (scene, _) = gen_instance(&model, &spec, &params).unwrap();
        let config = SolverConfig::default();
        let table = UnaryTable::precompute(&model, &scene).unwrap();
        let (trellis, _) = fill_trellis(&model, &scene, Some(&table), &params, &config).unwrap();

        let s = scene.len();
        let m = model.len();
        for i in 2..m {
            let layer = trellis.layer_for_node(i);
            let next = (i + 1 < m).then(|| trellis.layer_for_node(i + 1));
            for row in 0..=s {
                for col in 0..=s {
                    let prev = index_to_pick(row, s);
                    let prevprev = index_to_pick(col, s);
                    if !admissible_pair(prev, prevprev, &scene, &params) {
                        assert_eq!(layer.alpha_at(row, col), f64::INFINITY);
                        continue;
                    }
                    let mut best = f64::INFINITY;
                    let candidates: Vec<Pick> = candidate_bounds(prev, prevprev, &scene, &params)
                        .map(Some)
                        .chain(std::iter::once(None))
                        .collect();
                    for cand in candidates {
                        let u = unary_cost(
                            model.node(i),
                            cand.map(|z| scene.point(z)),
                            &params,
                        )
                        .unwrap();
                        let d = ternary_cost((i, i - 1, i - 2), (cand, prev, prevprev), &model, &scene, &params);
                        let a = match next {
                            Some(l) => l.alpha_at(cand.unwrap_or(s), row),
                            None => 0.0,
                        };
                        let cost = params.lambda1 * u + params.lambda2 * d + a;
                        if cost < best {
                            best = cost;
                        }
                    }
                    assert_eq!(layer.alpha_at(row, col).to_bits(), best.to_bits(), "i={i} row={row} col={col}");
                }
            }
        }
    }

    #[test]
    fn last_layer_cell_with_single_candidate_is_its_unary_cost() {
        // one model triple; window 1 with one node per frame leaves exactly
        // one real candidate for the pair (1, 0), and a huge dummy penalty
        // keeps the dummy from winning
        let mk = |f: u32, feat: f64| SpaceTimePoint::new(f, f as f64, 0.0, 0.5, vec![feat]);
        let model = ModelChain::from_points(&[mk(0, 0.0), mk(1, 0.0), mk(2, 0.0)]).unwrap();
        let scene = SceneBlock::from_points(&[mk(0, 0.0), mk(1, 0.5), mk(2, 2.0)]).unwrap();
        let params = EnergyParams { temporal_window: 3, dummy_penalty: 100.0, ..Default::default() };
        let config = SolverConfig::default();
        let (layer, _) = compute_layer(2, None, &model, &scene, None, &params, &config).unwrap();
        let bounds: Vec<usize> = candidate_bounds(Some(1), Some(0), &scene, &params).collect();
        assert_eq!(bounds, vec![2]);
        let u = unary_cost(model.node(2), Some(scene.point(2)), &params).unwrap();
        let d = ternary_cost((2, 1, 0), (Some(2), Some(1), Some(0)), &model, &scene, &params);
        let expect = params.lambda1 * u + params.lambda2 * d + 0.0;
        assert_eq!(layer.alpha_at(1, 0).to_bits(), expect.to_bits());
        assert_eq!(layer.beta_at(1, 0), Some(2));
    }

    #[test]
    fn cell_with_no_real_candidates_falls_back_to_the_dummy() {
        // predecessor pair at the end of the scene: nothing may follow it
        let mk = |f: u32, feat: f64| SpaceTimePoint::new(f, f as f64, 0.0, 0.5, vec![feat]);
        let model = ModelChain::from_points(&[mk(0, 0.0), mk(1, 0.0), mk(2, 0.0), mk(3, 0.0)]).unwrap();
        let scene = SceneBlock::from_points(&[mk(0, 1.0), mk(1, 2.0), mk(2, 3.0)]).unwrap();
        let params = params_with_window(3);
        let config = SolverConfig::default();
        let table = UnaryTable::precompute(&model, &scene).unwrap();
        let (trellis, _) = fill_trellis(&model, &scene, Some(&table), &params, &config).unwrap();
        // at layer 2 (the non-final layer here, M=4), pair (2, 1) has no
        // candidates: node 2 is the last
        let s = scene.len();
        let bounds = candidate_bounds(Some(2), Some(1), &scene, &params);
        assert!(bounds.is_empty());
        let layer = trellis.layer_for_node(2);
        let next = trellis.layer_for_node(3);
        let expect = params.lambda1 * params.dummy_penalty + params.lambda2 * 0.0 + next.alpha_at(s, 2);
        assert_eq!(layer.alpha_at(2, 1).to_bits(), expect.to_bits());
        assert_eq!(layer.beta_at(2, 1), None);
    }

    #[test]
    fn self_match_recovers_identity_with_zero_energy() {
        let model = random_chain(7, 3, 31);
        let scene = SceneBlock::from_points(model.nodes()).unwrap();
        let params = EnergyParams::default();
        let result = solve_sequential(&model, &scene, &params, &SolverConfig::default()).unwrap();
        assert_eq!(result.energy, 0.0);
        let identity: Vec<Pick> = (0..7).map(Some).collect();
        assert_eq!(result.assignment.picks(), identity.as_slice());
    }

    #[test]
    fn all_expensive_features_yield_all_dummy() {
        let mk = |f: u32, feat: f64| SpaceTimePoint::new(f, f as f64, 0.0, 0.5, vec![feat]);
        let model = ModelChain::from_points(&[mk(0, 0.0), mk(1, 0.0), mk(2, 0.0)]).unwrap();
        // every scene feature is 10 away, far beyond the dummy penalty 1
        let scene = SceneBlock::from_points(&[mk(0, 10.0), mk(1, 10.0), mk(2, 10.0)]).unwrap();
        let params = EnergyParams::default();
        let result = solve_sequential(&model, &scene, &params, &SolverConfig::default()).unwrap();
        assert_eq!(result.assignment.picks(), vec![None, None, None].as_slice());
        let expect = params.lambda1 * 3.0 * params.dummy_penalty;
        assert!((result.energy - expect).abs() < 1e-12);
    }

    #[test]
    fn sequential_matches_oracle_on_random_instances() {
        for seed in 0..30u64 {
            let m = 3 + (seed % 4) as usize; // 3..=6
            let s = 5 + (seed % 5) as usize; // 5..=9
            let model = random_chain(m, 3, seed);
            let scene = random_scene(s, 3, (s + 3) as u32, seed.wrapping_add(1000));
            let params = EnergyParams {
                temporal_window: 1 + (seed % 5) as u32,
                dummy_penalty: 0.3 + (seed % 7) as f64 * 0.5,
                ..Default::default()
            };
            let dp = solve_sequential(&model, &scene, &params, &SolverConfig::default()).unwrap();
            let (oracle, runner_up) = solve_brute_force_detailed(&model, &scene, &params).unwrap();
            let tol = 1e-9 * oracle.energy.abs().max(1.0);
            assert!(
                (dp.energy - oracle.energy).abs() <= tol,
                "seed {seed}: dp {} vs oracle {}",
                dp.energy,
                oracle.energy
            );
            if let Some(second) = runner_up {
                if second - oracle.energy > 1e-6 {
                    assert_eq!(dp.assignment, oracle.assignment, "seed {seed}");
                }
            }
            // the dp energy must match an independent recomputation
            let rechecked = chain_energy(&dp.assignment, &model, &scene, &params).unwrap();
            assert!((dp.energy - rechecked).abs() <= 1e-9 * rechecked.abs().max(1.0));
        }
    }

    #[test]
    fn short_models_match_oracle() {
        for m in [1usize, 2] {
            for seed in 0..10u64 {
                let model = random_chain(m, 2, seed.wrapping_add(500));
                let scene = random_scene(7, 2, 9, seed);
                let params = EnergyParams {
                    temporal_window: 2 + (seed % 3) as u32,
                    dummy_penalty: 0.4,
                    ..Default::default()
                };
                let dp = solve_sequential(&model, &scene, &params, &SolverConfig::default()).unwrap();
                let oracle = solve_brute_force(&model, &scene, &params).unwrap();
                let tol = 1e-9 * oracle.energy.abs().max(1.0);
                assert!((dp.energy - oracle.energy).abs() <= tol, "m={m} seed={seed}");
                assert_eq!(dp.assignment, oracle.assignment, "m={m} seed={seed}");
            }
        }
    }

    #[test]
    fn parallel_is_bit_identical_to_sequential() {
        let model = random_chain(8, 3, 77);
        let (scene, _) = crate::synth::plant_in_uniform_scene(&model, 24, 0.05, 0.3, 78).unwrap();
        let params = EnergyParams::default();
        let base = solve_sequential(&model, &scene, &params, &SolverConfig::default()).unwrap();
        for q in [1usize, 2, 3, 8] {
            let config = SolverConfig::default().with_parallelism(q);
            let par = solve_parallel(&model, &scene, &params, &config).unwrap();
            assert_eq!(par.energy.to_bits(), base.energy.to_bits(), "q={q}");
            assert_eq!(par.assignment, base.assignment, "q={q}");
            assert_eq!(par.counters, base.counters, "q={q}");
        }
    }

    #[test]
    fn two_runs_are_bit_identical() {
        let model = random_chain(6, 2, 41);
        let scene = random_scene(12, 2, 14, 42);
        let params = EnergyParams::default();
        let config = SolverConfig::default().with_parallelism(2);
        let a = solve_parallel(&model, &scene, &params, &config).unwrap();
        let b = solve_parallel(&model, &scene, &params, &config).unwrap();
        assert_eq!(a.energy.to_bits(), b.energy.to_bits());
        assert_eq!(a.assignment, b.assignment);
        assert_eq!(a.counters, b.counters);
    }

    /// Exhaustive cross-check on a small instance: an assignment is
    /// reachable through the pruned trellis exactly when it satisfies the
    /// constraint predicate.
    #[test]
    fn pruning_eliminates_exactly_the_invalid_assignments() {
        let model = random_chain(3, 2, 61);
        let scene = random_scene(4, 2, 5, 62);
        let params = params_with_window(2);
        let s = scene.len();
        let mut stack: Vec<Vec<Pick>> = vec![vec![]];
        while let Some(prefix) = stack.pop() {
            if prefix.len() == model.len() {
                let reachable = {
                    // pair admissibility of (z1, z2) plus loop-bound
                    // membership of every later pick
                    let pair_ok = admissible_pair(prefix[1], prefix[0], &scene, &params);
                    let step_ok = (2..prefix.len()).all(|i| match prefix[i] {
                        None => true,
                        Some(z) => candidate_bounds(prefix[i - 1], prefix[i - 2], &scene, &params)
                            .contains(&z),
                    });
                    pair_ok && step_ok
                };
                let valid = Assignment::new(prefix.clone())
                    .validate(&model, &scene, &params)
                    .is_ok();
                assert_eq!(reachable, valid, "prefix {prefix:?}");
                continue;
            }
            for cand in (0..s).map(Some).chain(std::iter::once(None)) {
                let mut next = prefix.clone();
                next.push(cand);
                stack.push(next);
            }
        }
    }

    #[test]
    fn unpruned_counters_follow_the_closed_forms() {
        let model = random_chain(5, 2, 91);
        let scene = random_scene(6, 2, 8, 92);
        let params = EnergyParams::default();
        let config = SolverConfig {
            use_pruning: false,
            use_unary_table: true,
            ..Default::default()
        };
        let result = solve_sequential(&model, &scene, &params, &config).unwrap();
        let (m, sp) = (model.len() as u64, (scene.len() + 1) as u64);
        assert_eq!(result.counters.cells_computed, (m - 2) * sp * sp);
        assert_eq!(result.counters.min_iterations, (m - 2) * sp * sp * sp + sp * sp);
        // with the table on, the only feature evaluations are its S*M build
        assert_eq!(result.counters.unary_evaluations, (scene.len() * model.len()) as u64);
    }

    #[test]
    fn pruning_only_reduces_work() {
        let model = random_chain(6, 2, 71);
        let (scene, _) = crate::synth::plant_in_uniform_scene(&model, 18, 0.0, 0.0, 72).unwrap();
        let params = EnergyParams::default();
        let pruned = solve_sequential(&model, &scene, &params, &SolverConfig::default()).unwrap();
        let unpruned = solve_sequential(
            &model,
            &scene,
            &params,
            &SolverConfig { use_pruning: false, ..Default::default() },
        )
        .unwrap();
        assert!(pruned.counters.min_iterations <= unpruned.counters.min_iterations);
        assert!(pruned.counters.cells_computed <= unpruned.counters.cells_computed);
        // the planted optimum is feasible, so both modes find the same energy
        assert!((pruned.energy - unpruned.energy).abs() <= 1e-9 * pruned.energy.abs().max(1.0));
    }

    #[test]
    fn trellis_shape_matches_the_memory_contract() {
        let model = random_chain(6, 2, 81);
        let scene = random_scene(9, 2, 11, 82);
        let params = EnergyParams::default();
        let (trellis, _) =
            fill_trellis(&model, &scene, None, &params, &SolverConfig::default()).unwrap();
        assert_eq!(trellis.num_layers(), model.len() - 2);
        assert_eq!(trellis.s_prime(), scene.len() + 1);
    }

    #[test]
    fn enlarging_the_window_never_raises_the_optimum() {
        for seed in 0..20u64 {
            let model = random_chain(5, 2, seed);
            let scene = random_scene(10, 2, 12, seed.wrapping_add(300));
            let mut last = f64::INFINITY;
            for t in [1u32, 2, 4, 8, 32] {
                let params = params_with_window(t);
                let r = solve_sequential(&model, &scene, &params, &SolverConfig::default()).unwrap();
                assert!(
                    r.energy <= last + 1e-12 * last.abs().max(1.0),
                    "seed {seed} t {t}: {} > {last}",
                    r.energy
                );
                last = r.energy;
            }
        }
    }

    #[test]
    fn instrumentation_off_zeroes_counters() {
        let model = random_chain(4, 2, 13);
        let scene = random_scene(6, 2, 8, 14);
        let config = SolverConfig { instrumentation: false, ..Default::default() };
        let r = solve_sequential(&model, &scene, &EnergyParams::default(), &config).unwrap();
        assert_eq!(r.counters, Counters::default());
    }

    #[test]
    fn fill_trellis_rejects_short_models_and_bad_layers() {
        let model = random_chain(2, 2, 15);
        let scene = random_scene(5, 2, 6, 16);
        let params = EnergyParams::default();
        let config = SolverConfig::default();
        assert!(fill_trellis(&model, &scene, None, &params, &config).is_err());
        let model3 = random_chain(3, 2, 17);
        // the last node must not get a successor layer
        let (init, _) = compute_layer(2, None, &model3, &scene, None, &params, &config).unwrap();
        assert!(compute_layer(2, Some(&init), &model3, &scene, None, &params, &config).is_err());
    }

    #[test]
    fn mismatched_dims_are_rejected() {
        let model = random_chain(4, 3, 18);
        let scene = random_scene(5, 2, 6, 19);
        let params = EnergyParams::default();
        assert!(matches!(
            solve_sequential(&model, &scene, &params, &SolverConfig::default()),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
