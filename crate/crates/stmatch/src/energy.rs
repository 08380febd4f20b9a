//! Energy terms of the matching objective.
//!
//! An assignment z of model nodes to scene nodes (or to the dummy) scores
//!
//! ```text
//! E(z) = lambda1 * sum_i U(z_i)  +  lambda2 * sum_{i>=3} D(z_i, z_{i-1}, z_{i-2})
//! ```
//!
//! U is the Euclidean distance between appearance features, or the dummy
//! penalty for unmatched nodes. D compares each consecutive model triple with
//! its picked scene triple: frame-gap discrepancies plus, weighted by
//! lambda3, the L2 norm of two circular angle differences. Any triple that
//! contains a dummy contributes zero distortion; the entire cost of a dummy
//! is its unary penalty.

use crate::assignment::{Assignment, Pick};
use crate::chain::ModelChain;
use crate::error::{Error, Result};
use crate::params::EnergyParams;
use crate::point::SpaceTimePoint;
use crate::scene::SceneBlock;

/// Euclidean distance between two equal-length feature vectors.
#[inline]
pub(crate) fn feature_distance(a: &[f64], b: &[f64]) -> f64 {
    let mut sum = 0.0;
    for (x, y) in a.iter().zip(b.iter()) {
        let d = x - y;
        sum += d * d;
    }
    sum.sqrt()
}

/// Appearance cost of assigning `model_node` to `scene_node`, or the dummy
/// penalty when the pick is `None`.
pub fn unary_cost(
    model_node: &SpaceTimePoint,
    scene_node: Option<&SpaceTimePoint>,
    params: &EnergyParams,
) -> Result<f64> {
    match scene_node {
        None => Ok(params.dummy_penalty),
        Some(s) => {
            if s.features.len() != model_node.features.len() {
                return Err(Error::DimensionMismatch {
                    expected: model_node.features.len(),
                    got: s.features.len(),
                });
            }
            Ok(feature_distance(&model_node.features, &s.features))
        }
    }
}

/// Discrepancy between the model frame gap t(i)-t(j) and the scene frame gap
/// of the picked nodes. Exact integer arithmetic, so shifting all scene
/// frames by a constant leaves it unchanged.
#[inline]
pub fn temporal_delta(ti: u32, tj: u32, tzi: u32, tzj: u32) -> f64 {
    ((ti as i64 - tj as i64) - (tzi as i64 - tzj as i64)).abs() as f64
}

/// Angle in the image plane between the rays vertex->p and vertex->q, in
/// [0, pi]. A ray of zero length yields 0 rather than an error; detectors do
/// repeat coordinates.
pub fn spatial_angle(p: &SpaceTimePoint, at_vertex: &SpaceTimePoint, q: &SpaceTimePoint) -> f64 {
    let (ux, uy) = (p.x - at_vertex.x, p.y - at_vertex.y);
    let (vx, vy) = (q.x - at_vertex.x, q.y - at_vertex.y);
    if (ux == 0.0 && uy == 0.0) || (vx == 0.0 && vy == 0.0) {
        return 0.0;
    }
    let cross = ux * vy - uy * vx;
    let dot = ux * vx + uy * vy;
    cross.abs().atan2(dot)
}

/// Difference a - b reduced to [-pi, pi].
#[inline]
pub fn circular_diff(a: f64, b: f64) -> f64 {
    let d = a - b;
    d - std::f64::consts::TAU * (d / std::f64::consts::TAU).round()
}

/// L2 norm of the two wrapped angle differences of a triple comparison.
#[inline]
pub(crate) fn angle_pair_norm(model_mid: f64, scene_mid: f64, model_end: f64, scene_end: f64) -> f64 {
    let d1 = circular_diff(model_mid, scene_mid);
    let d2 = circular_diff(model_end, scene_end);
    (d1 * d1 + d2 * d2).sqrt()
}

/// Spatial distortion between the model triangle (i, j, k) and the scene
/// triangle picked for it: the L2 norm of the wrapped differences of the
/// angles at j and at i. Lies in [0, pi * sqrt(2)].
pub fn geometric_distortion(
    model_triple: (usize, usize, usize),
    scene_triple: (usize, usize, usize),
    model: &ModelChain,
    scene: &SceneBlock,
) -> f64 {
    let (i, j, k) = model_triple;
    let (zi, zj, zk) = scene_triple;
    let model_mid = spatial_angle(model.node(i), model.node(j), model.node(k));
    let model_end = spatial_angle(model.node(j), model.node(i), model.node(k));
    let scene_mid = spatial_angle(scene.point(zi), scene.point(zj), scene.point(zk));
    let scene_end = spatial_angle(scene.point(zj), scene.point(zi), scene.point(zk));
    angle_pair_norm(model_mid, scene_mid, model_end, scene_end)
}

/// Full distortion of one model triple (i, j, k) against its scene picks:
/// temporal gap discrepancies over both node pairs plus lambda3 times the
/// geometric distortion. Zero as soon as any pick is a dummy.
pub fn ternary_cost(
    model_triple: (usize, usize, usize),
    scene_triple: (Pick, Pick, Pick),
    model: &ModelChain,
    scene: &SceneBlock,
    params: &EnergyParams,
) -> f64 {
    let (Some(zi), Some(zj), Some(zk)) = scene_triple else {
        return 0.0;
    };
    let (i, j, k) = model_triple;
    let dt = temporal_delta(model.frame(i), model.frame(j), scene.frame(zi), scene.frame(zj))
        + temporal_delta(model.frame(j), model.frame(k), scene.frame(zj), scene.frame(zk));
    let dg = geometric_distortion((i, j, k), (zi, zj, zk), model, scene);
    dt + params.lambda3 * dg
}

/// Total energy of `assignment`, validating it first.
pub fn chain_energy(
    assignment: &Assignment,
    model: &ModelChain,
    scene: &SceneBlock,
    params: &EnergyParams,
) -> Result<f64> {
    assignment.validate(model, scene, params)?;
    Ok(chain_energy_unchecked(assignment.picks(), model, scene, params))
}

/// Total energy without constraint validation. Used where the picks are
/// feasible by construction, or deliberately unconstrained.
pub(crate) fn chain_energy_unchecked(
    picks: &[Pick],
    model: &ModelChain,
    scene: &SceneBlock,
    params: &EnergyParams,
) -> f64 {
    let mut unary_sum = 0.0;
    for (i, pick) in picks.iter().enumerate() {
        unary_sum += match pick {
            None => params.dummy_penalty,
            Some(n) => feature_distance(&model.node(i).features, &scene.point(*n).features),
        };
    }
    let mut distortion_sum = 0.0;
    for i in 2..picks.len() {
        distortion_sum += ternary_cost(
            (i, i - 1, i - 2),
            (picks[i], picks[i - 1], picks[i - 2]),
            model,
            scene,
            params,
        );
    }
    params.lambda1 * unary_sum + params.lambda2 * distortion_sum
}

/// Precomputed appearance costs for every (scene node, model node) pair.
///
/// Entry (n, i) holds exactly `unary_cost` of model node i against scene
/// node n. Building the table performs exactly S*M feature-distance
/// evaluations; solvers then read costs instead of recomputing them inside
/// their minimization loops.
#[derive(Debug, Clone)]
pub struct UnaryTable {
    /// Stored per model node: `values[i * scene_len + n]`.
    values: Vec<f64>,
    scene_len: usize,
    model_len: usize,
}

impl UnaryTable {
    pub fn precompute(model: &ModelChain, scene: &SceneBlock) -> Result<Self> {
        if model.feature_dim() != scene.feature_dim() {
            return Err(Error::DimensionMismatch {
                expected: model.feature_dim(),
                got: scene.feature_dim(),
            });
        }
        let (s, m) = (scene.len(), model.len());
        let mut values = vec![0.0; s * m];
        for i in 0..m {
            let mf = &model.node(i).features;
            for n in 0..s {
                values[i * s + n] = feature_distance(mf, &scene.point(n).features);
            }
        }
        Ok(Self { values, scene_len: s, model_len: m })
    }

    /// Appearance cost of model node `i` against scene node `n`.
    #[inline]
    pub fn get(&self, scene_node: usize, model_node: usize) -> f64 {
        self.values[model_node * self.scene_len + scene_node]
    }

    /// Feature-distance evaluations spent building the table.
    pub fn evaluations(&self) -> u64 {
        (self.scene_len * self.model_len) as u64
    }
}
