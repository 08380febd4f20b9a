//! Nearest-prototype classification of scenes against a dictionary of model
//! chains, plus blocking of long point streams into overlapping scene
//! windows.
//!
//! Classification matches every prototype against the scene and ranks them
//! by the appearance-only distance of the resulting assignment: the plain
//! sum of unary costs, unweighted and unnormalized, so the ranking is
//! independent of the geometric weights. The label of the closest prototype
//! wins; ties keep the earliest prototype.

use crate::assignment::Pick;
use crate::chain::ModelChain;
use crate::energy::feature_distance;
use crate::error::{Error, Result};
use crate::params::{EnergyParams, SolverConfig};
use crate::point::SpaceTimePoint;
use crate::scene::SceneBlock;
use crate::solver::{solve_parallel, MatchResult};

/// Labeled dictionary of model chains with a uniform feature dimension.
#[derive(Debug, Clone)]
pub struct PrototypeSet {
    entries: Vec<(String, ModelChain)>,
    feature_dim: usize,
}

impl PrototypeSet {
    pub fn new(entries: Vec<(String, ModelChain)>) -> Result<Self> {
        let first = entries.first().ok_or(Error::EmptyDictionary)?;
        let feature_dim = first.1.feature_dim();
        for (label, chain) in &entries {
            if label.is_empty() {
                return Err(Error::InvalidParams("prototype labels must be non-empty".into()));
            }
            if chain.feature_dim() != feature_dim {
                return Err(Error::DimensionMismatch {
                    expected: feature_dim,
                    got: chain.feature_dim(),
                });
            }
        }
        Ok(Self { entries, feature_dim })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction rejects empty input
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn entries(&self) -> &[(String, ModelChain)] {
        &self.entries
    }
}

/// How a long point stream is cut into scene blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockingPolicy {
    pub block_frames: u32,
    pub stride_frames: u32,
}

impl Default for BlockingPolicy {
    fn default() -> Self {
        Self { block_frames: 60, stride_frames: 30 }
    }
}

impl BlockingPolicy {
    pub fn validate(&self) -> Result<()> {
        if self.stride_frames < 1 || self.stride_frames > self.block_frames {
            return Err(Error::InvalidParams(
                "stride must satisfy 1 <= stride <= block".into(),
            ));
        }
        Ok(())
    }
}

/// Appearance-only distance of a match: the sum of unary costs of the
/// assignment, recomputed from the picks. Unweighted by lambda1, which
/// would not change any ranking.
pub fn appearance_distance(
    result: &MatchResult,
    model: &ModelChain,
    scene: &SceneBlock,
    params: &EnergyParams,
) -> f64 {
    appearance_of_picks(result.assignment.picks(), model, scene, params)
}

fn appearance_of_picks(
    picks: &[Pick],
    model: &ModelChain,
    scene: &SceneBlock,
    params: &EnergyParams,
) -> f64 {
    let mut sum = 0.0;
    for (i, pick) in picks.iter().enumerate() {
        sum += match pick {
            None => params.dummy_penalty,
            Some(n) => feature_distance(&model.node(i).features, &scene.point(*n).features),
        };
    }
    sum
}

/// Outcome of classifying one scene block: the winning label and the full
/// per-prototype distance list, in dictionary order.
#[derive(Debug, Clone)]
pub struct ClassifyOutcome {
    pub label: String,
    pub scores: Vec<(String, f64)>,
}

/// Matches every prototype against `scene` and returns the label with the
/// smallest appearance distance.
pub fn classify(
    scene: &SceneBlock,
    dict: &PrototypeSet,
    params: &EnergyParams,
    config: &SolverConfig,
) -> Result<ClassifyOutcome> {
    if dict.feature_dim() != scene.feature_dim() {
        return Err(Error::DimensionMismatch {
            expected: dict.feature_dim(),
            got: scene.feature_dim(),
        });
    }
    let mut scores = Vec::with_capacity(dict.len());
    let mut best = f64::INFINITY;
    let mut label = String::new();
    for (proto_label, chain) in dict.entries() {
        let result = solve_parallel(chain, scene, params, config)?;
        let distance = appearance_distance(&result, chain, scene, params);
        if distance < best {
            best = distance;
            label = proto_label.clone();
        }
        scores.push((proto_label.clone(), distance));
    }
    Ok(ClassifyOutcome { label, scores })
}

/// Cuts a point stream into blocks of `block_frames` frames advancing by
/// `stride_frames`, covering the whole occupied frame range; a trailing
/// partial block is kept. Each block's points are shifted to a block-local
/// frame origin. Windows that contain no points are skipped.
pub fn split_blocks(points: &[SpaceTimePoint], policy: &BlockingPolicy) -> Result<Vec<SceneBlock>> {
    policy.validate()?;
    if points.is_empty() {
        return Ok(Vec::new());
    }
    let min_frame = points.iter().map(|p| p.frame).min().unwrap();
    let max_frame = points.iter().map(|p| p.frame).max().unwrap();
    let mut blocks = Vec::new();
    let mut start = min_frame as u64;
    while start <= max_frame as u64 {
        let end = start + policy.block_frames as u64;
        let mut in_window: Vec<SpaceTimePoint> = points
            .iter()
            .filter(|p| (start..end).contains(&(p.frame as u64)))
            .cloned()
            .collect();
        if !in_window.is_empty() {
            for p in &mut in_window {
                p.frame -= start as u32;
            }
            blocks.push(SceneBlock::from_points(&in_window)?);
        }
        start += policy.stride_frames as u64;
    }
    Ok(blocks)
}
