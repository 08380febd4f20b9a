//! Seeded generators of matching instances with known ground truth.
//!
//! The main entry point is [`gen_instance`]: it embeds a perturbed copy of a
//! model chain into a cluttered scene and returns the planted assignment.
//! Perturbation bounds are validated so the planted copy always satisfies
//! the causality and temporal-closeness constraints. Generation is a pure
//! function of (model, spec): the same seed yields the same instance,
//! byte for byte after serialization.
//!
//! Draw order from the seeded [`SplitMix64`] stream, for cross-language
//! reproduction:
//!
//! 1. one warp per model gap: `uniform_int(-maxWarpPerStep, +maxWarpPerStep)`;
//! 2. per planted node, in chain order: `gaussian()` for x, `gaussian()` for
//!    y, then one `gaussian()` per feature component (drawn even when the
//!    corresponding sigma is zero);
//! 3. per clutter point: `uniform_int` for the frame, `uniform` for x, y and
//!    saliency, then one `uniform` per feature component.

use crate::assignment::Assignment;
use crate::chain::ModelChain;
use crate::error::{Error, Result};
use crate::params::EnergyParams;
use crate::point::SpaceTimePoint;
use crate::rng::SplitMix64;
use crate::scene::SceneBlock;

/// Spatial extent of generated clutter positions, in pixels.
const CLUTTER_EXTENT: f64 = 100.0;

/// How to perturb a model chain when planting it into a scene.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbSpec {
    /// Constant shift of all planted frames.
    pub time_shift: i64,
    /// Bound on the per-step change of consecutive planted frame gaps. Must
    /// stay below the temporal window or the planted copy could violate it.
    pub max_warp_per_step: u32,
    /// Standard deviation of the spatial jitter, pixels.
    pub spatial_noise_sigma: f64,
    /// Standard deviation of the per-component feature jitter.
    pub feature_noise_sigma: f64,
    /// Number of random clutter points mixed into the scene.
    pub clutter_points: u32,
    /// Clutter feature components are drawn in [scale, 2*scale), far from
    /// unit-range model features, so recovery rates are controlled by the
    /// spec rather than by luck.
    pub clutter_feature_scale: f64,
    pub seed: u64,
}

impl Default for PerturbSpec {
    fn default() -> Self {
        Self {
            time_shift: 0,
            max_warp_per_step: 0,
            spatial_noise_sigma: 0.0,
            feature_noise_sigma: 0.0,
            clutter_points: 0,
            clutter_feature_scale: 10.0,
            seed: 0,
        }
    }
}

impl PerturbSpec {
    pub fn validate(&self, params: &EnergyParams) -> Result<()> {
        if self.max_warp_per_step >= params.temporal_window {
            return Err(Error::InvalidSpec(format!(
                "max warp per step {} must stay below the temporal window {}",
                self.max_warp_per_step, params.temporal_window
            )));
        }
        for (name, v) in [
            ("spatial noise sigma", self.spatial_noise_sigma),
            ("feature noise sigma", self.feature_noise_sigma),
            ("clutter feature scale", self.clutter_feature_scale),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidSpec(format!("{name} must be finite and >= 0")));
            }
        }
        Ok(())
    }
}

/// Plants a perturbed copy of `model` into a cluttered scene. Returns the
/// scene and the ground-truth assignment mapping each model node to its
/// planted point. Fails when the perturbed frames would leave the valid
/// range or violate the closeness window of `params`.
pub fn gen_instance(
    model: &ModelChain,
    spec: &PerturbSpec,
    params: &EnergyParams,
) -> Result<(SceneBlock, Assignment)> {
    params.validate()?;
    spec.validate(params)?;
    let m = model.len();
    let dim = model.feature_dim();
    let mut rng = SplitMix64::new(spec.seed);

    let warp = spec.max_warp_per_step as i64;
    let warps: Vec<i64> = (1..m).map(|_| rng.uniform_int(-warp, warp)).collect();

    let mut frames = Vec::with_capacity(m);
    let first = model.frame(0) as i64 + spec.time_shift;
    if first < 0 {
        return Err(Error::InvalidSpec(format!(
            "time shift {} sends the first planted frame below zero",
            spec.time_shift
        )));
    }
    frames.push(first as u32);
    for k in 1..m {
        let gap = model.frame(k) as i64 - model.frame(k - 1) as i64;
        let warped = (gap + warps[k - 1]).max(0);
        frames.push(frames[k - 1] + warped as u32);
    }
    check_planted_windows(&frames, params)?;

    let mut planted = Vec::with_capacity(m);
    for k in 0..m {
        let node = model.node(k);
        let x = node.x + rng.gaussian() * spec.spatial_noise_sigma;
        let y = node.y + rng.gaussian() * spec.spatial_noise_sigma;
        let features = node
            .features
            .iter()
            .map(|f| f + rng.gaussian() * spec.feature_noise_sigma)
            .collect();
        planted.push(SpaceTimePoint::new(frames[k], x, y, node.saliency, features));
    }

    let (fmin, fmax) = (frames[0] as i64, frames[m - 1] as i64);
    let mut points = planted;
    for _ in 0..spec.clutter_points {
        let frame = rng.uniform_int(fmin, fmax) as u32;
        let x = rng.uniform() * CLUTTER_EXTENT;
        let y = rng.uniform() * CLUTTER_EXTENT;
        let saliency = rng.uniform();
        let features = (0..dim)
            .map(|_| spec.clutter_feature_scale * (1.0 + rng.uniform()))
            .collect();
        points.push(SpaceTimePoint::new(frame, x, y, saliency, features));
    }

    let truth = planted_positions(&points, m);
    let scene = SceneBlock::from_points(&points)?;
    Ok((scene, Assignment::new(truth)))
}

/// Positions the first `m` points (the planted ones, listed in chain order)
/// will occupy after the stable frame sort applied by scene construction.
fn planted_positions(points: &[SpaceTimePoint], m: usize) -> Vec<Option<usize>> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by_key(|&p| points[p].frame);
    let mut position = vec![0usize; points.len()];
    for (rank, &orig) in order.iter().enumerate() {
        position[orig] = rank;
    }
    (0..m).map(|k| Some(position[k])).collect()
}

/// The planted copy must itself satisfy the constraints the solver enforces:
/// consecutive picks and picks two steps apart must stay within the window.
fn check_planted_windows(frames: &[u32], params: &EnergyParams) -> Result<()> {
    let w = params.temporal_window as u64;
    for i in 1..frames.len() {
        for back in 1..=2usize.min(i) {
            if frames[i] as u64 >= frames[i - back] as u64 + w {
                return Err(Error::InvalidSpec(format!(
                    "planted frames {} and {} (model nodes {} and {}) span at least the \
                     temporal window {}; reduce gaps, warp, or raise the window",
                    frames[i - back],
                    frames[i],
                    i - back,
                    i,
                    params.temporal_window
                )));
            }
        }
    }
    Ok(())
}

/// Random model chain on consecutive frames 0..nodes: positions uniform in
/// [0, 100)^2, saliency and feature components uniform in [0, 1). Per node
/// the draw order is x, y, saliency, then the features.
pub fn random_chain(nodes: usize, feature_dim: usize, seed: u64) -> ModelChain {
    let mut rng = SplitMix64::new(seed);
    let points: Vec<SpaceTimePoint> = (0..nodes)
        .map(|k| random_point(&mut rng, k as u32, feature_dim))
        .collect();
    ModelChain::from_points(&points).expect("nodes >= 1")
}

/// Random unstructured scene: frames uniform over [0, frame_span), then per
/// point the same draw order as [`random_chain`].
pub fn random_scene(nodes: usize, feature_dim: usize, frame_span: u32, seed: u64) -> SceneBlock {
    let mut rng = SplitMix64::new(seed);
    let points: Vec<SpaceTimePoint> = (0..nodes)
        .map(|_| {
            let frame = rng.uniform_int(0, frame_span as i64 - 1) as u32;
            random_point(&mut rng, frame, feature_dim)
        })
        .collect();
    SceneBlock::from_points(&points).expect("nodes >= 1")
}

fn random_point(rng: &mut SplitMix64, frame: u32, feature_dim: usize) -> SpaceTimePoint {
    let x = rng.uniform() * CLUTTER_EXTENT;
    let y = rng.uniform() * CLUTTER_EXTENT;
    let saliency = rng.uniform();
    let features = (0..feature_dim).map(|_| rng.uniform()).collect();
    SpaceTimePoint::new(frame, x, y, saliency, features)
}

/// Plants `model` (which must live on consecutive frames) centered into a
/// scene with exactly one node per frame over `total_nodes` frames; the
/// remaining frames hold far-feature clutter. Scene node indices then equal
/// frames, and the ground truth picks nodes `offset..offset+M`.
///
/// This is the instance shape used for throughput measurements: scene size
/// and scene duration grow together, keeping the per-frame node density at
/// one like a real detector stream.
pub fn plant_in_uniform_scene(
    model: &ModelChain,
    total_nodes: usize,
    feature_noise_sigma: f64,
    spatial_noise_sigma: f64,
    seed: u64,
) -> Result<(SceneBlock, Assignment)> {
    let m = model.len();
    let span = model.frame(m - 1) - model.frame(0);
    if span as usize != m - 1 {
        return Err(Error::InvalidSpec(
            "plant_in_uniform_scene needs a model on consecutive frames".into(),
        ));
    }
    if total_nodes < m {
        return Err(Error::InvalidSpec(format!(
            "scene of {total_nodes} nodes cannot hold a model of {m} nodes"
        )));
    }
    let dim = model.feature_dim();
    let offset = (total_nodes - m) / 2;
    let mut rng = SplitMix64::new(seed);

    let mut points = Vec::with_capacity(total_nodes);
    for frame in 0..total_nodes as u32 {
        let k = frame as usize;
        if (offset..offset + m).contains(&k) {
            let node = model.node(k - offset);
            let x = node.x + rng.gaussian() * spatial_noise_sigma;
            let y = node.y + rng.gaussian() * spatial_noise_sigma;
            let features = node
                .features
                .iter()
                .map(|f| f + rng.gaussian() * feature_noise_sigma)
                .collect();
            points.push(SpaceTimePoint::new(frame, x, y, node.saliency, features));
        } else {
            let x = rng.uniform() * CLUTTER_EXTENT;
            let y = rng.uniform() * CLUTTER_EXTENT;
            let saliency = rng.uniform();
            let features = (0..dim).map(|_| 10.0 * (1.0 + rng.uniform())).collect();
            points.push(SpaceTimePoint::new(frame, x, y, saliency, features));
        }
    }
    let truth = (0..m).map(|k| Some(offset + k)).collect();
    let scene = SceneBlock::from_points(&points)?;
    Ok((scene, Assignment::new(truth)))
}
