use crate::error::{Error, Result};
use crate::point::{check_points, SpaceTimePoint};

/// Largest frame index a scene block may reach. Keeps the frame-to-node table
/// at a sane size (a block this long is over six days of 30 fps video).
const MAX_SCENE_FRAME: u32 = 1 << 24;

/// Frame-sorted scene point set. Unlike model chains, scenes may hold any
/// number of points per frame; nothing is filtered out.
///
/// Construction also builds a frame-to-node table so solvers can turn a
/// temporal interval into a contiguous node-index interval in O(1), see
/// [`SceneBlock::min_node_at`].
#[derive(Debug, Clone, PartialEq)]
pub struct SceneBlock {
    points: Vec<SpaceTimePoint>,
    feature_dim: usize,
    /// `min_node[f]` is the smallest node index whose frame is >= f.
    min_node: Vec<u32>,
    max_frame: u32,
}

impl SceneBlock {
    /// Builds a block from raw detections. Points are stably sorted by frame,
    /// so two points in the same frame keep their input order and node
    /// indices are deterministic.
    pub fn from_points(points: &[SpaceTimePoint]) -> Result<Self> {
        let feature_dim = check_points(points)?;
        let mut points = points.to_vec();
        points.sort_by_key(|p| p.frame);
        let max_frame = points.last().unwrap().frame;
        if max_frame > MAX_SCENE_FRAME {
            return Err(Error::InvalidParams(format!(
                "scene frame index {max_frame} exceeds the supported maximum {MAX_SCENE_FRAME}"
            )));
        }

        let mut min_node = vec![0u32; max_frame as usize + 1];
        let mut n = 0usize;
        for (f, slot) in min_node.iter_mut().enumerate() {
            while n < points.len() && (points[n].frame as usize) < f {
                n += 1;
            }
            *slot = n as u32;
        }

        Ok(Self { points, feature_dim, min_node, max_frame })
    }

    /// Number of scene nodes, commonly written S.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction rejects empty input
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn point(&self, n: usize) -> &SpaceTimePoint {
        &self.points[n]
    }

    pub fn points(&self) -> &[SpaceTimePoint] {
        &self.points
    }

    #[inline]
    pub fn frame(&self, n: usize) -> u32 {
        self.points[n].frame
    }

    pub fn max_frame(&self) -> u32 {
        self.max_frame
    }

    /// Smallest node index whose frame is >= `frame`; `len()` (one past the
    /// last node) when no such node exists. Non-decreasing in `frame`. The
    /// argument is a u64 so callers can query `frame + window` without
    /// overflow concerns.
    #[inline]
    pub fn min_node_at(&self, frame: u64) -> usize {
        if frame > self.max_frame as u64 {
            self.points.len()
        } else {
            self.min_node[frame as usize] as usize
        }
    }
}
