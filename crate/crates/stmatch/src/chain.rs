use std::collections::BTreeMap;

use crate::error::Result;
use crate::point::{check_points, SpaceTimePoint};

/// Ordered model chain: one node per occupied frame, frames strictly
/// increasing. Every node is implicitly connected to its two frame-wise
/// predecessors, so consecutive triples (i, i-1, i-2) carry the geometric
/// distortion terms.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelChain {
    nodes: Vec<SpaceTimePoint>,
    feature_dim: usize,
}

impl ModelChain {
    /// Builds a chain from raw detections. Frames holding several points keep
    /// only the most salient one; saliency ties keep the earliest point in
    /// input order. Empty frames are simply absent.
    pub fn from_points(points: &[SpaceTimePoint]) -> Result<Self> {
        let feature_dim = check_points(points)?;
        let mut best: BTreeMap<u32, &SpaceTimePoint> = BTreeMap::new();
        for p in points {
            match best.get(&p.frame) {
                Some(cur) if cur.saliency >= p.saliency => {}
                _ => {
                    best.insert(p.frame, p);
                }
            }
        }
        let nodes = best.into_values().cloned().collect();
        Ok(Self { nodes, feature_dim })
    }

    /// Number of model nodes, commonly written M.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction rejects empty input
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn node(&self, i: usize) -> &SpaceTimePoint {
        &self.nodes[i]
    }

    pub fn nodes(&self) -> &[SpaceTimePoint] {
        &self.nodes
    }

    pub fn frame(&self, i: usize) -> u32 {
        self.nodes[i].frame
    }
}
