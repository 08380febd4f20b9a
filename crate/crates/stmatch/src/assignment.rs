use crate::chain::ModelChain;
use crate::error::{Error, Result};
use crate::params::EnergyParams;
use crate::scene::SceneBlock;

/// One assignment entry: a 0-based scene node index, or `None` for the dummy
/// (a model node matched to nothing).
pub type Pick = Option<usize>;

/// A complete model-to-scene assignment: one pick per model node.
///
/// A valid assignment is causal and temporally close in the following local
/// sense: for every model node i with a real pick, and for each of its up to
/// two predecessors i-1, i-2 that also holds a real pick, the node indices
/// strictly increase and the later scene frame lies within the temporal
/// window of the earlier one. Constraints never reach across a predecessor
/// holding a dummy; the window of visibility is exactly two nodes, matching
/// the second-order structure of the energy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    picks: Vec<Pick>,
}

impl Assignment {
    pub fn new(picks: Vec<Pick>) -> Self {
        Self { picks }
    }

    pub fn picks(&self) -> &[Pick] {
        &self.picks
    }

    pub fn len(&self) -> usize {
        self.picks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.picks.is_empty()
    }

    pub fn pick(&self, i: usize) -> Pick {
        self.picks[i]
    }

    /// Number of real (non-dummy) picks.
    pub fn real_count(&self) -> usize {
        self.picks.iter().filter(|p| p.is_some()).count()
    }

    /// Checks length, index range, and the causality/closeness constraints
    /// described on the type.
    pub fn validate(&self, model: &ModelChain, scene: &SceneBlock, params: &EnergyParams) -> Result<()> {
        if self.picks.len() != model.len() {
            return Err(Error::InvalidAssignment(format!(
                "length {} does not match model size {}",
                self.picks.len(),
                model.len()
            )));
        }
        for (i, pick) in self.picks.iter().enumerate() {
            if let Some(n) = pick {
                if *n >= scene.len() {
                    return Err(Error::InvalidAssignment(format!(
                        "node index {} out of range at position {} (scene has {} nodes)",
                        n,
                        i,
                        scene.len()
                    )));
                }
            }
        }
        for i in 0..self.picks.len() {
            let Some(cand) = self.picks[i] else { continue };
            for back in 1..=2usize {
                if back > i {
                    break;
                }
                if let Some(pred) = self.picks[i - back] {
                    if !follows(cand, pred, scene, params.temporal_window) {
                        return Err(Error::InvalidAssignment(format!(
                            "picks {} -> {} at positions {} -> {} violate ordering or the \
                             temporal window {}",
                            pred + 1,
                            cand + 1,
                            i - back,
                            i,
                            params.temporal_window
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// True when scene node `cand` may be picked after scene node `pred` within
/// the same two-node constraint window: strictly larger node index and a
/// frame less than `window` frames past the predecessor's frame.
#[inline]
pub fn follows(cand: usize, pred: usize, scene: &SceneBlock, window: u32) -> bool {
    pred < cand && (scene.frame(cand) as u64) < scene.frame(pred) as u64 + window as u64
}
