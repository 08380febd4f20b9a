use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Weights and constraints of the matching energy.
///
/// The total energy of an assignment is
/// `lambda1 * sum(U) + lambda2 * sum(Dt + lambda3 * Dg)`, where U is the
/// appearance cost of each pick, Dt the temporal distortion and Dg the
/// spatial-angle distortion of each consecutive node triple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyParams {
    /// Weight of the appearance sum.
    pub lambda1: f64,
    /// Weight of the distortion sum.
    pub lambda2: f64,
    /// Weight of the spatial-angle distortion inside each distortion term.
    pub lambda3: f64,
    /// Temporal closeness window in frames: picks of nearby model nodes must
    /// fall within this many scene frames of each other.
    pub temporal_window: u32,
    /// Appearance penalty for assigning a model node to nothing.
    pub dummy_penalty: f64,
}

impl Default for EnergyParams {
    fn default() -> Self {
        Self {
            lambda1: 0.6,
            lambda2: 0.2,
            lambda3: 5.0,
            temporal_window: 10,
            dummy_penalty: 1.0,
        }
    }
}

impl EnergyParams {
    pub fn validate(&self) -> Result<()> {
        let weights = [self.lambda1, self.lambda2, self.lambda3, self.dummy_penalty];
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidParams(
                "lambda1, lambda2, lambda3 and the dummy penalty must be finite and >= 0".into(),
            ));
        }
        if self.temporal_window < 1 {
            return Err(Error::InvalidParams("temporal window must be >= 1".into()));
        }
        Ok(())
    }
}

/// Execution knobs for the solvers. None of them changes the returned
/// assignment or energy except `use_pruning`, which switches between the
/// constrained and the unconstrained problem.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Worker count for the layer-parallel solver.
    pub parallelism: usize,
    /// Restrict the search to causal, temporally close assignments. Turning
    /// this off solves the unconstrained minimization over all picks.
    pub use_pruning: bool,
    /// Precompute all model-node/scene-node appearance costs once instead of
    /// evaluating feature distances inside the minimization loops.
    pub use_unary_table: bool,
    /// Collect execution counters; when off, counters read zero.
    pub instrumentation: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            parallelism: 1,
            use_pruning: true,
            use_unary_table: true,
            instrumentation: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.parallelism < 1 {
            return Err(Error::InvalidParams("parallelism must be >= 1".into()));
        }
        Ok(())
    }

    pub fn with_parallelism(mut self, workers: usize) -> Self {
        self.parallelism = workers;
        self
    }
}
