//! Exhaustive reference solver.
//!
//! Enumerates every assignment satisfying the causality and temporal
//! closeness constraints and returns the exact energy minimum. The
//! enumeration filters candidates with the raw constraint predicate and
//! scores leaves with the plain energy sum; it shares no code with the
//! trellis recursion, so agreement between the two is meaningful evidence.

use std::time::Instant;

use crate::assignment::{follows, Assignment, Pick};
use crate::chain::ModelChain;
use crate::energy::chain_energy_unchecked;
use crate::error::{Error, Result};
use crate::params::EnergyParams;
use crate::scene::SceneBlock;
use crate::solver::{Counters, MatchResult};

/// Upper bound on (S+1)^M; larger instances are refused.
pub const EXHAUSTIVE_LIMIT: f64 = 1e7;

/// Exhaustively solves the matching problem. Candidates are enumerated in
/// ascending node order with the dummy last, and only strictly better
/// energies replace the incumbent, so ties resolve to the lexicographically
/// smallest optimal assignment.
pub fn solve_brute_force(
    model: &ModelChain,
    scene: &SceneBlock,
    params: &EnergyParams,
) -> Result<MatchResult> {
    solve_brute_force_detailed(model, scene, params).map(|(result, _)| result)
}

/// Like [`solve_brute_force`], but also returns the runner-up energy: the
/// smallest energy over all enumerated assignments other than the returned
/// one (`None` when only one assignment exists). The gap between the two
/// tells callers whether the optimum is unique by a margin.
pub fn solve_brute_force_detailed(
    model: &ModelChain,
    scene: &SceneBlock,
    params: &EnergyParams,
) -> Result<(MatchResult, Option<f64>)> {
    params.validate()?;
    if model.feature_dim() != scene.feature_dim() {
        return Err(Error::DimensionMismatch {
            expected: model.feature_dim(),
            got: scene.feature_dim(),
        });
    }
    let size = ((scene.len() + 1) as f64).powi(model.len() as i32);
    if size > EXHAUSTIVE_LIMIT {
        return Err(Error::OracleSizeExceeded { size, limit: EXHAUSTIVE_LIMIT });
    }

    let start = Instant::now();
    let mut search = Search {
        model,
        scene,
        params,
        window: params.temporal_window,
        best_energy: f64::INFINITY,
        best_picks: Vec::new(),
        runner_up: f64::INFINITY,
        counters: Counters::default(),
    };
    let mut picks: Vec<Pick> = Vec::with_capacity(model.len());
    search.descend(&mut picks);

    let runner_up = search.runner_up.is_finite().then_some(search.runner_up);
    let result = MatchResult {
        assignment: Assignment::new(search.best_picks),
        energy: search.best_energy,
        counters: search.counters,
        wall_time: start.elapsed(),
    };
    Ok((result, runner_up))
}

struct Search<'a> {
    model: &'a ModelChain,
    scene: &'a SceneBlock,
    params: &'a EnergyParams,
    window: u32,
    best_energy: f64,
    best_picks: Vec<Pick>,
    runner_up: f64,
    counters: Counters,
}

impl Search<'_> {
    fn descend(&mut self, picks: &mut Vec<Pick>) {
        let depth = picks.len();
        if depth == self.model.len() {
            self.score_leaf(picks);
            return;
        }
        for cand in 0..self.scene.len() {
            if self.allowed(picks, cand) {
                picks.push(Some(cand));
                self.descend(picks);
                picks.pop();
            }
        }
        picks.push(None);
        self.descend(picks);
        picks.pop();
    }

    /// The candidate must respect ordering and the temporal window against
    /// each of the up to two preceding real picks.
    fn allowed(&self, picks: &[Pick], cand: usize) -> bool {
        let depth = picks.len();
        for back in 1..=2usize {
            if back > depth {
                break;
            }
            if let Some(pred) = picks[depth - back] {
                if !follows(cand, pred, self.scene, self.window) {
                    return false;
                }
            }
        }
        true
    }

    fn score_leaf(&mut self, picks: &[Pick]) {
        let energy = chain_energy_unchecked(picks, self.model, self.scene, self.params);
        self.counters.min_iterations += 1;
        self.counters.unary_evaluations += picks.iter().filter(|p| p.is_some()).count() as u64;
        if energy < self.best_energy {
            self.runner_up = self.best_energy;
            self.best_energy = energy;
            self.best_picks = picks.to_vec();
        } else if energy < self.runner_up {
            self.runner_up = energy;
        }
    }
}
