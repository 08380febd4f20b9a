//! File formats and stable serialization.
//!
//! Point sets, prototype dictionaries, and ground-truth sidecars are JSON.
//! On the wire, scene node indices are 1-based and the dummy pick is the
//! string `"eps"`; in memory, indices are 0-based `Option<usize>`. All
//! floating-point output is rounded to 9 significant decimal digits before
//! serialization, which makes files deterministic byte for byte and
//! idempotent under a parse/serialize round trip.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::assignment::{Assignment, Pick};
use crate::chain::ModelChain;
use crate::error::{Error, Result};
use crate::point::SpaceTimePoint;
use crate::recognition::PrototypeSet;
use crate::scene::SceneBlock;

/// A raw point-set document: `{"featureDim": F, "points": [...]}`. The same
/// schema serves model inputs and scene inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSetFile {
    #[serde(rename = "featureDim")]
    pub feature_dim: usize,
    pub points: Vec<SpaceTimePoint>,
}

impl PointSetFile {
    pub fn new(feature_dim: usize, points: Vec<SpaceTimePoint>) -> Self {
        Self { feature_dim, points }
    }

    /// Checks the declared feature dimension against every point.
    pub fn validate(&self) -> Result<()> {
        for p in &self.points {
            if p.features.len() != self.feature_dim {
                return Err(Error::DimensionMismatch {
                    expected: self.feature_dim,
                    got: p.features.len(),
                });
            }
            if !p.is_finite() {
                return Err(Error::NonFiniteValue);
            }
        }
        Ok(())
    }

    pub fn to_model_chain(&self) -> Result<ModelChain> {
        self.validate()?;
        ModelChain::from_points(&self.points)
    }

    pub fn to_scene_block(&self) -> Result<SceneBlock> {
        self.validate()?;
        SceneBlock::from_points(&self.points)
    }
}

/// Prototype dictionary document:
/// `{"prototypes": [{"label": ..., "model": <point set>}, ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DictionaryFile {
    pub prototypes: Vec<DictionaryEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DictionaryEntry {
    pub label: String,
    pub model: PointSetFile,
}

impl DictionaryFile {
    /// Builds the labeled chains, running every model through the usual
    /// chain construction.
    pub fn to_prototype_set(&self) -> Result<PrototypeSet> {
        let mut entries = Vec::with_capacity(self.prototypes.len());
        for e in &self.prototypes {
            entries.push((e.label.clone(), e.model.to_model_chain()?));
        }
        PrototypeSet::new(entries)
    }
}

/// Ground-truth sidecar: `{"z": [...]}` with 1-based node indices or "eps".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthFile {
    pub z: Vec<WirePick>,
}

/// One assignment entry on the wire.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WirePick {
    Node(u64),
    Token(String),
}

/// Converts in-memory picks (0-based) to wire picks (1-based or "eps").
pub fn assignment_to_wire(assignment: &Assignment) -> Vec<WirePick> {
    assignment.picks().iter().map(|p| pick_to_wire(*p)).collect()
}

pub fn pick_to_wire(pick: Pick) -> WirePick {
    match pick {
        Some(n) => WirePick::Node(n as u64 + 1),
        None => WirePick::Token("eps".into()),
    }
}

/// Converts wire picks back to an in-memory assignment.
pub fn assignment_from_wire(wire: &[WirePick]) -> Result<Assignment> {
    let mut picks = Vec::with_capacity(wire.len());
    for w in wire {
        picks.push(match w {
            WirePick::Node(0) => {
                return Err(Error::InvalidAssignment("node indices are 1-based".into()))
            }
            WirePick::Node(n) => Some(*n as usize - 1),
            WirePick::Token(t) if t == "eps" => None,
            WirePick::Token(t) => {
                return Err(Error::InvalidAssignment(format!("unknown pick token {t:?}")))
            }
        });
    }
    Ok(Assignment::new(picks))
}

/// Rounds to 9 significant decimal digits. Idempotent across a
/// parse/serialize round trip: the nearest f64 to a 9-digit decimal rounds
/// back to the same decimal.
pub fn round_sig9(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let exponent = x.abs().log10().floor() as i32;
    let shift = 8 - exponent;
    let scale = 10f64.powi(shift);
    (x * scale).round() / scale
}

fn rounded_point(p: &SpaceTimePoint) -> SpaceTimePoint {
    SpaceTimePoint {
        frame: p.frame,
        x: round_sig9(p.x),
        y: round_sig9(p.y),
        saliency: round_sig9(p.saliency),
        features: p.features.iter().map(|f| round_sig9(*f)).collect(),
    }
}

/// Serializes a point set with rounded floats and stable key order.
pub fn point_set_to_string(file: &PointSetFile) -> String {
    let rounded = PointSetFile {
        feature_dim: file.feature_dim,
        points: file.points.iter().map(rounded_point).collect(),
    };
    let mut out = serde_json::to_string_pretty(&rounded).expect("point sets always serialize");
    out.push('\n');
    out
}

pub fn truth_to_string(truth: &TruthFile) -> String {
    let mut out = serde_json::to_string_pretty(truth).expect("truth files always serialize");
    out.push('\n');
    out
}

/// Reads and schema-validates a point-set file. I/O and JSON errors come
/// back as the string variant so callers can distinguish parse failures
/// from semantic ones.
pub fn read_point_set(path: &Path) -> std::result::Result<PointSetFile, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let file: PointSetFile =
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(file)
}

pub fn read_dictionary(path: &Path) -> std::result::Result<DictionaryFile, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let file: DictionaryFile =
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(file)
}

pub fn read_truth(path: &Path) -> std::result::Result<TruthFile, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let file: TruthFile =
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(file)
}

/// Formats a float the way all JSON output does: rounded to 9 significant
/// digits, shortest decimal representation.
pub fn fmt_sig9(x: f64) -> String {
    format!("{}", round_sig9(x))
}
