//! Schema storage, bottom-up activation, and winner-take-all selection.
//!
//! A [`SchemaStore`] holds every schema the agent knows. During an episode the
//! store is read-only; candidate activations are computed against the current
//! working features, discounted by arousal congruence, and the top entry above
//! the winner floor becomes the active schema. Mutation (insert, consolidate,
//! sleep) happens between episodes under exclusive access.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matcher::{self, FeatureDatum, MatchError};
use crate::params::Params;

/// Interned feature dimension name ("eye", "pitch", ...). Case-sensitive;
/// two dimensions are equal iff their names are equal.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DimensionId(pub String);

impl DimensionId {
    pub fn new(name: impl Into<String>) -> Self {
        Self(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for DimensionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Unique schema name within a store.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SchemaId(pub String);

impl SchemaId {
    pub fn new(name: impl Into<String>) -> Self {
        Self(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for SchemaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// What a slot expects to observe on its dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Expectation {
    /// Matches exactly one symbol.
    ExactSymbol { symbol: String },
    /// Full credit inside `[lo, hi]`, linear falloff outside. Requires lo <= hi.
    NumericRange { lo: f64, hi: f64 },
    /// The slot is filled by evidence for a nested schema. The referenced id
    /// must exist in the store at match time.
    SubSchema { schema: SchemaId },
}

/// One expected attribute of a schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Slot {
    pub dim: DimensionId,
    pub expect: Expectation,
    /// Relative importance in (0, 1].
    pub weight: f64,
    /// Expected delay in ticks relative to the schema anchor, for slots that
    /// describe transients. Carried data; scoring does not read it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset: Option<u64>,
}

/// How a schema entered the store.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Innate,
    LearnedImpasse,
    LearnedSuccess,
}

/// A named bundle of weighted slots plus the arousal level under which the
/// schema expects to apply.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Schema {
    pub id: SchemaId,
    pub slots: Vec<Slot>,
    /// Expected arousal in [0, 1]; congruence with the current arousal biases
    /// selection.
    pub arousal: f64,
    /// Consolidation strength in [0, 1]; feeds the timeout budget.
    pub strength: f64,
    pub provenance: Provenance,
    #[serde(default)]
    pub created: u64,
}

impl Schema {
    /// Returns the first violated invariant, if any.
    pub fn check(&self) -> Result<(), String> {
        if self.id.0.is_empty() {
            return Err("schema id must be a non-empty token".to_string());
        }
        if self.slots.is_empty() {
            return Err("schema must have at least one slot".to_string());
        }
        for (i, slot) in self.slots.iter().enumerate() {
            if slot.dim.0.is_empty() {
                return Err(format!("slot {i}: dimension must be a non-empty token"));
            }
            if !(slot.weight > 0.0 && slot.weight <= 1.0) {
                return Err(format!(
                    "slot {i}: weight {} outside (0, 1]",
                    slot.weight
                ));
            }
            if let Expectation::NumericRange { lo, hi } = slot.expect {
                if lo.is_nan() || hi.is_nan() || lo > hi {
                    return Err(format!("slot {i}: numeric range requires lo <= hi"));
                }
            }
        }
        let total: f64 = self.slots.iter().map(|s| s.weight).sum();
        if total.is_nan() || total <= 0.0 {
            return Err("slot weights must sum to a positive value".to_string());
        }
        if !(self.arousal >= 0.0 && self.arousal <= 1.0) {
            return Err(format!("arousal {} outside [0, 1]", self.arousal));
        }
        if !(self.strength >= 0.0 && self.strength <= 1.0) {
            return Err(format!("strength {} outside [0, 1]", self.strength));
        }
        Ok(())
    }

    pub fn total_weight(&self) -> f64 {
        self.slots.iter().map(|s| s.weight).sum()
    }
}

/// One candidate produced by bottom-up activation.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivationEntry {
    pub schema_id: SchemaId,
    /// Evidence-weighted match fraction discounted by arousal congruence.
    /// Never exceeds `raw_match`.
    pub activation: f64,
    /// Evidence-weighted match fraction before the congruence discount.
    pub raw_match: f64,
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("duplicate schema id `{0}`")]
    DuplicateId(SchemaId),
    #[error("invalid schema `{id}`: {reason}")]
    InvalidSchema { id: SchemaId, reason: String },
    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("io error: {0}")]
    Io(#[from] io::Error),
}

/// All schemata known to the agent, keyed by id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SchemaStore {
    schemas: BTreeMap<SchemaId, Schema>,
}

impl SchemaStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts a schema after validating its invariants. The id must not be
    /// present yet.
    pub fn insert_schema(&mut self, schema: Schema) -> Result<SchemaId, StoreError> {
        if let Err(reason) = schema.check() {
            return Err(StoreError::InvalidSchema {
                id: schema.id,
                reason,
            });
        }
        if self.schemas.contains_key(&schema.id) {
            return Err(StoreError::DuplicateId(schema.id));
        }
        let id = schema.id.clone();
        self.schemas.insert(id.clone(), schema);
        Ok(id)
    }

    pub fn get(&self, id: &SchemaId) -> Option<&Schema> {
        self.schemas.get(id)
    }

    pub fn contains(&self, id: &SchemaId) -> bool {
        self.schemas.contains_key(id)
    }

    pub fn len(&self) -> usize {
        self.schemas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.schemas.is_empty()
    }

    /// Iterates schemata in id order.
    pub fn iter(&self) -> impl Iterator<Item = &Schema> {
        self.schemas.values()
    }
}

/// Evidence-weighted match fraction of `schema` against `features`.
///
/// Every feature votes once, for the slot where it scores best; slots may be
/// credited by several features and no consumption bookkeeping is done. The
/// sum is normalized by the schema's total slot weight and clamped to 1 so
/// surplus duplicates cannot push the fraction past full credit.
pub fn raw_match(
    store: &SchemaStore,
    schema: &Schema,
    features: &[FeatureDatum],
    params: &Params,
) -> Result<f64, MatchError> {
    let total = schema.total_weight();
    if total <= 0.0 {
        return Ok(0.0);
    }
    let mut contributions = Vec::with_capacity(features.len());
    for feature in features {
        let mut best = 0.0f64;
        for slot in &schema.slots {
            let score = matcher::match_slot(slot, feature, store, params)?;
            let weighted = slot.weight * score;
            if weighted > best {
                best = weighted;
            }
        }
        contributions.push(best);
    }
    // Summing in a canonical order keeps the result independent of the
    // feature list's ordering.
    contributions.sort_by(f64::total_cmp);
    let sum: f64 = contributions.iter().sum();
    Ok((sum / total).min(1.0))
}

/// Scores every non-bypassed schema against the features and returns the
/// candidates sorted by descending activation, ties broken by ascending id.
///
/// `activation = raw_match * (1 - gamma * |schema.arousal - arousal|)`, so
/// congruence can only discount, never boost above the raw evidence.
pub fn candidate_activations(
    store: &SchemaStore,
    features: &[FeatureDatum],
    bypass: &BTreeSet<SchemaId>,
    arousal: f64,
    params: &Params,
) -> Result<Vec<ActivationEntry>, MatchError> {
    let mut entries = Vec::new();
    for schema in store.iter() {
        if bypass.contains(&schema.id) {
            continue;
        }
        let raw = raw_match(store, schema, features, params)?;
        let discount = 1.0 - params.gamma * (schema.arousal - arousal).abs();
        let activation = (raw * discount).clamp(0.0, 1.0);
        entries.push(ActivationEntry {
            schema_id: schema.id.clone(),
            activation,
            raw_match: raw,
        });
    }
    entries.sort_by(|a, b| {
        b.activation
            .total_cmp(&a.activation)
            .then_with(|| a.schema_id.cmp(&b.schema_id))
    });
    Ok(entries)
}

/// Picks the first candidate at or above `floor`. Exactly one schema can win;
/// below the floor the loop keeps gathering data schema-free.
pub fn select_winner(ranked: &[ActivationEntry], floor: f64) -> Option<SchemaId> {
    debug_assert!(
        ranked.windows(2).all(|w| w[0].activation >= w[1].activation),
        "ranked list must be sorted descending"
    );
    ranked
        .iter()
        .find(|e| e.activation >= floor)
        .map(|e| e.schema_id.clone())
}

/// Serializes the store as one JSON object per line, in id order.
pub fn store_to_jsonl(store: &SchemaStore) -> String {
    let mut out = String::new();
    for schema in store.iter() {
        out.push_str(&serde_json::to_string(schema).expect("schema serializes"));
        out.push('\n');
    }
    out
}

/// Parses a store from line-oriented JSON. Unknown fields and invariant
/// violations are rejected with the offending 1-based line number.
pub fn parse_store(text: &str) -> Result<SchemaStore, StoreError> {
    let mut store = SchemaStore::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let schema: Schema = serde_json::from_str(line).map_err(|e| StoreError::Parse {
            line: line_no,
            reason: e.to_string(),
        })?;
        store.insert_schema(schema).map_err(|e| match e {
            StoreError::DuplicateId(id) => StoreError::Parse {
                line: line_no,
                reason: format!("duplicate schema id `{id}`"),
            },
            StoreError::InvalidSchema { id, reason } => StoreError::Parse {
                line: line_no,
                reason: format!("invalid schema `{id}`: {reason}"),
            },
            other => other,
        })?;
    }
    Ok(store)
}

pub fn load_store(path: &Path) -> Result<SchemaStore, StoreError> {
    let text = fs::read_to_string(path)?;
    parse_store(&text)
}

pub fn save_store(store: &SchemaStore, path: &Path) -> Result<(), StoreError> {
    fs::write(path, store_to_jsonl(store))?;
    Ok(())
}
