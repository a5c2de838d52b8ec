//! Event-triggered memory: proto-schemata minted at impasse and success,
//! gradual or one-shot consolidation, schema composition, and the sleep
//! cycle that disposes of stale candidates.

use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matcher::{FeatureDatum, FeatureValue};
use crate::params::Params;
use crate::schema_store::{
    DimensionId, Expectation, Provenance, Schema, SchemaId, SchemaStore, Slot, StoreError,
};

/// Learned numeric slots generalize this far around the observed value.
const NUMERIC_SPREAD: f64 = 0.1;

/// Slots minted from zero-salience features still need a weight in (0, 1].
const MIN_SLOT_WEIGHT: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MemoryEventKind {
    Impasse,
    Success,
}

/// A snapshot worth remembering: the features active just before a reset or
/// a successful conclusion, stamped with how much it mattered.
#[derive(Debug, Clone, PartialEq)]
pub struct MemoryEvent {
    pub kind: MemoryEventKind,
    /// The trailing window of active features, most recent last.
    pub window: Vec<FeatureDatum>,
    /// Tension at the event for impasses, released tension for successes.
    pub importance: f64,
    pub tick: u64,
}

/// A proto-schema awaiting consolidation. Its strength lives on the proto
/// itself and grows with repetitions.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSchema {
    pub proto: Schema,
    pub repetitions: u32,
    pub last_seen_tick: u64,
    pub kind: MemoryEventKind,
    pub importance: f64,
}

impl CandidateSchema {
    pub fn strength(&self) -> f64 {
        self.proto.strength
    }
}

/// Unconsolidated candidates in recording order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MemoryLedger {
    pub candidates: Vec<CandidateSchema>,
    minted: u64,
}

impl MemoryLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }
}

/// What recording an event did to the ledger.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordOutcome {
    pub candidate_id: SchemaId,
    pub repetitions: u32,
    pub strength: f64,
    /// True when the event merged into an existing candidate instead of
    /// minting a new one.
    pub merged: bool,
}

#[derive(Debug, Error)]
pub enum MemoryError {
    #[error("memory event carries an empty window")]
    EmptyWindow,
    #[error("unknown schema `{0}`")]
    UnknownSchema(SchemaId),
    #[error("duplicate schema id `{0}` persisted after retry")]
    DuplicateId(SchemaId),
    #[error("{parts} parts but {weights} weights")]
    WeightCountMismatch { parts: usize, weights: usize },
    #[error("composition weight {0} outside (0, 1]")]
    InvalidWeight(f64),
    #[error("composition needs at least one part")]
    NoParts,
    #[error("invalid candidate: {0}")]
    InvalidCandidate(String),
    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("io error: {0}")]
    Io(#[from] io::Error),
    #[error(transparent)]
    Store(StoreError),
}

/// Builds a proto-schema from the event window and records it.
///
/// One slot per distinct (dimension, value) pair: symbols become exact
/// expectations, numbers become ranges spread by ten percent, weights come
/// from salience, and offsets from each feature's delay after the earliest
/// window tick. An event whose slot multiset already exists in the ledger
/// merges into that candidate: repetitions go up and strength grows by the
/// configured increment instead of minting a duplicate.
pub fn record_event(
    ledger: &mut MemoryLedger,
    event: MemoryEvent,
    params: &Params,
) -> Result<RecordOutcome, MemoryError> {
    if event.window.is_empty() {
        return Err(MemoryError::EmptyWindow);
    }
    let slots = window_slots(&event.window);
    let key = slot_multiset_key(&slots);

    for cand in &mut ledger.candidates {
        if slot_multiset_key(&cand.proto.slots) == key {
            cand.repetitions += 1;
            cand.proto.strength = (cand.proto.strength + params.strength_increment).min(1.0);
            cand.last_seen_tick = event.tick;
            return Ok(RecordOutcome {
                candidate_id: cand.proto.id.clone(),
                repetitions: cand.repetitions,
                strength: cand.proto.strength,
                merged: true,
            });
        }
    }

    let kind_tag = match event.kind {
        MemoryEventKind::Impasse => "impasse",
        MemoryEventKind::Success => "success",
    };
    let id = SchemaId::new(format!("learned-{kind_tag}-t{}-{}", event.tick, ledger.minted));
    ledger.minted += 1;
    let importance = event.importance.clamp(0.0, 1.0);
    let proto = Schema {
        id: id.clone(),
        slots,
        arousal: importance,
        strength: importance,
        provenance: match event.kind {
            MemoryEventKind::Impasse => Provenance::LearnedImpasse,
            MemoryEventKind::Success => Provenance::LearnedSuccess,
        },
        created: event.tick,
    };
    ledger.candidates.push(CandidateSchema {
        proto,
        repetitions: 1,
        last_seen_tick: event.tick,
        kind: event.kind,
        importance,
    });
    let cand = ledger.candidates.last().expect("just pushed");
    Ok(RecordOutcome {
        candidate_id: cand.proto.id.clone(),
        repetitions: 1,
        strength: cand.proto.strength,
        merged: false,
    })
}

fn window_slots(window: &[FeatureDatum]) -> Vec<Slot> {
    let earliest = window.iter().map(|f| f.tick).min().unwrap_or(0);
    let mut slots: Vec<Slot> = Vec::new();
    let mut seen: Vec<(&DimensionId, &FeatureValue)> = Vec::new();
    for feature in window {
        if seen.iter().any(|(d, v)| *d == &feature.dim && *v == &feature.value) {
            continue;
        }
        seen.push((&feature.dim, &feature.value));
        let expect = match &feature.value {
            FeatureValue::Symbol(s) => Expectation::ExactSymbol { symbol: s.clone() },
            FeatureValue::Number(v) => {
                let spread = NUMERIC_SPREAD * v.abs();
                Expectation::NumericRange {
                    lo: v - spread,
                    hi: v + spread,
                }
            }
        };
        slots.push(Slot {
            dim: feature.dim.clone(),
            expect,
            weight: feature.salience.clamp(MIN_SLOT_WEIGHT, 1.0),
            offset: Some(feature.tick - earliest),
        });
    }
    slots
}

type SlotKey = (String, u8, String, u64, u64);

fn slot_multiset_key(slots: &[Slot]) -> Vec<SlotKey> {
    let mut key: Vec<SlotKey> = slots
        .iter()
        .map(|s| match &s.expect {
            Expectation::ExactSymbol { symbol } => {
                (s.dim.0.clone(), 0, symbol.clone(), 0, 0)
            }
            Expectation::NumericRange { lo, hi } => {
                (s.dim.0.clone(), 1, String::new(), lo.to_bits(), hi.to_bits())
            }
            Expectation::SubSchema { schema } => (s.dim.0.clone(), 2, schema.0.clone(), 0, 0),
        })
        .collect();
    key.sort();
    key
}

/// Promotes every ripe candidate into the store and removes it from the
/// ledger. A candidate is ripe when its strength reached 1.0 (the gradual
/// route) or its importance reached tau_instant (the one-shot route). Id
/// collisions retry once under a fresh suffix, then fail.
pub fn consolidate(
    ledger: &mut MemoryLedger,
    store: &mut SchemaStore,
    params: &Params,
) -> Result<Vec<SchemaId>, MemoryError> {
    let mut promoted = Vec::new();
    let mut remaining = Vec::new();
    for cand in ledger.candidates.drain(..) {
        let ripe = cand.proto.strength >= 1.0 || cand.importance >= params.tau_instant;
        if !ripe {
            remaining.push(cand);
            continue;
        }
        let mut schema = cand.proto.clone();
        schema.strength = schema.strength.clamp(0.0, 1.0);
        match store.insert_schema(schema) {
            Ok(id) => promoted.push(id),
            Err(StoreError::DuplicateId(first)) => {
                let mut retry = cand.proto.clone();
                retry.id = SchemaId::new(format!("{}-r1", first));
                retry.strength = retry.strength.clamp(0.0, 1.0);
                match store.insert_schema(retry) {
                    Ok(id) => promoted.push(id),
                    Err(StoreError::DuplicateId(id)) => {
                        return Err(MemoryError::DuplicateId(id))
                    }
                    Err(other) => return Err(MemoryError::Store(other)),
                }
            }
            Err(other) => return Err(MemoryError::Store(other)),
        }
    }
    ledger.candidates = remaining;
    Ok(promoted)
}

/// Builds a schema whose slots nest the given parts. Each slot's dimension
/// takes the part's id as its group label; recursion stays legal up to the
/// matcher depth limit, checked at match time rather than here.
pub fn compose_schema(
    store: &SchemaStore,
    parts: &[SchemaId],
    weights: &[f64],
) -> Result<Schema, MemoryError> {
    if parts.is_empty() {
        return Err(MemoryError::NoParts);
    }
    if parts.len() != weights.len() {
        return Err(MemoryError::WeightCountMismatch {
            parts: parts.len(),
            weights: weights.len(),
        });
    }
    for &w in weights {
        if !(w > 0.0 && w <= 1.0) {
            return Err(MemoryError::InvalidWeight(w));
        }
    }
    let mut arousal = 0.0;
    let mut strength = 0.0;
    let mut slots = Vec::with_capacity(parts.len());
    for (part_id, &weight) in parts.iter().zip(weights) {
        let part = store
            .get(part_id)
            .ok_or_else(|| MemoryError::UnknownSchema(part_id.clone()))?;
        arousal += part.arousal;
        strength += part.strength;
        slots.push(Slot {
            dim: DimensionId::new(part_id.as_str()),
            expect: Expectation::SubSchema {
                schema: part_id.clone(),
            },
            weight,
            offset: None,
        });
    }
    let n = parts.len() as f64;
    let joined = parts
        .iter()
        .map(SchemaId::as_str)
        .collect::<Vec<_>>()
        .join("+");
    Ok(Schema {
        id: SchemaId::new(joined),
        slots,
        arousal: arousal / n,
        strength: strength / n,
        provenance: Provenance::Innate,
        created: 0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SleepReport {
    pub pruned: usize,
    pub decayed: usize,
}

/// Decays every candidate's strength, then prunes candidates that are both
/// weak (below the prune strength) and stale (older than the prune age).
/// Consolidated schemata live in the store and are never touched.
pub fn sleep_cycle(ledger: &mut MemoryLedger, now: u64, params: &Params) -> SleepReport {
    let before = ledger.candidates.len();
    for cand in &mut ledger.candidates {
        cand.proto.strength *= params.sleep_decay;
    }
    ledger.candidates.retain(|cand| {
        let age = now.saturating_sub(cand.last_seen_tick);
        !(cand.proto.strength < params.prune_strength && age > params.prune_age)
    });
    let pruned = before - ledger.candidates.len();
    SleepReport {
        pruned,
        decayed: ledger.candidates.len(),
    }
}

/// Candidate line in the persisted ledger: the schema fields plus a marker
/// and the consolidation bookkeeping.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CandidateLine {
    id: SchemaId,
    slots: Vec<Slot>,
    arousal: f64,
    strength: f64,
    provenance: Provenance,
    #[serde(default)]
    created: u64,
    candidate: bool,
    kind: MemoryEventKind,
    importance: f64,
    repetitions: u32,
    last_seen: u64,
}

pub fn ledger_to_jsonl(ledger: &MemoryLedger) -> String {
    let mut out = String::new();
    for cand in &ledger.candidates {
        let line = CandidateLine {
            id: cand.proto.id.clone(),
            slots: cand.proto.slots.clone(),
            arousal: cand.proto.arousal,
            strength: cand.proto.strength,
            provenance: cand.proto.provenance,
            created: cand.proto.created,
            candidate: true,
            kind: cand.kind,
            importance: cand.importance,
            repetitions: cand.repetitions,
            last_seen: cand.last_seen_tick,
        };
        out.push_str(&serde_json::to_string(&line).expect("candidate serializes"));
        out.push('\n');
    }
    out
}

pub fn parse_ledger(text: &str) -> Result<MemoryLedger, MemoryError> {
    let mut ledger = MemoryLedger::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: CandidateLine = serde_json::from_str(line).map_err(|e| MemoryError::Parse {
            line: line_no,
            reason: e.to_string(),
        })?;
        if !parsed.candidate {
            return Err(MemoryError::Parse {
                line: line_no,
                reason: "ledger lines must set \"candidate\":true".to_string(),
            });
        }
        if parsed.repetitions == 0 {
            return Err(MemoryError::Parse {
                line: line_no,
                reason: "repetitions must be >= 1".to_string(),
            });
        }
        let proto = Schema {
            id: parsed.id,
            slots: parsed.slots,
            arousal: parsed.arousal,
            strength: parsed.strength,
            provenance: parsed.provenance,
            created: parsed.created,
        };
        if let Err(reason) = proto.check() {
            return Err(MemoryError::Parse {
                line: line_no,
                reason,
            });
        }
        ledger.candidates.push(CandidateSchema {
            proto,
            repetitions: parsed.repetitions,
            last_seen_tick: parsed.last_seen,
            kind: parsed.kind,
            importance: parsed.importance,
        });
    }
    ledger.minted = ledger.candidates.len() as u64;
    Ok(ledger)
}

pub fn load_ledger(path: &Path) -> Result<MemoryLedger, MemoryError> {
    let text = fs::read_to_string(path)?;
    parse_ledger(&text)
}

pub fn save_ledger(ledger: &MemoryLedger, path: &Path) -> Result<(), MemoryError> {
    fs::write(path, ledger_to_jsonl(ledger))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn feature(dim: &str, value: &str, tick: u64, salience: f64) -> FeatureDatum {
        FeatureDatum {
            dim: DimensionId::new(dim),
            value: FeatureValue::Symbol(value.to_string()),
            pos: None,
            tick,
            salience,
        }
    }

    fn abc_window(tick: u64) -> Vec<FeatureDatum> {
        vec![
            feature("a", "a", tick, 1.0),
            feature("b", "b", tick, 1.0),
            feature("c", "c", tick, 1.0),
        ]
    }

    fn event(kind: MemoryEventKind, window: Vec<FeatureDatum>, importance: f64, tick: u64) -> MemoryEvent {
        MemoryEvent { kind, window, importance, tick }
    }

    #[test]
    fn three_feature_window_mints_three_slots() {
        let mut ledger = MemoryLedger::new();
        let out = record_event(
            &mut ledger,
            event(MemoryEventKind::Impasse, abc_window(5), 0.9, 5),
            &Params::default(),
        )
        .unwrap();
        assert!(!out.merged);
        assert!((out.strength - 0.9).abs() < 1e-12);
        let cand = &ledger.candidates[0];
        assert_eq!(cand.proto.slots.len(), 3);
        assert_eq!(cand.proto.provenance, Provenance::LearnedImpasse);
        assert!((cand.proto.arousal - 0.9).abs() < 1e-12);
        assert_eq!(cand.proto.slots[0].offset, Some(0));
    }

    #[test]
    fn repeated_window_merges_and_gains_strength() {
        let mut ledger = MemoryLedger::new();
        let params = Params::default();
        record_event(
            &mut ledger,
            event(MemoryEventKind::Impasse, abc_window(5), 0.1, 5),
            &params,
        )
        .unwrap();
        let out = record_event(
            &mut ledger,
            event(MemoryEventKind::Impasse, abc_window(9), 0.1, 9),
            &params,
        )
        .unwrap();
        assert!(out.merged);
        assert_eq!(out.repetitions, 2);
        assert!((out.strength - 0.3).abs() < 1e-9);
        assert_eq!(ledger.len(), 1);
        assert_eq!(ledger.candidates[0].last_seen_tick, 9);
    }

    #[test]
    fn empty_window_is_rejected() {
        let mut ledger = MemoryLedger::new();
        let err = record_event(
            &mut ledger,
            event(MemoryEventKind::Impasse, Vec::new(), 0.5, 1),
            &Params::default(),
        )
        .unwrap_err();
        assert!(matches!(err, MemoryError::EmptyWindow));
    }

    #[test]
    fn numeric_window_features_generalize() {
        let mut ledger = MemoryLedger::new();
        let window = vec![FeatureDatum {
            dim: DimensionId::new("pitch"),
            value: FeatureValue::Number(200.0),
            pos: None,
            tick: 3,
            salience: 0.5,
        }];
        record_event(
            &mut ledger,
            event(MemoryEventKind::Success, window, 0.2, 3),
            &Params::default(),
        )
        .unwrap();
        match &ledger.candidates[0].proto.slots[0].expect {
            Expectation::NumericRange { lo, hi } => {
                assert!((lo - 180.0).abs() < 1e-9);
                assert!((hi - 220.0).abs() < 1e-9);
            }
            other => panic!("expected a numeric range, got {other:?}"),
        }
    }

    #[test]
    fn consolidate_promotes_strong_and_important_candidates() {
        let params = Params::default();
        let mut store = SchemaStore::new();
        let mut ledger = MemoryLedger::new();

        // Gradual route: reaches strength 1.0 by repetition.
        for tick in 0..5 {
            record_event(
                &mut ledger,
                event(MemoryEventKind::Impasse, abc_window(tick), 0.2, tick),
                &params,
            )
            .unwrap();
        }
        assert!((ledger.candidates[0].strength() - 1.0).abs() < 1e-9);

        // One-shot route: importance 0.9 on a single occurrence.
        let window = vec![feature("x", "x", 1, 1.0)];
        record_event(
            &mut ledger,
            event(MemoryEventKind::Success, window, 0.9, 1),
            &params,
        )
        .unwrap();

        // Below both thresholds.
        let weak = vec![feature("y", "y", 1, 1.0)];
        record_event(
            &mut ledger,
            event(MemoryEventKind::Impasse, weak, 0.1, 1),
            &params,
        )
        .unwrap();

        let promoted = consolidate(&mut ledger, &mut store, &params).unwrap();
        assert_eq!(promoted.len(), 2);
        assert_eq!(store.len(), 2);
        assert_eq!(ledger.len(), 1);
        assert!(ledger.candidates[0].strength() < 0.3);
    }

    #[test]
    fn one_shot_boundary_is_inclusive() {
        let params = Params::default();
        let mut store = SchemaStore::new();
        let mut ledger = MemoryLedger::new();
        record_event(
            &mut ledger,
            event(MemoryEventKind::Impasse, abc_window(1), 0.8, 1),
            &params,
        )
        .unwrap();
        let promoted = consolidate(&mut ledger, &mut store, &params).unwrap();
        assert_eq!(promoted.len(), 1);
    }

    #[test]
    fn duplicate_promotion_retries_once() {
        let params = Params::default();
        let mut store = SchemaStore::new();
        let mut ledger = MemoryLedger::new();
        let out = record_event(
            &mut ledger,
            event(MemoryEventKind::Impasse, abc_window(1), 0.9, 1),
            &params,
        )
        .unwrap();
        // Occupy the candidate's id ahead of time.
        let mut blocker = fixtures::face_schema();
        blocker.id = out.candidate_id.clone();
        store.insert_schema(blocker).unwrap();

        let promoted = consolidate(&mut ledger, &mut store, &params).unwrap();
        assert_eq!(promoted.len(), 1);
        assert_eq!(promoted[0].as_str(), format!("{}-r1", out.candidate_id));
    }

    #[test]
    fn compose_builds_nested_slots() {
        let mut store = fixtures::face_store();
        store
            .insert_schema(Schema {
                id: SchemaId::new("BODY"),
                slots: vec![Slot {
                    dim: DimensionId::new("torso"),
                    expect: Expectation::ExactSymbol { symbol: "torso".to_string() },
                    weight: 0.8,
                    offset: None,
                }],
                arousal: 0.0,
                strength: 1.0,
                provenance: Provenance::Innate,
                created: 0,
            })
            .unwrap();
        let person = compose_schema(
            &store,
            &[SchemaId::new("FACE"), SchemaId::new("BODY")],
            &[0.9, 0.7],
        )
        .unwrap();
        assert_eq!(person.slots.len(), 2);
        assert!(matches!(person.slots[0].expect, Expectation::SubSchema { .. }));
        assert_eq!(person.id.as_str(), "FACE+BODY");
        person.check().unwrap();

        let single = compose_schema(&store, &[SchemaId::new("FACE")], &[0.5]).unwrap();
        assert_eq!(single.slots.len(), 1);

        let err = compose_schema(&store, &[SchemaId::new("GHOST")], &[0.5]).unwrap_err();
        assert!(matches!(err, MemoryError::UnknownSchema(_)));
    }

    #[test]
    fn sleep_decays_and_prunes() {
        let params = Params::default();
        let mut ledger = MemoryLedger::new();

        let mut weak_old = event(MemoryEventKind::Impasse, abc_window(0), 0.2, 0);
        weak_old.importance = 0.2;
        record_event(&mut ledger, weak_old, &params).unwrap();

        let strong = vec![feature("x", "x", 0, 1.0)];
        record_event(
            &mut ledger,
            event(MemoryEventKind::Impasse, strong, 0.9, 0),
            &params,
        )
        .unwrap();

        let report = sleep_cycle(&mut ledger, 200, &params);
        assert_eq!(report, SleepReport { pruned: 1, decayed: 1 });
        assert!((ledger.candidates[0].strength() - 0.81).abs() < 1e-9);
    }

    #[test]
    fn fresh_weak_candidates_survive_sleep() {
        let params = Params::default();
        let mut ledger = MemoryLedger::new();
        record_event(
            &mut ledger,
            event(MemoryEventKind::Impasse, abc_window(150), 0.2, 150),
            &params,
        )
        .unwrap();
        let report = sleep_cycle(&mut ledger, 200, &params);
        assert_eq!(report, SleepReport { pruned: 0, decayed: 1 });
    }

    #[test]
    fn sleep_on_empty_ledger_reports_zeros() {
        let mut ledger = MemoryLedger::new();
        let report = sleep_cycle(&mut ledger, 100, &Params::default());
        assert_eq!(report, SleepReport { pruned: 0, decayed: 0 });
    }

    #[test]
    fn ledger_round_trips_through_jsonl() {
        let params = Params::default();
        let mut ledger = MemoryLedger::new();
        record_event(
            &mut ledger,
            event(MemoryEventKind::Impasse, abc_window(3), 0.4, 3),
            &params,
        )
        .unwrap();
        record_event(
            &mut ledger,
            event(
                MemoryEventKind::Success,
                vec![feature("x", "x", 7, 0.6)],
                0.3,
                7,
            ),
            &params,
        )
        .unwrap();
        let text = ledger_to_jsonl(&ledger);
        let back = parse_ledger(&text).unwrap();
        assert_eq!(ledger.candidates, back.candidates);
    }

    #[test]
    fn ledger_rejects_non_candidate_lines() {
        let line = r#"{"id":"X","slots":[{"dim":"a","expect":{"kind":"exact_symbol","symbol":"a"},"weight":0.5}],"arousal":0.0,"strength":0.5,"provenance":"learned_impasse","candidate":false,"kind":"impasse","importance":0.5,"repetitions":1,"last_seen":0}"#;
        assert!(matches!(
            parse_ledger(line),
            Err(MemoryError::Parse { line: 1, .. })
        ));
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        // No two candidates ever share an identical slot multiset.
        #[test]
        fn ledger_never_holds_duplicate_multisets(
            events in proptest::collection::vec(
                (proptest::collection::vec(0usize..4, 1..5), 0.0f64..=1.0),
                1..20,
            )
        ) {
            let params = Params::default();
            let mut ledger = MemoryLedger::new();
            for (dims, importance) in events {
                let window: Vec<FeatureDatum> = dims
                    .iter()
                    .map(|&d| FeatureDatum {
                        dim: DimensionId::new(format!("d{d}")),
                        value: FeatureValue::Symbol(format!("v{d}")),
                        pos: None,
                        tick: 1,
                        salience: 1.0,
                    })
                    .collect();
                record_event(
                    &mut ledger,
                    MemoryEvent {
                        kind: MemoryEventKind::Impasse,
                        window,
                        importance,
                        tick: 1,
                    },
                    &params,
                )
                .unwrap();
            }
            for (i, a) in ledger.candidates.iter().enumerate() {
                for b in ledger.candidates.iter().skip(i + 1) {
                    prop_assert_ne!(
                        slot_multiset_key(&a.proto.slots),
                        slot_multiset_key(&b.proto.slots)
                    );
                }
            }
        }

        // Any event at or above tau_instant yields a store schema after the
        // next consolidation, regardless of repetitions.
        #[test]
        fn one_shot_events_always_promote(importance in 0.8f64..=1.0) {
            let params = Params::default();
            let mut store = SchemaStore::new();
            let mut ledger = MemoryLedger::new();
            record_event(
                &mut ledger,
                MemoryEvent {
                    kind: MemoryEventKind::Success,
                    window: vec![FeatureDatum {
                        dim: DimensionId::new("d"),
                        value: FeatureValue::Symbol("v".to_string()),
                        pos: None,
                        tick: 0,
                        salience: 1.0,
                    }],
                    importance,
                    tick: 0,
                },
                &params,
            )
            .unwrap();
            let promoted = consolidate(&mut ledger, &mut store, &params).unwrap();
            prop_assert_eq!(promoted.len(), 1);
            prop_assert!(ledger.is_empty());
        }
    }
}
