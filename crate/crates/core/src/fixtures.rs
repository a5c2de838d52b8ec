//! Canned stores and scenarios shared by tests, benchmarks, and examples.

use crate::harness::{RevealPolicy, Scenario};
use crate::matcher::{FeatureDatum, FeatureValue};
use crate::schema_store::{
    DimensionId, Expectation, Provenance, Schema, SchemaId, SchemaStore, Slot,
};

fn exact_slot(dim: &str, symbol: &str, weight: f64) -> Slot {
    Slot {
        dim: DimensionId::new(dim),
        expect: Expectation::ExactSymbol {
            symbol: symbol.to_string(),
        },
        weight,
        offset: None,
    }
}

fn ground(dim: &str, value: &str, pos: Option<(f64, f64)>, policy: RevealPolicy) -> (FeatureDatum, RevealPolicy) {
    (
        FeatureDatum {
            dim: DimensionId::new(dim),
            value: FeatureValue::Symbol(value.to_string()),
            pos,
            tick: 0,
            salience: 1.0,
        },
        policy,
    )
}

/// A face schema with two eye slots, nose, mouth, and ear. Total weight 3.6.
pub fn face_schema() -> Schema {
    Schema {
        id: SchemaId::new("FACE"),
        slots: vec![
            exact_slot("eye", "eye", 0.9),
            exact_slot("eye", "eye", 0.9),
            exact_slot("nose", "nose", 0.7),
            exact_slot("mouth", "mouth", 0.7),
            exact_slot("ear", "ear", 0.4),
        ],
        arousal: 0.0,
        strength: 1.0,
        provenance: Provenance::Innate,
        created: 0,
    }
}

pub fn face_store() -> SchemaStore {
    let mut store = SchemaStore::new();
    store.insert_schema(face_schema()).expect("face validates");
    store
}

/// One eye visible up front; everything else waits for an attention request.
pub fn face_scenario() -> Scenario {
    Scenario {
        name: "face".to_string(),
        ground: vec![
            ground("eye", "eye", Some((0.40, 0.62)), RevealPolicy::Initial),
            ground(
                "eye",
                "eye",
                Some((0.60, 0.62)),
                RevealPolicy::OnRequest(DimensionId::new("eye")),
            ),
            ground(
                "nose",
                "nose",
                Some((0.50, 0.48)),
                RevealPolicy::OnRequest(DimensionId::new("nose")),
            ),
            ground(
                "mouth",
                "mouth",
                Some((0.50, 0.30)),
                RevealPolicy::OnRequest(DimensionId::new("mouth")),
            ),
            ground(
                "ear",
                "ear",
                Some((0.18, 0.55)),
                RevealPolicy::OnRequest(DimensionId::new("ear")),
            ),
        ],
    }
}

/// Two schemata that read the same evidence equally well, like the two
/// interpretations of an ambiguous figure.
pub fn ambiguous_store() -> SchemaStore {
    let slots = || {
        vec![
            exact_slot("outline", "rounded", 0.9),
            exact_slot("front", "protrusion", 0.7),
            exact_slot("eye", "dot", 0.6),
        ]
    };
    let mut store = SchemaStore::new();
    for id in ["DUCK", "RABBIT"] {
        store
            .insert_schema(Schema {
                id: SchemaId::new(id),
                slots: slots(),
                arousal: 0.0,
                strength: 1.0,
                provenance: Provenance::Innate,
                created: 0,
            })
            .expect("ambiguous schema validates");
    }
    store
}

/// The shared evidence of the ambiguous figure, all visible up front.
pub fn ambiguous_scenario() -> Scenario {
    Scenario {
        name: "duck-rabbit".to_string(),
        ground: vec![
            ground("outline", "rounded", Some((0.5, 0.5)), RevealPolicy::Initial),
            ground("front", "protrusion", Some((0.8, 0.5)), RevealPolicy::Initial),
            ground("eye", "dot", Some((0.45, 0.6)), RevealPolicy::Initial),
        ],
    }
}

/// A scene no stored schema explains: a stray ear plus two unheard-of
/// features. Weakly activates FACE, then impasses.
pub fn novel_scene_scenario() -> Scenario {
    Scenario {
        name: "novel".to_string(),
        ground: vec![
            ground("ear", "ear", Some((0.2, 0.5)), RevealPolicy::Initial),
            ground("tentacle", "tentacle", Some((0.6, 0.4)), RevealPolicy::Initial),
            ground("glow", "glow", Some((0.7, 0.8)), RevealPolicy::Initial),
        ],
    }
}
