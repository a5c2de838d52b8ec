//! Shared instance builders for the engine benchmarks.

use ouroboros_core::{
    DimensionId, Expectation, FeatureDatum, FeatureValue, Provenance, Schema, SchemaId,
    SchemaStore, Slot,
};

/// A store of `n` synthetic schemata over a small shared vocabulary,
/// deterministic by construction.
pub fn synthetic_store(n: usize) -> SchemaStore {
    let mut store = SchemaStore::new();
    for i in 0..n {
        let slots: Vec<Slot> = (0..4 + i % 3)
            .map(|k| Slot {
                dim: DimensionId::new(format!("d{}", (i + k) % 8)),
                expect: Expectation::ExactSymbol {
                    symbol: format!("v{}", (i * 3 + k) % 5),
                },
                weight: 0.2 + 0.1 * ((i + k) % 8) as f64 / 8.0,
                offset: None,
            })
            .collect();
        store
            .insert_schema(Schema {
                id: SchemaId::new(format!("S{i:03}")),
                slots,
                arousal: (i % 5) as f64 / 5.0,
                strength: 1.0,
                provenance: Provenance::Innate,
                created: 0,
            })
            .expect("synthetic schema validates");
    }
    store
}

/// A feature batch over the same vocabulary.
pub fn synthetic_features(n: usize) -> Vec<FeatureDatum> {
    (0..n)
        .map(|j| FeatureDatum {
            dim: DimensionId::new(format!("d{}", j % 8)),
            value: FeatureValue::Symbol(format!("v{}", (j * 7) % 5)),
            pos: Some((j as f64 / n as f64, 0.5)),
            tick: 0,
            salience: 1.0,
        })
        .collect()
}
