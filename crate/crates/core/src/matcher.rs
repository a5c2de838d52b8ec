//! Slot scoring, exclusive feature binding, and consumption analysis.
//!
//! Binding is an exact maximum-total-weighted-score assignment: each feature
//! is consumed by at most one slot and each slot filled by at most one
//! feature. Instances are capped small, so the binder solves them exactly
//! with a bitmask dynamic program and a deterministic lexicographic
//! tie-break. The resulting [`ConsumptionReport`] carries the graded fit,
//! the ranked empty slots, the unexplained features, and a verdict.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::params::Params;
use crate::schema_store::{DimensionId, Expectation, Schema, SchemaId, SchemaStore, Slot};

/// Totals within this distance of each other tie; ties resolve to the
/// lexicographically smallest (slot_index, feature_index) assignment.
const TIE_EPS: f64 = 1e-9;

/// A critical slot counts as properly bound only at or above this score.
const CRITICAL_BIND_SCORE: f64 = 0.5;

/// Symbolic or numeric payload of a feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FeatureValue {
    Symbol(String),
    Number(f64),
}

/// One unit of input: a value on a dimension, optionally positioned, stamped
/// with the tick it arrived and how salient it was.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureDatum {
    pub dim: DimensionId,
    pub value: FeatureValue,
    pub pos: Option<(f64, f64)>,
    pub tick: u64,
    /// Perceptual prominence in [0, 1].
    pub salience: f64,
}

/// Exclusive assignment of one feature to one slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Binding {
    pub slot_index: usize,
    pub feature_index: usize,
    /// Raw match score in [0, 1], before slot weighting.
    pub score: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Satisfied,
    Gap,
    Impasse,
}

/// Outcome of comparing a schema's demanded attributes with the available
/// features.
#[derive(Debug, Clone, PartialEq)]
pub struct ConsumptionReport {
    pub schema_id: SchemaId,
    /// Weight-normalized bound score in [0, 1]. Unexplained features do not
    /// reduce fit; they are reported instead.
    pub fit: f64,
    pub bindings: Vec<Binding>,
    /// Unbound slot indices, ranked by descending weight, ties by index.
    pub empty_slots: Vec<usize>,
    /// Feature indices no slot consumed.
    pub unexplained: Vec<usize>,
    pub verdict: Verdict,
}

/// One attention bid: an empty slot's dimension, expectation, and weight.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotHighlight {
    pub slot_index: usize,
    pub dim: DimensionId,
    pub expect: Expectation,
    pub weight: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum MatchError {
    #[error("sub-schema recursion exceeded depth {0}")]
    DepthExceeded(usize),
    #[error("instance of {slots} slots x {features} features exceeds the binder cap of {cap}")]
    CapacityExceeded {
        slots: usize,
        features: usize,
        cap: usize,
    },
    #[error("unknown schema `{0}`")]
    UnknownSchema(SchemaId),
}

/// Scores one feature against one slot, in [0, 1].
///
/// Zero if the dimensions differ. Exact symbols are all-or-nothing; numeric
/// ranges give full credit inside the bounds and fall off linearly, reaching
/// zero at half the range width beyond either bound (a point range falls off
/// over width 1.0). Sub-schema slots score the feature by running consumption
/// analysis of the nested schema over it, depth-limited.
pub fn match_slot(
    slot: &Slot,
    feature: &FeatureDatum,
    store: &SchemaStore,
    params: &Params,
) -> Result<f64, MatchError> {
    match_slot_at(slot, feature, store, params, 0)
}

fn match_slot_at(
    slot: &Slot,
    feature: &FeatureDatum,
    store: &SchemaStore,
    params: &Params,
    depth: usize,
) -> Result<f64, MatchError> {
    if slot.dim != feature.dim {
        return Ok(0.0);
    }
    match &slot.expect {
        Expectation::ExactSymbol { symbol } => Ok(match &feature.value {
            FeatureValue::Symbol(s) if s == symbol => 1.0,
            _ => 0.0,
        }),
        Expectation::NumericRange { lo, hi } => Ok(match feature.value {
            FeatureValue::Number(v) => range_score(v, *lo, *hi),
            _ => 0.0,
        }),
        Expectation::SubSchema { schema } => {
            if depth >= params.depth_limit {
                return Err(MatchError::DepthExceeded(params.depth_limit));
            }
            let sub = store
                .get(schema)
                .ok_or_else(|| MatchError::UnknownSchema(schema.clone()))?;
            let report = analyze_at(
                store,
                sub,
                std::slice::from_ref(feature),
                0,
                params,
                depth + 1,
            )?;
            Ok(report.fit)
        }
    }
}

fn range_score(v: f64, lo: f64, hi: f64) -> f64 {
    if v >= lo && v <= hi {
        return 1.0;
    }
    let width = if hi > lo { (hi - lo) / 2.0 } else { 1.0 };
    let dist = if v < lo { lo - v } else { v - hi };
    (1.0 - dist / width).max(0.0)
}

/// Exact maximum-total-weighted-score assignment of features to slots.
///
/// Zero-score pairs never bind: a slot with nothing matching stays empty and
/// keeps its place in the highlight ranking. Among assignments whose totals
/// tie within 1e-9, the lexicographically smallest (slot_index,
/// feature_index) list wins.
pub fn bind_features(
    schema: &Schema,
    features: &[FeatureDatum],
    store: &SchemaStore,
    params: &Params,
) -> Result<Vec<Binding>, MatchError> {
    bind_features_at(schema, features, store, params, 0)
}

fn bind_features_at(
    schema: &Schema,
    features: &[FeatureDatum],
    store: &SchemaStore,
    params: &Params,
    depth: usize,
) -> Result<Vec<Binding>, MatchError> {
    let n_slots = schema.slots.len();
    let n_feats = features.len();
    if n_slots > params.slot_cap || n_feats > params.feature_cap {
        return Err(MatchError::CapacityExceeded {
            slots: n_slots,
            features: n_feats,
            cap: params.slot_cap.max(params.feature_cap),
        });
    }
    if n_feats == 0 {
        return Ok(Vec::new());
    }

    let mut raw = vec![vec![0.0f64; n_feats]; n_slots];
    let mut weighted = vec![vec![0.0f64; n_feats]; n_slots];
    for (i, slot) in schema.slots.iter().enumerate() {
        for (j, feature) in features.iter().enumerate() {
            let score = match_slot_at(slot, feature, store, params, depth)?;
            raw[i][j] = score;
            weighted[i][j] = slot.weight * score;
        }
    }

    let mut solver = Assigner {
        weighted: &weighted,
        n_slots,
        n_feats,
        memo: std::collections::HashMap::new(),
    };
    let mut bindings = Vec::new();
    let mut mask: u32 = 0;
    for i in 0..n_slots {
        let target = solver.best(i, mask);
        let mut chosen = None;
        for (j, &w) in weighted[i].iter().enumerate() {
            if mask & (1 << j) != 0 || w <= 0.0 {
                continue;
            }
            let value = w + solver.best(i + 1, mask | (1 << j));
            // Binding beats skipping on ties, and the smallest feature index
            // wins among tied bindings.
            if value + TIE_EPS >= target {
                chosen = Some(j);
                break;
            }
        }
        if let Some(j) = chosen {
            bindings.push(Binding {
                slot_index: i,
                feature_index: j,
                score: raw[i][j],
            });
            mask |= 1 << j;
        }
    }
    Ok(bindings)
}

struct Assigner<'a> {
    weighted: &'a [Vec<f64>],
    n_slots: usize,
    n_feats: usize,
    memo: std::collections::HashMap<(usize, u32), f64>,
}

impl Assigner<'_> {
    /// Best achievable total using slots `i..` with `mask` features consumed.
    fn best(&mut self, i: usize, mask: u32) -> f64 {
        if i == self.n_slots {
            return 0.0;
        }
        if let Some(&v) = self.memo.get(&(i, mask)) {
            return v;
        }
        let mut best = self.best(i + 1, mask);
        for j in 0..self.n_feats {
            if mask & (1 << j) != 0 {
                continue;
            }
            let w = self.weighted[i][j];
            if w <= 0.0 {
                continue;
            }
            let v = w + self.best(i + 1, mask | (1 << j));
            if v > best {
                best = v;
            }
        }
        self.memo.insert((i, mask), best);
        best
    }
}

/// Runs binding against the named schema and classifies the outcome.
///
/// Satisfied requires fit >= theta_sat and every critical slot (weight >=
/// w_crit) bound at score >= 0.5. A fit below theta_imp is an Impasse once
/// the schema has had one data-gathering iteration; everything else is a Gap.
pub fn consumption_analysis(
    store: &SchemaStore,
    schema_id: &SchemaId,
    features: &[FeatureDatum],
    iteration: u32,
    params: &Params,
) -> Result<ConsumptionReport, MatchError> {
    let schema = store
        .get(schema_id)
        .ok_or_else(|| MatchError::UnknownSchema(schema_id.clone()))?;
    analyze_at(store, schema, features, iteration, params, 0)
}

fn analyze_at(
    store: &SchemaStore,
    schema: &Schema,
    features: &[FeatureDatum],
    iteration: u32,
    params: &Params,
    depth: usize,
) -> Result<ConsumptionReport, MatchError> {
    let bindings = bind_features_at(schema, features, store, params, depth)?;
    let total = schema.total_weight();
    let bound_weight: f64 = bindings
        .iter()
        .map(|b| schema.slots[b.slot_index].weight * b.score)
        .sum();
    let fit = if total > 0.0 { bound_weight / total } else { 0.0 };

    let bound: Vec<bool> = {
        let mut v = vec![false; schema.slots.len()];
        for b in &bindings {
            v[b.slot_index] = true;
        }
        v
    };
    let mut empty_slots: Vec<usize> = (0..schema.slots.len()).filter(|&i| !bound[i]).collect();
    empty_slots.sort_by(|&a, &b| {
        schema.slots[b]
            .weight
            .total_cmp(&schema.slots[a].weight)
            .then_with(|| a.cmp(&b))
    });

    let consumed: Vec<bool> = {
        let mut v = vec![false; features.len()];
        for b in &bindings {
            v[b.feature_index] = true;
        }
        v
    };
    let unexplained: Vec<usize> = (0..features.len()).filter(|&j| !consumed[j]).collect();

    let critical_ok = schema
        .slots
        .iter()
        .enumerate()
        .filter(|(_, s)| s.weight >= params.w_crit)
        .all(|(i, _)| {
            bindings
                .iter()
                .any(|b| b.slot_index == i && b.score >= CRITICAL_BIND_SCORE)
        });
    let verdict = if fit >= params.theta_sat && critical_ok {
        Verdict::Satisfied
    } else if fit < params.theta_imp && iteration >= 1 {
        Verdict::Impasse
    } else {
        Verdict::Gap
    };

    Ok(ConsumptionReport {
        schema_id: schema.id.clone(),
        fit,
        bindings,
        empty_slots,
        unexplained,
        verdict,
    })
}

/// Projects a report's empty slots into ranked attention bids. One entry per
/// empty slot, already in descending-weight order; this is what gets handed
/// to whatever supplies the next data.
pub fn highlight_slots(report: &ConsumptionReport, schema: &Schema) -> Vec<SlotHighlight> {
    debug_assert_eq!(report.schema_id, schema.id, "report belongs to schema");
    report
        .empty_slots
        .iter()
        .map(|&i| SlotHighlight {
            slot_index: i,
            dim: schema.slots[i].dim.clone(),
            expect: schema.slots[i].expect.clone(),
            weight: schema.slots[i].weight,
        })
        .collect()
}
