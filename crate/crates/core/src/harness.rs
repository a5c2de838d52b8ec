//! Scenario harness: ground truth features with reveal policies, attention
//! answering, and scan-path extraction from traces.

use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matcher::{FeatureDatum, FeatureValue, SlotHighlight};
use crate::schema_store::DimensionId;
use crate::trace::{EpisodeTrace, TraceEvent};

/// When a ground feature becomes visible to the engine.
#[derive(Debug, Clone, PartialEq)]
pub enum RevealPolicy {
    /// Part of the opening batch.
    Initial,
    /// Delivered passively at the given tick.
    AtTick(u64),
    /// Delivered only when attention requests the given dimension.
    OnRequest(DimensionId),
}

/// A static or scripted scene: ground features paired with reveal policies.
/// Needs at least one Initial feature to seed the loop.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub ground: Vec<(FeatureDatum, RevealPolicy)>,
}

/// Ordered attention targets recovered from a trace. Ticks are strictly
/// increasing.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScanPath {
    pub points: Vec<(u64, (f64, f64))>,
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("scenario has no Initial feature to seed the loop")]
    NoInitialFeature,
    #[error("io error: {0}")]
    Io(#[from] io::Error),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum PolicyLine {
    Initial,
    AtTick {
        t: u64,
    },
    OnRequest {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dim: Option<DimensionId>,
    },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GroundLine {
    dim: DimensionId,
    value: FeatureValue,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pos: Option<(f64, f64)>,
    policy: PolicyLine,
    salience: f64,
}

impl Scenario {
    pub fn check(&self) -> Result<(), HarnessError> {
        if !self
            .ground
            .iter()
            .any(|(_, p)| matches!(p, RevealPolicy::Initial))
        {
            return Err(HarnessError::NoInitialFeature);
        }
        Ok(())
    }
}

/// Parses one JSON object per line; unknown fields and out-of-range salience
/// are rejected with the offending 1-based line number.
pub fn parse_scenario(name: &str, text: &str) -> Result<Scenario, HarnessError> {
    let mut ground = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: GroundLine = serde_json::from_str(line).map_err(|e| HarnessError::Parse {
            line: line_no,
            reason: e.to_string(),
        })?;
        if !(parsed.salience >= 0.0 && parsed.salience <= 1.0) {
            return Err(HarnessError::Parse {
                line: line_no,
                reason: format!("salience {} outside [0, 1]", parsed.salience),
            });
        }
        if parsed.dim.0.is_empty() {
            return Err(HarnessError::Parse {
                line: line_no,
                reason: "dimension must be a non-empty token".to_string(),
            });
        }
        let policy = match parsed.policy {
            PolicyLine::Initial => RevealPolicy::Initial,
            PolicyLine::AtTick { t } => RevealPolicy::AtTick(t),
            PolicyLine::OnRequest { dim } => {
                RevealPolicy::OnRequest(dim.unwrap_or_else(|| parsed.dim.clone()))
            }
        };
        ground.push((
            FeatureDatum {
                dim: parsed.dim,
                value: parsed.value,
                pos: parsed.pos,
                tick: 0,
                salience: parsed.salience,
            },
            policy,
        ));
    }
    let scenario = Scenario {
        name: name.to_string(),
        ground,
    };
    scenario.check()?;
    Ok(scenario)
}

pub fn scenario_to_jsonl(scenario: &Scenario) -> String {
    let mut out = String::new();
    for (feature, policy) in &scenario.ground {
        let line = GroundLine {
            dim: feature.dim.clone(),
            value: feature.value.clone(),
            pos: feature.pos,
            policy: match policy {
                RevealPolicy::Initial => PolicyLine::Initial,
                RevealPolicy::AtTick(t) => PolicyLine::AtTick { t: *t },
                RevealPolicy::OnRequest(dim) => PolicyLine::OnRequest {
                    dim: Some(dim.clone()),
                },
            },
            salience: feature.salience,
        };
        out.push_str(&serde_json::to_string(&line).expect("scenario serializes"));
        out.push('\n');
    }
    out
}

/// Builds a scenario from a spec file, named after the file stem.
pub fn build_scenario(path: &Path) -> Result<Scenario, HarnessError> {
    let text = fs::read_to_string(path)?;
    let name = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("scenario");
    parse_scenario(name, &text)
}

pub fn save_scenario(scenario: &Scenario, path: &Path) -> Result<(), HarnessError> {
    fs::write(path, scenario_to_jsonl(scenario))?;
    Ok(())
}

/// Per-episode reveal state over a scenario. A ground feature is delivered
/// at most once.
#[derive(Debug, Clone)]
pub struct ScenarioRun {
    scenario: Scenario,
    revealed: Vec<bool>,
}

impl ScenarioRun {
    pub fn new(scenario: Scenario) -> Self {
        let revealed = vec![false; scenario.ground.len()];
        Self { scenario, revealed }
    }

    /// Features scheduled for `tick`: Initial features on the first tick plus
    /// every AtTick feature now due. Delivered features are stamped with the
    /// tick.
    pub fn due_features(&mut self, tick: u64) -> Vec<FeatureDatum> {
        let mut out = Vec::new();
        for (i, (feature, policy)) in self.scenario.ground.iter().enumerate() {
            if self.revealed[i] {
                continue;
            }
            let due = match policy {
                RevealPolicy::Initial => tick >= 1,
                RevealPolicy::AtTick(t) => tick >= *t,
                RevealPolicy::OnRequest(_) => false,
            };
            if due {
                self.revealed[i] = true;
                let mut f = feature.clone();
                f.tick = tick;
                out.push(f);
            }
        }
        out
    }

    /// Answers an attention request with the first unrevealed OnRequest
    /// feature on the requested dimension, in ground-list order. Returns
    /// `None` when nothing matches; the engine then proceeds with a gap and
    /// may time out.
    pub fn attend(&mut self, request: &SlotHighlight, tick: u64) -> Option<FeatureDatum> {
        for (i, (feature, policy)) in self.scenario.ground.iter().enumerate() {
            if self.revealed[i] {
                continue;
            }
            if let RevealPolicy::OnRequest(dim) = policy {
                if dim == &request.dim {
                    self.revealed[i] = true;
                    let mut f = feature.clone();
                    f.tick = tick;
                    return Some(f);
                }
            }
        }
        None
    }

    /// True while undelivered Initial or AtTick features remain beyond
    /// `tick`.
    pub fn pending_scheduled(&self, tick: u64) -> bool {
        self.scenario
            .ground
            .iter()
            .enumerate()
            .any(|(i, (_, policy))| {
                !self.revealed[i]
                    && match policy {
                        RevealPolicy::Initial => tick < 1,
                        RevealPolicy::AtTick(t) => *t > tick,
                        RevealPolicy::OnRequest(_) => false,
                    }
            })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }
}

/// Positions of every feature revealed by an attention request, in trace
/// order. Passive AtTick reveals contribute nothing.
pub fn scan_path(trace: &EpisodeTrace) -> ScanPath {
    let mut points = Vec::new();
    for record in &trace.records {
        if let TraceEvent::Request(data) = &record.event {
            if let (true, Some(pos)) = (data.answered, data.pos) {
                points.push((record.tick, pos));
            }
        }
    }
    ScanPath { points }
}
