//! Episode traces: one JSON object per event, fixed field order, so that
//! identical runs serialize to identical bytes.

use serde::{Deserialize, Serialize};

use crate::matcher::{FeatureValue, Verdict};
use crate::memory::MemoryEventKind;
use crate::schema_store::{DimensionId, SchemaId};

/// Why a reset fired. Every reset in a trace carries exactly one cause.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResetCause {
    Impasse,
    Timeout,
    Flip,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonitorSnapshot {
    pub confidence: f64,
    pub tension: f64,
    pub arousal: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdoptData {
    pub schema: SchemaId,
    pub activation: f64,
    pub raw_match: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportData {
    pub schema: SchemaId,
    pub iteration: u32,
    pub fit: f64,
    pub verdict: Verdict,
    pub bound: usize,
    pub empty: usize,
    pub unexplained: usize,
    pub monitor: MonitorSnapshot,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RequestData {
    pub dim: DimensionId,
    pub weight: f64,
    pub answered: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<FeatureValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pos: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResetData {
    pub schema: SchemaId,
    pub cause: ResetCause,
    pub released: f64,
    pub bypass_until: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcludeData {
    pub schema: SchemaId,
    pub fit: f64,
    pub released: f64,
    pub iterations: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemoryData {
    pub kind: MemoryEventKind,
    pub importance: f64,
    pub window: usize,
    pub candidate: SchemaId,
    pub repetitions: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SleepData {
    pub pruned: usize,
    pub decayed: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TraceEvent {
    Adopt(AdoptData),
    Report(ReportData),
    Request(RequestData),
    Reset(ResetData),
    Conclude(ConcludeData),
    Memory(MemoryData),
    Sleep(SleepData),
}

impl TraceEvent {
    pub fn name(&self) -> &'static str {
        match self {
            TraceEvent::Adopt(_) => "adopt",
            TraceEvent::Report(_) => "report",
            TraceEvent::Request(_) => "request",
            TraceEvent::Reset(_) => "reset",
            TraceEvent::Conclude(_) => "conclude",
            TraceEvent::Memory(_) => "memory",
            TraceEvent::Sleep(_) => "sleep",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub tick: u64,
    pub event: TraceEvent,
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    tick: u64,
    event: &'static str,
    data: &'a T,
}

impl TraceRecord {
    /// Encodes the record as `{"tick":..,"event":..,"data":{..}}` with field
    /// order fixed by the struct declarations.
    pub fn to_json_line(&self) -> String {
        fn enc<T: Serialize>(tick: u64, event: &'static str, data: &T) -> String {
            serde_json::to_string(&Envelope { tick, event, data }).expect("trace serializes")
        }
        match &self.event {
            TraceEvent::Adopt(d) => enc(self.tick, "adopt", d),
            TraceEvent::Report(d) => enc(self.tick, "report", d),
            TraceEvent::Request(d) => enc(self.tick, "request", d),
            TraceEvent::Reset(d) => enc(self.tick, "reset", d),
            TraceEvent::Conclude(d) => enc(self.tick, "conclude", d),
            TraceEvent::Memory(d) => enc(self.tick, "memory", d),
            TraceEvent::Sleep(d) => enc(self.tick, "sleep", d),
        }
    }

    pub fn from_json_line(line: &str) -> Result<Self, String> {
        #[derive(Deserialize)]
        struct Raw {
            tick: u64,
            event: String,
            data: serde_json::Value,
        }
        let raw: Raw = serde_json::from_str(line).map_err(|e| e.to_string())?;
        let event = match raw.event.as_str() {
            "adopt" => TraceEvent::Adopt(serde_json::from_value(raw.data).map_err(|e| e.to_string())?),
            "report" => TraceEvent::Report(serde_json::from_value(raw.data).map_err(|e| e.to_string())?),
            "request" => TraceEvent::Request(serde_json::from_value(raw.data).map_err(|e| e.to_string())?),
            "reset" => TraceEvent::Reset(serde_json::from_value(raw.data).map_err(|e| e.to_string())?),
            "conclude" => TraceEvent::Conclude(serde_json::from_value(raw.data).map_err(|e| e.to_string())?),
            "memory" => TraceEvent::Memory(serde_json::from_value(raw.data).map_err(|e| e.to_string())?),
            "sleep" => TraceEvent::Sleep(serde_json::from_value(raw.data).map_err(|e| e.to_string())?),
            other => return Err(format!("unknown trace event `{other}`")),
        };
        Ok(TraceRecord { tick: raw.tick, event })
    }
}

/// How an episode ended. Hitting the tick ceiling is a terminal, not a
/// failure.
#[derive(Debug, Clone, PartialEq)]
pub enum Terminal {
    Concluded { schema: SchemaId, fit: f64 },
    MaxTicks,
    Exhausted,
}

/// The full ordered record of one episode.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EpisodeTrace {
    pub records: Vec<TraceRecord>,
    /// Set once the episode has ended; `None` while stepping manually.
    pub terminal: Option<Terminal>,
}

impl EpisodeTrace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, tick: u64, event: TraceEvent) {
        self.records.push(TraceRecord { tick, event });
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for record in &self.records {
            out.push_str(&record.to_json_line());
            out.push('\n');
        }
        out
    }

    pub fn parse_jsonl(text: &str) -> Result<Vec<TraceRecord>, String> {
        text.lines()
            .filter(|l| !l.trim().is_empty())
            .map(TraceRecord::from_json_line)
            .collect()
    }

    /// Number of consumption analyses in the trace.
    pub fn iterations(&self) -> usize {
        self.records
            .iter()
            .filter(|r| matches!(r.event, TraceEvent::Report(_)))
            .count()
    }

    pub fn count(&self, name: &str) -> usize {
        self.records.iter().filter(|r| r.event.name() == name).count()
    }
}
