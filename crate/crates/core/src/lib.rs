//! A deterministic engine for schema-driven iterative recognition.
//!
//! Input features activate stored schemata; the strongest candidate wins a
//! mutual-exclusion competition and its unfilled slots become expectations
//! that steer the next data request. Consumption analysis grades how well
//! the evidence fills the schema and decides whether to conclude, gather
//! more, or reset to a rival. A monitor integrates the interim outcomes into
//! confidence and tension, which in turn scale timeouts, reset
//! pronouncedness, and the importance of memories minted at impasses and
//! successes. Everything is tick-based and fully deterministic, so traces
//! replay byte for byte.

pub mod fixtures;
pub mod harness;
pub mod loop_engine;
pub mod matcher;
pub mod memory;
pub mod monitor;
pub mod params;
pub mod schema_store;
pub mod trace;

pub use harness::{scan_path, HarnessError, RevealPolicy, ScanPath, Scenario, ScenarioRun};
pub use loop_engine::{
    run_episode, step, Action, EngineError, EpisodeState, Limits, StepOutcome,
};
pub use matcher::{
    Binding, ConsumptionReport, FeatureDatum, FeatureValue, MatchError, SlotHighlight, Verdict,
};
pub use memory::{
    CandidateSchema, MemoryError, MemoryEvent, MemoryEventKind, MemoryLedger, SleepReport,
};
pub use monitor::MonitorState;
pub use params::Params;
pub use schema_store::{
    ActivationEntry, DimensionId, Expectation, Provenance, Schema, SchemaId, SchemaStore, Slot,
    StoreError,
};
pub use trace::{EpisodeTrace, ResetCause, Terminal, TraceEvent, TraceRecord};
