//! The recognition loop: gather data, activate a schema, highlight its empty
//! slots, analyze consumption, and either conclude, request more data, or
//! reset and try another schema.
//!
//! One episode is strictly sequential. Several episodes may run in parallel
//! over a shared read-only store, each with its own state, monitor, ledger
//! view, and trace.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::harness::{Scenario, ScenarioRun};
use crate::matcher::{
    self, Binding, ConsumptionReport, FeatureDatum, MatchError, SlotHighlight, Verdict,
};
use crate::memory::{self, MemoryError, MemoryEvent, MemoryEventKind, MemoryLedger};
use crate::monitor::{self, MonitorState};
use crate::params::Params;
use crate::schema_store::{self, SchemaId, SchemaStore};
use crate::trace::{
    AdoptData, ConcludeData, EpisodeTrace, MemoryData, MonitorSnapshot, ReportData, RequestData,
    ResetCause, ResetData, Terminal, TraceEvent,
};

/// What the engine wants next after one loop traversal.
#[derive(Debug, Clone, PartialEq)]
pub enum Action {
    /// Fetch data for the top-ranked empty slot. One request per iteration,
    /// so attention serializes like saccades.
    RequestData(SlotHighlight),
    /// The scene is understood; only emitted on a Satisfied verdict.
    Conclude { schema: SchemaId, fit: f64 },
    /// The current schema was abandoned. Carries the tension drop the reset
    /// produced.
    Reset { cause: ResetCause, released: f64 },
    /// Nothing to act on this tick.
    Continue,
}

/// Mutable per-episode loop state.
#[derive(Debug, Clone, Default)]
pub struct EpisodeState {
    pub tick: u64,
    pub current: Option<SchemaId>,
    /// Bypassed schema ids with the tick at which the exclusion expires.
    /// Entries with expiry <= tick are pruned before selection.
    pub bypass: BTreeMap<SchemaId, u64>,
    /// Bindings of the most recent analysis of the current schema.
    pub bound: Vec<Binding>,
    /// Fits of the current segment, one per iteration.
    pub fit_history: Vec<f64>,
    pub iteration: u32,
    pub pending_request: Option<SlotHighlight>,
    /// Working feature set, in arrival order.
    pub features: Vec<FeatureDatum>,
    /// Consecutive Satisfied iterations without new input; feeds the flip
    /// clock.
    pub satisfied_quiet_streak: u32,
}

impl EpisodeState {
    pub fn new() -> Self {
        Self::default()
    }

    fn active_bypass(&self) -> BTreeSet<SchemaId> {
        self.bypass.keys().cloned().collect()
    }
}

/// Episode bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Limits {
    pub max_ticks: u64,
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("no current schema to reset")]
    NoCurrentSchema,
    #[error("invalid limits: {0}")]
    InvalidLimits(&'static str),
    #[error(transparent)]
    Match(#[from] MatchError),
    #[error(transparent)]
    Memory(#[from] MemoryError),
}

/// Result of one loop traversal.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub action: Action,
    pub report: Option<ConsumptionReport>,
}

fn snapshot(m: &MonitorState) -> MonitorSnapshot {
    MonitorSnapshot {
        confidence: m.confidence,
        tension: m.tension,
        arousal: m.arousal,
    }
}

/// Executes exactly one loop traversal.
///
/// Merges the input into the working features, adopts a schema if none is
/// active, runs consumption analysis, folds the report into the monitor, and
/// emits the follow-up action: Satisfied concludes (unless a close rival
/// holds the percept ambiguous), a Gap requests the top highlighted slot or
/// times out, and an Impasse resets. Matcher and store errors abort the
/// episode.
pub fn step(
    state: &mut EpisodeState,
    monitor_state: &mut MonitorState,
    store: &SchemaStore,
    ledger: &mut MemoryLedger,
    trace: &mut EpisodeTrace,
    params: &Params,
    input_batch: &[FeatureDatum],
) -> Result<StepOutcome, EngineError> {
    state.tick += 1;
    let tick = state.tick;
    let new_input = !input_batch.is_empty();
    state.features.extend_from_slice(input_batch);
    state.bypass.retain(|_, expiry| *expiry > tick);
    state.pending_request = None;

    // Rank the full field once; bypass only blocks adoption, so rival
    // pressure from a muted schema still counts. Selection filters the
    // bypassed entries out, which matches ranking with the bypass set
    // applied since every schema scores independently.
    let ranked = schema_store::candidate_activations(
        store,
        &state.features,
        &BTreeSet::new(),
        monitor_state.arousal,
        params,
    )?;
    let bypassed = state.active_bypass();
    let selectable: Vec<_> = ranked
        .iter()
        .filter(|e| !bypassed.contains(&e.schema_id))
        .cloned()
        .collect();

    if state.current.is_none() {
        match schema_store::select_winner(&selectable, params.winner_floor) {
            Some(id) => {
                let entry = selectable
                    .iter()
                    .find(|e| e.schema_id == id)
                    .expect("winner comes from the ranked list");
                trace.push(
                    tick,
                    TraceEvent::Adopt(AdoptData {
                        schema: id.clone(),
                        activation: entry.activation,
                        raw_match: entry.raw_match,
                    }),
                );
                state.current = Some(id);
                state.iteration = 0;
                state.fit_history.clear();
                state.bound.clear();
                state.satisfied_quiet_streak = 0;
                // Confidence is confidence in the selected schema, so it
                // restarts here, along with the fit baseline.
                monitor_state.confidence = 0.0;
                monitor_state.last_fit = None;
            }
            None => {
                return Ok(StepOutcome {
                    action: Action::Continue,
                    report: None,
                })
            }
        }
    }

    let current = state.current.clone().expect("adopted above or preexisting");
    let report =
        matcher::consumption_analysis(store, &current, &state.features, state.iteration, params)?;
    monitor::update_monitor(monitor_state, &report, params);
    state.fit_history.push(report.fit);
    state.iteration += 1;
    state.bound = report.bindings.clone();
    trace.push(
        tick,
        TraceEvent::Report(ReportData {
            schema: current.clone(),
            iteration: state.iteration,
            fit: report.fit,
            verdict: report.verdict,
            bound: report.bindings.len(),
            empty: report.empty_slots.len(),
            unexplained: report.unexplained.len(),
            monitor: snapshot(monitor_state),
        }),
    );

    if report.verdict == Verdict::Satisfied && !new_input {
        state.satisfied_quiet_streak += 1;
    } else {
        state.satisfied_quiet_streak = 0;
    }

    let schema_strength = store.get(&current).map(|s| s.strength).unwrap_or(0.0);
    let current_activation = ranked
        .iter()
        .find(|e| e.schema_id == current)
        .map(|e| e.activation)
        .unwrap_or(0.0);
    let rivals = ranked
        .iter()
        .filter(|e| e.schema_id != current && e.activation >= params.winner_floor)
        .count();
    let rival_close = ranked
        .iter()
        .any(|e| e.schema_id != current && e.activation >= current_activation - params.delta);
    let timeout = check_timeout(state, monitor_state, schema_strength, rivals, rival_close, params);

    let action = match report.verdict {
        Verdict::Satisfied => {
            if timeout == Some(ResetCause::Flip) {
                let released = apply_reset(state, monitor_state, ledger, trace, params, ResetCause::Flip)?;
                Action::Reset {
                    cause: ResetCause::Flip,
                    released,
                }
            } else if rival_close {
                // Ambiguity hold: a rival within delta keeps the percept
                // contested, so the episode lingers until the flip clock
                // runs out instead of concluding.
                Action::Continue
            } else {
                let released = monitor::release_tension(monitor_state, params);
                monitor_state.interrupts_recent = 0;
                record_memory(
                    state,
                    ledger,
                    trace,
                    params,
                    MemoryEventKind::Success,
                    released,
                )?;
                trace.push(
                    tick,
                    TraceEvent::Conclude(ConcludeData {
                        schema: current.clone(),
                        fit: report.fit,
                        released,
                        iterations: state.iteration,
                    }),
                );
                Action::Conclude {
                    schema: current,
                    fit: report.fit,
                }
            }
        }
        Verdict::Impasse => {
            let released =
                apply_reset(state, monitor_state, ledger, trace, params, ResetCause::Impasse)?;
            Action::Reset {
                cause: ResetCause::Impasse,
                released,
            }
        }
        Verdict::Gap => {
            if timeout == Some(ResetCause::Timeout) {
                let released =
                    apply_reset(state, monitor_state, ledger, trace, params, ResetCause::Timeout)?;
                Action::Reset {
                    cause: ResetCause::Timeout,
                    released,
                }
            } else {
                let schema = store
                    .get(&current)
                    .ok_or_else(|| MatchError::UnknownSchema(current.clone()))?;
                let highlights = matcher::highlight_slots(&report, schema);
                match highlights.into_iter().next() {
                    Some(top) => {
                        state.pending_request = Some(top.clone());
                        Action::RequestData(top)
                    }
                    // Every slot is bound but the fit stays short: nothing to
                    // ask for, keep iterating until the budget runs out.
                    None => Action::Continue,
                }
            }
        }
    };

    Ok(StepOutcome {
        action,
        report: Some(report),
    })
}

/// Abandons the current schema: bypasses it for a tension-scaled number of
/// ticks, clears the segment state, and on an impasse mints a memory event
/// and retains half the tension.
///
/// Returns the tension released by the reset (zero for timeouts and flips).
pub fn apply_reset(
    state: &mut EpisodeState,
    monitor_state: &mut MonitorState,
    ledger: &mut MemoryLedger,
    trace: &mut EpisodeTrace,
    params: &Params,
    cause: ResetCause,
) -> Result<f64, EngineError> {
    let current = state.current.clone().ok_or(EngineError::NoCurrentSchema)?;
    let tension = monitor_state.tension;
    let exclusion =
        (params.bypass_min + (params.bypass_max - params.bypass_min) * tension).ceil() as u64;
    let expiry = state.tick + exclusion;
    state.bypass.insert(current.clone(), expiry);

    let mut released = 0.0;
    if cause == ResetCause::Impasse {
        record_memory(state, ledger, trace, params, MemoryEventKind::Impasse, tension)?;
        // The reset relieves some stress but not all of it.
        monitor_state.tension = 0.5 * tension;
        monitor_state.arousal = monitor_state.tension;
        released = tension - monitor_state.tension;
    }
    monitor_state.interrupts_recent += 1;

    trace.push(
        state.tick,
        TraceEvent::Reset(ResetData {
            schema: current,
            cause,
            released,
            bypass_until: expiry,
        }),
    );

    state.current = None;
    state.bound.clear();
    state.iteration = 0;
    state.fit_history.clear();
    state.pending_request = None;
    state.satisfied_quiet_streak = 0;
    Ok(released)
}

fn record_memory(
    state: &EpisodeState,
    ledger: &mut MemoryLedger,
    trace: &mut EpisodeTrace,
    params: &Params,
    kind: MemoryEventKind,
    importance: f64,
) -> Result<(), EngineError> {
    if state.features.is_empty() {
        return Ok(());
    }
    let start = state.features.len().saturating_sub(params.window_k);
    let window: Vec<FeatureDatum> = state.features[start..].to_vec();
    let window_len = window.len();
    let outcome = memory::record_event(
        ledger,
        MemoryEvent {
            kind,
            window,
            importance,
            tick: state.tick,
        },
        params,
    )?;
    trace.push(
        state.tick,
        TraceEvent::Memory(MemoryData {
            kind,
            importance: importance.clamp(0.0, 1.0),
            window: window_len,
            candidate: outcome.candidate_id,
            repetitions: outcome.repetitions,
        }),
    );
    Ok(())
}

/// Decides whether the current segment has run out of patience.
///
/// The flip clock fires after `n_flip` consecutive quiet Satisfied
/// iterations while a rival sits within delta of the winner. The stall clock
/// fires when the iterations since the last fit improvement (a gain of at
/// least epsilon over the best prior fit) reach the adaptive budget; it
/// governs Gap phases, while Satisfied holds answer only to the flip clock.
pub fn check_timeout(
    state: &EpisodeState,
    monitor_state: &MonitorState,
    schema_strength: f64,
    n_candidates: usize,
    rival_close: bool,
    params: &Params,
) -> Option<ResetCause> {
    if rival_close && state.satisfied_quiet_streak >= params.n_flip {
        return Some(ResetCause::Flip);
    }
    let mut best = 0.0f64;
    let mut stall = 0u32;
    for &fit in &state.fit_history {
        if fit - best >= params.epsilon {
            stall = 0;
        } else {
            stall += 1;
        }
        best = best.max(fit);
    }
    let budget = monitor::timeout_budget(monitor_state, schema_strength, n_candidates, params);
    if stall >= budget {
        return Some(ResetCause::Timeout);
    }
    None
}

/// Drives a full episode over a scenario: scheduled features flow in by
/// tick, attention requests are answered by the harness, and the loop steps
/// until it concludes, exhausts its options, or hits the tick ceiling.
/// Deterministic given (store, scenario, params).
pub fn run_episode(
    store: &SchemaStore,
    monitor_state: &mut MonitorState,
    ledger: &mut MemoryLedger,
    scenario: &Scenario,
    params: &Params,
    limits: &Limits,
) -> Result<EpisodeTrace, EngineError> {
    if limits.max_ticks == 0 {
        return Err(EngineError::InvalidLimits("max_ticks must be > 0"));
    }
    let mut run = ScenarioRun::new(scenario.clone());
    let mut state = EpisodeState::new();
    let mut trace = EpisodeTrace::new();
    let mut carried: Vec<FeatureDatum> = Vec::new();

    loop {
        let next_tick = state.tick + 1;
        if next_tick > limits.max_ticks {
            trace.terminal = Some(Terminal::MaxTicks);
            break;
        }
        let mut batch = std::mem::take(&mut carried);
        batch.extend(run.due_features(next_tick));
        let had_input = !batch.is_empty();
        let outcome = step(
            &mut state,
            monitor_state,
            store,
            ledger,
            &mut trace,
            params,
            &batch,
        )?;
        match outcome.action {
            Action::Conclude { schema, fit } => {
                trace.terminal = Some(Terminal::Concluded { schema, fit });
                break;
            }
            Action::RequestData(request) => {
                let answer = run.attend(&request, state.tick);
                let answered = answer.is_some();
                trace.push(
                    state.tick,
                    TraceEvent::Request(RequestData {
                        dim: request.dim.clone(),
                        weight: request.weight,
                        answered,
                        value: answer.as_ref().map(|f| f.value.clone()),
                        pos: answer.as_ref().and_then(|f| f.pos),
                    }),
                );
                if let Some(feature) = answer {
                    carried.push(feature);
                }
            }
            Action::Reset { .. } => {}
            Action::Continue => {
                let stuck = state.current.is_none()
                    && !had_input
                    && !run.pending_scheduled(state.tick)
                    && state.bypass.is_empty();
                if stuck {
                    trace.terminal = Some(Terminal::Exhausted);
                    break;
                }
            }
        }
    }
    Ok(trace)
}

/// Convenience view over a trace: the ranked entries seen at each adoption.
pub fn adoptions(trace: &EpisodeTrace) -> Vec<(u64, SchemaId)> {
    trace
        .records
        .iter()
        .filter_map(|r| match &r.event {
            TraceEvent::Adopt(d) => Some((r.tick, d.schema.clone())),
            _ => None,
        })
        .collect()
}

/// Best-so-far fit across the report events of a trace segment.
pub fn best_fit_sequence(trace: &EpisodeTrace) -> Vec<f64> {
    let mut best = 0.0f64;
    let mut out = Vec::new();
    for record in &trace.records {
        if let TraceEvent::Report(d) = &record.event {
            best = best.max(d.fit);
            out.push(best);
        }
    }
    out
}
