//! Self-monitoring: confidence and tension integration, tension release at
//! success, and the adaptive timeout budget.

use crate::matcher::{ConsumptionReport, Verdict};
use crate::params::Params;

/// Per-episode affect levels. All level fields stay in [0, 1] after every
/// update; arousal is identified with tension rather than integrated
/// separately.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MonitorState {
    /// Integrated signal of improving fit for the selected schema.
    pub confidence: f64,
    /// Integrated signal of unresolved discrepancy. Released at success.
    pub tension: f64,
    /// Global excitation level; kept equal to tension by every update.
    pub arousal: f64,
    pub last_fit: Option<f64>,
    /// Resets seen since the episode last concluded. Tracked for trace
    /// inspection; no formula reads it.
    pub interrupts_recent: u32,
}

impl MonitorState {
    pub fn new() -> Self {
        Self::default()
    }
}

fn clamp01(v: f64) -> f64 {
    v.clamp(0.0, 1.0)
}

/// Folds one consumption report into the monitor.
///
/// Confidence grows with positive fit deltas (alpha-weighted); tension grows
/// with the unexplained remainder on every verdict except Satisfied
/// (beta-weighted). Both are clamped to [0, 1].
pub fn update_monitor(m: &mut MonitorState, report: &ConsumptionReport, params: &Params) {
    let last = m.last_fit.unwrap_or(0.0);
    let delta = report.fit - last;
    m.confidence = clamp01(m.confidence + params.alpha * delta.max(0.0));
    if report.verdict != Verdict::Satisfied {
        m.tension = clamp01(m.tension + params.beta * (1.0 - report.fit));
    }
    m.arousal = m.tension;
    m.last_fit = Some(report.fit);
}

/// Releases the rho fraction of piled-up tension at a successful conclusion
/// and returns the released amount, which callers stamp into the conclude
/// trace event and into memory importance.
pub fn release_tension(m: &mut MonitorState, params: &Params) -> f64 {
    let released = params.rho * m.tension;
    m.tension -= released;
    m.arousal = m.tension;
    released
}

/// Number of stalled iterations tolerated before a timeout.
///
/// More confidence and schema strength buy patience; tension and rival
/// candidates spend it. Never below 1.
pub fn timeout_budget(
    m: &MonitorState,
    schema_strength: f64,
    n_candidates: usize,
    params: &Params,
) -> u32 {
    let rivals = n_candidates.min(5) as f64 / 5.0;
    let budget = params.timeout_base * (1.0 + m.confidence) * (1.0 + schema_strength)
        / ((1.0 + m.tension) * (1.0 + rivals));
    (budget.round() as u32).max(1)
}
