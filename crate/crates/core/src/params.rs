//! Tunable engine parameters with documented defaults and ranges.

use serde::{Deserialize, Serialize};

/// All knobs the engine exposes. Every field has a documented range; callers
/// that accept user input should run [`Params::validate`] before use.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Params {
    /// Arousal-congruence discount strength in [0, 1]. 0 disables the
    /// discount and makes activation purely evidential.
    pub gamma: f64,
    /// Minimum activation a candidate needs to be adopted, in [0, 1].
    pub winner_floor: f64,
    /// Fit at or above which a report is Satisfied, in (0, 1].
    pub theta_sat: f64,
    /// Fit below which a report is an Impasse (after the first iteration),
    /// in [0, 1) and below `theta_sat`.
    pub theta_imp: f64,
    /// Slots with weight at or above this are critical and must be bound
    /// before a report counts as Satisfied. In (0, 1].
    pub w_crit: f64,
    /// Confidence gain per unit of fit improvement, in [0, 1].
    pub alpha: f64,
    /// Tension gain per unit of unexplained fit, in [0, 1].
    pub beta: f64,
    /// Fraction of tension released at a successful conclusion, in [0, 1].
    pub rho: f64,
    /// Base for the adaptive timeout budget, >= 1.
    pub timeout_base: f64,
    /// Consecutive quiet Satisfied iterations before an ambiguous percept
    /// flips, >= 1.
    pub n_flip: u32,
    /// A rival within this activation distance of the winner makes the
    /// percept ambiguous, in [0, 1].
    pub delta: f64,
    /// Minimum fit gain that counts as improvement for stall detection, > 0.
    pub epsilon: f64,
    /// Bypass duration at zero tension, in ticks, >= 0.
    pub bypass_min: f64,
    /// Bypass duration at full tension, in ticks, >= `bypass_min`.
    pub bypass_max: f64,
    /// Number of trailing features captured in a memory-event window, >= 1.
    pub window_k: usize,
    /// Importance at or above which a single event consolidates
    /// instantaneously, in [0, 1].
    pub tau_instant: f64,
    /// Strength added to a candidate each time its window repeats, in (0, 1].
    pub strength_increment: f64,
    /// Multiplier applied to every candidate strength during sleep, in (0, 1].
    pub sleep_decay: f64,
    /// Candidates below this strength are prunable during sleep, in [0, 1].
    pub prune_strength: f64,
    /// Candidates older than this many ticks are prunable during sleep.
    pub prune_age: u64,
    /// Maximum slots per schema the binder accepts.
    pub slot_cap: usize,
    /// Maximum features per analysis the binder accepts.
    pub feature_cap: usize,
    /// Maximum sub-schema nesting depth at match time.
    pub depth_limit: usize,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            gamma: 0.5,
            winner_floor: 0.05,
            theta_sat: 0.9,
            theta_imp: 0.2,
            w_crit: 0.8,
            alpha: 0.5,
            beta: 0.1,
            rho: 0.8,
            timeout_base: 5.0,
            n_flip: 10,
            delta: 0.1,
            epsilon: 0.01,
            bypass_min: 3.0,
            bypass_max: 30.0,
            window_k: 8,
            tau_instant: 0.8,
            strength_increment: 0.2,
            sleep_decay: 0.9,
            prune_strength: 0.3,
            prune_age: 100,
            slot_cap: 16,
            feature_cap: 16,
            depth_limit: 8,
        }
    }
}

impl Params {
    /// Checks every field against its documented range and returns the first
    /// violation as a human-readable message.
    pub fn validate(&self) -> Result<(), String> {
        fn unit(name: &str, v: f64) -> Result<(), String> {
            if v.is_finite() && (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(format!("{name} must lie in [0, 1], got {v}"))
            }
        }
        unit("gamma", self.gamma)?;
        unit("winner_floor", self.winner_floor)?;
        if !(self.theta_sat > 0.0 && self.theta_sat <= 1.0) {
            return Err(format!(
                "theta_sat must lie in (0, 1], got {}",
                self.theta_sat
            ));
        }
        unit("theta_imp", self.theta_imp)?;
        if self.theta_imp >= self.theta_sat {
            return Err(format!(
                "theta_imp ({}) must be below theta_sat ({})",
                self.theta_imp, self.theta_sat
            ));
        }
        if !(self.w_crit > 0.0 && self.w_crit <= 1.0) {
            return Err(format!("w_crit must lie in (0, 1], got {}", self.w_crit));
        }
        unit("alpha", self.alpha)?;
        unit("beta", self.beta)?;
        unit("rho", self.rho)?;
        if !(self.timeout_base >= 1.0 && self.timeout_base.is_finite()) {
            return Err(format!(
                "timeout_base must be >= 1, got {}",
                self.timeout_base
            ));
        }
        if self.n_flip == 0 {
            return Err("n_flip must be >= 1".to_string());
        }
        unit("delta", self.delta)?;
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(format!("epsilon must be > 0, got {}", self.epsilon));
        }
        if !(self.bypass_min >= 0.0 && self.bypass_min.is_finite()) {
            return Err(format!("bypass_min must be >= 0, got {}", self.bypass_min));
        }
        if !(self.bypass_max >= self.bypass_min && self.bypass_max.is_finite()) {
            return Err(format!(
                "bypass_max ({}) must be >= bypass_min ({})",
                self.bypass_max, self.bypass_min
            ));
        }
        if self.window_k == 0 {
            return Err("window_k must be >= 1".to_string());
        }
        unit("tau_instant", self.tau_instant)?;
        if !(self.strength_increment > 0.0 && self.strength_increment <= 1.0) {
            return Err(format!(
                "strength_increment must lie in (0, 1], got {}",
                self.strength_increment
            ));
        }
        if !(self.sleep_decay > 0.0 && self.sleep_decay <= 1.0) {
            return Err(format!(
                "sleep_decay must lie in (0, 1], got {}",
                self.sleep_decay
            ));
        }
        unit("prune_strength", self.prune_strength)?;
        if self.slot_cap == 0 || self.feature_cap == 0 {
            return Err("slot_cap and feature_cap must be >= 1".to_string());
        }
        if self.slot_cap > 16 || self.feature_cap > 16 {
            return Err("slot_cap and feature_cap must be <= 16".to_string());
        }
        if self.depth_limit == 0 {
            return Err("depth_limit must be >= 1".to_string());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        Params::default().validate().expect("defaults must validate");
    }

    #[test]
    fn out_of_range_theta_sat_is_rejected() {
        let p = Params {
            theta_sat: 1.5,
            ..Params::default()
        };
        let msg = p.validate().unwrap_err();
        assert!(msg.contains("theta_sat"), "message names the field: {msg}");
    }

    #[test]
    fn theta_ordering_is_enforced() {
        let p = Params {
            theta_imp: 0.95,
            ..Params::default()
        };
        assert!(p.validate().is_err());
    }
}
