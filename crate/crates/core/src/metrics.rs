//! Fairness and throughput summaries.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::rates::{frame_objective, RateState};

/// Jain's fairness index `(Σx)² / (n·Σx²)`.
///
/// Defined for nonnegative inputs with at least one positive value; lies in
/// `[1/n, 1]` and equals 1 only when all values are equal.
pub fn jain_index(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(domain("Jain index of an empty vector"));
    }
    if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(domain("Jain index needs finite nonnegative values"));
    }
    let sum: f64 = values.iter().sum();
    let sum_sq: f64 = values.iter().map(|v| v * v).sum();
    if sum_sq == 0.0 {
        return Err(domain("Jain index undefined for an all-zero vector"));
    }
    Ok((sum * sum / (values.len() as f64 * sum_sq)).min(1.0))
}

/// Summary of one seeded run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    /// Mean `C_Sys(t)` over slots, bit/s.
    pub mean_system_capacity: f64,
    /// Sum of `C_Sys(t)` over slots.
    pub cumulative_capacity: f64,
    /// Jain index over the users' final moving averages.
    pub jain_users: Option<f64>,
    /// Jain index over the effective bits routed through each relay.
    pub jain_relays: Option<f64>,
    pub per_slot_capacity: Vec<f64>,
}

pub fn summarize_run(per_slot_capacity: &[f64], final_state: &RateState) -> Result<RunSummary> {
    if per_slot_capacity.is_empty() {
        return Err(domain("cannot summarize a run with no slots"));
    }
    let cumulative_capacity = frame_objective(per_slot_capacity);
    Ok(RunSummary {
        mean_system_capacity: cumulative_capacity / per_slot_capacity.len() as f64,
        cumulative_capacity,
        jain_users: jain_index(&final_state.avg_rate).ok(),
        jain_relays: jain_index(&final_state.cumulative_relay_throughput).ok(),
        per_slot_capacity: per_slot_capacity.to_vec(),
    })
}
