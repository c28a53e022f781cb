//! The per-slot simulation loop, seed batches and parameter sweeps.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{draw_channel, ChannelParams, ChannelRealization};
use crate::error::{Error, Result};
use crate::metrics::{jain_index, summarize_run, RunSummary};
use crate::model::{validate_config, CommMode, SystemConfig, Topology};
use crate::rates::{compute_slot_rates, RateState, SlotRates};
use crate::scheduler::{constraint_violations, schedule_slot, Allocation, ScheduleOptions, SchedulerPolicy};

/// Everything needed to reproduce a batch of runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub system: SystemConfig,
    pub topology: Topology,
    /// `seed` is overwritten per run from `seeds`.
    pub channel: ChannelParams,
    pub policy: SchedulerPolicy,
    pub num_slots: usize,
    pub seeds: Vec<u64>,
    pub multi_round: bool,
    /// Check C1–C3 on every slot even in release builds.
    pub verify: bool,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            system: SystemConfig::default(),
            topology: Topology::default(),
            channel: ChannelParams::default(),
            policy: SchedulerPolicy::RelayVariance,
            num_slots: 1000,
            seeds: (1..=20).collect(),
            multi_round: false,
            verify: false,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        validate_config(&self.system, &self.topology)?;
        self.channel.validate()?;
        if self.num_slots < 1 {
            return Err(Error::InvalidConfig("num_slots must be ≥ 1".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::InvalidConfig("seeds must not be empty".into()));
        }
        Ok(())
    }

    pub fn with_policy(&self, policy: SchedulerPolicy) -> Self {
        Self {
            policy,
            ..self.clone()
        }
    }

    fn options(&self) -> ScheduleOptions {
        ScheduleOptions {
            multi_round: self.multi_round,
        }
    }
}

/// Compact description of one slot's allocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationDigest {
    pub direct_users: usize,
    pub relayed_users: usize,
    pub hop1_used: usize,
    pub hop2_used: usize,
    /// Sum of end-to-end SNRs over all grants.
    pub assigned_snr_sum: f64,
}

impl AllocationDigest {
    fn new(alloc: &Allocation, real: &ChannelRealization) -> Self {
        let count = |want_direct: bool| {
            alloc
                .mode_of
                .iter()
                .filter(|m| matches!(m, Some(CommMode::Direct)) == want_direct && m.is_some())
                .count()
        };
        let direct_first = alloc.alpha_direct.iter().filter(|(_, _, t)| t.index() == 0).count();
        let direct_second = alloc.alpha_direct.len() - direct_first;
        Self {
            direct_users: count(true),
            relayed_users: count(false),
            hop1_used: direct_first + alloc.alpha_relay_hop1.len(),
            hop2_used: direct_second + alloc.beta_hop2.len(),
            assigned_snr_sum: alloc.assigned_snr_sum(real),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotRecord {
    pub slot: usize,
    pub allocation: AllocationDigest,
    pub rates: SlotRates,
    /// Jain index over the moving averages right after this slot.
    pub jain_users_inst: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub policy: SchedulerPolicy,
    pub seed: u64,
    pub records: Vec<SlotRecord>,
    pub final_state: RateState,
    pub summary: RunSummary,
}

/// Runs one seed of `scenario` with freshly drawn channels.
pub fn run(scenario: &ScenarioConfig, seed: u64) -> Result<RunResult> {
    run_with_channel(scenario, seed, None)
}

/// Runs one seed; when `fixed` is given it replaces the random channel in
/// every slot.
pub fn run_with_channel(
    scenario: &ScenarioConfig,
    seed: u64,
    fixed: Option<&ChannelRealization>,
) -> Result<RunResult> {
    scenario.validate()?;
    let cfg = &scenario.system;
    let topo = &scenario.topology;
    if let Some(real) = fixed {
        real.check_dims(cfg, topo)?;
        real.validate()?;
    }
    let params = ChannelParams {
        seed,
        ..scenario.channel.clone()
    };
    let opts = scenario.options();
    let check = scenario.verify || cfg!(debug_assertions);

    let mut state = RateState::new(topo);
    let mut records = Vec::with_capacity(scenario.num_slots);
    let mut capacities = Vec::with_capacity(scenario.num_slots);
    for slot in 0..scenario.num_slots {
        let drawn;
        let real = match fixed {
            Some(real) => real,
            None => {
                drawn = draw_channel(&params, cfg, topo, slot as u64)?;
                &drawn
            }
        };
        let alloc = schedule_slot(scenario.policy, real, opts);
        if check {
            let violations = constraint_violations(&alloc, real, scenario.multi_round);
            if !violations.is_empty() {
                return Err(Error::ConstraintViolation {
                    slot,
                    detail: violations.join("; "),
                });
            }
        }
        let rates = compute_slot_rates(&alloc, real, cfg, topo)?;
        state.update(&rates, cfg.avg_window)?;
        capacities.push(rates.system_capacity);
        records.push(SlotRecord {
            slot,
            allocation: AllocationDigest::new(&alloc, real),
            rates,
            jain_users_inst: jain_index(&state.avg_rate).ok(),
        });
    }
    let summary = summarize_run(&capacities, &state)?;
    Ok(RunResult {
        policy: scenario.policy,
        seed,
        records,
        final_state: state,
        summary,
    })
}

/// Mean and sample standard deviation across seeds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub stddev: f64,
}

impl Stat {
    /// `None` for an empty sample. A single value has zero spread.
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let stddev = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Some(Self { mean, stddev })
    }
}

/// Across-seed statistics of every scalar `RunSummary` field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchAggregate {
    pub num_runs: usize,
    pub mean_system_capacity: Stat,
    pub cumulative_capacity: Stat,
    /// Over the runs where the index is defined.
    pub jain_users: Option<Stat>,
    pub jain_relays: Option<Stat>,
}

impl BatchAggregate {
    pub fn from_summaries<'a>(summaries: impl IntoIterator<Item = &'a RunSummary>) -> Option<Self> {
        let summaries: Vec<&RunSummary> = summaries.into_iter().collect();
        let collect = |f: &dyn Fn(&RunSummary) -> Option<f64>| -> Vec<f64> {
            summaries.iter().filter_map(|s| f(s)).collect()
        };
        Some(Self {
            num_runs: summaries.len(),
            mean_system_capacity: Stat::of(&collect(&|s| Some(s.mean_system_capacity)))?,
            cumulative_capacity: Stat::of(&collect(&|s| Some(s.cumulative_capacity)))?,
            jain_users: Stat::of(&collect(&|s| s.jain_users)),
            jain_relays: Stat::of(&collect(&|s| s.jain_relays)),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchResult {
    pub runs: Vec<RunResult>,
    pub aggregate: BatchAggregate,
}

/// Runs every seed of `scenario` under `scenario.policy`, in parallel.
pub fn run_batch(scenario: &ScenarioConfig) -> Result<BatchResult> {
    run_batch_with_channel(scenario, None)
}

pub fn run_batch_with_channel(scenario: &ScenarioConfig, fixed: Option<&ChannelRealization>) -> Result<BatchResult> {
    scenario.validate()?;
    let runs = scenario
        .seeds
        .par_iter()
        .map(|&seed| run_with_channel(scenario, seed, fixed))
        .collect::<Result<Vec<_>>>()?;
    let aggregate = BatchAggregate::from_summaries(runs.iter().map(|r| &r.summary)).expect("seeds validated nonempty");
    Ok(BatchResult { runs, aggregate })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepAxis {
    NumRelays,
    NumUsers,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::NumRelays => "relays",
            SweepAxis::NumUsers => "users",
        }
    }

    fn apply(self, topo: &mut Topology, value: usize) {
        match self {
            SweepAxis::NumRelays => topo.num_relays = value,
            SweepAxis::NumUsers => topo.num_users = value,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis: SweepAxis,
    pub value: usize,
    pub policy: SchedulerPolicy,
    pub aggregate: BatchAggregate,
}

/// Re-runs the batch for every axis value and policy. Rows are ordered by
/// value, then by the order of `policies`.
pub fn sweep(
    scenario: &ScenarioConfig,
    axis: SweepAxis,
    values: &[usize],
    policies: &[SchedulerPolicy],
) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(Error::InvalidConfig("sweep needs at least one value".into()));
    }
    let mut points = Vec::new();
    for &value in values {
        let mut topo = scenario.topology;
        axis.apply(&mut topo, value);
        validate_config(&scenario.system, &topo)
            .map_err(|e| Error::InvalidConfig(format!("{} = {value}: {e}", axis.name())))?;
        for &policy in policies {
            let point = ScenarioConfig {
                topology: topo,
                policy,
                ..scenario.clone()
            };
            points.push((value, point));
        }
    }
    points
        .par_iter()
        .map(|(value, point)| {
            let batch = run_batch(point)?;
            Ok(SweepRow {
                axis,
                value: *value,
                policy: point.policy,
                aggregate: batch.aggregate,
            })
        })
        .collect()
}
