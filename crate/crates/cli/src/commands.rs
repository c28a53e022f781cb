//! The `run`, `sweep` and `oracle` subcommands.

use std::fs;
use std::path::{Path, PathBuf};

use relaysched::{
    run_batch, sweep, Allocation, BatchResult, ChannelRealization, ScheduleOptions, SchedulerPolicy, SweepAxis,
};

use crate::config::{parse_scenario, PolicySelection, Scenario};
use crate::error::{CliError, Result};
use crate::output::{render_per_slot_csv, render_summary_json, render_sweep_csv, write_atomic};
use crate::seeds::{apply_offset, parse_seed_spec};

pub const PER_SLOT_FILE: &str = "per_slot.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const SWEEP_FILE: &str = "sweep.csv";

/// Options shared by `run` and `sweep`. `None` keeps the config value.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub config: Option<PathBuf>,
    pub policy: Option<PolicySelection>,
    pub slots: Option<usize>,
    pub seeds: Option<String>,
    pub out: PathBuf,
    pub verify: bool,
    /// Added to every seed.
    pub seed_offset: u64,
}

/// Files written by a command.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OutputBundle {
    pub per_slot_csv: Option<PathBuf>,
    pub summary_json: Option<PathBuf>,
    pub sweep_csv: Option<PathBuf>,
}

/// Reads the config (or defaults) and applies command-line overrides.
pub fn load_scenario(opts: &RunOptions) -> Result<Scenario> {
    let text = match &opts.config {
        Some(path) => fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?,
        None => String::new(),
    };
    let mut scenario = parse_scenario(&text)?;
    let cfg = &mut scenario.config;
    if let Some(p) = opts.policy {
        scenario.policies = p;
        cfg.policy = p.policies()[0];
    }
    if let Some(slots) = opts.slots {
        cfg.num_slots = slots;
    }
    if let Some(spec) = &opts.seeds {
        cfg.seeds = parse_seed_spec(spec)?;
    }
    cfg.seeds = apply_offset(&cfg.seeds, opts.seed_offset);
    cfg.verify = opts.verify;
    cfg.validate()?;
    Ok(scenario)
}

/// Runs the seed batch once per selected policy, on paired seeds.
pub fn run_policies(scenario: &Scenario) -> Result<Vec<(SchedulerPolicy, BatchResult)>> {
    scenario
        .policies
        .policies()
        .into_iter()
        .map(|p| Ok((p, run_batch(&scenario.config.with_policy(p))?)))
        .collect()
}

pub fn cmd_run(opts: &RunOptions) -> Result<OutputBundle> {
    let scenario = load_scenario(opts)?;
    let batches = run_policies(&scenario)?;
    let files = [
        (PER_SLOT_FILE, render_per_slot_csv(&batches)),
        (SUMMARY_FILE, render_summary_json(&batches)),
    ];
    let paths = write_atomic(&opts.out, &files)?;
    Ok(OutputBundle {
        per_slot_csv: Some(paths[0].clone()),
        summary_json: Some(paths[1].clone()),
        sweep_csv: None,
    })
}

/// Parses a comma-separated list of axis values.
pub fn parse_values(list: &str) -> Result<Vec<usize>> {
    if list.trim().is_empty() {
        return Err(CliError::Usage("--values must list at least one value".into()));
    }
    list.split(',')
        .map(|v| {
            v.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Usage(format!("bad sweep value `{v}`")))
        })
        .collect()
}

pub fn parse_axis(name: &str) -> Result<SweepAxis> {
    match name {
        "relays" => Ok(SweepAxis::NumRelays),
        "users" => Ok(SweepAxis::NumUsers),
        other => Err(CliError::Usage(format!("unknown axis `{other}` (expected relays or users)"))),
    }
}

pub fn cmd_sweep(opts: &RunOptions, axis: SweepAxis, values: &str) -> Result<OutputBundle> {
    let values = parse_values(values)?;
    let scenario = load_scenario(opts)?;
    let rows = sweep(&scenario.config, axis, &values, &scenario.policies.policies())?;
    let paths = write_atomic(&opts.out, &[(SWEEP_FILE, render_sweep_csv(&rows))])?;
    Ok(OutputBundle {
        sweep_csv: Some(paths[0].clone()),
        ..Default::default()
    })
}

/// The two-user, two-subchannel example: rows are users, columns
/// subchannels, entries linear SNR.
pub const TABLE1: [[f64; 2]; 2] = [[60.0, 10.0], [80.0, 70.0]];

pub fn table1_channel() -> ChannelRealization {
    let rows: Vec<Vec<f64>> = TABLE1.iter().map(|r| r.to_vec()).collect();
    ChannelRealization::from_direct_table(&rows).expect("fixture is well formed")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleReport {
    pub variance: f64,
    pub maxsnr: f64,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.variance == 130.0 && self.maxsnr == 90.0
    }
}

pub type ScheduleFn = fn(SchedulerPolicy, &ChannelRealization, ScheduleOptions) -> Allocation;

/// Assigned-SNR sums of both policies on the fixture, using `schedule`.
pub fn oracle_with(schedule: ScheduleFn) -> OracleReport {
    let real = table1_channel();
    let sum = |p| schedule(p, &real, ScheduleOptions::default()).assigned_snr_sum(&real);
    OracleReport {
        variance: sum(SchedulerPolicy::RelayVariance),
        maxsnr: sum(SchedulerPolicy::RelayMaxSnr),
    }
}

pub fn cmd_oracle() -> Result<OracleReport> {
    check_oracle(oracle_with(relaysched::schedule_slot))
}

pub fn check_oracle(report: OracleReport) -> Result<OracleReport> {
    if report.passed() {
        Ok(report)
    } else {
        Err(CliError::OracleMismatch {
            variance: report.variance,
            maxsnr: report.maxsnr,
        })
    }
}

/// Reads `SIM_SEED_OFFSET`, defaulting to 0.
pub fn seed_offset_from_env() -> Result<u64> {
    match std::env::var("SIM_SEED_OFFSET") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("SIM_SEED_OFFSET must be an unsigned integer, got `{v}`"))),
        Err(std::env::VarError::NotPresent) => Ok(0),
        Err(e) => Err(CliError::Usage(format!("SIM_SEED_OFFSET: {e}"))),
    }
}

pub fn default_out_dir() -> &'static Path {
    Path::new("out")
}
