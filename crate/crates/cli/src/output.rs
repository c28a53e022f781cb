//! CSV/JSON rendering and atomic file output.
//!
//! Floats are written with Rust's shortest round-trip formatting, so equal
//! runs produce byte-identical files.

use serde_json::{json, Map, Value};
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use relaysched::sim::{BatchAggregate, Stat, SweepRow};
use relaysched::{BatchResult, SchedulerPolicy};

use crate::error::{CliError, Result};

pub const PER_SLOT_HEADER: &str = "slot,policy,seed,system_capacity_bps,direct_bps,relay_bps,jain_users_inst";
pub const SWEEP_HEADER: &str = "axis,value,policy,mean_capacity_bps,jain_users,jain_relays,stddev_capacity";

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// One row per (policy, seed, slot).
pub fn render_per_slot_csv(batches: &[(SchedulerPolicy, BatchResult)]) -> String {
    let mut out = String::new();
    writeln!(out, "{PER_SLOT_HEADER}").unwrap();
    for (policy, batch) in batches {
        for run in &batch.runs {
            for rec in &run.records {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    rec.slot,
                    policy,
                    run.seed,
                    rec.rates.system_capacity,
                    rec.rates.direct_total(),
                    rec.rates.relay_total(),
                    opt(rec.jain_users_inst)
                )
                .unwrap();
            }
        }
    }
    out
}

fn stat_fields(obj: &mut Map<String, Value>, name: &str, stat: Option<Stat>) {
    obj.insert(name.to_string(), json!(stat.map(|s| s.mean)));
    obj.insert(format!("{name}_stddev"), json!(stat.map(|s| s.stddev)));
}

fn aggregate_json(agg: &BatchAggregate, seeds: Vec<u64>) -> Value {
    let mut obj = Map::new();
    obj.insert("num_runs".into(), json!(agg.num_runs));
    obj.insert("seeds".into(), json!(seeds));
    stat_fields(&mut obj, "mean_system_capacity", Some(agg.mean_system_capacity));
    stat_fields(&mut obj, "cumulative_capacity", Some(agg.cumulative_capacity));
    stat_fields(&mut obj, "jain_users", agg.jain_users);
    stat_fields(&mut obj, "jain_relays", agg.jain_relays);
    Value::Object(obj)
}

/// Paired-seed comparison of the variance policy against max-SNR.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    /// Ratio of the across-seed mean cumulative capacities.
    pub capacity_ratio: f64,
    /// Mean of the per-seed capacity ratios.
    pub paired_capacity_ratio_mean: f64,
    /// Seeds where the variance policy ends with a strictly higher user
    /// Jain index.
    pub jain_users_wins: usize,
    pub paired_seeds: usize,
}

pub fn compare(variance: &BatchResult, maxsnr: &BatchResult) -> Comparison {
    let pairs: Vec<_> = variance.runs.iter().zip(&maxsnr.runs).collect();
    debug_assert!(pairs.iter().all(|(a, b)| a.seed == b.seed));
    let ratios: Vec<f64> = pairs
        .iter()
        .map(|(a, b)| a.summary.cumulative_capacity / b.summary.cumulative_capacity)
        .collect();
    Comparison {
        capacity_ratio: variance.aggregate.cumulative_capacity.mean / maxsnr.aggregate.cumulative_capacity.mean,
        paired_capacity_ratio_mean: ratios.iter().sum::<f64>() / ratios.len() as f64,
        jain_users_wins: pairs
            .iter()
            .filter(|(a, b)| matches!((a.summary.jain_users, b.summary.jain_users), (Some(x), Some(y)) if x > y))
            .count(),
        paired_seeds: pairs.len(),
    }
}

/// Top-level object keyed by policy name, plus a `comparison` entry when
/// both policies ran.
pub fn render_summary_json(batches: &[(SchedulerPolicy, BatchResult)]) -> String {
    let mut root = Map::new();
    for (policy, batch) in batches {
        let seeds = batch.runs.iter().map(|r| r.seed).collect();
        root.insert(policy.name().into(), aggregate_json(&batch.aggregate, seeds));
    }
    let find = |p: SchedulerPolicy| batches.iter().find(|(q, _)| *q == p).map(|(_, b)| b);
    if let (Some(v), Some(m)) = (find(SchedulerPolicy::RelayVariance), find(SchedulerPolicy::RelayMaxSnr)) {
        let c = compare(v, m);
        root.insert(
            "comparison".into(),
            json!({
                "capacity_ratio_variance_over_maxsnr": c.capacity_ratio,
                "paired_capacity_ratio_mean": c.paired_capacity_ratio_mean,
                "jain_users_variance_wins": c.jain_users_wins,
                "paired_seeds": c.paired_seeds,
            }),
        );
    }
    let mut text = serde_json::to_string_pretty(&Value::Object(root)).expect("json values are finite");
    text.push('\n');
    text
}

pub fn render_sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::new();
    writeln!(out, "{SWEEP_HEADER}").unwrap();
    for row in rows {
        let agg = &row.aggregate;
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            row.axis.name(),
            row.value,
            row.policy,
            agg.mean_system_capacity.mean,
            opt(agg.jain_users.map(|s| s.mean)),
            opt(agg.jain_relays.map(|s| s.mean)),
            agg.mean_system_capacity.stddev
        )
        .unwrap();
    }
    out
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes every `(file name, contents)` pair into `dir`.
///
/// All contents go to temporary files first and are renamed into place
/// only once every temporary file is complete. On failure the temporaries
/// are removed and no target file is touched.
pub fn write_atomic(dir: &Path, files: &[(&str, String)]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut staged: Vec<(PathBuf, PathBuf)> = Vec::new();
    let cleanup = |staged: &[(PathBuf, PathBuf)]| {
        for (tmp, _) in staged {
            let _ = fs::remove_file(tmp);
        }
    };
    for (name, _) in files {
        let target = dir.join(name);
        if target.is_dir() {
            return Err(CliError::Io {
                path: target,
                source: std::io::Error::other("target is a directory"),
            });
        }
    }
    for (name, contents) in files {
        let target = dir.join(name);
        let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
        let written = fs::File::create(&tmp).and_then(|mut f| {
            f.write_all(contents.as_bytes())?;
            f.sync_all()
        });
        if let Err(e) = written {
            let _ = fs::remove_file(&tmp);
            cleanup(&staged);
            return Err(io_err(&tmp)(e));
        }
        staged.push((tmp, target));
    }
    for (tmp, target) in &staged {
        if let Err(e) = fs::rename(tmp, target) {
            cleanup(&staged);
            return Err(io_err(target)(e));
        }
    }
    Ok(staged.into_iter().map(|(_, target)| target).collect())
}
