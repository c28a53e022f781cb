use std::fs;
use std::path::Path;
use std::process::Command;

fn relaysim() -> Command {
    Command::new(env!("CARGO_BIN_EXE_relaysim"))
}

fn read_csv(path: &Path) -> (String, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    assert!(text.ends_with('\n'));
    let mut lines = text.lines();
    let header = lines.next().unwrap().to_string();
    let rows = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
    (header, rows)
}

#[test]
fn oracle_prints_both_sums() {
    let out = relaysim().arg("oracle").output().unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "variance: 130, maxsnr: 90\n");
    let again = relaysim().arg("oracle").output().unwrap();
    assert_eq!(out.stderr, again.stderr);
}

#[test]
fn run_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let status = relaysim()
        .args(["run", "--slots", "10", "--seeds", "1", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let (header, rows) = read_csv(&dir.path().join("per_slot.csv"));
    assert_eq!(header, "slot,policy,seed,system_capacity_bps,direct_bps,relay_bps,jain_users_inst");
    assert_eq!(rows.iter().filter(|r| r[1] == "variance").count(), 10);
    assert_eq!(rows.iter().filter(|r| r[1] == "maxsnr").count(), 10);

    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    let ratio = summary["comparison"]["capacity_ratio_variance_over_maxsnr"].as_f64().unwrap();
    let v = summary["variance"]["cumulative_capacity"].as_f64().unwrap();
    let m = summary["maxsnr"]["cumulative_capacity"].as_f64().unwrap();
    assert!((ratio - v / m).abs() < 1e-12);
    assert_eq!(summary["variance"]["mean_system_capacity_stddev"].as_f64(), Some(0.0));
}

#[test]
fn csv_resummarizes_to_json() {
    let dir = tempfile::tempdir().unwrap();
    let status = relaysim()
        .args(["run", "--slots", "40", "--seeds", "3..5", "--policy", "variance", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let (_, rows) = read_csv(&dir.path().join("per_slot.csv"));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert!(summary.get("maxsnr").is_none() && summary.get("comparison").is_none());

    let mut per_seed_mean = Vec::new();
    let mut per_seed_jain = Vec::new();
    for seed in ["3", "4", "5"] {
        let caps: Vec<f64> = rows.iter().filter(|r| r[2] == seed).map(|r| r[3].parse().unwrap()).collect();
        assert_eq!(caps.len(), 40);
        per_seed_mean.push(caps.iter().sum::<f64>() / caps.len() as f64);
        let last = rows.iter().rfind(|r| r[2] == seed).unwrap();
        per_seed_jain.push(last[6].parse::<f64>().unwrap());
    }
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * b.abs();
    let mean = per_seed_mean.iter().sum::<f64>() / 3.0;
    assert!(close(mean, summary["variance"]["mean_system_capacity"].as_f64().unwrap()));
    let jain = per_seed_jain.iter().sum::<f64>() / 3.0;
    assert!(close(jain, summary["variance"]["jain_users"].as_f64().unwrap()));
    assert_eq!(summary["variance"]["seeds"], serde_json::json!([3, 4, 5]));
}

#[test]
fn seed_offset_env_shifts_seeds() {
    let dir = tempfile::tempdir().unwrap();
    let status = relaysim()
        .env("SIM_SEED_OFFSET", "100")
        .args(["run", "--slots", "2", "--seeds", "1,2", "--policy", "maxsnr", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["maxsnr"]["seeds"], serde_json::json!([101, 102]));

    let bad = relaysim()
        .env("SIM_SEED_OFFSET", "minus one")
        .args(["run", "--slots", "1", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(!bad.success());
}

#[test]
fn sweep_writes_one_row_per_value_and_policy() {
    let dir = tempfile::tempdir().unwrap();
    let status = relaysim()
        .args(["sweep", "--axis", "relays", "--values", "1,2,3,4,5,6", "--slots", "20", "--seeds", "1..2", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let (header, rows) = read_csv(&dir.path().join("sweep.csv"));
    assert_eq!(header, "axis,value,policy,mean_capacity_bps,jain_users,jain_relays,stddev_capacity");
    assert_eq!(rows.len(), 12);
    assert!(rows.iter().all(|r| r[0] == "relays" && r.len() == 7));

    let status = relaysim()
        .args(["sweep", "--axis", "users", "--values", "2,4,6,8,10", "--slots", "10", "--seeds", "1", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let (_, rows) = read_csv(&dir.path().join("sweep.csv"));
    assert_eq!(rows.len(), 10);
}

#[test]
fn usage_errors_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["sweep", "--axis", "relays", "--values", ""],
        vec!["sweep", "--axis", "users", "--values", "0"],
        vec!["sweep", "--axis", "cells", "--values", "1"],
        vec!["run", "--policy", "roundrobin"],
        vec!["run", "--seeds", "5..1"],
    ] {
        let out = relaysim().args(&args).arg("--out").arg(dir.path()).output().unwrap();
        assert!(!out.status.success(), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn unwritable_out_leaves_no_files() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("not-a-dir");
    fs::write(&blocker, "x").unwrap();
    let out = relaysim()
        .args(["run", "--slots", "2", "--seeds", "1", "--out"])
        .arg(blocker.join("sub"))
        .output()
        .unwrap();
    assert!(!out.status.success());
    let names: Vec<_> = fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(names, vec!["not-a-dir"]);
}

#[test]
fn config_file_is_honored() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("scenario.toml");
    fs::write(
        &cfg,
        "[system]\nnum_subchannels = 8\n\n[topology]\nnum_users = 3\nnum_relays = 1\n\n[run]\nnum_slots = 4\nseeds = [5]\npolicy = \"variance\"\n",
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let status = relaysim().arg("run").arg("--config").arg(&cfg).arg("--out").arg(&out_dir).status().unwrap();
    assert!(status.success());
    let (_, rows) = read_csv(&out_dir.join("per_slot.csv"));
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r[1] == "variance" && r[2] == "5"));

    fs::write(&cfg, "[system]\nnum_subchannels = 0\n").unwrap();
    let out = relaysim().arg("run").arg("--config").arg(&cfg).arg("--out").arg(&out_dir).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("num_subchannels"));
}

#[test]
fn verify_flag_runs_clean() {
    let dir = tempfile::tempdir().unwrap();
    let status = relaysim()
        .args(["run", "--verify", "--slots", "5", "--seeds", "1..2", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
}
