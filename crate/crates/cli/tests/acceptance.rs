//! Exit criteria of the simulator. Each test prints one PASS/FAIL line.
//!
//! Run with `cargo test -p relaysim --test acceptance -- --nocapture` to
//! see the report.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fs;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use relaysched::scheduler::{maxsnr_select, variance_metric};
use relaysched::{
    constraint_violations, draw_channel, jain_index, link_capacity, schedule_slot, update_average, BatchResult,
    ChannelParams, ChannelRealization, Grant, Pools, RelayId, ScheduleOptions, SchedulerPolicy, SubSlot, SubchannelId,
    SystemConfig, Topology, UserId,
};
use relaysim::commands::{load_scenario, run_policies, table1_channel, TABLE1};
use relaysim::output::{compare, render_summary_json};
use relaysim::{cmd_oracle, cmd_run, RunOptions};

fn report(id: &str, pass: bool, detail: impl std::fmt::Display) {
    println!("[{}] criterion {id}: {detail}", if pass { "PASS" } else { "FAIL" });
}

#[test]
fn c1_table1_exact_oracle() {
    let start = Instant::now();
    let result = cmd_oracle();
    let elapsed = start.elapsed();
    let pass = matches!(result, Ok(r) if r.variance == 130.0 && r.maxsnr == 90.0) && elapsed < Duration::from_secs(1);
    report("1", pass, format!("oracle sums {result:?} in {elapsed:?}"));
    assert!(pass);
}

#[test]
fn c2_variance_ordering() {
    let user1 = variance_metric(&TABLE1[0]).unwrap();
    let user2 = variance_metric(&TABLE1[1]).unwrap();
    let ratio = user1 / user2;
    let pass = user1 > user2 && ratio == 25.0;
    report("2", pass, format!("V1 = {user1}, V2 = {user2}, ratio = {ratio}"));
    assert!(pass);
}

struct Evaluation {
    variance: BatchResult,
    maxsnr: BatchResult,
    summary_json: serde_json::Value,
    elapsed: Duration,
}

/// Default cell, 20 paired seeds × 1000 slots, both policies.
fn evaluation() -> &'static Evaluation {
    static EVAL: OnceLock<Evaluation> = OnceLock::new();
    EVAL.get_or_init(|| {
        let start = Instant::now();
        let scenario = load_scenario(&RunOptions::default()).unwrap();
        assert_eq!(scenario.config.num_slots, 1000);
        assert_eq!(scenario.config.seeds.len(), 20);
        assert_eq!((scenario.config.topology.num_relays, scenario.config.topology.num_users), (6, 10));
        let batches = run_policies(&scenario).unwrap();
        let summary_json = serde_json::from_str(&render_summary_json(&batches)).unwrap();
        let mut it = batches.into_iter().map(|(_, b)| b);
        Evaluation {
            variance: it.next().unwrap(),
            maxsnr: it.next().unwrap(),
            summary_json,
            elapsed: start.elapsed(),
        }
    })
}

#[test]
fn c3a_user_fairness_paired_wins() {
    let eval = evaluation();
    let c = compare(&eval.variance, &eval.maxsnr);
    let pass = c.jain_users_wins >= 18;
    report(
        "3a",
        pass,
        format!(
            "variance has higher user Jain index in {}/{} paired seeds (need ≥ 18)",
            c.jain_users_wins, c.paired_seeds
        ),
    );
    assert!(pass);
}

#[test]
fn c3b_user_fairness_level() {
    let eval = evaluation();
    let mean = eval.variance.aggregate.jain_users.unwrap().mean;
    let pass = mean >= 0.90 && eval.elapsed < Duration::from_secs(60);
    report("3b", pass, format!("mean user Jain index {mean} (need ≥ 0.90), batch took {:?}", eval.elapsed));
    assert!(pass);
}

#[test]
fn c3c_relay_fairness() {
    let eval = evaluation();
    let v = eval.variance.aggregate.jain_relays.unwrap().mean;
    let m = eval.maxsnr.aggregate.jain_relays.unwrap().mean;
    let pass = v >= m;
    report("3c", pass, format!("mean relay Jain index variance {v} vs maxsnr {m}"));
    assert!(pass);
}

#[test]
fn c4_throughput_ratio() {
    let eval = evaluation();
    let reported = eval.summary_json["comparison"]["capacity_ratio_variance_over_maxsnr"]
        .as_f64()
        .unwrap();
    let direct = eval.variance.aggregate.cumulative_capacity.mean / eval.maxsnr.aggregate.cumulative_capacity.mean;
    let pass = reported >= 0.90 && reported == direct;
    report("4", pass, format!("cumulative capacity ratio variance/maxsnr = {reported} (need ≥ 0.90)"));
    assert!(pass);
}

#[test]
fn c5_constraint_suite() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut violations = Vec::new();
    let mut checked = 0;
    for slot in 0..1000u64 {
        let cfg = SystemConfig {
            num_subchannels: rng.random_range(1..=16),
            ..Default::default()
        };
        let topo = Topology {
            num_users: rng.random_range(1..=12),
            num_relays: rng.random_range(0..=6),
        };
        let params = ChannelParams {
            seed: rng.random(),
            ..Default::default()
        };
        let real = draw_channel(&params, &cfg, &topo, slot).unwrap();
        for policy in SchedulerPolicy::ALL {
            let alloc = schedule_slot(policy, &real, ScheduleOptions::default());
            for v in constraint_violations(&alloc, &real, false) {
                violations.push(format!("slot {slot} {policy}: {v}"));
            }
            checked += 1;
        }
    }
    let pass = violations.is_empty();
    report("5", pass, format!("{checked} allocations, {} violations", violations.len()));
    assert!(pass, "{violations:?}");
}

/// Best end-to-end SNR over every feasible (user, grant) pair, with the
/// lowest user index among maximizers.
fn enumerate_best(candidates: &[UserId], real: &ChannelRealization, pools: &Pools) -> Option<(UserId, f64)> {
    if pools.hop1.is_empty() || pools.hop2.is_empty() {
        return None;
    }
    let mut options = Vec::new();
    for &m in candidates {
        for n in pools.hop1.iter() {
            options.push((m, real.direct(n, m, SubSlot::First)));
        }
        for k in (0..real.num_relays()).map(RelayId) {
            for n1 in pools.hop1.iter() {
                for n2 in pools.hop2.iter() {
                    options.push((m, real.first_hop(n1, k).min(real.second_hop(n2, k, m))));
                }
            }
        }
    }
    let best = options.iter().map(|o| o.1).fold(f64::NEG_INFINITY, f64::max);
    options.into_iter().filter(|o| o.1 == best).min_by_key(|o| o.0)
}

#[test]
fn c6_maxsnr_brute_force() {
    let mut mismatches = 0;
    let mut steps = 0;
    let mut instances = 0;
    for m in 1..=3 {
        for n in 1..=4 {
            for k in 0..=2 {
                let cfg = SystemConfig {
                    num_subchannels: n,
                    ..Default::default()
                };
                let topo = Topology {
                    num_users: m,
                    num_relays: k,
                };
                for r in 0..100u64 {
                    let params = ChannelParams {
                        seed: 6_000 + r,
                        ..Default::default()
                    };
                    let real = draw_channel(&params, &cfg, &topo, (m * 100 + n * 10 + k) as u64).unwrap();
                    instances += 1;
                    let mut pools = Pools::full(n);
                    let mut candidates: Vec<UserId> = (0..m).map(UserId).collect();
                    while !candidates.is_empty() {
                        let got = maxsnr_select(&candidates, &real, &pools).unwrap();
                        let want = enumerate_best(&candidates, &real, &pools);
                        steps += 1;
                        let Some((user, grant, snr)) = got else {
                            mismatches += usize::from(want.is_some());
                            break;
                        };
                        if want != Some((user, snr)) || grant.snr(user, &real) != snr {
                            mismatches += 1;
                        }
                        match grant {
                            Grant::Direct { subchannel, .. } => pools.hop1.take(subchannel),
                            Grant::Relayed { hop1, hop2, .. } => {
                                pools.hop1.take(hop1);
                                pools.hop2.take(hop2);
                            }
                        }
                        candidates.retain(|c| *c != user);
                    }
                }
            }
        }
    }
    let pass = mismatches == 0;
    report("6", pass, format!("{instances} instances, {steps} steps, {mismatches} mismatches"));
    assert!(pass);
}

#[test]
fn c7_numerical_checks() {
    let cfg = SystemConfig::default();
    let gap = -(5.0 * cfg.ber_target).ln() / 1.6;
    let per_sub = cfg.bandwidth_hz / cfg.num_subchannels as f64;
    let cap = link_capacity(gap, &cfg).unwrap();
    let cap_ok = ((cap - per_sub) / per_sub).abs() < 1e-12;

    let avg = update_average(100.0, 200.0, 10).unwrap();
    let avg_ok = avg == 110.0;

    let jain = jain_index(&[1.0, 2.0, 3.0]).unwrap();
    let jain_ok = (jain - 6.0 / 7.0).abs() < 1e-12;

    let n = 100_000;
    let mean = 10.0;
    let real = draw_channel(
        &ChannelParams {
            mean_snr_direct: mean,
            seed: 7,
            ..Default::default()
        },
        &SystemConfig {
            num_subchannels: n,
            ..Default::default()
        },
        &Topology {
            num_users: 1,
            num_relays: 0,
        },
        0,
    )
    .unwrap();
    let sample_mean = (0..n)
        .map(|i| real.direct(SubchannelId(i), UserId(0), SubSlot::First))
        .sum::<f64>()
        / n as f64;
    let mean_ok = (sample_mean / mean - 1.0).abs() < 0.02;

    let pass = cap_ok && avg_ok && jain_ok && mean_ok;
    report(
        "7",
        pass,
        format!("C(Γ) = {cap} vs W/N = {per_sub}; R̄ = {avg}; J = {jain}; exp mean = {sample_mean}"),
    );
    assert!(pass);
}

#[test]
fn c8_cmd_run_is_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let opts = |out: &std::path::Path| RunOptions {
        slots: Some(100),
        seeds: Some("1..4".into()),
        out: out.to_path_buf(),
        ..Default::default()
    };
    cmd_run(&opts(a.path())).unwrap();
    cmd_run(&opts(b.path())).unwrap();
    let first = fs::read(a.path().join("per_slot.csv")).unwrap();
    let second = fs::read(b.path().join("per_slot.csv")).unwrap();
    let summary_same = fs::read(a.path().join("summary.json")).unwrap() == fs::read(b.path().join("summary.json")).unwrap();
    let pass = first == second && summary_same && !first.is_empty();
    report("8", pass, format!("per_slot.csv {} bytes, identical: {}", first.len(), first == second));
    assert!(pass);
}

#[test]
fn table1_fixture_matches_pipeline() {
    let real = table1_channel();
    let sums: Vec<f64> = SchedulerPolicy::ALL
        .iter()
        .map(|&p| schedule_slot(p, &real, ScheduleOptions::default()).assigned_snr_sum(&real))
        .collect();
    assert_eq!(sums, vec![130.0, 90.0]);
}
