//! Scenario files.
//!
//! A scenario is a TOML document with up to four sections. Every key is
//! optional; missing ones take the defaults below.
//!
//! | section      | key                   | default  |
//! |--------------|-----------------------|----------|
//! | `[system]`   | `bandwidth_hz`        | `10e6`   |
//! |              | `num_subchannels`     | `128`    |
//! |              | `total_power_w`       | `20`     |
//! |              | `relay_power_w`       | `total_power_w` |
//! |              | `ber_target`          | `1e-3`   |
//! |              | `noise_psd`           | `3.981e-21` |
//! |              | `avg_window`          | `100`    |
//! |              | `symbols_per_subframe`| `24`     |
//! | `[topology]` | `num_users`           | `10`     |
//! |              | `num_relays`          | `6`      |
//! | `[channel]`  | `mean_snr_direct`     | `10`     |
//! |              | `mean_snr_first_hop`  | `10`     |
//! |              | `mean_snr_second_hop` | `10`     |
//! | `[run]`      | `num_slots`           | `1000`   |
//! |              | `seeds`               | `"1..20"` (string spec or integer array) |
//! |              | `policy`              | `"both"` (`variance`, `maxsnr`, `both`) |
//! |              | `multi_round`         | `false`  |

use serde::Deserialize;
use std::str::FromStr;

use relaysched::{ChannelParams, ScenarioConfig, SchedulerPolicy, SystemConfig, Topology};

use crate::error::{CliError, Result};
use crate::seeds::parse_seed_spec;

/// Which policies a command runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PolicySelection {
    Variance,
    MaxSnr,
    #[default]
    Both,
}

impl PolicySelection {
    pub fn policies(self) -> Vec<SchedulerPolicy> {
        match self {
            PolicySelection::Variance => vec![SchedulerPolicy::RelayVariance],
            PolicySelection::MaxSnr => vec![SchedulerPolicy::RelayMaxSnr],
            PolicySelection::Both => SchedulerPolicy::ALL.to_vec(),
        }
    }
}

impl FromStr for PolicySelection {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "variance" => Ok(Self::Variance),
            "maxsnr" => Ok(Self::MaxSnr),
            "both" => Ok(Self::Both),
            other => Err(CliError::Usage(format!(
                "unknown policy `{other}` (expected variance, maxsnr or both)"
            ))),
        }
    }
}

/// A parsed scenario file.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    /// `policy` holds the first selected policy.
    pub config: ScenarioConfig,
    pub policies: PolicySelection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    #[serde(default)]
    system: SystemSection,
    #[serde(default)]
    topology: TopologySection,
    #[serde(default)]
    channel: ChannelSection,
    #[serde(default)]
    run: RunSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemSection {
    bandwidth_hz: Option<f64>,
    num_subchannels: Option<usize>,
    total_power_w: Option<f64>,
    relay_power_w: Option<f64>,
    ber_target: Option<f64>,
    noise_psd: Option<f64>,
    avg_window: Option<usize>,
    symbols_per_subframe: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct TopologySection {
    num_users: Option<usize>,
    num_relays: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChannelSection {
    mean_snr_direct: Option<f64>,
    mean_snr_first_hop: Option<f64>,
    mean_snr_second_hop: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum SeedsValue {
    Spec(String),
    List(Vec<u64>),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunSection {
    num_slots: Option<usize>,
    seeds: Option<SeedsValue>,
    policy: Option<String>,
    multi_round: Option<bool>,
}

/// Parses scenario text, filling in defaults and validating the result.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let doc: Document = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;

    let d = SystemConfig::default();
    let s = doc.system;
    let total_power_w = s.total_power_w.unwrap_or(d.total_power_w);
    let system = SystemConfig {
        bandwidth_hz: s.bandwidth_hz.unwrap_or(d.bandwidth_hz),
        num_subchannels: s.num_subchannels.unwrap_or(d.num_subchannels),
        total_power_w,
        relay_power_w: s.relay_power_w.unwrap_or(total_power_w),
        ber_target: s.ber_target.unwrap_or(d.ber_target),
        noise_psd: s.noise_psd.unwrap_or(d.noise_psd),
        avg_window: s.avg_window.unwrap_or(d.avg_window),
        symbols_per_subframe: s.symbols_per_subframe.unwrap_or(d.symbols_per_subframe),
    };

    let t = Topology::default();
    let topology = Topology {
        num_users: doc.topology.num_users.unwrap_or(t.num_users),
        num_relays: doc.topology.num_relays.unwrap_or(t.num_relays),
    };

    let c = ChannelParams::default();
    let channel = ChannelParams {
        mean_snr_direct: doc.channel.mean_snr_direct.unwrap_or(c.mean_snr_direct),
        mean_snr_first_hop: doc.channel.mean_snr_first_hop.unwrap_or(c.mean_snr_first_hop),
        mean_snr_second_hop: doc.channel.mean_snr_second_hop.unwrap_or(c.mean_snr_second_hop),
        seed: c.seed,
    };

    let base = ScenarioConfig::default();
    let seeds = match doc.run.seeds {
        None => base.seeds.clone(),
        Some(SeedsValue::List(list)) => list,
        Some(SeedsValue::Spec(spec)) => {
            parse_seed_spec(&spec).map_err(|e| CliError::Config(format!("[run] seeds: {e}")))?
        }
    };
    let policies = match doc.run.policy {
        None => PolicySelection::default(),
        Some(p) => p
            .parse()
            .map_err(|e| CliError::Config(format!("[run] policy: {e}")))?,
    };

    let config = ScenarioConfig {
        system,
        topology,
        channel,
        policy: policies.policies()[0],
        num_slots: doc.run.num_slots.unwrap_or(base.num_slots),
        seeds,
        multi_round: doc.run.multi_round.unwrap_or(false),
        verify: false,
    };
    config
        .validate()
        .map_err(|e| CliError::Config(format!("invalid scenario: {e}")))?;
    Ok(Scenario { config, policies })
}
