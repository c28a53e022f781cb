//! Rate accounting for one slot and the per-user moving average.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::channel::{capacity_with_gap, snr_gap, ChannelRealization};
use crate::error::{domain, Error, Result};
use crate::model::{RelayId, SystemConfig, Topology, UserId};
use crate::scheduler::Allocation;

/// Fraction of a slot occupied by one sub-slot. Slots have unit duration.
pub const SUB_SLOT_DURATION: f64 = 0.5;

/// Rates achieved in one slot, all in bit/s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotRates {
    /// `D_m(t)` of direct transmissions, summed over both sub-slots.
    pub direct_rate: Vec<f64>,
    /// `D_{RS,τ=1}(k)`: what each relay receives from the BS.
    pub relay_hop1_rate: Vec<f64>,
    /// `D_{RS,τ=2}(k)`: what each relay forwards.
    pub relay_hop2_rate: Vec<f64>,
    /// `D_{m,k,τ=2}` per relay link user.
    pub relay_user_hop2: BTreeMap<(RelayId, UserId), f64>,
    /// `D_{m,k,τ=1}`: the relay's first-hop rate shared in proportion to
    /// the second-hop rates.
    pub relay_user_hop1: BTreeMap<(RelayId, UserId), f64>,
    /// `D_eff,m = min(D_{m,k,τ=1}, D_{m,k,τ=2})`, summed over relays.
    pub effective_rate: BTreeMap<UserId, f64>,
    /// `C_Sys(t)`.
    pub system_capacity: f64,
}

impl SlotRates {
    /// Rate credited to user `m` in this slot: direct plus effective relay rate.
    pub fn achieved(&self, m: UserId) -> f64 {
        self.direct_rate[m.0] + self.effective_rate.get(&m).copied().unwrap_or(0.0)
    }

    pub fn direct_total(&self) -> f64 {
        self.direct_rate.iter().sum()
    }

    pub fn relay_total(&self) -> f64 {
        self.effective_rate.values().sum()
    }

    /// Effective rate delivered through each relay.
    pub fn effective_per_relay(&self, num_relays: usize) -> Vec<f64> {
        let mut out = vec![0.0; num_relays];
        for (&(k, m), &hop2) in &self.relay_user_hop2 {
            let hop1 = self.relay_user_hop1[&(k, m)];
            out[k.0] += hop1.min(hop2);
        }
        out
    }
}

/// Evaluates the rate equations for `alloc` on `real`.
pub fn compute_slot_rates(
    alloc: &Allocation,
    real: &ChannelRealization,
    cfg: &SystemConfig,
    topo: &Topology,
) -> Result<SlotRates> {
    real.check_dims(cfg, topo)?;
    if alloc.mode_of.len() != topo.num_users {
        return Err(Error::DimensionMismatch(format!(
            "allocation covers {} users, cell has {}",
            alloc.mode_of.len(),
            topo.num_users
        )));
    }
    let gap = snr_gap(cfg.ber_target)?;
    let bw = cfg.subchannel_bandwidth();
    let cap = |snr: f64| capacity_with_gap(snr, gap, bw);
    let (n_sub, n_users, n_relays) = (cfg.num_subchannels, topo.num_users, topo.num_relays);

    let mut direct_rate = vec![0.0; n_users];
    for &(n, m, tau) in &alloc.alpha_direct {
        if n.0 >= n_sub || m.0 >= n_users {
            return Err(Error::DimensionMismatch(format!("direct indicator ({n}, {m}) out of range")));
        }
        direct_rate[m.0] += cap(real.direct(n, m, tau))?;
    }

    let mut relay_hop1_rate = vec![0.0; n_relays];
    for &(n, k) in &alloc.alpha_relay_hop1 {
        if n.0 >= n_sub || k.0 >= n_relays {
            return Err(Error::DimensionMismatch(format!("first-hop indicator ({n}, {k}) out of range")));
        }
        relay_hop1_rate[k.0] += cap(real.first_hop(n, k))?;
    }

    let mut relay_user_hop2: BTreeMap<(RelayId, UserId), f64> = BTreeMap::new();
    for &(n, k, m) in &alloc.beta_hop2 {
        if n.0 >= n_sub || k.0 >= n_relays || m.0 >= n_users {
            return Err(Error::DimensionMismatch(format!("second-hop indicator ({n}, {k}, {m}) out of range")));
        }
        *relay_user_hop2.entry((k, m)).or_insert(0.0) += cap(real.second_hop(n, k, m))?;
    }

    let mut relay_hop2_rate = vec![0.0; n_relays];
    for (&(k, _), &r) in &relay_user_hop2 {
        relay_hop2_rate[k.0] += r;
    }

    let mut relay_user_hop1 = BTreeMap::new();
    let mut effective_rate: BTreeMap<UserId, f64> = BTreeMap::new();
    for (&(k, m), &hop2) in &relay_user_hop2 {
        let total2 = relay_hop2_rate[k.0];
        let hop1 = if total2 > 0.0 {
            relay_hop1_rate[k.0] / total2 * hop2
        } else {
            0.0
        };
        relay_user_hop1.insert((k, m), hop1);
        *effective_rate.entry(m).or_insert(0.0) += hop1.min(hop2);
    }

    let system_capacity = direct_rate.iter().sum::<f64>() + effective_rate.values().sum::<f64>();
    Ok(SlotRates {
        direct_rate,
        relay_hop1_rate,
        relay_hop2_rate,
        relay_user_hop2,
        relay_user_hop1,
        effective_rate,
        system_capacity,
    })
}

/// One step of the moving average `(1 − 1/T)·prev + achieved/T`.
pub fn update_average(prev: f64, achieved: f64, window: usize) -> Result<f64> {
    if window < 1 {
        return Err(domain("averaging window must be ≥ 1"));
    }
    let t = window as f64;
    Ok((1.0 - 1.0 / t) * prev + achieved / t)
}

/// Objective over a frame: the sum of per-slot system capacities.
pub fn frame_objective(slot_capacities: &[f64]) -> f64 {
    slot_capacities.iter().sum()
}

/// Long-lived per-run state, owned by the simulation loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateState {
    /// `R̄_m` per user.
    pub avg_rate: Vec<f64>,
    /// Effective bits delivered through each relay so far.
    pub cumulative_relay_throughput: Vec<f64>,
}

impl RateState {
    pub fn new(topo: &Topology) -> Self {
        Self {
            avg_rate: vec![0.0; topo.num_users],
            cumulative_relay_throughput: vec![0.0; topo.num_relays],
        }
    }

    /// Folds one slot into the state. Users that got nothing average in 0.
    pub fn update(&mut self, rates: &SlotRates, window: usize) -> Result<()> {
        for (m, avg) in self.avg_rate.iter_mut().enumerate() {
            *avg = update_average(*avg, rates.achieved(UserId(m)), window)?;
        }
        let per_relay = rates.effective_per_relay(self.cumulative_relay_throughput.len());
        for (acc, r) in self.cumulative_relay_throughput.iter_mut().zip(per_relay) {
            *acc += r * SUB_SLOT_DURATION;
        }
        Ok(())
    }
}
