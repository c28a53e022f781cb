//! Per-slot subchannel assignment.
//!
//! Two policies share one commit loop:
//!
//! * [`SchedulerPolicy::RelayVariance`] serves users in decreasing order of
//!   the dispersion of their SNR over the still-unassigned subchannels. The
//!   chosen user takes its best subchannel, a relay is picked by the same
//!   variance rule over its second-hop SNRs, and the user goes direct unless
//!   the relayed bottleneck `min(δ_BS-RS, δ_RS-MS)` is strictly better.
//! * [`SchedulerPolicy::RelayMaxSnr`] repeatedly commits whichever
//!   (user, path) pair has the highest end-to-end SNR.
//!
//! All ties break toward the lowest index.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::channel::ChannelRealization;
use crate::error::{domain, Error, Result};
use crate::model::{CommMode, RelayId, SubSlot, SubchannelId, UserId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SchedulerPolicy {
    RelayVariance,
    RelayMaxSnr,
}

impl SchedulerPolicy {
    pub const ALL: [SchedulerPolicy; 2] = [SchedulerPolicy::RelayVariance, SchedulerPolicy::RelayMaxSnr];

    /// Short lowercase name used in files and on the command line.
    pub fn name(self) -> &'static str {
        match self {
            SchedulerPolicy::RelayVariance => "variance",
            SchedulerPolicy::RelayMaxSnr => "maxsnr",
        }
    }
}

impl fmt::Display for SchedulerPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchedulerPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "variance" => Ok(SchedulerPolicy::RelayVariance),
            "maxsnr" => Ok(SchedulerPolicy::RelayMaxSnr),
            other => Err(domain(format!("unknown policy `{other}`"))),
        }
    }
}

/// Knobs that change the loop structure rather than the policy.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleOptions {
    /// Keep serving users in further rounds after everyone got one
    /// assignment, and let the BS use sub-slot 2 directly once sub-slot 1
    /// is exhausted. Breaks the one-assignment-per-user constraint.
    pub multi_round: bool,
}

/// Set of subchannels still free in one sub-slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubchannelPool {
    free: Vec<bool>,
    len: usize,
}

impl SubchannelPool {
    pub fn full(num_subchannels: usize) -> Self {
        Self {
            free: vec![true; num_subchannels],
            len: num_subchannels,
        }
    }

    pub fn from_ids(num_subchannels: usize, ids: impl IntoIterator<Item = SubchannelId>) -> Self {
        let mut pool = Self {
            free: vec![false; num_subchannels],
            len: 0,
        };
        for n in ids {
            if !pool.free[n.0] {
                pool.free[n.0] = true;
                pool.len += 1;
            }
        }
        pool
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn contains(&self, n: SubchannelId) -> bool {
        self.free.get(n.0).copied().unwrap_or(false)
    }

    pub fn take(&mut self, n: SubchannelId) {
        assert!(self.contains(n), "subchannel {n} already assigned");
        self.free[n.0] = false;
        self.len -= 1;
    }

    pub fn iter(&self) -> impl Iterator<Item = SubchannelId> + '_ {
        self.free
            .iter()
            .enumerate()
            .filter(|(_, free)| **free)
            .map(|(n, _)| SubchannelId(n))
    }
}

/// One committed transmission.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Grant {
    Direct {
        subchannel: SubchannelId,
        sub_slot: SubSlot,
    },
    Relayed {
        relay: RelayId,
        hop1: SubchannelId,
        hop2: SubchannelId,
    },
}

impl Grant {
    pub fn mode(&self) -> CommMode {
        match *self {
            Grant::Direct { .. } => CommMode::Direct,
            Grant::Relayed { relay, .. } => CommMode::Relayed(relay),
        }
    }

    /// End-to-end SNR of the grant: the direct SNR, or the weaker hop.
    pub fn snr(&self, user: UserId, real: &ChannelRealization) -> f64 {
        match *self {
            Grant::Direct { subchannel, sub_slot } => real.direct(subchannel, user, sub_slot),
            Grant::Relayed { relay, hop1, hop2 } => {
                real.first_hop(hop1, relay).min(real.second_hop(hop2, relay, user))
            }
        }
    }
}

/// Binary assignment indicators for one slot.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Allocation {
    /// `α_{n,m}` per sub-slot.
    pub alpha_direct: BTreeSet<(SubchannelId, UserId, SubSlot)>,
    /// `α_{n,k}`, BS→RS in sub-slot 1.
    pub alpha_relay_hop1: BTreeSet<(SubchannelId, RelayId)>,
    /// `β_{n,k,m}`, RS→MS in sub-slot 2.
    pub beta_hop2: BTreeSet<(SubchannelId, RelayId, UserId)>,
    /// Mode of each user's first grant, `None` when unserved.
    pub mode_of: Vec<Option<CommMode>>,
    /// Grants in commit order.
    pub grants: Vec<(UserId, Grant)>,
}

impl Allocation {
    pub fn empty(num_users: usize) -> Self {
        Self {
            mode_of: vec![None; num_users],
            ..Default::default()
        }
    }

    fn commit(&mut self, user: UserId, grant: Grant) {
        match grant {
            Grant::Direct { subchannel, sub_slot } => {
                self.alpha_direct.insert((subchannel, user, sub_slot));
            }
            Grant::Relayed { relay, hop1, hop2 } => {
                self.alpha_relay_hop1.insert((hop1, relay));
                self.beta_hop2.insert((hop2, relay, user));
            }
        }
        let mode = &mut self.mode_of[user.0];
        if mode.is_none() {
            *mode = Some(grant.mode());
        }
        self.grants.push((user, grant));
    }

    pub fn num_served(&self) -> usize {
        self.mode_of.iter().filter(|m| m.is_some()).count()
    }

    /// Sum of end-to-end SNRs over all grants.
    pub fn assigned_snr_sum(&self, real: &ChannelRealization) -> f64 {
        self.grants.iter().map(|(m, g)| g.snr(*m, real)).sum()
    }
}

/// Population variance `mean(δ²) − mean(δ)²` of an SNR vector.
pub fn variance_metric(snrs: &[f64]) -> Result<f64> {
    variance_of(snrs.iter().copied()).ok_or_else(|| domain("variance of an empty SNR set"))
}

fn variance_of(snrs: impl Iterator<Item = f64>) -> Option<f64> {
    let (mut count, mut sum, mut sum_sq) = (0usize, 0.0f64, 0.0f64);
    for d in snrs {
        count += 1;
        sum += d;
        sum_sq += d * d;
    }
    if count == 0 {
        return None;
    }
    let n = count as f64;
    let mean = sum / n;
    Some((sum_sq / n - mean * mean).max(0.0))
}

/// Index of the first maximum; `None` for an empty iterator.
fn argmax<T: Copy>(items: impl Iterator<Item = (T, f64)>) -> Option<(T, f64)> {
    let mut best: Option<(T, f64)> = None;
    for (item, value) in items {
        if best.is_none_or(|(_, b)| value > b) {
            best = Some((item, value));
        }
    }
    best
}

/// User with the largest variance; ties go to the lowest user index.
pub fn select_user(variance_of: &[(UserId, f64)]) -> Result<UserId> {
    let mut sorted = variance_of.to_vec();
    sorted.sort_by_key(|(m, _)| *m);
    argmax(sorted.into_iter())
        .map(|(m, _)| m)
        .ok_or_else(|| domain("no candidate users"))
}

fn best_in_pool(pool: &SubchannelPool, snr: impl Fn(SubchannelId) -> f64) -> Option<(SubchannelId, f64)> {
    argmax(pool.iter().map(|n| (n, snr(n))))
}

/// Best unassigned subchannel of an SNR vector indexed by subchannel.
pub fn best_subchannel(snrs: &[f64], unassigned: &SubchannelPool) -> Result<SubchannelId> {
    if unassigned.iter().any(|n| n.0 >= snrs.len()) {
        return Err(domain("pool references a subchannel outside the SNR vector"));
    }
    best_in_pool(unassigned, |n| snrs[n.0])
        .map(|(n, _)| n)
        .ok_or_else(|| domain("no unassigned subchannels"))
}

/// Relay whose second-hop SNRs towards `user` have the largest variance
/// over the unassigned second-hop subchannels.
pub fn select_relay(
    user: UserId,
    real: &ChannelRealization,
    unassigned_hop2: &SubchannelPool,
    eligible: &[RelayId],
) -> Result<RelayId> {
    if unassigned_hop2.is_empty() {
        return Err(domain("no unassigned second-hop subchannels"));
    }
    let mut relays = eligible.to_vec();
    relays.sort();
    let scored = relays.into_iter().map(|k| {
        let v = variance_of(unassigned_hop2.iter().map(|n| real.second_hop(n, k, user)))
            .expect("pool is nonempty");
        (k, v)
    });
    argmax(scored)
        .map(|(k, _)| k)
        .ok_or_else(|| domain("no eligible relays"))
}

/// Outcome of [`select_mode`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeChoice {
    Direct,
    Relayed,
}

/// `argmax{δ_BS-MS, min(δ_BS-RS, δ_RS-MS)}`, with ties kept direct.
pub fn select_mode(direct_best: f64, hop1_best: f64, hop2_best: f64) -> ModeChoice {
    if hop1_best.min(hop2_best) > direct_best {
        ModeChoice::Relayed
    } else {
        ModeChoice::Direct
    }
}

/// Free subchannels of both sub-slots during one scheduling pass.
#[derive(Debug, Clone)]
pub struct Pools {
    pub hop1: SubchannelPool,
    pub hop2: SubchannelPool,
}

impl Pools {
    pub fn full(num_subchannels: usize) -> Self {
        Self {
            hop1: SubchannelPool::full(num_subchannels),
            hop2: SubchannelPool::full(num_subchannels),
        }
    }

    fn take(&mut self, grant: &Grant) {
        match *grant {
            Grant::Direct { subchannel, sub_slot } => match sub_slot {
                SubSlot::First => self.hop1.take(subchannel),
                SubSlot::Second => self.hop2.take(subchannel),
            },
            Grant::Relayed { hop1, hop2, .. } => {
                self.hop1.take(hop1);
                self.hop2.take(hop2);
            }
        }
    }
}

/// Which pool a direct grant draws from at the current step, and whether a
/// relayed grant is possible. `None` ends the slot.
fn direct_phase(pools: &Pools, num_relays: usize, opts: ScheduleOptions) -> Option<(SubSlot, bool)> {
    if !pools.hop1.is_empty() && !pools.hop2.is_empty() {
        Some((SubSlot::First, num_relays > 0))
    } else if opts.multi_round && pools.hop1.is_empty() && !pools.hop2.is_empty() {
        Some((SubSlot::Second, false))
    } else if opts.multi_round && !pools.hop1.is_empty() {
        Some((SubSlot::First, false))
    } else {
        None
    }
}

/// Highest end-to-end SNR option among `candidates`.
///
/// Returns the user, its grant and the grant's SNR, or `None` when no
/// feasible grant exists. Ties go to the lowest user, then to the direct
/// path, then to the lowest relay and subchannel.
pub fn maxsnr_select(
    candidates: &[UserId],
    real: &ChannelRealization,
    pools: &Pools,
) -> Result<Option<(UserId, Grant, f64)>> {
    if candidates.is_empty() {
        return Err(domain("no candidate users"));
    }
    Ok(maxsnr_step(candidates, real, pools, ScheduleOptions::default()))
}

fn maxsnr_step(
    candidates: &[UserId],
    real: &ChannelRealization,
    pools: &Pools,
    opts: ScheduleOptions,
) -> Option<(UserId, Grant, f64)> {
    let (direct_slot, relay_ok) = direct_phase(pools, real.num_relays(), opts)?;
    let direct_pool = match direct_slot {
        SubSlot::First => &pools.hop1,
        SubSlot::Second => &pools.hop2,
    };
    // BS→RS best subchannel does not depend on the user.
    let hop1_best: Vec<(SubchannelId, f64)> = if relay_ok {
        (0..real.num_relays())
            .map(|k| best_in_pool(&pools.hop1, |n| real.first_hop(n, RelayId(k))).expect("pool nonempty"))
            .collect()
    } else {
        Vec::new()
    };

    let mut users = candidates.to_vec();
    users.sort();
    let mut best: Option<(UserId, Grant, f64)> = None;
    for m in users {
        let (n, snr) = best_in_pool(direct_pool, |n| real.direct(n, m, direct_slot)).expect("pool nonempty");
        let mut option = (
            Grant::Direct {
                subchannel: n,
                sub_slot: direct_slot,
            },
            snr,
        );
        for (k, &(n1, d1)) in hop1_best.iter().enumerate() {
            let relay = RelayId(k);
            let (n2, d2) = best_in_pool(&pools.hop2, |n| real.second_hop(n, relay, m)).expect("pool nonempty");
            let e2e = d1.min(d2);
            if e2e > option.1 {
                option = (
                    Grant::Relayed {
                        relay,
                        hop1: n1,
                        hop2: n2,
                    },
                    e2e,
                );
            }
        }
        if best.is_none_or(|(_, _, b)| option.1 > b) {
            best = Some((m, option.0, option.1));
        }
    }
    best
}

fn variance_step(
    candidates: &[UserId],
    real: &ChannelRealization,
    pools: &Pools,
    opts: ScheduleOptions,
) -> Option<(UserId, Grant)> {
    let (direct_slot, relay_ok) = direct_phase(pools, real.num_relays(), opts)?;
    let direct_pool = match direct_slot {
        SubSlot::First => &pools.hop1,
        SubSlot::Second => &pools.hop2,
    };
    let variances: Vec<(UserId, f64)> = candidates
        .iter()
        .map(|&m| {
            let v = variance_of(direct_pool.iter().map(|n| real.direct(n, m, direct_slot))).expect("pool nonempty");
            (m, v)
        })
        .collect();
    let user = select_user(&variances).ok()?;
    let (n_direct, d_direct) =
        best_in_pool(direct_pool, |n| real.direct(n, user, direct_slot)).expect("pool nonempty");
    let direct = Grant::Direct {
        subchannel: n_direct,
        sub_slot: direct_slot,
    };
    if !relay_ok {
        return Some((user, direct));
    }

    let relays: Vec<RelayId> = (0..real.num_relays()).map(RelayId).collect();
    let relay = select_relay(user, real, &pools.hop2, &relays).expect("relays and pool nonempty");
    let (n1, d1) = best_in_pool(&pools.hop1, |n| real.first_hop(n, relay)).expect("pool nonempty");
    let (n2, d2) = best_in_pool(&pools.hop2, |n| real.second_hop(n, relay, user)).expect("pool nonempty");
    let grant = match select_mode(d_direct, d1, d2) {
        ModeChoice::Direct => direct,
        ModeChoice::Relayed => Grant::Relayed {
            relay,
            hop1: n1,
            hop2: n2,
        },
    };
    Some((user, grant))
}

/// Builds the allocation of one slot under `policy`.
pub fn schedule_slot(policy: SchedulerPolicy, real: &ChannelRealization, opts: ScheduleOptions) -> Allocation {
    let num_users = real.num_users();
    let mut alloc = Allocation::empty(num_users);
    let mut pools = Pools::full(real.num_subchannels());
    let mut served = vec![false; num_users];

    loop {
        let mut candidates: Vec<UserId> = (0..num_users).filter(|&m| !served[m]).map(UserId).collect();
        if candidates.is_empty() {
            if !opts.multi_round || num_users == 0 {
                break;
            }
            served.iter_mut().for_each(|s| *s = false);
            candidates = (0..num_users).map(UserId).collect();
        }
        let step = match policy {
            SchedulerPolicy::RelayVariance => variance_step(&candidates, real, &pools, opts),
            SchedulerPolicy::RelayMaxSnr => maxsnr_step(&candidates, real, &pools, opts).map(|(m, g, _)| (m, g)),
        };
        let Some((user, grant)) = step else { break };
        pools.take(&grant);
        alloc.commit(user, grant);
        served[user.0] = true;
    }
    alloc
}

/// Lists every C1–C3 violation of `alloc` against the realization's
/// dimensions. With `multi_round` the one-grant-per-user rule (C3) is not
/// checked.
pub fn constraint_violations(alloc: &Allocation, real: &ChannelRealization, multi_round: bool) -> Vec<String> {
    let (n_sub, n_users, n_relays) = (real.num_subchannels(), real.num_users(), real.num_relays());
    let mut out = Vec::new();

    let mut in_range = true;
    for &(n, m, _) in &alloc.alpha_direct {
        in_range &= n.0 < n_sub && m.0 < n_users;
    }
    for &(n, k) in &alloc.alpha_relay_hop1 {
        in_range &= n.0 < n_sub && k.0 < n_relays;
    }
    for &(n, k, m) in &alloc.beta_hop2 {
        in_range &= n.0 < n_sub && k.0 < n_relays && m.0 < n_users;
    }
    if !in_range || alloc.mode_of.len() != n_users {
        out.push("C1: indicator outside the cell's index ranges".to_string());
        return out;
    }

    // C2: at most one occupant per subchannel per sub-slot.
    let mut used = [vec![0usize; n_sub], vec![0usize; n_sub]];
    for &(n, _, tau) in &alloc.alpha_direct {
        used[tau.index()][n.0] += 1;
    }
    for &(n, _) in &alloc.alpha_relay_hop1 {
        used[0][n.0] += 1;
    }
    for &(n, _, _) in &alloc.beta_hop2 {
        used[1][n.0] += 1;
    }
    for (tau, counts) in used.iter().enumerate() {
        for (n, &c) in counts.iter().enumerate() {
            if c > 1 {
                out.push(format!("C2: subchannel {n} used {c} times in sub-slot {}", tau + 1));
            }
        }
    }

    // Both hops of every relayed transmission are present.
    for k in 0..n_relays {
        let hop1 = alloc.alpha_relay_hop1.iter().filter(|(_, r)| r.0 == k).count();
        let hop2 = alloc.beta_hop2.iter().filter(|(_, r, _)| r.0 == k).count();
        if hop1 != hop2 {
            out.push(format!("relay {k}: {hop1} first-hop vs {hop2} second-hop subchannels"));
        }
    }

    for m in 0..n_users {
        let direct: Vec<SubSlot> = alloc
            .alpha_direct
            .iter()
            .filter(|(_, u, _)| u.0 == m)
            .map(|&(_, _, t)| t)
            .collect();
        let relays: Vec<RelayId> = alloc
            .beta_hop2
            .iter()
            .filter(|(_, _, u)| u.0 == m)
            .map(|&(_, k, _)| k)
            .collect();
        let total = direct.len() + relays.len();
        let mode = alloc.mode_of[m];
        if !multi_round && total > 1 {
            out.push(format!("C3: user {m} holds {total} assignments"));
        }
        match mode {
            None if total > 0 => out.push(format!("user {m} has assignments but no mode")),
            Some(_) if total == 0 => out.push(format!("user {m} has a mode but no assignment")),
            Some(CommMode::Direct) if !multi_round && direct.len() != 1 => {
                out.push(format!("user {m} is direct without a direct subchannel"))
            }
            Some(CommMode::Relayed(k)) if !multi_round && relays != [k] => {
                out.push(format!("user {m} is relayed via {k} without a matching second hop"))
            }
            _ => {}
        }
    }
    out
}
