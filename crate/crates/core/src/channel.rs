//! Per-slot channel state and SNR-gap Shannon capacity.
//!
//! The simulator draws the composite SNR `δ = p·|h|²/σ²` directly as an
//! exponential variate per link, subchannel and sub-slot (Rayleigh fading
//! under power control). Only the SNR gap `Γ` is applied on top of it when
//! converting to a rate.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::model::{RelayId, SubSlot, SubchannelId, SystemConfig, Topology, UserId};

const TAG_DIRECT: u64 = 0;
const TAG_FIRST_HOP: u64 = 1;
const TAG_SECOND_HOP: u64 = 2;

/// Mean SNR per link class plus the RNG seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    pub mean_snr_direct: f64,
    pub mean_snr_first_hop: f64,
    pub mean_snr_second_hop: f64,
    pub seed: u64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        // 10 dB on every link class.
        Self {
            mean_snr_direct: 10.0,
            mean_snr_first_hop: 10.0,
            mean_snr_second_hop: 10.0,
            seed: 1,
        }
    }
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        for (name, mean) in [
            ("mean_snr_direct", self.mean_snr_direct),
            ("mean_snr_first_hop", self.mean_snr_first_hop),
            ("mean_snr_second_hop", self.mean_snr_second_hop),
        ] {
            if !(mean.is_finite() && mean > 0.0) {
                return Err(Error::InvalidConfig(format!("{name} must be > 0")));
            }
        }
        Ok(())
    }
}

/// Linear SNR of every link on every subchannel for one slot.
///
/// Layout is row-major with the subchannel as the outermost axis:
/// direct `[n][m][τ]`, first hop `[n][k]`, second hop `[n][k][m]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelRealization {
    num_subchannels: usize,
    num_users: usize,
    num_relays: usize,
    snr_direct: Vec<f64>,
    snr_first_hop: Vec<f64>,
    snr_second_hop: Vec<f64>,
}

impl ChannelRealization {
    /// A realization with every entry set to `value`.
    pub fn filled(num_subchannels: usize, num_users: usize, num_relays: usize, value: f64) -> Self {
        Self {
            num_subchannels,
            num_users,
            num_relays,
            snr_direct: vec![value; num_subchannels * num_users * 2],
            snr_first_hop: vec![value; num_subchannels * num_relays],
            snr_second_hop: vec![value; num_subchannels * num_relays * num_users],
        }
    }

    /// Builds a relay-free realization from a `users × subchannels` table.
    /// Both sub-slots get the same value.
    pub fn from_direct_table(rows: &[Vec<f64>]) -> Result<Self> {
        let num_users = rows.len();
        let num_subchannels = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != num_subchannels) {
            return Err(Error::DimensionMismatch("ragged SNR table".into()));
        }
        let mut real = Self::filled(num_subchannels, num_users, 0, 0.0);
        for (m, row) in rows.iter().enumerate() {
            for (n, &snr) in row.iter().enumerate() {
                for tau in [SubSlot::First, SubSlot::Second] {
                    real.set_direct(SubchannelId(n), UserId(m), tau, snr);
                }
            }
        }
        real.validate()?;
        Ok(real)
    }

    pub fn num_subchannels(&self) -> usize {
        self.num_subchannels
    }

    pub fn num_users(&self) -> usize {
        self.num_users
    }

    pub fn num_relays(&self) -> usize {
        self.num_relays
    }

    fn direct_idx(&self, n: SubchannelId, m: UserId, tau: SubSlot) -> usize {
        (n.0 * self.num_users + m.0) * 2 + tau.index()
    }

    fn first_hop_idx(&self, n: SubchannelId, k: RelayId) -> usize {
        n.0 * self.num_relays + k.0
    }

    fn second_hop_idx(&self, n: SubchannelId, k: RelayId, m: UserId) -> usize {
        (n.0 * self.num_relays + k.0) * self.num_users + m.0
    }

    /// `δ` of the BS→MS link.
    pub fn direct(&self, n: SubchannelId, m: UserId, tau: SubSlot) -> f64 {
        self.snr_direct[self.direct_idx(n, m, tau)]
    }

    /// `δ` of the BS→RS link (sub-slot 1).
    pub fn first_hop(&self, n: SubchannelId, k: RelayId) -> f64 {
        self.snr_first_hop[self.first_hop_idx(n, k)]
    }

    /// `δ` of the RS→MS link (sub-slot 2).
    pub fn second_hop(&self, n: SubchannelId, k: RelayId, m: UserId) -> f64 {
        self.snr_second_hop[self.second_hop_idx(n, k, m)]
    }

    pub fn set_direct(&mut self, n: SubchannelId, m: UserId, tau: SubSlot, snr: f64) {
        let i = self.direct_idx(n, m, tau);
        self.snr_direct[i] = snr;
    }

    pub fn set_first_hop(&mut self, n: SubchannelId, k: RelayId, snr: f64) {
        let i = self.first_hop_idx(n, k);
        self.snr_first_hop[i] = snr;
    }

    pub fn set_second_hop(&mut self, n: SubchannelId, k: RelayId, m: UserId, snr: f64) {
        let i = self.second_hop_idx(n, k, m);
        self.snr_second_hop[i] = snr;
    }

    /// Every entry must be finite and nonnegative.
    pub fn validate(&self) -> Result<()> {
        let bad = self
            .snr_direct
            .iter()
            .chain(&self.snr_first_hop)
            .chain(&self.snr_second_hop)
            .any(|v| !(v.is_finite() && *v >= 0.0));
        if bad {
            return Err(domain("channel SNR entries must be finite and ≥ 0"));
        }
        Ok(())
    }

    /// Fails unless the realization was built for this cell.
    pub fn check_dims(&self, cfg: &SystemConfig, topo: &Topology) -> Result<()> {
        if self.num_subchannels != cfg.num_subchannels
            || self.num_users != topo.num_users
            || self.num_relays != topo.num_relays
        {
            return Err(Error::DimensionMismatch(format!(
                "realization is N={} M={} K={}, cell is N={} M={} K={}",
                self.num_subchannels,
                self.num_users,
                self.num_relays,
                cfg.num_subchannels,
                topo.num_users,
                topo.num_relays
            )));
        }
        Ok(())
    }
}

/// SNR gap `Γ = -ln(5·BER) / 1.6` for a target bit-error rate in `(0, 0.2)`.
pub fn snr_gap(ber_target: f64) -> Result<f64> {
    if !(ber_target > 0.0 && ber_target < 0.2) {
        return Err(domain(format!("ber_target {ber_target} outside (0, 0.2)")));
    }
    Ok(-(5.0 * ber_target).ln() / 1.6)
}

/// Capacity in bit/s of one subchannel at linear SNR `snr`:
/// `(W/N) · log2(1 + snr/Γ)`.
pub fn link_capacity(snr: f64, cfg: &SystemConfig) -> Result<f64> {
    let gap = snr_gap(cfg.ber_target)?;
    capacity_with_gap(snr, gap, cfg.subchannel_bandwidth())
}

pub(crate) fn capacity_with_gap(snr: f64, gap: f64, subchannel_bw: f64) -> Result<f64> {
    if snr.is_nan() || snr < 0.0 {
        return Err(domain(format!("snr {snr} must be ≥ 0")));
    }
    Ok(subchannel_bw * (1.0 + snr / gap).log2())
}

fn stream_rng(seed: u64, slot_index: u64, tag: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((slot_index << 2) | tag);
    rng
}

fn fill_exponential(out: &mut [f64], mean: f64, rng: &mut ChaCha8Rng) {
    let dist = Exp::new(1.0 / mean).expect("mean validated > 0");
    for v in out {
        *v = dist.sample(rng);
    }
}

/// Draws one slot of i.i.d. exponential SNRs.
///
/// Each link class has its own keyed ChaCha stream derived from
/// `(seed, slot_index, class)`, so any slot can be regenerated on its own.
pub fn draw_channel(
    params: &ChannelParams,
    cfg: &SystemConfig,
    topo: &Topology,
    slot_index: u64,
) -> Result<ChannelRealization> {
    params.validate()?;
    let mut real = ChannelRealization::filled(cfg.num_subchannels, topo.num_users, topo.num_relays, 0.0);
    fill_exponential(
        &mut real.snr_direct,
        params.mean_snr_direct,
        &mut stream_rng(params.seed, slot_index, TAG_DIRECT),
    );
    fill_exponential(
        &mut real.snr_first_hop,
        params.mean_snr_first_hop,
        &mut stream_rng(params.seed, slot_index, TAG_FIRST_HOP),
    );
    fill_exponential(
        &mut real.snr_second_hop,
        params.mean_snr_second_hop,
        &mut stream_rng(params.seed, slot_index, TAG_SECOND_HOP),
    );
    Ok(real)
}
