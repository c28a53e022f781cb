//! Configuration, topology and identifier types shared by the whole crate.
//!
//! Symbol convention used throughout: `N` subchannels, `M` users (mobile
//! stations), `K` relays.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};

/// Physical-layer and frame parameters of the cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    /// Total bandwidth `W` in Hz.
    pub bandwidth_hz: f64,
    /// Number of orthogonal subchannels `N`.
    pub num_subchannels: usize,
    /// Total BS transmit power in watts, split uniformly over subchannels.
    pub total_power_w: f64,
    /// Total transmit power of each relay in watts.
    pub relay_power_w: f64,
    /// Target bit-error rate; determines the SNR gap.
    pub ber_target: f64,
    /// Noise power spectral density in W/Hz.
    pub noise_psd: f64,
    /// Moving-average window `T` in slots.
    pub avg_window: usize,
    /// OFDMA symbols per downlink sub-frame. Informational only.
    pub symbols_per_subframe: usize,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            bandwidth_hz: 10e6,
            num_subchannels: 128,
            total_power_w: 20.0,
            relay_power_w: 20.0,
            ber_target: 1e-3,
            // -174 dBm/Hz
            noise_psd: 3.981e-21,
            avg_window: 100,
            symbols_per_subframe: 24,
        }
    }
}

impl SystemConfig {
    /// Width of one subchannel, `W / N`.
    pub fn subchannel_bandwidth(&self) -> f64 {
        self.bandwidth_hz / self.num_subchannels as f64
    }

    /// Uniform per-subchannel BS power `p_n = P_tot / N`.
    pub fn power_per_subchannel(&self) -> f64 {
        self.total_power_w / self.num_subchannels as f64
    }

    /// Uniform per-subchannel relay power `p'_n`.
    pub fn relay_power_per_subchannel(&self) -> f64 {
        self.relay_power_w / self.num_subchannels as f64
    }

    /// Noise power on one subchannel, `n0 * W / N`.
    pub fn noise_power(&self) -> f64 {
        self.noise_psd * self.subchannel_bandwidth()
    }
}

/// Node counts of the cell. There is always exactly one BS.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Topology {
    pub num_users: usize,
    pub num_relays: usize,
}

impl Default for Topology {
    fn default() -> Self {
        Self {
            num_users: 10,
            num_relays: 6,
        }
    }
}

macro_rules! index_newtype {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        pub struct $name(pub usize);

        impl $name {
            pub fn index(self) -> usize {
                self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}", self.0)
            }
        }
    };
}

index_newtype!(
    /// Zero-based mobile station index.
    UserId
);
index_newtype!(
    /// Zero-based relay station index.
    RelayId
);
index_newtype!(
    /// Zero-based subchannel index.
    SubchannelId
);

/// Sub-slot of a downlink slot. Relays only transmit in the second one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SubSlot {
    First,
    Second,
}

impl SubSlot {
    pub fn index(self) -> usize {
        match self {
            SubSlot::First => 0,
            SubSlot::Second => 1,
        }
    }
}

/// How a served user receives its data in a slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CommMode {
    Direct,
    Relayed(RelayId),
}

/// Checks every `SystemConfig` and `Topology` invariant, reporting the first
/// one that fails.
pub fn validate_config(cfg: &SystemConfig, topo: &Topology) -> Result<()> {
    let fail = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
    if !(cfg.bandwidth_hz.is_finite() && cfg.bandwidth_hz > 0.0) {
        return fail("bandwidth_hz must be > 0");
    }
    if cfg.num_subchannels < 1 {
        return fail("num_subchannels must be ≥ 1");
    }
    if !(cfg.total_power_w.is_finite() && cfg.total_power_w > 0.0) {
        return fail("total_power_w must be > 0");
    }
    if !(cfg.relay_power_w.is_finite() && cfg.relay_power_w > 0.0) {
        return fail("relay_power_w must be > 0");
    }
    if !(cfg.ber_target > 0.0 && cfg.ber_target < 0.2) {
        return fail("ber_target out of range (0, 0.2)");
    }
    if !(cfg.noise_psd.is_finite() && cfg.noise_psd > 0.0) {
        return fail("noise_psd must be > 0");
    }
    if cfg.avg_window < 1 {
        return fail("avg_window must be ≥ 1");
    }
    if topo.num_users < 1 {
        return fail("num_users must be ≥ 1");
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paper_setup_is_valid() {
        let cfg = SystemConfig::default();
        assert_eq!(cfg.bandwidth_hz, 10e6);
        assert_eq!(cfg.num_subchannels, 128);
        assert!(validate_config(&cfg, &Topology::default()).is_ok());
    }

    #[test]
    fn zero_subchannels_rejected() {
        let cfg = SystemConfig {
            num_subchannels: 0,
            ..Default::default()
        };
        let err = validate_config(&cfg, &Topology::default()).unwrap_err();
        assert!(err.to_string().contains("num_subchannels must be ≥ 1"));
    }

    #[test]
    fn ber_out_of_range_rejected() {
        for ber in [0.5, 0.2, 0.0, -1e-3, f64::NAN] {
            let cfg = SystemConfig {
                ber_target: ber,
                ..Default::default()
            };
            let err = validate_config(&cfg, &Topology::default()).unwrap_err();
            assert!(err.to_string().contains("ber_target out of range"), "{ber}");
        }
    }

    #[test]
    fn zero_users_rejected_zero_relays_accepted() {
        let cfg = SystemConfig::default();
        let none = Topology {
            num_users: 0,
            num_relays: 2,
        };
        assert!(validate_config(&cfg, &none).is_err());
        let direct_only = Topology {
            num_users: 3,
            num_relays: 0,
        };
        assert!(validate_config(&cfg, &direct_only).is_ok());
    }

    #[test]
    fn zero_window_rejected() {
        let cfg = SystemConfig {
            avg_window: 0,
            ..Default::default()
        };
        assert!(validate_config(&cfg, &Topology::default()).is_err());
    }

    #[test]
    fn derived_quantities() {
        let cfg = SystemConfig::default();
        assert_eq!(cfg.subchannel_bandwidth(), 78125.0);
        assert_eq!(cfg.power_per_subchannel(), 20.0 / 128.0);
        assert!((cfg.noise_power() - 3.981e-21 * 78125.0).abs() < 1e-30);
    }
}
