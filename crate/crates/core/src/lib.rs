//! Downlink scheduling for a relay-enhanced OFDMA cell.
//!
//! One BS, `K` fixed relays and `M` mobiles share `N` subchannels. Each
//! downlink slot has two sub-slots: the BS transmits to mobiles and relays
//! in the first, relays forward to their mobiles in the second. Every slot
//! the scheduler decides which users are served, over which subchannel, and
//! whether directly or through a relay.
//!
//! The crate provides the channel model ([`channel`]), the variance-based
//! and max-SNR schedulers ([`scheduler`]), rate accounting ([`rates`]),
//! fairness metrics ([`metrics`]) and a seeded simulation loop ([`sim`]).

pub mod channel;
pub mod error;
pub mod metrics;
pub mod model;
pub mod rates;
pub mod scheduler;
pub mod sim;

pub use channel::{draw_channel, link_capacity, snr_gap, ChannelParams, ChannelRealization};
pub use error::{Error, Result};
pub use metrics::{jain_index, summarize_run, RunSummary};
pub use model::{validate_config, CommMode, RelayId, SubSlot, SubchannelId, SystemConfig, Topology, UserId};
pub use rates::{compute_slot_rates, frame_objective, update_average, RateState, SlotRates};
pub use scheduler::{
    constraint_violations, schedule_slot, Allocation, Grant, Pools, ScheduleOptions, SchedulerPolicy, SubchannelPool,
};
pub use sim::{run, run_batch, run_with_channel, sweep, BatchAggregate, BatchResult, RunResult, ScenarioConfig, SweepAxis};
