//! Agent-level SEIRAH epidemic simulation on interconnected residence/work
//! small-world networks, with inference of the daily social infectivity
//! `beta_t` from observed hospitalization counts.
//!
//! The crate is organised bottom-up:
//!
//! - [`topology`]: Newman-Watts generator, metropolitan residence graphs and
//!   the daily commuter work network.
//! - [`epidemic`]: the SEIRAH state machine (contagion in two daily time
//!   zones, stochastic progression) with snapshot/restore.
//! - [`inference`]: the bracket-shrinking search for `beta_t`.
//! - [`sweep`]: grid search over `(p_residence, p_work)` network patterns.
//! - [`data_io`]: CSV loaders and exporters, node-history records.
//! - [`scenario`]: a complete, serialisable run description tying it together.

pub mod data_io;
pub mod epidemic;
mod error;
pub mod inference;
pub mod rng;
pub mod scenario;
pub mod sweep;
pub mod topology;

pub use epidemic::{
    DailyCounts, SimState, StateSnapshot, Status, StatusEvent, TransitionTally, TransitionThresholds,
};
pub use error::{Error, Result};
pub use inference::{BetaSeries, DayEstimate, InferenceConfig};
pub use scenario::{NetworkConfig, Scenario, SeedingSpec};
pub use sweep::{SweepCell, SweepGrid, SweepResult};
pub use topology::{Graph, Indicator, MetroTopology, NetworkParams, RegionSpec};
