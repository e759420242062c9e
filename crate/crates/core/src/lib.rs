//! Device-to-device underlay cellular offload simulator.
//!
//! One OFDMA cell with a base station at the origin, cellular UEs holding one
//! resource block each, and D2D pairs that reuse those resource blocks. The
//! crate covers the radio model ([`pathloss`], [`link_budget`]), the frame
//! simulator ([`simulator`]), an episodic multi-agent environment ([`env`])
//! and reference allocation policies ([`agents`]).

pub mod agents;
pub mod config;
pub mod device;
pub mod env;
pub mod link_budget;
pub mod pathloss;
pub mod rng;
pub mod simulator;
pub mod units;

pub use config::ScenarioConfig;
pub use device::{Action, Device, DeviceId, DeviceKind, Mode, Position, RfParams, Roster};
pub use env::{D2dEnv, EnvStepResult, PairId};
pub use link_budget::LinkReport;
pub use simulator::{Simulator, StepMetrics};
