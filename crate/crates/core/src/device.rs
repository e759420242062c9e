//! Radio nodes and the per-transmitter action tuple.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Cartesian coordinates in meters, cell-centred (base station at the origin).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub const ORIGIN: Position = Position { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance_to(&self, other: &Position) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn midpoint(&self, other: &Position) -> Position {
        Position::new((self.x + other.x) / 2.0, (self.y + other.y) / 2.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeviceKind {
    BaseStation,
    CellularUe,
    D2dTransmitter,
    D2dReceiver,
}

impl DeviceKind {
    pub fn is_ue(self) -> bool {
        !matches!(self, DeviceKind::BaseStation)
    }
}

/// Identity of a device within one scenario. `D2dTransmitter(n)` and
/// `D2dReceiver(n)` together form D2D pair `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DeviceId {
    pub kind: DeviceKind,
    pub index: usize,
}

impl DeviceId {
    pub const BASE_STATION: DeviceId = DeviceId {
        kind: DeviceKind::BaseStation,
        index: 0,
    };

    pub fn cue(index: usize) -> Self {
        Self {
            kind: DeviceKind::CellularUe,
            index,
        }
    }

    pub fn due_tx(pair: usize) -> Self {
        Self {
            kind: DeviceKind::D2dTransmitter,
            index: pair,
        }
    }

    pub fn due_rx(pair: usize) -> Self {
        Self {
            kind: DeviceKind::D2dReceiver,
            index: pair,
        }
    }
}

impl fmt::Display for DeviceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            DeviceKind::BaseStation => write!(f, "bs"),
            DeviceKind::CellularUe => write!(f, "cue{}", self.index),
            DeviceKind::D2dTransmitter => write!(f, "due{}t", self.index),
            DeviceKind::D2dReceiver => write!(f, "due{}r", self.index),
        }
    }
}

/// Link-budget parameters of one device.
///
/// `cable_loss_db` and `amplifier_gain_db` only enter the base station's
/// transmit and receive chains; `body_loss_db` only the UE chains.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RfParams {
    pub tx_power_dbm: f64,
    pub num_subcarriers: u32,
    pub antenna_gain_dbi: f64,
    pub interference_margin_db: f64,
    pub body_loss_db: f64,
    pub cable_loss_db: f64,
    pub amplifier_gain_db: f64,
    pub rx_sensitivity_dbm: f64,
    pub noise_dbm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Device {
    pub id: DeviceId,
    pub position: Position,
    pub rf: RfParams,
}

/// All devices of one scenario: the base station, `M` cellular UEs and `N`
/// D2D pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Roster {
    pub base_station: Device,
    pub cues: Vec<Device>,
    pub due_tx: Vec<Device>,
    pub due_rx: Vec<Device>,
}

impl Roster {
    pub fn get(&self, id: DeviceId) -> Option<&Device> {
        match id.kind {
            DeviceKind::BaseStation => (id.index == 0).then_some(&self.base_station),
            DeviceKind::CellularUe => self.cues.get(id.index),
            DeviceKind::D2dTransmitter => self.due_tx.get(id.index),
            DeviceKind::D2dReceiver => self.due_rx.get(id.index),
        }
    }

    pub fn get_mut(&mut self, id: DeviceId) -> Option<&mut Device> {
        match id.kind {
            DeviceKind::BaseStation => (id.index == 0).then_some(&mut self.base_station),
            DeviceKind::CellularUe => self.cues.get_mut(id.index),
            DeviceKind::D2dTransmitter => self.due_tx.get_mut(id.index),
            DeviceKind::D2dReceiver => self.due_rx.get_mut(id.index),
        }
    }

    pub fn num_cues(&self) -> usize {
        self.cues.len()
    }

    pub fn num_pairs(&self) -> usize {
        self.due_tx.len()
    }

    pub fn len(&self) -> usize {
        1 + self.cues.len() + self.due_tx.len() + self.due_rx.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn iter(&self) -> impl Iterator<Item = &Device> {
        std::iter::once(&self.base_station)
            .chain(&self.cues)
            .chain(&self.due_tx)
            .chain(&self.due_rx)
    }

    /// Midpoint between the transmitter and receiver of pair `n`.
    pub fn pair_midpoint(&self, pair: usize) -> Position {
        self.due_tx[pair]
            .position
            .midpoint(&self.due_rx[pair].position)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    CellularUplink,
    CellularDownlink,
    D2d,
    NoOp,
}

/// One transmitter's decision for a step: who it sends to, in which mode,
/// on which resource block and at what power. `rb` and `tx_power_dbm` are
/// ignored for [`Mode::NoOp`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Action {
    pub transmitter: DeviceId,
    pub receiver: DeviceId,
    pub mode: Mode,
    pub rb: usize,
    pub tx_power_dbm: f64,
}

impl Action {
    pub fn d2d(pair: usize, rb: usize, tx_power_dbm: f64) -> Self {
        Self {
            transmitter: DeviceId::due_tx(pair),
            receiver: DeviceId::due_rx(pair),
            mode: Mode::D2d,
            rb,
            tx_power_dbm,
        }
    }

    pub fn uplink(cue: usize, rb: usize, tx_power_dbm: f64) -> Self {
        Self {
            transmitter: DeviceId::cue(cue),
            receiver: DeviceId::BASE_STATION,
            mode: Mode::CellularUplink,
            rb,
            tx_power_dbm,
        }
    }

    pub fn downlink(cue: usize, rb: usize, tx_power_dbm: f64) -> Self {
        Self {
            transmitter: DeviceId::BASE_STATION,
            receiver: DeviceId::cue(cue),
            mode: Mode::CellularDownlink,
            rb,
            tx_power_dbm,
        }
    }

    pub fn no_op(transmitter: DeviceId) -> Self {
        Self {
            transmitter,
            receiver: transmitter,
            mode: Mode::NoOp,
            rb: 0,
            tx_power_dbm: 0.0,
        }
    }

    pub fn is_transmitting(&self) -> bool {
        self.mode != Mode::NoOp
    }

    /// Checks the mode/endpoint pairing and the resource block range.
    pub fn validate(&self, num_rbs: usize) -> Result<(), ActionError> {
        use DeviceKind::*;
        let (tx, rx) = (self.transmitter, self.receiver);
        let endpoints_ok = match self.mode {
            Mode::NoOp => return Ok(()),
            Mode::D2d => {
                tx.kind == D2dTransmitter && rx.kind == D2dReceiver && tx.index == rx.index
            }
            Mode::CellularUplink => tx.kind == CellularUe && rx.kind == BaseStation,
            Mode::CellularDownlink => tx.kind == BaseStation && rx.kind == CellularUe,
        };
        if !endpoints_ok {
            return Err(ActionError::EndpointMismatch {
                mode: self.mode,
                transmitter: tx,
                receiver: rx,
            });
        }
        if self.rb >= num_rbs {
            return Err(ActionError::ResourceBlockOutOfRange {
                rb: self.rb,
                num_rbs,
            });
        }
        if !self.tx_power_dbm.is_finite() {
            return Err(ActionError::NonFinitePower(tx));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ActionError {
    #[error("mode {mode:?} cannot link {transmitter} to {receiver}")]
    EndpointMismatch {
        mode: Mode,
        transmitter: DeviceId,
        receiver: DeviceId,
    },
    #[error("resource block {rb} outside [0, {num_rbs})")]
    ResourceBlockOutOfRange { rb: usize, num_rbs: usize },
    #[error("transmit power of {0} is not finite")]
    NonFinitePower(DeviceId),
}
