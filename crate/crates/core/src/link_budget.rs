//! EIRP, received power, SINR and capacity for the links active in a step.
//!
//! All gains and losses are handled in dB. Interference is summed in linear
//! milliwatts.
//!
//! Transmit and receive powers are per subcarrier: EIRP subtracts
//! `10 log10(s)`, and the receiver's noise is referenced to one subcarrier in
//! the same way. When every device uses the same `s` the term cancels out of
//! the SINR ratio entirely.

use std::collections::{BTreeMap, BTreeSet};

use rand::RngCore;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::GatingRule;
use crate::device::{Action, ActionError, Device, DeviceId, DeviceKind, Mode, Roster};
use crate::pathloss::{PathlossError, PathlossModel};
use crate::units::dbm_to_mw;

/// Outcome of one active link in one step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkReport {
    pub transmitter: DeviceId,
    pub receiver: DeviceId,
    pub mode: Mode,
    pub rb: usize,
    pub tx_power_dbm: f64,
    pub eirp_dbm: f64,
    pub rx_power_dbm: f64,
    /// Co-channel interference at the receiver, excluding noise.
    pub interference_mw: f64,
    /// Noise at the receiver, per subcarrier.
    pub noise_dbm: f64,
    pub sinr_db: f64,
    pub capacity_mbps: f64,
    /// Capacity was forced to zero by the receiver sensitivity rule.
    pub gated: bool,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinkError {
    #[error("transmitter {0} appears in more than one action")]
    DuplicateTransmitter(DeviceId),
    #[error("base station has more than one action on RB {0}")]
    DuplicateBaseStationRb(usize),
    #[error("action references unknown device {0}")]
    UnknownDevice(DeviceId),
    #[error(transparent)]
    Action(#[from] ActionError),
    #[error("path loss {transmitter} -> {receiver}: {source}")]
    Pathloss {
        transmitter: DeviceId,
        receiver: DeviceId,
        #[source]
        source: PathlossError,
    },
}

fn subcarrier_db(device: &Device) -> f64 {
    10.0 * f64::from(device.rf.num_subcarriers).log10()
}

/// Effective isotropic radiated power of `device` transmitting at
/// `tx_power_dbm`.
pub fn eirp(device: &Device, tx_power_dbm: f64) -> f64 {
    let rf = &device.rf;
    let common =
        tx_power_dbm - subcarrier_db(device) + rf.antenna_gain_dbi - rf.interference_margin_db;
    match device.id.kind {
        DeviceKind::BaseStation => common - rf.cable_loss_db + rf.amplifier_gain_db,
        _ => common - rf.body_loss_db,
    }
}

/// Gains and losses of `device`'s receive chain.
pub fn receive_chain_db(device: &Device) -> f64 {
    let rf = &device.rf;
    match device.id.kind {
        DeviceKind::BaseStation => rf.antenna_gain_dbi - rf.cable_loss_db + rf.amplifier_gain_db,
        _ => rf.antenna_gain_dbi - rf.body_loss_db,
    }
}

/// Signal level at `rx` from `tx` transmitting at `tx_power_dbm` over a path
/// with `pathloss_db` of loss.
pub fn rx_power(tx: &Device, rx: &Device, tx_power_dbm: f64, pathloss_db: f64) -> f64 {
    eirp(tx, tx_power_dbm) - pathloss_db + receive_chain_db(rx)
}

/// Noise floor of `device` per subcarrier.
pub fn receiver_noise_dbm(device: &Device) -> f64 {
    device.rf.noise_dbm - subcarrier_db(device)
}

/// Signal over the linear sum of interferers and noise, in dB.
pub fn sinr(signal_dbm: f64, interferers_dbm: &[f64], noise_dbm: f64) -> f64 {
    let interference: f64 = interferers_dbm.iter().map(|&p| dbm_to_mw(p)).sum();
    sinr_from_mw(signal_dbm, interference, noise_dbm)
}

fn sinr_from_mw(signal_dbm: f64, interference_mw: f64, noise_dbm: f64) -> f64 {
    10.0 * (dbm_to_mw(signal_dbm) / (interference_mw + dbm_to_mw(noise_dbm))).log10()
}

/// Shannon capacity in Mbps for a channel of `bandwidth_mhz`.
pub fn capacity(sinr_db: f64, bandwidth_mhz: f64) -> f64 {
    bandwidth_mhz * dbm_to_mw(sinr_db).ln_1p() / std::f64::consts::LN_2
}

/// Capacity, or zero when `sinr_db` falls below `threshold`. The boundary
/// itself is not gated.
pub fn gated_capacity(sinr_db: f64, bandwidth_mhz: f64, threshold: f64) -> (f64, bool) {
    if sinr_db >= threshold {
        (capacity(sinr_db, bandwidth_mhz), false)
    } else {
        (0.0, true)
    }
}

/// Radio parameters shared by every link of a step.
#[derive(Debug, Clone, Copy)]
pub struct Channel<'a> {
    pub carrier_freq_hz: f64,
    pub rb_bandwidth_mhz: f64,
    pub num_rbs: usize,
    pub gating: GatingRule,
    pub model: &'a dyn PathlossModel,
}

/// One report per transmitting action, in action order.
///
/// A UE may appear in at most one action; the base station may transmit once
/// per resource block.
///
/// Each receiver sees every other transmitter on the same resource block as
/// interference, which covers D2D-to-cellular, cellular-to-D2D and
/// D2D-to-D2D interference alike. Path loss is drawn once per directed
/// (transmitter, receiver) pair, in action order, before any link is
/// evaluated.
pub fn compute_step_reports(
    roster: &Roster,
    actions: &[Action],
    channel: &Channel<'_>,
    rng: &mut dyn RngCore,
) -> Result<Vec<LinkReport>, LinkError> {
    let mut seen = BTreeSet::new();
    let mut bs_rbs = BTreeSet::new();
    for action in actions {
        if action.transmitter.kind == DeviceKind::BaseStation {
            if action.is_transmitting() && !bs_rbs.insert(action.rb) {
                return Err(LinkError::DuplicateBaseStationRb(action.rb));
            }
        } else if !seen.insert(action.transmitter) {
            return Err(LinkError::DuplicateTransmitter(action.transmitter));
        }
    }

    struct Active<'r> {
        action: Action,
        tx: &'r Device,
        rx: &'r Device,
    }

    let mut active = Vec::new();
    for action in actions.iter().filter(|a| a.is_transmitting()) {
        action.validate(channel.num_rbs)?;
        let tx = roster
            .get(action.transmitter)
            .ok_or(LinkError::UnknownDevice(action.transmitter))?;
        let rx = roster
            .get(action.receiver)
            .ok_or(LinkError::UnknownDevice(action.receiver))?;
        active.push(Active {
            action: *action,
            tx,
            rx,
        });
    }

    let mut by_rb: Vec<Vec<usize>> = vec![Vec::new(); channel.num_rbs];
    for (i, link) in active.iter().enumerate() {
        by_rb[link.action.rb].push(i);
    }

    let mut losses: BTreeMap<(DeviceId, DeviceId), f64> = BTreeMap::new();
    for link in &active {
        for &j in &by_rb[link.action.rb] {
            let tx = active[j].tx;
            if tx.id == link.rx.id {
                continue;
            }
            let key = (tx.id, link.rx.id);
            if losses.contains_key(&key) {
                continue;
            }
            let distance = tx.position.distance_to(&link.rx.position);
            let loss = channel
                .model
                .loss(channel.carrier_freq_hz, distance, rng)
                .map_err(|source| LinkError::Pathloss {
                    transmitter: tx.id,
                    receiver: link.rx.id,
                    source,
                })?;
            losses.insert(key, loss);
        }
    }

    let reports = active
        .iter()
        .enumerate()
        .map(|(i, link)| {
            let Action {
                transmitter,
                receiver,
                mode,
                rb,
                tx_power_dbm,
            } = link.action;
            let signal = rx_power(
                link.tx,
                link.rx,
                tx_power_dbm,
                losses[&(transmitter, receiver)],
            );
            let interference_mw: f64 = by_rb[rb]
                .iter()
                .filter(|&&j| j != i && active[j].tx.id != receiver)
                .map(|&j| {
                    let other = &active[j];
                    let loss = losses[&(other.tx.id, receiver)];
                    dbm_to_mw(rx_power(other.tx, link.rx, other.action.tx_power_dbm, loss))
                })
                .sum();
            let noise_dbm = receiver_noise_dbm(link.rx);
            let sinr_db = sinr_from_mw(signal, interference_mw, noise_dbm);
            let threshold = link.rx.rf.rx_sensitivity_dbm;
            let (capacity_mbps, gated) = match channel.gating {
                GatingRule::SinrDb => gated_capacity(sinr_db, channel.rb_bandwidth_mhz, threshold),
                GatingRule::RxPowerDbm if signal >= threshold => {
                    (capacity(sinr_db, channel.rb_bandwidth_mhz), false)
                }
                GatingRule::RxPowerDbm => (0.0, true),
            };
            LinkReport {
                transmitter,
                receiver,
                mode,
                rb,
                tx_power_dbm,
                eirp_dbm: eirp(link.tx, tx_power_dbm),
                rx_power_dbm: signal,
                interference_mw,
                noise_dbm,
                sinr_db,
                capacity_mbps,
                gated,
            }
        })
        .collect();
    Ok(reports)
}
