//! Single-cell network simulator.
//!
//! Each [`Simulator::step`] models one radio frame: the internal traffic
//! model's actions for the base station and CUEs are merged with the agent's
//! D2D actions, link budgets are evaluated and per-step metrics derived.
//! Devices stay put for an episode and are redrawn on [`Simulator::reset`].

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{ScenarioConfig, TrafficKind, Violation};
use crate::device::{Action, Device, DeviceId, DeviceKind, Mode, Position, Roster};
use crate::link_budget::{compute_step_reports, Channel, LinkError, LinkReport};
use crate::pathloss::{ModelRegistry, PathlossError, PathlossModel};
use crate::rng::{substream, SimRng, Stream};

/// Devices are never placed closer than this to each other or to the BS.
pub const MIN_SEPARATION_M: f64 = 1.0;

const MAX_PLACEMENT_ATTEMPTS: usize = 100_000;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid scenario: {}", join(.0))]
    InvalidConfig(Vec<Violation>),
    #[error(transparent)]
    Pathloss(#[from] PathlossError),
    #[error(transparent)]
    Link(#[from] LinkError),
    #[error(transparent)]
    Traffic(#[from] TrafficError),
    #[error("could not place {0} after {MAX_PLACEMENT_ATTEMPTS} attempts")]
    Placement(DeviceId),
    #[error("agent actions may only drive D2D transmitters, got {0}")]
    AgentAction(DeviceId),
    #[error("more than one action for D2D pair {0}")]
    DuplicatePair(usize),
    #[error("{transmitter} power {power_dbm} dBm outside [{min}, {max}] dBm")]
    PowerOutOfRange {
        transmitter: DeviceId,
        power_dbm: f64,
        min: f64,
        max: f64,
    },
    #[error("episode finished after {0} steps; reset required")]
    EpisodeFinished(usize),
}

fn join(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

fn uniform_in_disc(rng: &mut SimRng, center: Position, radius: f64) -> Position {
    let r = radius * rng.gen::<f64>().sqrt();
    let theta = 2.0 * PI * rng.gen::<f64>();
    Position::new(center.x + r * theta.cos(), center.y + r * theta.sin())
}

/// Draws a fresh roster: the BS at the origin, CUEs and D2D transmitters
/// uniform over the cell, each D2D receiver uniform within
/// `due_pair_max_distance_m` of its transmitter. Draws that leave the cell or
/// come within `min_separation_m` of an already placed device are redrawn.
pub fn place_devices(
    config: &ScenarioConfig,
    min_separation_m: f64,
    rng: &mut SimRng,
) -> Result<Roster, SimError> {
    let radius = config.cell_radius_m;
    let mut placed = vec![Position::ORIGIN];

    let mut draw = |id: DeviceId, rng: &mut SimRng, center: Position, spread: f64| {
        for _ in 0..MAX_PLACEMENT_ATTEMPTS {
            let p = uniform_in_disc(rng, center, spread);
            if p.norm() < radius && placed.iter().all(|q| q.distance_to(&p) >= min_separation_m) {
                placed.push(p);
                return Ok(p);
            }
        }
        Err(SimError::Placement(id))
    };

    let device = |id: DeviceId, position: Position, rf| Device { id, position, rf };
    let mut cues = Vec::with_capacity(config.num_cues);
    for m in 0..config.num_cues {
        let id = DeviceId::cue(m);
        cues.push(device(
            id,
            draw(id, rng, Position::ORIGIN, radius)?,
            config.cue_rf,
        ));
    }
    let mut due_tx = Vec::with_capacity(config.num_due_pairs);
    let mut due_rx = Vec::with_capacity(config.num_due_pairs);
    for n in 0..config.num_due_pairs {
        let (tid, rid) = (DeviceId::due_tx(n), DeviceId::due_rx(n));
        let t = draw(tid, rng, Position::ORIGIN, radius)?;
        let r = draw(rid, rng, t, config.due_pair_max_distance_m)?;
        due_tx.push(device(tid, t, config.due_rf));
        due_rx.push(device(rid, r, config.due_rf));
    }
    Ok(Roster {
        base_station: device(DeviceId::BASE_STATION, Position::ORIGIN, config.bs_rf),
        cues,
        due_tx,
        due_rx,
    })
}

/// Roster with fixed positions and the configured RF parameters. The base
/// station sits at the origin; `pairs` are `(transmitter, receiver)`.
pub fn roster_at(
    config: &ScenarioConfig,
    cues: &[Position],
    pairs: &[(Position, Position)],
) -> Roster {
    let device = |id: DeviceId, position: Position, rf| Device { id, position, rf };
    Roster {
        base_station: device(DeviceId::BASE_STATION, Position::ORIGIN, config.bs_rf),
        cues: cues
            .iter()
            .enumerate()
            .map(|(m, &p)| device(DeviceId::cue(m), p, config.cue_rf))
            .collect(),
        due_tx: pairs
            .iter()
            .enumerate()
            .map(|(n, p)| device(DeviceId::due_tx(n), p.0, config.due_rf))
            .collect(),
        due_rx: pairs
            .iter()
            .enumerate()
            .map(|(n, p)| device(DeviceId::due_rx(n), p.1, config.due_rf))
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrafficError {
    #[error("full-load traffic needs one RB per CUE: {cues} CUEs, {rbs} RBs")]
    NotEnoughRbs { cues: usize, rbs: usize },
    #[error("traffic model emitted an action for D2D device {0}")]
    DrivesD2d(DeviceId),
}

/// Generates the base station's and CUEs' actions for a step. Implementations
/// must never drive D2D devices; those belong to the agent.
pub trait TrafficModel: fmt::Debug + Send + Sync {
    fn actions(
        &self,
        roster: &Roster,
        config: &ScenarioConfig,
    ) -> Result<Vec<Action>, TrafficError>;
}

/// CUE `m` sends to the base station on RB `m` at the configured CUE power.
#[derive(Debug, Clone, Copy, Default)]
pub struct FullLoadUplink;

impl TrafficModel for FullLoadUplink {
    fn actions(
        &self,
        roster: &Roster,
        config: &ScenarioConfig,
    ) -> Result<Vec<Action>, TrafficError> {
        if roster.num_cues() > config.num_rbs {
            return Err(TrafficError::NotEnoughRbs {
                cues: roster.num_cues(),
                rbs: config.num_rbs,
            });
        }
        Ok((0..roster.num_cues())
            .map(|m| Action::uplink(m, m, config.cue_tx_power_dbm))
            .collect())
    }
}

/// The base station sends to CUE `m` on RB `m` at its configured power.
#[derive(Debug, Clone, Copy, Default)]
pub struct FullLoadDownlink;

impl TrafficModel for FullLoadDownlink {
    fn actions(
        &self,
        roster: &Roster,
        config: &ScenarioConfig,
    ) -> Result<Vec<Action>, TrafficError> {
        if roster.num_cues() > config.num_rbs {
            return Err(TrafficError::NotEnoughRbs {
                cues: roster.num_cues(),
                rbs: config.num_rbs,
            });
        }
        Ok((0..roster.num_cues())
            .map(|m| Action::downlink(m, m, config.bs_rf.tx_power_dbm))
            .collect())
    }
}

pub fn traffic_model(kind: TrafficKind) -> Box<dyn TrafficModel> {
    match kind {
        TrafficKind::UplinkFullLoad => Box::new(FullLoadUplink),
        TrafficKind::DownlinkFullLoad => Box::new(FullLoadDownlink),
    }
}

/// Aggregate outcome of one step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepMetrics {
    pub episode: usize,
    pub step: usize,
    pub total_capacity_mbps: f64,
    pub cue_capacity_mbps: f64,
    pub due_capacity_mbps: f64,
    /// Mean transmit power of the DUEs that transmitted; `None` if none did.
    pub mean_due_tx_power_dbm: Option<f64>,
    /// Transmitters per resource block.
    pub per_rb_occupancy: Vec<usize>,
    pub gated_link_count: usize,
}

impl StepMetrics {
    pub fn from_reports(
        reports: &[LinkReport],
        num_rbs: usize,
        episode: usize,
        step: usize,
    ) -> Self {
        let mut cue = 0.0;
        let mut due = 0.0;
        let mut due_power = Vec::new();
        let mut per_rb_occupancy = vec![0; num_rbs];
        for r in reports {
            per_rb_occupancy[r.rb] += 1;
            match r.mode {
                Mode::D2d => {
                    due += r.capacity_mbps;
                    due_power.push(r.tx_power_dbm);
                }
                Mode::CellularUplink | Mode::CellularDownlink => cue += r.capacity_mbps,
                Mode::NoOp => {}
            }
        }
        let mean_due_tx_power_dbm =
            (!due_power.is_empty()).then(|| due_power.iter().sum::<f64>() / due_power.len() as f64);
        Self {
            episode,
            step,
            total_capacity_mbps: cue + due,
            cue_capacity_mbps: cue,
            due_capacity_mbps: due,
            mean_due_tx_power_dbm,
            per_rb_occupancy,
            gated_link_count: reports.iter().filter(|r| r.gated).count(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub reports: Vec<LinkReport>,
    pub metrics: StepMetrics,
}

/// Evaluates one frame on a fixed roster: traffic actions first, then one
/// action per D2D pair in pair order (silent when absent from `due_actions`).
/// `clock` is the `(episode, step)` recorded in the metrics.
pub fn evaluate_frame(
    roster: &Roster,
    config: &ScenarioConfig,
    model: &dyn PathlossModel,
    traffic: &dyn TrafficModel,
    due_actions: &BTreeMap<usize, Action>,
    rng: &mut SimRng,
    clock: (usize, usize),
) -> Result<StepOutcome, SimError> {
    let mut actions = traffic.actions(roster, config)?;
    if let Some(bad) = actions.iter().find(|a| {
        matches!(
            a.transmitter.kind,
            DeviceKind::D2dTransmitter | DeviceKind::D2dReceiver
        )
    }) {
        return Err(TrafficError::DrivesD2d(bad.transmitter).into());
    }
    actions.extend((0..roster.num_pairs()).map(|n| {
        due_actions
            .get(&n)
            .copied()
            .unwrap_or_else(|| Action::no_op(DeviceId::due_tx(n)))
    }));
    let channel = Channel {
        carrier_freq_hz: config.carrier_freq_hz,
        rb_bandwidth_mhz: config.rb_bandwidth_mhz(),
        num_rbs: config.num_rbs,
        gating: config.gating,
        model,
    };
    let reports = compute_step_reports(roster, &actions, &channel, rng)?;
    let metrics = StepMetrics::from_reports(&reports, config.num_rbs, clock.0, clock.1);
    Ok(StepOutcome { reports, metrics })
}

/// Scenario state: roster, step and episode counters, random streams and the
/// last step's link reports. One instance is driven by one caller at a time;
/// separate instances are independent.
#[derive(Debug)]
pub struct Simulator {
    config: ScenarioConfig,
    model: Box<dyn PathlossModel>,
    traffic: Box<dyn TrafficModel>,
    roster: Roster,
    step_index: usize,
    episode_index: usize,
    placement_rng: SimRng,
    shadowing_rng: SimRng,
    last_reports: Vec<LinkReport>,
}

impl Simulator {
    /// Builds the scenario with the built-in models and places episode 0.
    pub fn new(config: ScenarioConfig, seed: u64) -> Result<Self, SimError> {
        let model = ModelRegistry::default().build(&config.pathloss_model)?;
        let traffic = traffic_model(config.traffic);
        Self::with_parts(config, model, traffic, seed)
    }

    pub fn with_parts(
        config: ScenarioConfig,
        model: Box<dyn PathlossModel>,
        traffic: Box<dyn TrafficModel>,
        seed: u64,
    ) -> Result<Self, SimError> {
        let violations = config.validate();
        if !violations.is_empty() {
            return Err(SimError::InvalidConfig(violations));
        }
        let mut placement_rng = substream(seed, Stream::Placement);
        let roster = place_devices(
            &config,
            model.min_distance_m().max(MIN_SEPARATION_M),
            &mut placement_rng,
        )?;
        Ok(Self {
            config,
            model,
            traffic,
            roster,
            step_index: 0,
            episode_index: 0,
            placement_rng,
            shadowing_rng: substream(seed, Stream::Shadowing),
            last_reports: Vec::new(),
        })
    }

    fn min_separation(&self) -> f64 {
        self.model.min_distance_m().max(MIN_SEPARATION_M)
    }

    /// Starts the next episode: every UE is redrawn from the continuing
    /// placement stream; the base station stays at the origin.
    pub fn reset(&mut self) -> Result<(), SimError> {
        self.roster = place_devices(&self.config, self.min_separation(), &mut self.placement_rng)?;
        self.episode_index += 1;
        self.step_index = 0;
        self.last_reports.clear();
        Ok(())
    }

    /// Restarts every random stream from `seed` and places episode 0 afresh.
    pub fn reseed(&mut self, seed: u64) -> Result<(), SimError> {
        self.placement_rng = substream(seed, Stream::Placement);
        self.shadowing_rng = substream(seed, Stream::Shadowing);
        self.roster = place_devices(&self.config, self.min_separation(), &mut self.placement_rng)?;
        self.episode_index = 0;
        self.step_index = 0;
        self.last_reports.clear();
        Ok(())
    }

    /// Advances one frame. Pairs without an agent action stay silent.
    pub fn step(&mut self, agent_actions: &[Action]) -> Result<StepOutcome, SimError> {
        if self.is_done() {
            return Err(SimError::EpisodeFinished(self.step_index));
        }
        let [min, max] = self.config.due_power_range_dbm;
        let mut by_pair: BTreeMap<usize, Action> = BTreeMap::new();
        for action in agent_actions {
            let tx = action.transmitter;
            if tx.kind != DeviceKind::D2dTransmitter || tx.index >= self.roster.num_pairs() {
                return Err(SimError::AgentAction(tx));
            }
            if action.is_transmitting() && !(min..=max).contains(&action.tx_power_dbm) {
                return Err(SimError::PowerOutOfRange {
                    transmitter: tx,
                    power_dbm: action.tx_power_dbm,
                    min,
                    max,
                });
            }
            if by_pair.insert(tx.index, *action).is_some() {
                return Err(SimError::DuplicatePair(tx.index));
            }
        }

        let outcome = evaluate_frame(
            &self.roster,
            &self.config,
            self.model.as_ref(),
            self.traffic.as_ref(),
            &by_pair,
            &mut self.shadowing_rng,
            (self.episode_index, self.step_index),
        )?;
        self.step_index += 1;
        self.last_reports.clone_from(&outcome.reports);
        Ok(outcome)
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    pub fn roster(&self) -> &Roster {
        &self.roster
    }

    /// Replaces device positions, e.g. to stage a hand-built topology. The
    /// roster shape must match the config.
    pub fn set_roster(&mut self, roster: Roster) {
        assert_eq!(
            roster.num_cues(),
            self.config.num_cues,
            "CUE count must match the config"
        );
        assert_eq!(
            roster.num_pairs(),
            self.config.num_due_pairs,
            "pair count must match the config"
        );
        self.roster = roster;
    }

    pub fn model(&self) -> &dyn PathlossModel {
        self.model.as_ref()
    }

    pub fn traffic(&self) -> &dyn TrafficModel {
        self.traffic.as_ref()
    }

    pub fn step_index(&self) -> usize {
        self.step_index
    }

    pub fn episode_index(&self) -> usize {
        self.episode_index
    }

    pub fn is_done(&self) -> bool {
        self.step_index >= self.config.episode_length_steps
    }

    pub fn last_reports(&self) -> &[LinkReport] {
        &self.last_reports
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pathloss::PathlossConfig;

    fn quiet(mut config: ScenarioConfig) -> ScenarioConfig {
        config.pathloss_model = PathlossConfig::LogDistanceShadowing {
            exponent: 2.0,
            sigma_db: 0.0,
            ref_distance_m: 1.0,
        };
        config
    }

    #[test]
    fn no_pairs_means_bs_and_cues_only() {
        let cfg = ScenarioConfig::default().with_due_pairs(0);
        let roster = place_devices(&cfg, 1.0, &mut substream(1, Stream::Placement)).unwrap();
        assert_eq!(roster.len(), 1 + 25);
        assert_eq!(roster.base_station.position, Position::ORIGIN);
    }

    #[test]
    fn placement_respects_cell_and_pair_distance() {
        let cfg = ScenarioConfig::default().with_due_pairs(50);
        for seed in 0..20 {
            let roster = place_devices(&cfg, 1.0, &mut substream(seed, Stream::Placement)).unwrap();
            assert_eq!(roster.len(), 1 + 25 + 100);
            for d in roster.iter() {
                assert!(d.position.norm() < 500.0);
            }
            for n in 0..50 {
                let sep = roster.due_tx[n]
                    .position
                    .distance_to(&roster.due_rx[n].position);
                assert!((1.0..=30.0).contains(&sep), "pair {n} separation {sep}");
            }
            let all: Vec<_> = roster.iter().collect();
            for (i, a) in all.iter().enumerate() {
                for b in &all[i + 1..] {
                    assert!(a.position.distance_to(&b.position) >= 1.0);
                }
            }
        }
    }

    #[test]
    fn placement_is_deterministic() {
        let cfg = ScenarioConfig::default();
        let a = place_devices(&cfg, 1.0, &mut substream(5, Stream::Placement)).unwrap();
        let b = place_devices(&cfg, 1.0, &mut substream(5, Stream::Placement)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn full_load_uplink_one_rb_per_cue() {
        let cfg = ScenarioConfig::default();
        let roster = place_devices(&cfg, 1.0, &mut substream(0, Stream::Placement)).unwrap();
        let actions = FullLoadUplink.actions(&roster, &cfg).unwrap();
        assert_eq!(actions.len(), 25);
        for (m, a) in actions.iter().enumerate() {
            assert_eq!(*a, Action::uplink(m, m, 23.0));
        }

        let mut small = cfg.clone();
        small.num_cues = 2;
        let roster = place_devices(&small, 1.0, &mut substream(0, Stream::Placement)).unwrap();
        let rbs: Vec<_> = FullLoadUplink
            .actions(&roster, &small)
            .unwrap()
            .iter()
            .map(|a| a.rb)
            .collect();
        assert_eq!(rbs, [0, 1]);

        let mut crowded = cfg;
        crowded.num_rbs = 24;
        assert_eq!(
            FullLoadUplink.actions(&roster_with_cues(25), &crowded),
            Err(TrafficError::NotEnoughRbs { cues: 25, rbs: 24 })
        );
    }

    fn roster_with_cues(m: usize) -> Roster {
        let mut cfg = ScenarioConfig::default().with_due_pairs(0);
        cfg.num_cues = m;
        cfg.num_rbs = m;
        place_devices(&cfg, 1.0, &mut substream(0, Stream::Placement)).unwrap()
    }

    #[test]
    fn traffic_is_stateless_within_an_episode() {
        let mut sim = Simulator::new(ScenarioConfig::default(), 3).unwrap();
        let first = FullLoadUplink.actions(sim.roster(), sim.config()).unwrap();
        let start = sim.roster().clone();
        for _ in 0..10 {
            sim.step(&[]).unwrap();
            assert_eq!(
                FullLoadUplink.actions(sim.roster(), sim.config()).unwrap(),
                first
            );
        }
        assert_eq!(*sim.roster(), start);
        assert!(sim.is_done());
        assert!(matches!(sim.step(&[]), Err(SimError::EpisodeFinished(10))));
    }

    #[test]
    fn silent_pairs_leave_cues_untouched() {
        let base = quiet(ScenarioConfig::default().with_due_pairs(0));
        let mut alone = Simulator::new(base.clone(), 11).unwrap();
        let mut with_pairs =
            Simulator::new(quiet(ScenarioConfig::default().with_due_pairs(10)), 11).unwrap();
        // Same CUE positions, since CUEs are drawn before any pair.
        assert_eq!(alone.roster().cues, with_pairs.roster().cues);
        let silent: Vec<_> = (0..10)
            .map(|n| Action::no_op(DeviceId::due_tx(n)))
            .collect();
        let a = alone.step(&[]).unwrap();
        let b = with_pairs.step(&silent).unwrap();
        assert_eq!(a.reports, b.reports);
        assert_eq!(b.metrics.due_capacity_mbps, 0.0);
        assert_eq!(a.metrics.cue_capacity_mbps, b.metrics.cue_capacity_mbps);
        assert_eq!(b.metrics.mean_due_tx_power_dbm, None);
    }

    #[test]
    fn sole_occupant_of_idle_rb_sees_no_interference() {
        let mut cfg = quiet(ScenarioConfig::default().with_due_pairs(1));
        cfg.num_cues = 5;
        let mut sim = Simulator::new(cfg, 2).unwrap();
        let out = sim.step(&[Action::d2d(0, 20, 10.0)]).unwrap();
        let pair = out.reports.iter().find(|r| r.mode == Mode::D2d).unwrap();
        assert_eq!(pair.interference_mw, 0.0);
        assert_eq!(out.metrics.per_rb_occupancy[20], 1);
    }

    #[test]
    fn sharing_with_farthest_cue_beats_nearest() {
        let cfg = quiet(ScenarioConfig::default().with_due_pairs(1));
        let mut sim = Simulator::new(cfg, 4).unwrap();
        let mid = sim.roster().pair_midpoint(0);
        let dist = |m: &usize| sim.roster().cues[*m].position.distance_to(&mid);
        let nearest = (0..25).min_by(|a, b| dist(a).total_cmp(&dist(b))).unwrap();
        let farthest = (0..25).max_by(|a, b| dist(a).total_cmp(&dist(b))).unwrap();
        let near = sim.step(&[Action::d2d(0, nearest, 20.0)]).unwrap().metrics;
        let far = sim.step(&[Action::d2d(0, farthest, 20.0)]).unwrap().metrics;
        assert!(far.due_capacity_mbps > near.due_capacity_mbps);
        assert!(
            far.total_capacity_mbps > near.total_capacity_mbps,
            "{far:?} vs {near:?}"
        );
    }

    #[test]
    fn agent_may_not_drive_cellular_devices() {
        let mut sim = Simulator::new(ScenarioConfig::default(), 0).unwrap();
        let err = sim.step(&[Action::uplink(0, 0, 23.0)]).unwrap_err();
        assert!(matches!(err, SimError::AgentAction(id) if id == DeviceId::cue(0)));
        let err = sim
            .step(&[Action::d2d(0, 0, 1.0), Action::d2d(0, 1, 1.0)])
            .unwrap_err();
        assert!(matches!(err, SimError::DuplicatePair(0)));
        let err = sim.step(&[Action::d2d(0, 0, 21.0)]).unwrap_err();
        assert!(matches!(err, SimError::PowerOutOfRange { .. }));
        // Rejected steps do not advance the clock.
        assert_eq!(sim.step_index(), 0);
    }

    #[test]
    fn reset_moves_everyone_but_the_bs() {
        let mut sim = Simulator::new(ScenarioConfig::default(), 8).unwrap();
        let before = sim.roster().clone();
        sim.step(&[]).unwrap();
        sim.reset().unwrap();
        assert_eq!(sim.episode_index(), 1);
        assert_eq!(sim.step_index(), 0);
        assert_eq!(sim.roster().base_station, before.base_station);
        assert_ne!(sim.roster().cues, before.cues);

        let mut fresh = Simulator::new(ScenarioConfig::default(), 99).unwrap();
        fresh.reseed(8).unwrap();
        assert_eq!(*fresh.roster(), before);
    }

    #[test]
    fn occupancy_sums_to_transmitters() {
        let mut sim = Simulator::new(ScenarioConfig::default(), 6).unwrap();
        let actions: Vec<_> = (0..7).map(|n| Action::d2d(n, n % 3, 5.0)).collect();
        let out = sim.step(&actions).unwrap();
        assert_eq!(out.metrics.per_rb_occupancy.iter().sum::<usize>(), 25 + 7);
        assert_eq!(out.metrics.per_rb_occupancy[0], 1 + 3);
        assert_eq!(out.metrics.mean_due_tx_power_dbm, Some(5.0));
        let sum = out.metrics.cue_capacity_mbps + out.metrics.due_capacity_mbps;
        assert!((out.metrics.total_capacity_mbps - sum).abs() < 1e-9);
    }

    #[test]
    fn invalid_config_rejected_with_report() {
        let mut cfg = ScenarioConfig::default();
        cfg.episode_length_steps = 0;
        match Simulator::new(cfg, 0) {
            Err(SimError::InvalidConfig(v)) => assert_eq!(v[0].path, "episode_length_steps"),
            other => panic!("{other:?}"),
        }
    }
}
