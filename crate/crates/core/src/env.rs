//! Episodic multi-agent environment over the simulator.
//!
//! Each D2D pair is an agent choosing one discrete index per step, decoded
//! row-major into `(resource block, power level)`. Observations are built by
//! a pluggable [`ObservationBuilder`]; rewards follow the config's
//! [`RewardScheme`].

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{RewardScheme, ScenarioConfig, Violation};
use crate::device::{Action, Mode, Roster};
use crate::link_budget::{capacity, LinkReport};
use crate::simulator::{SimError, Simulator, StepMetrics};

/// Divisor turning Mbps into reward units.
pub const REWARD_SCALE_MBPS: f64 = 100.0;

/// Divisor applied to SINR (dB) in observations.
pub const SINR_SCALE_DB: f64 = 50.0;

/// Index of a D2D pair; the agent key in every per-pair map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PairId(pub usize);

impl fmt::Display for PairId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub type Observations = BTreeMap<PairId, Vec<f64>>;
pub type Rewards = BTreeMap<PairId, f64>;
pub type JointAction = BTreeMap<PairId, usize>;

/// Per-pair discrete action space of size `K * P`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionSpace {
    pub num_rbs: usize,
    pub power_levels_dbm: Vec<f64>,
}

impl ActionSpace {
    pub fn from_config(config: &ScenarioConfig) -> Self {
        Self {
            num_rbs: config.num_rbs,
            power_levels_dbm: config.due_power_grid(),
        }
    }

    pub fn size(&self) -> usize {
        self.num_rbs * self.power_levels_dbm.len()
    }

    /// `(rb, power_dbm)` for `index`, or `None` when out of range.
    pub fn decode(&self, index: usize) -> Option<(usize, f64)> {
        (index < self.size()).then(|| {
            let p = self.power_levels_dbm.len();
            (index / p, self.power_levels_dbm[index % p])
        })
    }

    pub fn encode(&self, rb: usize, level: usize) -> Option<usize> {
        (rb < self.num_rbs && level < self.power_levels_dbm.len())
            .then(|| rb * self.power_levels_dbm.len() + level)
    }

    /// Grid level closest to `power_dbm`; the lower level wins a tie.
    pub fn nearest_level(&self, power_dbm: f64) -> usize {
        self.power_levels_dbm
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - power_dbm).abs().total_cmp(&(b.1 - power_dbm).abs()))
            .map_or(0, |(i, _)| i)
    }
}

/// Everything an observation builder may look at.
#[derive(Debug, Clone, Copy)]
pub struct ObservationContext<'a> {
    pub config: &'a ScenarioConfig,
    pub roster: &'a Roster,
    /// Reports of the previous step; empty at the start of an episode.
    pub last_reports: &'a [LinkReport],
}

pub trait ObservationBuilder: fmt::Debug + Send + Sync {
    fn len(&self, config: &ScenarioConfig) -> usize;

    /// Per-component `(low, high)`; `None` is unbounded.
    fn bounds(&self, config: &ScenarioConfig) -> Vec<(Option<f64>, Option<f64>)>;

    fn build(&self, ctx: &ObservationContext<'_>, pair: usize) -> Vec<f64>;
}

/// Layout, all positions divided by the cell radius:
///
/// | components | content |
/// |---|---|
/// | 2 | own transmitter position |
/// | 2 | own receiver position |
/// | 2M | CUE positions |
/// | 1 | own SINR last step / 50 dB (0 if silent) |
/// | K | other transmitters per RB last step |
#[derive(Debug, Clone, Copy, Default)]
pub struct DefaultObservation;

impl ObservationBuilder for DefaultObservation {
    fn len(&self, config: &ScenarioConfig) -> usize {
        5 + 2 * config.num_cues + config.num_rbs
    }

    fn bounds(&self, config: &ScenarioConfig) -> Vec<(Option<f64>, Option<f64>)> {
        let mut b = vec![(Some(-1.0), Some(1.0)); 4 + 2 * config.num_cues];
        b.push((None, None));
        let max_per_rb = (config.num_cues + config.num_due_pairs) as f64;
        b.extend(std::iter::repeat_n(
            (Some(0.0), Some(max_per_rb)),
            config.num_rbs,
        ));
        b
    }

    fn build(&self, ctx: &ObservationContext<'_>, pair: usize) -> Vec<f64> {
        let radius = ctx.config.cell_radius_m;
        let mut obs = Vec::with_capacity(self.len(ctx.config));
        let tx = ctx.roster.due_tx[pair].id;
        for device in [&ctx.roster.due_tx[pair], &ctx.roster.due_rx[pair]]
            .into_iter()
            .chain(&ctx.roster.cues)
        {
            obs.push(device.position.x / radius);
            obs.push(device.position.y / radius);
        }
        let own = ctx.last_reports.iter().find(|r| r.transmitter == tx);
        obs.push(own.map_or(0.0, |r| r.sinr_db / SINR_SCALE_DB));
        let mut counts = vec![0.0; ctx.config.num_rbs];
        for r in ctx.last_reports.iter().filter(|r| r.transmitter != tx) {
            counts[r.rb] += 1.0;
        }
        obs.extend(counts);
        obs
    }
}

/// Space descriptions a remote client needs to configure itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpacesDescription {
    pub num_pairs: usize,
    pub action_size: usize,
    pub num_rbs: usize,
    pub power_levels_dbm: Vec<f64>,
    pub observation_len: usize,
    pub observation_low: Vec<Option<f64>>,
    pub observation_high: Vec<Option<f64>>,
    pub episode_length_steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepInfo {
    pub metrics: StepMetrics,
    pub reports: Vec<LinkReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvStepResult {
    pub observations: Observations,
    pub rewards: Rewards,
    pub done: bool,
    pub info: StepInfo,
}

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("invalid scenario: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    InvalidConfig(Vec<Violation>),
    #[error("reset required")]
    ResetRequired,
    #[error("episode is done; reset required")]
    EpisodeDone,
    #[error("no D2D pair {0}")]
    UnknownPair(PairId),
    #[error("pair {pair}: action index {index} outside [0, {size})")]
    ActionOutOfRange {
        pair: PairId,
        index: usize,
        size: usize,
    },
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Per-pair rewards for one step.
///
/// [`RewardScheme::Shared`] gives every pair `total / 100`.
/// [`RewardScheme::PerPair`] gives each pair its own capacity minus the
/// weighted capacity the CUE on its RB lost to interference, over the same
/// divisor. Silent pairs score zero.
pub fn reward(
    scheme: &RewardScheme,
    metrics: &StepMetrics,
    reports: &[LinkReport],
    num_pairs: usize,
    rb_bandwidth_mhz: f64,
) -> Rewards {
    match *scheme {
        RewardScheme::Shared => {
            let r = metrics.total_capacity_mbps / REWARD_SCALE_MBPS;
            (0..num_pairs).map(|n| (PairId(n), r)).collect()
        }
        RewardScheme::PerPair { cue_penalty_weight } => {
            let mut lost_by_rb: BTreeMap<usize, f64> = BTreeMap::new();
            for r in reports
                .iter()
                .filter(|r| matches!(r.mode, Mode::CellularUplink | Mode::CellularDownlink))
            {
                let clean = if r.gated {
                    0.0
                } else {
                    capacity(r.rx_power_dbm - r.noise_dbm, rb_bandwidth_mhz)
                };
                *lost_by_rb.entry(r.rb).or_default() += (clean - r.capacity_mbps).max(0.0);
            }
            (0..num_pairs)
                .map(|n| {
                    let own = reports
                        .iter()
                        .find(|r| r.mode == Mode::D2d && r.transmitter.index == n);
                    let value = own.map_or(0.0, |r| {
                        r.capacity_mbps
                            - cue_penalty_weight * lost_by_rb.get(&r.rb).copied().unwrap_or(0.0)
                    });
                    (PairId(n), value / REWARD_SCALE_MBPS)
                })
                .collect()
        }
    }
}

/// Multi-agent environment: one agent per D2D pair.
#[derive(Debug)]
pub struct D2dEnv {
    sim: Simulator,
    action_space: ActionSpace,
    observer: Box<dyn ObservationBuilder>,
    started: bool,
}

impl D2dEnv {
    pub fn new(config: ScenarioConfig) -> Result<Self, EnvError> {
        Self::with_observer(config, Box::new(DefaultObservation))
    }

    pub fn with_observer(
        config: ScenarioConfig,
        observer: Box<dyn ObservationBuilder>,
    ) -> Result<Self, EnvError> {
        let violations = config.validate();
        if !violations.is_empty() {
            return Err(EnvError::InvalidConfig(violations));
        }
        let seed = config.seed;
        Ok(Self::from_simulator(
            Simulator::new(config, seed)?,
            observer,
        ))
    }

    /// Wraps an already built simulator (custom path loss or traffic models).
    pub fn from_simulator(sim: Simulator, observer: Box<dyn ObservationBuilder>) -> Self {
        let action_space = ActionSpace::from_config(sim.config());
        Self {
            sim,
            action_space,
            observer,
            started: false,
        }
    }

    /// Starts an episode. With a seed, every random stream restarts from it;
    /// without one, the next episode's positions are drawn from the running
    /// streams (the first call without a seed uses the config's seed).
    pub fn reset(&mut self, seed: Option<u64>) -> Result<Observations, EnvError> {
        match seed {
            Some(seed) => self.sim.reseed(seed)?,
            None if !self.started => self.sim.reseed(self.sim.config().seed)?,
            None => self.sim.reset()?,
        }
        self.started = true;
        Ok(self.observations())
    }

    pub fn step(&mut self, actions: &JointAction) -> Result<EnvStepResult, EnvError> {
        if !self.started {
            return Err(EnvError::ResetRequired);
        }
        if self.sim.is_done() {
            return Err(EnvError::EpisodeDone);
        }
        let num_pairs = self.num_pairs();
        let mut decoded = Vec::with_capacity(actions.len());
        for (&pair, &index) in actions {
            if pair.0 >= num_pairs {
                return Err(EnvError::UnknownPair(pair));
            }
            let (rb, power) =
                self.action_space
                    .decode(index)
                    .ok_or(EnvError::ActionOutOfRange {
                        pair,
                        index,
                        size: self.action_space.size(),
                    })?;
            decoded.push(Action::d2d(pair.0, rb, power));
        }
        let outcome = self.sim.step(&decoded)?;
        let config = self.sim.config();
        let rewards = reward(
            &config.reward,
            &outcome.metrics,
            &outcome.reports,
            num_pairs,
            config.rb_bandwidth_mhz(),
        );
        Ok(EnvStepResult {
            observations: self.observations(),
            rewards,
            done: self.sim.is_done(),
            info: StepInfo {
                metrics: outcome.metrics,
                reports: outcome.reports,
            },
        })
    }

    pub fn observations(&self) -> Observations {
        let ctx = ObservationContext {
            config: self.sim.config(),
            roster: self.sim.roster(),
            last_reports: self.sim.last_reports(),
        };
        (0..self.num_pairs())
            .map(|n| (PairId(n), self.observer.build(&ctx, n)))
            .collect()
    }

    pub fn spaces(&self) -> SpacesDescription {
        let config = self.sim.config();
        let (low, high) = self.observer.bounds(config).into_iter().unzip();
        SpacesDescription {
            num_pairs: self.num_pairs(),
            action_size: self.action_space.size(),
            num_rbs: self.action_space.num_rbs,
            power_levels_dbm: self.action_space.power_levels_dbm.clone(),
            observation_len: self.observer.len(config),
            observation_low: low,
            observation_high: high,
            episode_length_steps: config.episode_length_steps,
        }
    }

    pub fn action_space(&self) -> &ActionSpace {
        &self.action_space
    }

    pub fn num_pairs(&self) -> usize {
        self.sim.roster().num_pairs()
    }

    pub fn is_started(&self) -> bool {
        self.started
    }

    pub fn is_done(&self) -> bool {
        self.sim.is_done()
    }

    pub fn simulator(&self) -> &Simulator {
        &self.sim
    }

    pub fn simulator_mut(&mut self) -> &mut Simulator {
        &mut self.sim
    }

    pub fn config(&self) -> &ScenarioConfig {
        self.sim.config()
    }
}

/// Single-agent view: concatenated observations and one joint action.
///
/// The joint action is either a vector of per-pair indices or, when
/// `(K * P)^N` fits in a `u128`, a single mixed-radix index with pair 0 as
/// the most significant digit.
#[derive(Debug)]
pub struct FlatEnv {
    inner: D2dEnv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatStepResult {
    pub observation: Vec<f64>,
    pub reward: f64,
    pub done: bool,
    pub info: StepInfo,
}

impl FlatEnv {
    pub fn new(inner: D2dEnv) -> Self {
        Self { inner }
    }

    pub fn inner(&self) -> &D2dEnv {
        &self.inner
    }

    pub fn observation_len(&self) -> usize {
        self.inner.num_pairs() * self.inner.observer.len(self.inner.config())
    }

    /// Size of the joint discrete action space, if representable.
    pub fn joint_action_size(&self) -> Option<u128> {
        let base = self.inner.action_space.size() as u128;
        (0..self.inner.num_pairs()).try_fold(1u128, |acc, _| acc.checked_mul(base))
    }

    pub fn reset(&mut self, seed: Option<u64>) -> Result<Vec<f64>, EnvError> {
        Ok(flatten(self.inner.reset(seed)?))
    }

    pub fn step_multi(&mut self, indices: &[usize]) -> Result<FlatStepResult, EnvError> {
        if indices.len() > self.inner.num_pairs() {
            return Err(EnvError::UnknownPair(PairId(self.inner.num_pairs())));
        }
        let actions = indices
            .iter()
            .enumerate()
            .map(|(n, &i)| (PairId(n), i))
            .collect();
        let result = self.inner.step(&actions)?;
        let reward = if result.rewards.is_empty() {
            result.info.metrics.total_capacity_mbps / REWARD_SCALE_MBPS
        } else {
            result.rewards.values().sum::<f64>() / result.rewards.len() as f64
        };
        Ok(FlatStepResult {
            observation: flatten(result.observations),
            reward,
            done: result.done,
            info: result.info,
        })
    }

    pub fn step_joint(&mut self, joint: u128) -> Result<FlatStepResult, EnvError> {
        let size = self.joint_action_size().ok_or(EnvError::ActionOutOfRange {
            pair: PairId(0),
            index: usize::MAX,
            size: usize::MAX,
        })?;
        if joint >= size {
            return Err(EnvError::ActionOutOfRange {
                pair: PairId(0),
                index: usize::try_from(joint).unwrap_or(usize::MAX),
                size: usize::try_from(size).unwrap_or(usize::MAX),
            });
        }
        let base = self.inner.action_space.size() as u128;
        let mut digits = vec![0usize; self.inner.num_pairs()];
        let mut rest = joint;
        for d in digits.iter_mut().rev() {
            *d = (rest % base) as usize;
            rest /= base;
        }
        self.step_multi(&digits)
    }
}

fn flatten(observations: Observations) -> Vec<f64> {
    observations.into_values().flatten().collect()
}
