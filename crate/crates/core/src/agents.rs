//! Reference allocation policies.
//!
//! These are baselines and test oracles, not learners: a uniform random
//! policy, a greedy geographic heuristic with privileged access to device
//! positions, and an exhaustive search over joint allocations for tiny
//! deterministic instances.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{ScenarioConfig, TrafficKind};
use crate::device::{Action, Mode, Position, Roster};
use crate::env::{ActionSpace, D2dEnv, JointAction, Observations, PairId};
use crate::pathloss::{PathlossConfig, PathlossModel};
use crate::rng::{substream, Stream};
use crate::simulator::{evaluate_frame, roster_at, SimError, TrafficError, TrafficModel};

/// Largest joint search the oracle accepts.
pub const MAX_ORACLE_SEARCH: u64 = 1_000_000;

/// Default greedy transmit power, inside the 7..15 dBm band learned agents
/// settle into.
pub const GREEDY_POWER_DBM: f64 = 11.0;

pub const POLICY_NAMES: [&str; 5] = ["random", "greedy", "greedy-per-pair", "oracle", "noop"];

/// Environment state a policy may consult besides its observations.
#[derive(Debug, Clone, Copy)]
pub struct PolicyContext<'a> {
    pub config: &'a ScenarioConfig,
    pub roster: &'a Roster,
    pub action_space: &'a ActionSpace,
    pub model: &'a dyn PathlossModel,
    pub traffic: &'a dyn TrafficModel,
}

impl<'a> PolicyContext<'a> {
    pub fn from_env(env: &'a D2dEnv) -> Self {
        let sim = env.simulator();
        Self {
            config: sim.config(),
            roster: sim.roster(),
            action_space: env.action_space(),
            model: sim.model(),
            traffic: sim.traffic(),
        }
    }
}

#[derive(Debug, Error)]
pub enum PolicyError {
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Traffic(#[from] TrafficError),
}

pub trait Policy: fmt::Debug + Send {
    fn name(&self) -> &str;

    fn act(
        &mut self,
        observations: &Observations,
        ctx: &PolicyContext<'_>,
        rng: &mut dyn RngCore,
    ) -> Result<JointAction, PolicyError>;
}

/// Uniform over the `K * P` actions, independently per pair.
#[derive(Debug, Clone, Copy, Default)]
pub struct RandomPolicy;

impl Policy for RandomPolicy {
    fn name(&self) -> &str {
        "random"
    }

    fn act(
        &mut self,
        _: &Observations,
        ctx: &PolicyContext<'_>,
        rng: &mut dyn RngCore,
    ) -> Result<JointAction, PolicyError> {
        let size = ctx.action_space.size();
        Ok((0..ctx.roster.num_pairs())
            .map(|n| (PairId(n), rng.gen_range(0..size)))
            .collect())
    }
}

/// Every pair stays silent.
#[derive(Debug, Clone, Copy, Default)]
pub struct SilentPolicy;

impl Policy for SilentPolicy {
    fn name(&self) -> &str {
        "noop"
    }

    fn act(
        &mut self,
        _: &Observations,
        _: &PolicyContext<'_>,
        _: &mut dyn RngCore,
    ) -> Result<JointAction, PolicyError> {
        Ok(JointAction::new())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GreedyMode {
    /// All pairs share the RB of the one CUE whose nearest pair is farthest
    /// away.
    #[default]
    Focused,
    /// Each pair shares the RB of the CUE farthest from its own midpoint.
    PerPair,
}

/// Shares RBs with geographically distant CUEs at a fixed power.
///
/// Ties go to the lowest RB. With `prefer_idle_rbs`, RBs that carry no
/// cellular traffic are handed out first, one pair each, to the pairs
/// closest to any CUE.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreedyDistancePolicy {
    pub power_dbm: f64,
    pub mode: GreedyMode,
    pub prefer_idle_rbs: bool,
}

impl Default for GreedyDistancePolicy {
    fn default() -> Self {
        Self {
            power_dbm: GREEDY_POWER_DBM,
            mode: GreedyMode::Focused,
            prefer_idle_rbs: false,
        }
    }
}

/// `(position, rb)` of every CUE that the traffic model schedules.
pub fn cue_resource_blocks(
    roster: &Roster,
    config: &ScenarioConfig,
    traffic: &dyn TrafficModel,
) -> Result<Vec<(Position, usize)>, TrafficError> {
    let actions = traffic.actions(roster, config)?;
    Ok(actions
        .iter()
        .filter_map(|a| match a.mode {
            Mode::CellularUplink => roster.get(a.transmitter).map(|d| (d.position, a.rb)),
            Mode::CellularDownlink => roster.get(a.receiver).map(|d| (d.position, a.rb)),
            _ => None,
        })
        .collect())
}

/// Index of the entry with the largest score, lowest RB on ties.
fn best_rb(scored: impl Iterator<Item = (f64, usize)>) -> Option<usize> {
    scored
        .max_by(|a, b| a.0.total_cmp(&b.0).then(Reverse(a.1).cmp(&Reverse(b.1))))
        .map(|(_, rb)| rb)
}

impl GreedyDistancePolicy {
    pub fn per_pair() -> Self {
        Self {
            mode: GreedyMode::PerPair,
            ..Self::default()
        }
    }

    /// RB per pair for the given CUE schedule.
    pub fn assign(
        &self,
        roster: &Roster,
        cues: &[(Position, usize)],
        num_rbs: usize,
    ) -> Vec<usize> {
        let mids: Vec<Position> = (0..roster.num_pairs())
            .map(|n| roster.pair_midpoint(n))
            .collect();
        let mut rbs = vec![0; mids.len()];
        let mut remaining: Vec<usize> = (0..mids.len()).collect();

        if self.prefer_idle_rbs {
            let busy: BTreeSet<usize> = cues.iter().map(|c| c.1).collect();
            let idle: Vec<usize> = (0..num_rbs).filter(|k| !busy.contains(k)).collect();
            let exposure = |n: usize| {
                cues.iter()
                    .map(|c| c.0.distance_to(&mids[n]))
                    .fold(f64::INFINITY, f64::min)
            };
            remaining.sort_by(|&a, &b| exposure(a).total_cmp(&exposure(b)).then(a.cmp(&b)));
            let rest = remaining.split_off(idle.len().min(remaining.len()));
            for (n, k) in remaining.into_iter().zip(idle) {
                rbs[n] = k;
            }
            remaining = rest;
            remaining.sort_unstable();
        }

        match self.mode {
            GreedyMode::PerPair => {
                for &n in &remaining {
                    rbs[n] =
                        best_rb(cues.iter().map(|c| (c.0.distance_to(&mids[n]), c.1))).unwrap_or(0);
                }
            }
            GreedyMode::Focused => {
                let isolation = |p: &Position| {
                    remaining
                        .iter()
                        .map(|&n| p.distance_to(&mids[n]))
                        .fold(f64::INFINITY, f64::min)
                };
                let shared = best_rb(cues.iter().map(|c| (isolation(&c.0), c.1))).unwrap_or(0);
                for &n in &remaining {
                    rbs[n] = shared;
                }
            }
        }
        rbs
    }
}

impl Policy for GreedyDistancePolicy {
    fn name(&self) -> &str {
        match self.mode {
            GreedyMode::Focused => "greedy",
            GreedyMode::PerPair => "greedy-per-pair",
        }
    }

    fn act(
        &mut self,
        _: &Observations,
        ctx: &PolicyContext<'_>,
        _: &mut dyn RngCore,
    ) -> Result<JointAction, PolicyError> {
        let cues = cue_resource_blocks(ctx.roster, ctx.config, ctx.traffic)?;
        let level = ctx.action_space.nearest_level(self.power_dbm);
        Ok(self
            .assign(ctx.roster, &cues, ctx.action_space.num_rbs)
            .into_iter()
            .enumerate()
            .filter_map(|(n, rb)| ctx.action_space.encode(rb, level).map(|i| (PairId(n), i)))
            .collect())
    }
}

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("search space of {0} joint actions exceeds {MAX_ORACLE_SEARCH}")]
    SearchTooLarge(u128),
    #[error("the oracle needs a deterministic path loss model (no shadowing)")]
    Stochastic,
    #[error("no candidate powers given")]
    NoCandidates,
    #[error("{pairs} pairs cannot hold distinct RBs out of {rbs}")]
    TooFewRbs { pairs: usize, rbs: usize },
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Best joint allocation found by enumeration.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    /// `(rb, power_dbm)` per pair.
    pub assignment: Vec<(usize, f64)>,
    pub total_capacity_mbps: f64,
}

/// Total capacity of one frame with the given `(rb, power)` per pair.
pub fn evaluate_allocation(
    roster: &Roster,
    config: &ScenarioConfig,
    model: &dyn PathlossModel,
    traffic: &dyn TrafficModel,
    assignment: &[(usize, f64)],
) -> Result<f64, SimError> {
    let due: BTreeMap<usize, Action> = assignment
        .iter()
        .enumerate()
        .map(|(n, &(rb, p))| (n, Action::d2d(n, rb, p)))
        .collect();
    // Deterministic models never draw, so the stream is irrelevant.
    let mut rng = substream(0, Stream::Shadowing);
    Ok(
        evaluate_frame(roster, config, model, traffic, &due, &mut rng, (0, 0))?
            .metrics
            .total_capacity_mbps,
    )
}

/// Which joint allocations the oracle enumerates.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleSearch {
    pub candidate_powers_dbm: Vec<f64>,
    /// Only consider allocations where no two pairs share an RB.
    pub distinct_rbs: bool,
}

impl OracleSearch {
    pub fn powers(candidate_powers_dbm: &[f64]) -> Self {
        Self {
            candidate_powers_dbm: candidate_powers_dbm.to_vec(),
            distinct_rbs: false,
        }
    }
}

/// Enumerates every joint `(rb, power)` choice for all pairs and returns the
/// first one, in lexicographic order (pair 0 most significant, RB before
/// power), that maximises total gated capacity.
pub fn exhaustive_oracle(
    roster: &Roster,
    config: &ScenarioConfig,
    model: &dyn PathlossModel,
    traffic: &dyn TrafficModel,
    search: &OracleSearch,
) -> Result<OracleResult, OracleError> {
    let candidate_powers_dbm = &search.candidate_powers_dbm;
    if !model.is_deterministic() {
        return Err(OracleError::Stochastic);
    }
    if candidate_powers_dbm.is_empty() {
        return Err(OracleError::NoCandidates);
    }
    let options: Vec<(usize, f64)> = (0..config.num_rbs)
        .flat_map(|rb| candidate_powers_dbm.iter().map(move |&p| (rb, p)))
        .collect();
    let pairs = roster.num_pairs();
    if search.distinct_rbs && pairs > config.num_rbs {
        return Err(OracleError::TooFewRbs {
            pairs,
            rbs: config.num_rbs,
        });
    }
    let size = (0..pairs)
        .try_fold(1u128, |acc, _| acc.checked_mul(options.len() as u128))
        .unwrap_or(u128::MAX);
    if size > u128::from(MAX_ORACLE_SEARCH) {
        return Err(OracleError::SearchTooLarge(size));
    }

    let mut digits = vec![0usize; pairs];
    let mut best: Option<OracleResult> = None;
    loop {
        let assignment: Vec<(usize, f64)> = digits.iter().map(|&d| options[d]).collect();
        let admissible = !search.distinct_rbs
            || assignment
                .iter()
                .map(|a| a.0)
                .collect::<BTreeSet<_>>()
                .len()
                == assignment.len();
        if admissible {
            let total = evaluate_allocation(roster, config, model, traffic, &assignment)?;
            if best.as_ref().is_none_or(|b| total > b.total_capacity_mbps) {
                best = Some(OracleResult {
                    assignment,
                    total_capacity_mbps: total,
                });
            }
        }
        // odometer, last pair fastest
        let mut i = pairs;
        loop {
            if i == 0 {
                return Ok(best.expect("at least one assignment evaluated"));
            }
            i -= 1;
            digits[i] += 1;
            if digits[i] < options.len() {
                break;
            }
            digits[i] = 0;
        }
    }
}

/// Two pairs, one downlink CUE on RB 0 and an idle RB 1. Pair 0 sits next
/// to the CUE, pair 1 on the far side of the cell. Free-space loss, no
/// shadowing.
pub fn near_far_pairs_scenario() -> (ScenarioConfig, Roster) {
    let mut config = ScenarioConfig::default().with_due_pairs(2);
    config.num_rbs = 2;
    config.num_cues = 1;
    config.traffic = TrafficKind::DownlinkFullLoad;
    config.pathloss_model = PathlossConfig::FreeSpace { exponent: 2.0 };
    let roster = roster_at(
        &config,
        &[Position::new(250.0, 0.0)],
        &[
            (Position::new(240.0, 20.0), Position::new(255.0, 30.0)),
            (Position::new(-250.0, 150.0), Position::new(-265.0, 160.0)),
        ],
    );
    (config, roster)
}

/// Plays the oracle's allocation over the full power grid.
#[derive(Debug, Clone, Copy, Default)]
pub struct OraclePolicy;

impl Policy for OraclePolicy {
    fn name(&self) -> &str {
        "oracle"
    }

    fn act(
        &mut self,
        _: &Observations,
        ctx: &PolicyContext<'_>,
        _: &mut dyn RngCore,
    ) -> Result<JointAction, PolicyError> {
        let search = OracleSearch::powers(&ctx.action_space.power_levels_dbm);
        let best = exhaustive_oracle(ctx.roster, ctx.config, ctx.model, ctx.traffic, &search)?;
        Ok(best
            .assignment
            .iter()
            .enumerate()
            .filter_map(|(n, &(rb, p))| {
                ctx.action_space
                    .encode(rb, ctx.action_space.nearest_level(p))
                    .map(|i| (PairId(n), i))
            })
            .collect())
    }
}

pub fn policy_by_name(name: &str) -> Option<Box<dyn Policy>> {
    Some(match name {
        "random" => Box::new(RandomPolicy),
        "greedy" => Box::new(GreedyDistancePolicy::default()),
        "greedy-per-pair" => Box::new(GreedyDistancePolicy::per_pair()),
        "oracle" => Box::new(OraclePolicy),
        "noop" => Box::new(SilentPolicy),
        _ => return None,
    })
}
