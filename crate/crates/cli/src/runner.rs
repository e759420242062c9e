//! Episode runner and density sweep.

use std::io::{self, Write};

use d2d_core::agents::{policy_by_name, Policy, PolicyContext, PolicyError};
use d2d_core::env::EnvError;
use d2d_core::rng::{derive_seed, substream, Stream};
use d2d_core::{D2dEnv, ScenarioConfig, StepMetrics};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::format::{csv_float, to_line};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("unknown policy {0:?}")]
    UnknownPolicy(String),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanSd {
    pub mean: f64,
    /// Sample standard deviation; zero for a single value.
    pub sd: f64,
    pub count: usize,
}

impl MeanSd {
    pub fn of(values: &[f64]) -> Option<Self> {
        let count = values.len();
        if count == 0 {
            return None;
        }
        let mean = values.iter().sum::<f64>() / count as f64;
        let sd = if count > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1) as f64).sqrt()
        } else {
            0.0
        };
        Some(Self { mean, sd, count })
    }

    pub fn standard_error(&self) -> f64 {
        self.sd / (self.count as f64).sqrt()
    }
}

fn mean(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values
        .into_iter()
        .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Step means over one episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeSummary {
    pub episode: usize,
    pub steps: usize,
    pub total_capacity_mbps: f64,
    pub cue_capacity_mbps: f64,
    pub due_capacity_mbps: f64,
    /// Over steps where at least one DUE transmitted.
    pub mean_due_tx_power_dbm: Option<f64>,
    pub gated_link_count: f64,
}

impl EpisodeSummary {
    pub fn from_steps(episode: usize, steps: &[StepMetrics]) -> Self {
        Self {
            episode,
            steps: steps.len(),
            total_capacity_mbps: mean(steps.iter().map(|m| m.total_capacity_mbps)).unwrap_or(0.0),
            cue_capacity_mbps: mean(steps.iter().map(|m| m.cue_capacity_mbps)).unwrap_or(0.0),
            due_capacity_mbps: mean(steps.iter().map(|m| m.due_capacity_mbps)).unwrap_or(0.0),
            mean_due_tx_power_dbm: mean(steps.iter().filter_map(|m| m.mean_due_tx_power_dbm)),
            gated_link_count: mean(steps.iter().map(|m| m.gated_link_count as f64)).unwrap_or(0.0),
        }
    }
}

/// Mean and sample SD of the episode summaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub episodes: usize,
    pub total_capacity_mbps: Option<MeanSd>,
    pub cue_capacity_mbps: Option<MeanSd>,
    pub due_capacity_mbps: Option<MeanSd>,
    pub mean_due_tx_power_dbm: Option<MeanSd>,
}

impl Aggregate {
    pub fn from_episodes(episodes: &[EpisodeSummary]) -> Self {
        let field = |f: fn(&EpisodeSummary) -> Option<f64>| {
            MeanSd::of(&episodes.iter().filter_map(f).collect::<Vec<_>>())
        };
        Self {
            episodes: episodes.len(),
            total_capacity_mbps: field(|e| Some(e.total_capacity_mbps)),
            cue_capacity_mbps: field(|e| Some(e.cue_capacity_mbps)),
            due_capacity_mbps: field(|e| Some(e.due_capacity_mbps)),
            mean_due_tx_power_dbm: field(|e| e.mean_due_tx_power_dbm),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub policy: String,
    pub seed: u64,
    pub num_due_pairs: usize,
    pub episodes: Vec<EpisodeSummary>,
    pub aggregate: Aggregate,
}

/// Runs `episodes` episodes. The first reset uses `seed`, later ones continue
/// the running streams; the policy draws from its own stream of `seed`.
/// `on_step` sees every step's metrics in order.
pub fn run_policy(
    config: &ScenarioConfig,
    policy: &mut dyn Policy,
    episodes: usize,
    seed: u64,
    on_step: &mut dyn FnMut(&StepMetrics) -> Result<(), RunError>,
) -> Result<RunSummary, RunError> {
    let mut env = D2dEnv::new(config.clone())?;
    let mut rng = substream(seed, Stream::Policy);
    let mut summaries = Vec::with_capacity(episodes);
    for e in 0..episodes {
        let mut obs = env.reset(if e == 0 { Some(seed) } else { None })?;
        let mut steps = Vec::with_capacity(config.episode_length_steps);
        loop {
            let actions = policy.act(&obs, &PolicyContext::from_env(&env), &mut rng)?;
            let result = env.step(&actions)?;
            on_step(&result.info.metrics)?;
            steps.push(result.info.metrics);
            obs = result.observations;
            if result.done {
                break;
            }
        }
        summaries.push(EpisodeSummary::from_steps(e, &steps));
    }
    Ok(RunSummary {
        policy: policy.name().to_string(),
        seed,
        num_due_pairs: config.num_due_pairs,
        aggregate: Aggregate::from_episodes(&summaries),
        episodes: summaries,
    })
}

pub fn policy(name: &str) -> Result<Box<dyn Policy>, RunError> {
    policy_by_name(name).ok_or_else(|| RunError::UnknownPolicy(name.to_string()))
}

#[derive(Serialize)]
#[serde(tag = "record", rename_all = "snake_case")]
enum Record<'a> {
    Step(&'a StepMetrics),
    Episode(&'a EpisodeSummary),
}

/// [`run_policy`] writing one JSON line per step and per episode to `steps`.
pub fn run_to_writer(
    config: &ScenarioConfig,
    policy_name: &str,
    episodes: usize,
    seed: u64,
    steps: &mut dyn Write,
) -> Result<RunSummary, RunError> {
    let mut policy = policy(policy_name)?;
    let mut pending: Vec<StepMetrics> = Vec::new();
    let mut on_step = |m: &StepMetrics| -> Result<(), RunError> {
        writeln!(steps, "{}", to_line(&Record::Step(m))?)?;
        pending.push(m.clone());
        if pending.len() == config.episode_length_steps {
            let summary = EpisodeSummary::from_steps(m.episode, &pending);
            writeln!(steps, "{}", to_line(&Record::Episode(&summary))?)?;
            pending.clear();
        }
        Ok(())
    };
    let summary = run_policy(config, policy.as_mut(), episodes, seed, &mut on_step)?;
    steps.flush()?;
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub density: usize,
    pub trial: usize,
    pub mean_total_capacity_mbps: f64,
    pub mean_due_capacity_mbps: f64,
    pub mean_due_tx_power_dbm: Option<f64>,
}

/// Seed of one sweep cell.
pub fn trial_seed(seed: u64, density: usize, trial: usize) -> u64 {
    derive_seed(seed, &[density as u64, trial as u64])
}

/// Runs every `(density, trial)` cell, densities outermost. Each cell is
/// `episodes` episodes from its own derived seed; row values are step means
/// over the whole cell.
pub fn sweep(
    config: &ScenarioConfig,
    policy_name: &str,
    densities: &[usize],
    trials: usize,
    episodes: usize,
    seed: u64,
) -> Result<Vec<SweepRow>, RunError> {
    let mut rows = Vec::with_capacity(densities.len() * trials);
    for &density in densities {
        let cfg = config.clone().with_due_pairs(density);
        for trial in 0..trials {
            let mut policy = policy(policy_name)?;
            let mut steps = Vec::new();
            run_policy(
                &cfg,
                policy.as_mut(),
                episodes,
                trial_seed(seed, density, trial),
                &mut |m| {
                    steps.push(m.clone());
                    Ok(())
                },
            )?;
            let all = EpisodeSummary::from_steps(0, &steps);
            rows.push(SweepRow {
                density,
                trial,
                mean_total_capacity_mbps: all.total_capacity_mbps,
                mean_due_capacity_mbps: all.due_capacity_mbps,
                mean_due_tx_power_dbm: all.mean_due_tx_power_dbm,
            });
        }
    }
    Ok(rows)
}

pub const SWEEP_COLUMNS: [&str; 5] = [
    "density",
    "trial",
    "mean_total_capacity_mbps",
    "mean_due_capacity_mbps",
    "mean_due_tx_power_dbm",
];

pub fn write_sweep_csv(rows: &[SweepRow], out: impl Write) -> Result<(), RunError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_COLUMNS)?;
    for r in rows {
        w.write_record([
            r.density.to_string(),
            r.trial.to_string(),
            csv_float(Some(r.mean_total_capacity_mbps)),
            csv_float(Some(r.mean_due_capacity_mbps)),
            csv_float(r.mean_due_tx_power_dbm),
        ])?;
    }
    w.flush()?;
    Ok(())
}
