//! Declarative scenario description and its validation.
//!
//! A [`ScenarioConfig`] round-trips through JSON with a strict schema:
//! unknown fields are rejected so that a stored config always means exactly
//! one experiment.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::device::RfParams;
use crate::pathloss::PathlossConfig;
use crate::units::thermal_noise_dbm;

/// How link capacity is gated by receiver sensitivity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GatingRule {
    /// Zero capacity when SINR (dB) is below the receiver's sensitivity value.
    #[default]
    SinrDb,
    /// Zero capacity when received signal power (dBm) is below sensitivity.
    RxPowerDbm,
}

/// Internal traffic model driving the base station and cellular UEs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrafficKind {
    /// Every CUE sends to the BS on its own RB each frame.
    #[default]
    UplinkFullLoad,
    /// The BS sends to every CUE on its own RB each frame.
    DownlinkFullLoad,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum RewardScheme {
    /// Every pair receives the total system capacity over a fixed divisor.
    #[default]
    Shared,
    /// Own gated capacity minus `cue_penalty_weight` times the capacity the
    /// CUE on the same RB lost to interference, over the same divisor.
    PerPair { cue_penalty_weight: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub cell_radius_m: f64,
    pub carrier_freq_hz: f64,
    pub rb_bandwidth_hz: f64,
    pub num_rbs: usize,
    pub num_cues: usize,
    pub num_due_pairs: usize,
    pub due_pair_max_distance_m: f64,
    pub cue_tx_power_dbm: f64,
    /// Inclusive `[min, max]` DUE transmit power.
    pub due_power_range_dbm: [f64; 2],
    pub due_power_levels: usize,
    pub pathloss_model: PathlossConfig,
    pub episode_length_steps: usize,
    pub bs_rf: RfParams,
    pub cue_rf: RfParams,
    pub due_rf: RfParams,
    #[serde(default)]
    pub traffic: TrafficKind,
    #[serde(default)]
    pub gating: GatingRule,
    #[serde(default)]
    pub reward: RewardScheme,
    pub seed: u64,
}

/// Base-station defaults. Gains and losses are calibration choices.
pub fn default_bs_rf(rb_bandwidth_hz: f64) -> RfParams {
    RfParams {
        tx_power_dbm: 43.0,
        num_subcarriers: 12,
        antenna_gain_dbi: 17.5,
        interference_margin_db: 3.0,
        body_loss_db: 0.0,
        cable_loss_db: 2.0,
        amplifier_gain_db: 0.0,
        rx_sensitivity_dbm: -123.4,
        noise_dbm: thermal_noise_dbm(rb_bandwidth_hz, 0.0),
    }
}

/// UE defaults; `tx_power_dbm` is the class maximum.
pub fn default_ue_rf(rb_bandwidth_hz: f64, tx_power_dbm: f64) -> RfParams {
    RfParams {
        tx_power_dbm,
        num_subcarriers: 12,
        antenna_gain_dbi: 0.0,
        interference_margin_db: 3.0,
        body_loss_db: 3.0,
        cable_loss_db: 0.0,
        amplifier_gain_db: 0.0,
        rx_sensitivity_dbm: -107.5,
        noise_dbm: thermal_noise_dbm(rb_bandwidth_hz, 0.0),
    }
}

impl Default for ScenarioConfig {
    /// The single-cell full-load uplink scenario: 500 m cell, 25 RBs of
    /// 180 kHz at 2.1 GHz, 25 CUEs at 23 dBm, 10 D2D pairs at 0..20 dBm,
    /// log-distance shadowing with exponent 2.0 and 2.7 dB deviation.
    fn default() -> Self {
        let rb_bandwidth_hz = 180e3;
        Self {
            cell_radius_m: 500.0,
            carrier_freq_hz: 2.1e9,
            rb_bandwidth_hz,
            num_rbs: 25,
            num_cues: 25,
            num_due_pairs: 10,
            due_pair_max_distance_m: 30.0,
            cue_tx_power_dbm: 23.0,
            due_power_range_dbm: [0.0, 20.0],
            due_power_levels: 21,
            pathloss_model: PathlossConfig::LogDistanceShadowing {
                exponent: 2.0,
                sigma_db: 2.7,
                ref_distance_m: 1.0,
            },
            episode_length_steps: 10,
            bs_rf: default_bs_rf(rb_bandwidth_hz),
            cue_rf: default_ue_rf(rb_bandwidth_hz, 23.0),
            due_rf: default_ue_rf(rb_bandwidth_hz, 20.0),
            traffic: TrafficKind::default(),
            gating: GatingRule::default(),
            reward: RewardScheme::default(),
            seed: 0,
        }
    }
}

/// One failed invariant, addressed by its JSON path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

struct Checker(Vec<Violation>);

impl Checker {
    fn check(&mut self, ok: bool, path: impl Into<String>, message: impl Into<String>) {
        if !ok {
            self.0.push(Violation {
                path: path.into(),
                message: message.into(),
            });
        }
    }

    fn positive(&mut self, value: f64, path: &str) {
        self.check(
            value.is_finite() && value > 0.0,
            path,
            format!("must be positive and finite, got {value}"),
        );
    }

    fn non_negative(&mut self, value: f64, path: &str) {
        self.check(
            value.is_finite() && value >= 0.0,
            path,
            format!("must be >= 0, got {value}"),
        );
    }

    fn finite(&mut self, value: f64, path: &str) {
        self.check(
            value.is_finite(),
            path,
            format!("must be finite, got {value}"),
        );
    }

    fn rf(&mut self, rf: &RfParams, prefix: &str, base_station: bool) {
        let p = |field: &str| format!("{prefix}.{field}");
        self.finite(rf.tx_power_dbm, &p("tx_power_dbm"));
        self.check(
            rf.num_subcarriers >= 1,
            p("num_subcarriers"),
            "must be at least 1",
        );
        self.finite(rf.antenna_gain_dbi, &p("antenna_gain_dbi"));
        self.non_negative(rf.interference_margin_db, &p("interference_margin_db"));
        self.non_negative(rf.body_loss_db, &p("body_loss_db"));
        self.non_negative(rf.cable_loss_db, &p("cable_loss_db"));
        self.finite(rf.amplifier_gain_db, &p("amplifier_gain_db"));
        self.finite(rf.rx_sensitivity_dbm, &p("rx_sensitivity_dbm"));
        self.finite(rf.noise_dbm, &p("noise_dbm"));
        if base_station {
            self.check(
                rf.body_loss_db == 0.0,
                p("body_loss_db"),
                "body loss applies to UEs only; must be 0",
            );
        } else {
            self.check(
                rf.cable_loss_db == 0.0,
                p("cable_loss_db"),
                "cable loss applies to the base station only; must be 0",
            );
            self.check(
                rf.amplifier_gain_db == 0.0,
                p("amplifier_gain_db"),
                "amplifier gain applies to the base station only; must be 0",
            );
        }
    }
}

impl ScenarioConfig {
    /// Every invariant violation; empty when the config is usable.
    pub fn validate(&self) -> Vec<Violation> {
        let mut c = Checker(Vec::new());
        c.positive(self.cell_radius_m, "cell_radius_m");
        c.positive(self.carrier_freq_hz, "carrier_freq_hz");
        c.positive(self.rb_bandwidth_hz, "rb_bandwidth_hz");
        c.check(self.num_rbs >= 1, "num_rbs", "must be at least 1");
        c.check(self.num_cues >= 1, "num_cues", "must be at least 1");
        c.check(
            self.num_cues <= self.num_rbs,
            "num_cues",
            format!(
                "full-load traffic needs one RB per CUE: {} CUEs > {} RBs",
                self.num_cues, self.num_rbs
            ),
        );
        c.positive(self.due_pair_max_distance_m, "due_pair_max_distance_m");
        c.finite(self.cue_tx_power_dbm, "cue_tx_power_dbm");

        let [lo, hi] = self.due_power_range_dbm;
        c.finite(lo, "due_power_range_dbm[0]");
        c.finite(hi, "due_power_range_dbm[1]");
        c.check(
            lo <= hi,
            "due_power_range_dbm",
            format!("min {lo} dBm exceeds max {hi} dBm"),
        );
        c.check(
            self.due_power_levels >= 1,
            "due_power_levels",
            "must be at least 1",
        );
        c.check(
            self.due_power_levels != 1 || lo == hi,
            "due_power_levels",
            "a single power level requires due_power_range_dbm min == max",
        );
        c.check(
            self.episode_length_steps >= 1,
            "episode_length_steps",
            "must be at least 1",
        );

        match &self.pathloss_model {
            PathlossConfig::FreeSpace { exponent } => {
                c.positive(*exponent, "pathloss_model.exponent")
            }
            PathlossConfig::LogDistanceShadowing {
                exponent,
                sigma_db,
                ref_distance_m,
            } => {
                c.positive(*exponent, "pathloss_model.exponent");
                c.non_negative(*sigma_db, "pathloss_model.sigma_db");
                c.positive(*ref_distance_m, "pathloss_model.ref_distance_m");
                c.check(
                    *ref_distance_m < self.cell_radius_m,
                    "pathloss_model.ref_distance_m",
                    "must be smaller than the cell radius",
                );
                c.check(
                    self.num_due_pairs == 0 || *ref_distance_m < self.due_pair_max_distance_m,
                    "pathloss_model.ref_distance_m",
                    "must be smaller than due_pair_max_distance_m so pairs can be placed",
                );
            }
            PathlossConfig::Custom { name, .. } => {
                c.check(!name.is_empty(), "pathloss_model.name", "must not be empty");
            }
        }

        c.rf(&self.bs_rf, "bs_rf", true);
        c.rf(&self.cue_rf, "cue_rf", false);
        c.rf(&self.due_rf, "due_rf", false);
        c.check(
            self.cue_tx_power_dbm <= self.cue_rf.tx_power_dbm,
            "cue_tx_power_dbm",
            format!(
                "exceeds the CUE class maximum {} dBm",
                self.cue_rf.tx_power_dbm
            ),
        );
        c.check(
            hi <= self.due_rf.tx_power_dbm,
            "due_power_range_dbm",
            format!(
                "max exceeds the DUE class maximum {} dBm",
                self.due_rf.tx_power_dbm
            ),
        );
        if let RewardScheme::PerPair { cue_penalty_weight } = self.reward {
            c.non_negative(cue_penalty_weight, "reward.cue_penalty_weight");
        }
        c.0
    }

    /// The discrete DUE power grid: `due_power_levels` equally spaced values
    /// spanning the configured range inclusively.
    pub fn due_power_grid(&self) -> Vec<f64> {
        let [lo, hi] = self.due_power_range_dbm;
        match self.due_power_levels {
            0 => Vec::new(),
            1 => vec![lo],
            p => (0..p)
                .map(|i| lo + (hi - lo) * i as f64 / (p - 1) as f64)
                .collect(),
        }
    }

    pub fn rb_bandwidth_mhz(&self) -> f64 {
        self.rb_bandwidth_hz / 1e6
    }

    pub fn with_due_pairs(mut self, n: usize) -> Self {
        self.num_due_pairs = n;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}
