//! Propagation loss models.
//!
//! Every model implements [`PathlossModel`]. Randomness is always drawn from
//! the caller's generator so a fixed seed reproduces the same losses.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use rand::RngCore;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Path loss exponent in free space.
pub const FREE_SPACE_EXPONENT: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PathlossError {
    #[error("carrier frequency must be positive, got {0} Hz")]
    NonPositiveFrequency(f64),
    #[error("distance must be positive, got {0} m")]
    NonPositiveDistance(f64),
    #[error("distance {distance_m} m is below the reference distance {ref_distance_m} m")]
    BelowReferenceDistance {
        distance_m: f64,
        ref_distance_m: f64,
    },
    #[error("invalid model parameter {name}: {reason}")]
    InvalidParameter { name: String, reason: String },
    #[error("no path loss model registered under {0:?}")]
    UnknownModel(String),
}

pub trait PathlossModel: fmt::Debug + Send + Sync {
    /// Loss in dB between two points `distance_m` apart at `freq_hz`.
    fn loss(
        &self,
        freq_hz: f64,
        distance_m: f64,
        rng: &mut dyn RngCore,
    ) -> Result<f64, PathlossError>;

    /// Smallest distance for which [`loss`](Self::loss) is defined.
    fn min_distance_m(&self) -> f64 {
        0.0
    }

    /// True when `loss` never consumes randomness.
    fn is_deterministic(&self) -> bool;
}

/// Free-space path loss, `10 n log10(4 pi f d / c)`.
pub fn fspl(freq_hz: f64, distance_m: f64, exponent: f64) -> Result<f64, PathlossError> {
    if freq_hz.is_nan() || freq_hz <= 0.0 {
        return Err(PathlossError::NonPositiveFrequency(freq_hz));
    }
    if distance_m.is_nan() || distance_m <= 0.0 {
        return Err(PathlossError::NonPositiveDistance(distance_m));
    }
    Ok(10.0 * exponent * (4.0 * PI * freq_hz * distance_m / SPEED_OF_LIGHT).log10())
}

/// Log-distance loss anchored at free space over `ref_distance_m`, plus a
/// zero-mean Gaussian shadowing term with standard deviation `sigma_db`.
///
/// With `sigma_db == 0` no randomness is consumed.
pub fn log_distance_shadowing(
    freq_hz: f64,
    distance_m: f64,
    exponent: f64,
    sigma_db: f64,
    ref_distance_m: f64,
    rng: &mut dyn RngCore,
) -> Result<f64, PathlossError> {
    if ref_distance_m.is_nan() || ref_distance_m <= 0.0 {
        return Err(PathlossError::InvalidParameter {
            name: "ref_distance_m".into(),
            reason: format!("must be positive, got {ref_distance_m}"),
        });
    }
    if distance_m.is_nan() || distance_m <= 0.0 {
        return Err(PathlossError::NonPositiveDistance(distance_m));
    }
    if distance_m < ref_distance_m {
        return Err(PathlossError::BelowReferenceDistance {
            distance_m,
            ref_distance_m,
        });
    }
    let mean = fspl(freq_hz, ref_distance_m, FREE_SPACE_EXPONENT)?
        + 10.0 * exponent * (distance_m / ref_distance_m).log10();
    if sigma_db == 0.0 {
        return Ok(mean);
    }
    let shadowing = Normal::new(0.0, sigma_db).map_err(|e| PathlossError::InvalidParameter {
        name: "sigma_db".into(),
        reason: e.to_string(),
    })?;
    Ok(mean + shadowing.sample(rng))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeSpace {
    pub exponent: f64,
}

impl Default for FreeSpace {
    fn default() -> Self {
        Self {
            exponent: FREE_SPACE_EXPONENT,
        }
    }
}

impl PathlossModel for FreeSpace {
    fn loss(
        &self,
        freq_hz: f64,
        distance_m: f64,
        _rng: &mut dyn RngCore,
    ) -> Result<f64, PathlossError> {
        fspl(freq_hz, distance_m, self.exponent)
    }

    fn is_deterministic(&self) -> bool {
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDistanceShadowing {
    pub exponent: f64,
    pub sigma_db: f64,
    pub ref_distance_m: f64,
}

impl PathlossModel for LogDistanceShadowing {
    fn loss(
        &self,
        freq_hz: f64,
        distance_m: f64,
        rng: &mut dyn RngCore,
    ) -> Result<f64, PathlossError> {
        log_distance_shadowing(
            freq_hz,
            distance_m,
            self.exponent,
            self.sigma_db,
            self.ref_distance_m,
            rng,
        )
    }

    fn min_distance_m(&self) -> f64 {
        self.ref_distance_m
    }

    fn is_deterministic(&self) -> bool {
        self.sigma_db == 0.0
    }
}

/// Declarative model choice as it appears in a scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum PathlossConfig {
    FreeSpace {
        exponent: f64,
    },
    LogDistanceShadowing {
        exponent: f64,
        sigma_db: f64,
        ref_distance_m: f64,
    },
    /// A model added to a [`ModelRegistry`] by name.
    Custom {
        name: String,
        #[serde(default)]
        params: BTreeMap<String, f64>,
    },
}

impl PathlossConfig {
    /// Shadowing standard deviation, zero for models without shadowing.
    pub fn sigma_db(&self) -> Option<f64> {
        match self {
            PathlossConfig::FreeSpace { .. } => Some(0.0),
            PathlossConfig::LogDistanceShadowing { sigma_db, .. } => Some(*sigma_db),
            PathlossConfig::Custom { .. } => None,
        }
    }
}

pub type ModelFactory = Box<
    dyn Fn(&BTreeMap<String, f64>) -> Result<Box<dyn PathlossModel>, PathlossError> + Send + Sync,
>;

/// Name → constructor lookup used to resolve [`PathlossConfig::Custom`].
/// The built-in models are also reachable as `free_space` and
/// `log_distance_shadowing`.
pub struct ModelRegistry {
    factories: BTreeMap<String, ModelFactory>,
}

impl fmt::Debug for ModelRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModelRegistry")
            .field("models", &self.factories.keys().collect::<Vec<_>>())
            .finish()
    }
}

fn param(
    params: &BTreeMap<String, f64>,
    name: &str,
    default: Option<f64>,
) -> Result<f64, PathlossError> {
    params
        .get(name)
        .copied()
        .or(default)
        .ok_or_else(|| PathlossError::InvalidParameter {
            name: name.into(),
            reason: "missing".into(),
        })
}

impl Default for ModelRegistry {
    fn default() -> Self {
        let mut registry = Self {
            factories: BTreeMap::new(),
        };
        registry.register("free_space", |p| {
            Ok(Box::new(FreeSpace {
                exponent: param(p, "exponent", Some(FREE_SPACE_EXPONENT))?,
            }))
        });
        registry.register("log_distance_shadowing", |p| {
            Ok(Box::new(LogDistanceShadowing {
                exponent: param(p, "exponent", None)?,
                sigma_db: param(p, "sigma_db", None)?,
                ref_distance_m: param(p, "ref_distance_m", Some(1.0))?,
            }))
        });
        registry
    }
}

impl ModelRegistry {
    pub fn register<F>(&mut self, name: &str, factory: F)
    where
        F: Fn(&BTreeMap<String, f64>) -> Result<Box<dyn PathlossModel>, PathlossError>
            + Send
            + Sync
            + 'static,
    {
        self.factories.insert(name.to_owned(), Box::new(factory));
    }

    pub fn contains(&self, name: &str) -> bool {
        self.factories.contains_key(name)
    }

    pub fn build(&self, config: &PathlossConfig) -> Result<Box<dyn PathlossModel>, PathlossError> {
        match config {
            PathlossConfig::FreeSpace { exponent } => Ok(Box::new(FreeSpace {
                exponent: *exponent,
            })),
            PathlossConfig::LogDistanceShadowing {
                exponent,
                sigma_db,
                ref_distance_m,
            } => Ok(Box::new(LogDistanceShadowing {
                exponent: *exponent,
                sigma_db: *sigma_db,
                ref_distance_m: *ref_distance_m,
            })),
            PathlossConfig::Custom { name, params } => {
                let factory = self
                    .factories
                    .get(name)
                    .ok_or_else(|| PathlossError::UnknownModel(name.clone()))?;
                factory(params)
            }
        }
    }
}
