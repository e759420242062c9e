//! Power unit conversions.
//!
//! Configuration and reports are expressed in dB / dBm. Anything that sums
//! powers (interference) must do so in linear milliwatts.

use thiserror::Error;

/// Thermal noise power spectral density at 290 K.
pub const THERMAL_NOISE_DBM_PER_HZ: f64 = -174.0;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("cannot convert non-positive power {0} mW to dBm")]
pub struct NonPositivePower(pub f64);

pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

pub fn mw_to_dbm(mw: f64) -> Result<f64, NonPositivePower> {
    if mw > 0.0 {
        Ok(10.0 * mw.log10())
    } else {
        Err(NonPositivePower(mw))
    }
}

/// Thermal noise floor over `bandwidth_hz` plus a receiver noise figure.
pub fn thermal_noise_dbm(bandwidth_hz: f64, noise_figure_db: f64) -> f64 {
    THERMAL_NOISE_DBM_PER_HZ + 10.0 * bandwidth_hz.log10() + noise_figure_db
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_dbm_is_one_milliwatt() {
        assert_eq!(dbm_to_mw(0.0), 1.0);
    }

    #[test]
    fn ue_power_in_milliwatts() {
        assert!((dbm_to_mw(23.0) - 199.526).abs() < 1e-3);
    }

    #[test]
    fn non_positive_power_rejected() {
        assert_eq!(mw_to_dbm(0.0), Err(NonPositivePower(0.0)));
        assert!(mw_to_dbm(-1.0).is_err());
    }

    #[test]
    fn noise_floor_for_one_resource_block() {
        assert!((thermal_noise_dbm(180e3, 0.0) - (-121.4473)).abs() < 1e-3);
    }

    proptest! {
        #[test]
        fn round_trip_is_identity(dbm in -200.0f64..50.0) {
            let mw = dbm_to_mw(dbm);
            let back = dbm_to_mw(mw_to_dbm(mw).unwrap());
            prop_assert!(((back - mw) / mw).abs() < 1e-12);
        }
    }
}
