//! Built-in computing-platform profiles used as synthetic ground truth.
//!
//! Each profile pairs an alias with the custom-model coefficients the
//! generator treats as the platform's true power function, plus the noise
//! and outlier behaviour of its measurement chain. The coefficient values
//! are generator fixtures chosen to land in realistic power ranges; they
//! are not fitted to any real machine.

use crate::error::CoreError;
use crate::regression::{CustomRegParams, Variant};

/// Ground-truth coefficients for the server-class profiles.
///
/// Flat power spans roughly 20-26 W over the feasible grid; the rise terms
/// push the low-SNR/high-MCS corner above that.
pub const SERVER_CLASS_COEFFS: [f64; 13] = [
    20.0, 4.0, 0.05, 0.0, 0.002, 0.05, -0.5, -0.3, -0.02, -2.0, 0.6, 2.0, 0.8,
];

/// NUC-class profiles reuse the server coefficients with the base and
/// airtime power terms scaled down to small-form-factor levels.
pub const NUC1_BASE_W: f64 = 8.0;
pub const NUC1_AIRTIME_W: f64 = 2.5;
pub const NUC2_BASE_W: f64 = 6.5;
pub const NUC2_AIRTIME_W: f64 = 2.0;

/// Default measurement-noise standard deviation, watts.
pub const DEFAULT_NOISE_SIGMA_W: f64 = 0.15;
/// Default probability that a row is replaced by an outlier reading.
pub const DEFAULT_OUTLIER_PROB: f64 = 0.01;
/// Default outlier range in watts (anomalously low readings).
pub const DEFAULT_OUTLIER_RANGE_W: (f64, f64) = (4.0, 8.0);

/// A computing platform: alias, descriptive hardware string, ground-truth
/// power model and measurement-noise behaviour.
#[derive(Debug, Clone, PartialEq)]
pub struct PlatformProfile {
    pub alias: String,
    /// Commercial name / CPU, informational only.
    pub description: String,
    /// Ground-truth power function used by the generator.
    pub oracle_params: CustomRegParams,
    pub noise_sigma_w: f64,
    pub outlier_prob: f64,
    pub outlier_range_w: (f64, f64),
}

impl PlatformProfile {
    pub fn new(
        alias: impl Into<String>,
        description: impl Into<String>,
        oracle_params: CustomRegParams,
        noise_sigma_w: f64,
        outlier_prob: f64,
        outlier_range_w: (f64, f64),
    ) -> Result<PlatformProfile, CoreError> {
        if !(noise_sigma_w >= 0.0) {
            return Err(CoreError::InvalidParams(format!(
                "noise_sigma_w must be >= 0, got {noise_sigma_w}"
            )));
        }
        if !(0.0..1.0).contains(&outlier_prob) {
            return Err(CoreError::InvalidParams(format!(
                "outlier_prob must be in [0, 1), got {outlier_prob}"
            )));
        }
        if !(outlier_range_w.0 < outlier_range_w.1) {
            return Err(CoreError::InvalidParams(format!(
                "outlier range low must be below high, got {outlier_range_w:?}"
            )));
        }
        Ok(PlatformProfile {
            alias: alias.into(),
            description: description.into(),
            oracle_params,
            noise_sigma_w,
            outlier_prob,
            outlier_range_w,
        })
    }

    /// One of the four built-in platforms, or `None` for unknown aliases.
    pub fn builtin(alias: &str) -> Option<PlatformProfile> {
        let (description, base_w, airtime_w) = match alias {
            "NUC1" => ("BOXNUC8I7BEH / i7-8559U @ 2.70GHz", NUC1_BASE_W, NUC1_AIRTIME_W),
            "NUC2" => ("NUC7i7DNHE / i7-8650U @ 1.90GHz", NUC2_BASE_W, NUC2_AIRTIME_W),
            "Server1" => (
                "Dell XPS 8900 Series / i7-6700 @ 3.40GHz",
                SERVER_CLASS_COEFFS[0],
                SERVER_CLASS_COEFFS[1],
            ),
            "Server2" => (
                "Dell Alienware Aurora R5 / i7-9700 @ 3.00GHz",
                SERVER_CLASS_COEFFS[0],
                SERVER_CLASS_COEFFS[1],
            ),
            _ => return None,
        };
        let mut coeffs = SERVER_CLASS_COEFFS;
        coeffs[0] = base_w;
        coeffs[1] = airtime_w;
        let params = CustomRegParams::new(coeffs, Variant::Continuous)
            .expect("built-in coefficients are valid");
        Some(
            PlatformProfile::new(
                alias,
                description,
                params,
                DEFAULT_NOISE_SIGMA_W,
                DEFAULT_OUTLIER_PROB,
                DEFAULT_OUTLIER_RANGE_W,
            )
            .expect("built-in profile is valid"),
        )
    }

    pub fn builtin_aliases() -> [&'static str; 4] {
        ["NUC1", "NUC2", "Server1", "Server2"]
    }

    /// Copy of the profile with measurement noise and outliers disabled.
    pub fn noiseless(&self) -> PlatformProfile {
        PlatformProfile {
            noise_sigma_w: 0.0,
            outlier_prob: 0.0,
            ..self.clone()
        }
    }
}
