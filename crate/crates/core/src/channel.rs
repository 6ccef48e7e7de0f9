//! Optical intensity channel parameters and rate units.

use std::f64::consts::PI;
use std::fmt;
use std::iter::Sum;
use std::ops::Add;

use serde::{Deserialize, Serialize};

use crate::error::{param, Result};

/// Discrete-time Gaussian optical intensity channel `r = s + z`, `s >= 0`,
/// with average optical power budget `E[s] <= eps` and noise `z ~ N(0, sigma_z^2)`.
///
/// The optical SNR is the amplitude ratio `eps / sigma_z`; its decibel value is
/// `10 log10(eps / sigma_z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    eps: f64,
    sigma_z: f64,
}

impl ChannelSpec {
    pub fn new(eps: f64, sigma_z: f64) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return param(format!("optical power must be positive and finite, got {eps}"));
        }
        if !(sigma_z > 0.0 && sigma_z.is_finite()) {
            return param(format!("noise level must be positive and finite, got {sigma_z}"));
        }
        Ok(Self { eps, sigma_z })
    }

    /// Channel with `sigma_z = 1` at the given optical SNR in dB.
    pub fn from_snr_db(snr_db: f64) -> Self {
        snr_db_to_channel(snr_db, 1.0).expect("unit noise level is valid")
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn sigma_z(&self) -> f64 {
        self.sigma_z
    }

    pub fn snr_linear(&self) -> f64 {
        self.eps / self.sigma_z
    }

    pub fn snr_db(&self) -> f64 {
        10.0 * self.snr_linear().log10()
    }
}

/// Builds a channel whose optical SNR `10 log10(eps / sigma_z)` equals `snr_db`.
pub fn snr_db_to_channel(snr_db: f64, sigma_z: f64) -> Result<ChannelSpec> {
    if !snr_db.is_finite() {
        return param(format!("SNR must be finite, got {snr_db}"));
    }
    ChannelSpec::new(sigma_z * 10f64.powf(snr_db / 10.0), sigma_z)
}

/// Information rate in bits per time-domain channel use.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Rate(f64);

impl Rate {
    pub const ZERO: Rate = Rate(0.0);

    /// Wraps a bit count; tiny negative round-off is clamped to zero.
    pub fn bits(value: f64) -> Self {
        debug_assert!(!(value < -1e-12), "negative rate {value}");
        Rate(value.max(0.0))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl Add for Rate {
    type Output = Rate;

    fn add(self, rhs: Rate) -> Rate {
        Rate(self.0 + rhs.0)
    }
}

impl Sum for Rate {
    fn sum<I: Iterator<Item = Rate>>(iter: I) -> Rate {
        Rate(iter.map(|r| r.0).sum())
    }
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} bits", self.0)
    }
}

/// Truncated Gaussian `TG(0, sigma^2)`: the law of `max(x, 0)` for `x ~ N(0, sigma^2)`,
/// a half-Gaussian density on `x > 0` plus a point mass of 1/2 at zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncGauss {
    pub sigma: f64,
}

impl TruncGauss {
    pub fn mean(&self) -> f64 {
        tg_mean(self.sigma)
    }

    /// Second moment `E[s^2] = sigma^2 / 2`.
    pub fn power(&self) -> f64 {
        self.sigma * self.sigma / 2.0
    }

    pub fn zero_mass(&self) -> f64 {
        0.5
    }
}

/// Mean of `TG(0, sigma^2)`, `sigma / sqrt(2 pi)`.
pub fn tg_mean(sigma: f64) -> f64 {
    sigma / (2.0 * PI).sqrt()
}
