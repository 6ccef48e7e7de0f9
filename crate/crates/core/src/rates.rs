//! Closed-form information rates of the unipolar OFDM schemes, in bits per
//! time-domain channel use.
//!
//! Every function here evaluates the rate at fixed shape parameters; the outer
//! maximizations over `nu` and the power split live in [`crate::optim`].

use std::f64::consts::{E, PI};

use serde::{Deserialize, Serialize};

use crate::channel::{ChannelSpec, Rate};
use crate::clipstats::symmetric_clip_moments;
use crate::error::{param, Result};
use crate::scheme::{check_allocation, check_lambda, SchemeConfig};
use crate::special::erf;

/// Total rate of a scheme and the share of each multiplexed component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateBreakdown {
    pub total: Rate,
    pub per_component: Vec<Rate>,
}

impl RateBreakdown {
    pub fn from_components(per_component: Vec<Rate>) -> Self {
        let total = per_component.iter().copied().sum();
        Self { total, per_component }
    }

    pub fn single(rate: Rate) -> Self {
        Self { total: rate, per_component: vec![rate] }
    }
}

fn check_nu(nu: f64) -> Result<()> {
    if nu > 0.0 && nu.is_finite() {
        Ok(())
    } else {
        param(format!("nu must be positive and finite, got {nu}"))
    }
}

/// Normalized clipping distortion `erf(t) - erf(t)^2 - 2 t exp(-t^2)/sqrt(pi) + 2 t^2 erfc(t)`
/// at `t = nu * clip_level`; equals `2 nu^2 E[d^2]` for a clipper at `clip_level`
/// applied to Gaussian samples of deviation `1 / (sqrt(2) nu)`.
fn normalized_distortion(t: f64) -> f64 {
    symmetric_clip_moments(1.0, std::f64::consts::SQRT_2 * t).d2
}

/// DCO-OFDM rate at clipping scale `nu = 1 / (sqrt(2) sigma_X)` in the large-N limit.
pub fn rate_dco(ch: &ChannelSpec, nu: f64) -> Result<Rate> {
    check_nu(nu)?;
    let t = nu * ch.eps();
    let e = erf(t);
    let den = normalized_distortion(t) + 2.0 * nu * nu * ch.sigma_z() * ch.sigma_z();
    Ok(Rate::bits(0.5 * (1.0 + e * e / den).log2()))
}

/// DCO-OFDM rate with `n` subcarriers: `(N-2)/(2N) log2(1 + alpha^2 sigma_X^2 / (E[d^2] + sigma_z^2))`
/// with time-domain variance `sigma_x^2 = (N-2)/N sigma_X^2`.
pub fn rate_dco_finite_n(ch: &ChannelSpec, nu: f64, n: usize) -> Result<Rate> {
    check_nu(nu)?;
    if n < 8 || n % 2 != 0 {
        return param(format!("subcarrier count must be even and >= 8, got {n}"));
    }
    let nf = n as f64;
    let sigma_big = 1.0 / (std::f64::consts::SQRT_2 * nu);
    let sigma_x = sigma_big * ((nf - 2.0) / nf).sqrt();
    let m = symmetric_clip_moments(sigma_x, ch.eps());
    let sndr = m.alpha * m.alpha * sigma_big * sigma_big / (m.d2 + ch.sigma_z() * ch.sigma_z());
    Ok(Rate::bits((nf - 2.0) / (2.0 * nf) * (1.0 + sndr).log2()))
}

/// Rate shared by ACO-OFDM, PAM-DMT, Flip-OFDM and PM-OFDM: `1/4 log2(1 + pi eps^2 / sigma_z^2)`.
pub fn rate_aco_family(ch: &ChannelSpec) -> Rate {
    let snr = ch.snr_linear();
    Rate::bits(0.25 * (1.0 + PI * snr * snr).log2())
}

/// ACO-OFDM rate with `n` subcarriers under the tabulated bookkeeping: `N/4` odd
/// subcarriers per `N` channel uses, equivalent SNR `sigma_X^2 / (4 sigma_z^2)` and
/// `sigma_X^2 = 2N/(N-2) 2 pi eps^2`.
pub fn rate_aco_finite_n(ch: &ChannelSpec, n: usize) -> Result<Rate> {
    if n < 8 || n % 4 != 0 {
        return param(format!("subcarrier count must be a multiple of 4 and >= 8, got {n}"));
    }
    let nf = n as f64;
    let snr = ch.snr_linear();
    let snr_e = nf / (nf - 2.0) * PI * snr * snr;
    Ok(Rate::bits(0.25 * (1.0 + snr_e).log2()))
}

/// The distortion term of the ADO-OFDM rate,
/// `erf(t) - erf^2(t) - 2 t exp(-t^2)/sqrt(pi) + 2 t^2 erfc(t)` with `t = nu lambda eps`.
pub fn ado_distortion_term(ch: &ChannelSpec, lambda: f64, nu: f64) -> f64 {
    normalized_distortion(nu * lambda * ch.eps())
}

/// ADO-OFDM rate: an ACO component with power `(1 - lambda) eps` on odd subcarriers
/// and a DCO component biased and clipped at `lambda eps` on even subcarriers.
///
/// `nu = 1 / (sqrt(2) sigma_x2)` where `sigma_x2` is the time-domain deviation of
/// the DCO component before clipping.
pub fn rate_ado(ch: &ChannelSpec, lambda: f64, nu: f64) -> Result<RateBreakdown> {
    check_lambda(lambda)?;
    check_nu(nu)?;
    let eps = ch.eps();
    let noise = ch.sigma_z() * ch.sigma_z();
    let dist = ado_distortion_term(ch, lambda, nu);
    let two_nu2 = 2.0 * nu * nu;
    let aco_part = 0.25 * (1.0 + PI * (1.0 - lambda).powi(2) * eps * eps / (dist / two_nu2 + noise)).log2();
    let e = erf(nu * lambda * eps);
    let dco_part = 0.25 * (1.0 + 2.0 * e * e / (dist + two_nu2 * noise)).log2();
    Ok(RateBreakdown::from_components(vec![Rate::bits(aco_part), Rate::bits(dco_part)]))
}

/// Rate of HACO-OFDM and of ASCO-OFDM: an ACO component with power `(1 - lambda) eps`
/// plus a half-DoF component (PAM-DMT or Flip) on even subcarriers with power `lambda eps`.
pub fn rate_haco(ch: &ChannelSpec, lambda: f64) -> Result<RateBreakdown> {
    check_lambda(lambda)?;
    let snr = ch.snr_linear();
    let s2 = snr * snr;
    let aco_part = 0.25 * (1.0 + PI * (1.0 - lambda).powi(2) * s2).log2();
    let second = 0.125 * (1.0 + 2.0 * PI * lambda * lambda * s2).log2();
    Ok(RateBreakdown::from_components(vec![Rate::bits(aco_part), Rate::bits(second)]))
}

pub use self::rate_haco as rate_asco;

/// Rate of the `L`-layer FDM-UOFDM and eU-OFDM schemes for the power split `lambdas`:
/// layer `l` contributes `2^-(l+1) log2(1 + 2^(l-1) pi lambda_l^2 eps^2 / sigma_z^2)`.
pub fn rate_multi(ch: &ChannelSpec, lambdas: &[f64]) -> Result<RateBreakdown> {
    check_allocation(lambdas)?;
    let snr = ch.snr_linear();
    let s2 = snr * snr;
    let per_layer = lambdas
        .iter()
        .enumerate()
        .map(|(i, lambda)| {
            let l = i as i32 + 1;
            let gain = 2f64.powi(l - 1) * PI * lambda * lambda * s2;
            Rate::bits(2f64.powi(-(l + 1)) * (1.0 + gain).log2())
        })
        .collect();
    Ok(RateBreakdown::from_components(per_layer))
}

pub use self::rate_multi as rate_fdm_uofdm;
pub use self::rate_multi as rate_eu_ofdm;

/// Rate of any scheme at its stated parameters.
pub fn scheme_rate(ch: &ChannelSpec, cfg: &SchemeConfig) -> Result<RateBreakdown> {
    match cfg {
        SchemeConfig::Dco { nu } => rate_dco(ch, *nu).map(RateBreakdown::single),
        SchemeConfig::Aco | SchemeConfig::PamDmt | SchemeConfig::Flip | SchemeConfig::Pm => {
            Ok(RateBreakdown::single(rate_aco_family(ch)))
        }
        SchemeConfig::Ado { lambda, nu } => rate_ado(ch, *lambda, *nu),
        SchemeConfig::Haco { lambda } | SchemeConfig::Asco { lambda } => rate_haco(ch, *lambda),
        SchemeConfig::FdmUofdm { lambdas } | SchemeConfig::EuOfdm { lambdas } => {
            rate_multi(ch, lambdas)
        }
    }
}

/// Capacity bounds of the channel under the average optical power constraint:
/// the exponential-input lower bound and the sphere-packing upper bound.
pub fn capacity_bounds(ch: &ChannelSpec) -> (Rate, Rate) {
    let snr = ch.snr_linear();
    let k = E / (2.0 * PI);
    let lower = 0.5 * (1.0 + k * snr * snr).log2();
    let upper = 0.5 * (k * (snr + 2.0).powi(2)).log2();
    (Rate::bits(lower), Rate::bits(upper))
}

/// High-SNR asymptote of the optimized HACO/ASCO rate, `3/8 log2(pi 2^(5/3)/9 SNR^2)`.
pub fn haco_asymptote(ch: &ChannelSpec) -> f64 {
    let snr = ch.snr_linear();
    0.375 * (asymptotic_constants().haco_asym_coeff * snr * snr).log2()
}

/// Lower bound `1/2 log2(pi/8 SNR^2)` on the many-layer multi-component rate.
/// Negative at low SNR, hence a plain number.
pub fn multi_lower_bound(ch: &ChannelSpec) -> f64 {
    let snr = ch.snr_linear();
    0.5 * (PI / 8.0 * snr * snr).log2()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticConstants {
    /// `pi 2^(5/3) / 9`.
    pub haco_asym_coeff: f64,
    /// `pi / 8`.
    pub multi_lb_coeff: f64,
    /// `1/2 log2(pi / (pi - 2))`, the DCO rate as `nu eps -> 0` at infinite SNR.
    pub dco_nu0_limit_bits: f64,
    /// `10 log10(2 sqrt(e) / pi)`.
    pub gap_db: f64,
    /// `1/2 log2(4 e / pi^2)`.
    pub gap_bits: f64,
}

pub fn asymptotic_constants() -> AsymptoticConstants {
    AsymptoticConstants {
        haco_asym_coeff: PI * 2f64.powf(5.0 / 3.0) / 9.0,
        multi_lb_coeff: PI / 8.0,
        dco_nu0_limit_bits: 0.5 * (PI / (PI - 2.0)).log2(),
        gap_db: 10.0 * (2.0 * E.sqrt() / PI).log10(),
        gap_bits: 0.5 * (4.0 * E / (PI * PI)).log2(),
    }
}
