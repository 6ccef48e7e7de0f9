//! Second-order statistics of hard-clipped Gaussian signals.
//!
//! For `x ~ N(0, sigma^2)` and the symmetric clipper `c = clamp(x, -A, A)` the
//! Bussgang decomposition `c = alpha x + d` with `E[d x] = 0` has
//! `alpha = erf(A / (sqrt(2) sigma))` and a closed-form distortion power.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::channel::tg_mean;
use crate::special::{erf, erfc};

/// Bussgang triple of a clipped Gaussian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClipMoments {
    /// Bussgang gain `E[c x] / sigma^2`.
    pub alpha: f64,
    /// Output power `E[c^2]`.
    pub c2: f64,
    /// Distortion power `E[d^2]`.
    pub d2: f64,
}

/// Moments of `clamp(x, -clip_level, clip_level)` for `x ~ N(0, sigma_x^2)`.
///
/// A zero clip level is allowed and yields all-zero moments.
///
/// # Panics
///
/// If `sigma_x <= 0` or `clip_level < 0`.
pub fn symmetric_clip_moments(sigma_x: f64, clip_level: f64) -> ClipMoments {
    assert!(sigma_x > 0.0, "sigma_x must be positive, got {sigma_x}");
    assert!(clip_level >= 0.0, "clip level must be non-negative, got {clip_level}");
    if clip_level == 0.0 {
        return ClipMoments { alpha: 0.0, c2: 0.0, d2: 0.0 };
    }
    if clip_level.is_infinite() {
        return ClipMoments { alpha: 1.0, c2: sigma_x * sigma_x, d2: 0.0 };
    }
    let ratio = clip_level / sigma_x;
    let u = ratio / std::f64::consts::SQRT_2;
    let (e, ec) = (erf(u), erfc(u));
    let d2 = if ratio < TAIL_SWITCH {
        // erf - erf^2 written as erf * erfc to keep precision when clipping is rare
        sigma_x * sigma_x * (e * ec - (2.0 / PI).sqrt() * ratio * (-0.5 * ratio * ratio).exp())
            + clip_level * clip_level * ec
    } else {
        sigma_x * sigma_x * tail_distortion(ratio)
    };
    let d2 = d2.max(0.0);
    let alpha = e;
    ClipMoments { alpha, c2: alpha * alpha * sigma_x * sigma_x + d2, d2 }
}

/// Clip level in units of sigma above which the distortion is evaluated from the
/// Mills-ratio continued fraction; the direct form cancels badly out there.
const TAIL_SWITCH: f64 = 5.0;

/// `E[d^2] / sigma^2` for a clip at `r` sigma, `r >= TAIL_SWITCH`.
///
/// With `phi` the normal density, `R = Q/phi` the Mills ratio and the continued
/// fraction `R = 1/t0`, `t_k = r + (k+1)/t_(k+1)`, one has
/// `E[(x-c)^2] = 2 sigma^2 phi (2 R / (t1 t2))` and `1 - alpha = 2 phi R`, so
/// `E[d^2] = 4 sigma^2 phi R (1/(t1 t2) - phi R)` without cancellation.
fn tail_distortion(r: f64) -> f64 {
    const DEPTH: usize = 60;
    let mut t = r;
    let mut t1 = r;
    let mut t2 = r;
    for k in (1..=DEPTH).rev() {
        t2 = t1;
        t1 = t;
        t = r + k as f64 / t;
    }
    let mills = 1.0 / t;
    let phi = (-0.5 * r * r).exp() / (2.0 * PI).sqrt();
    4.0 * phi * mills * (1.0 / (t1 * t2) - phi * mills)
}

/// Clipping distortion power of the DC-biased component of ADO-OFDM, whose
/// time-domain samples have deviation `sigma_x2` and are clipped at `lambda_eps`.
pub fn ado_dco_distortion(sigma_x2: f64, lambda_eps: f64) -> f64 {
    symmetric_clip_moments(sigma_x2, lambda_eps).d2
}

/// Mean and power of `max(x, 0)` for `x ~ N(0, sigma_x^2)`.
pub fn asymmetric_clip_stats(sigma_x: f64) -> (f64, f64) {
    assert!(sigma_x >= 0.0, "sigma_x must be non-negative, got {sigma_x}");
    (tg_mean(sigma_x), sigma_x * sigma_x / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_levels() {
        let full = symmetric_clip_moments(1.0, 0.0);
        assert_eq!((full.alpha, full.c2, full.d2), (0.0, 0.0, 0.0));
        let none = symmetric_clip_moments(1.0, f64::INFINITY);
        assert_eq!((none.alpha, none.d2), (1.0, 0.0));
        let wide = symmetric_clip_moments(1.0, 40.0);
        assert!((wide.alpha - 1.0).abs() < 1e-15 && wide.d2 < 1e-300);
    }

    #[test]
    fn unit_clip() {
        let m = symmetric_clip_moments(1.0, 1.0);
        assert!((m.alpha - 0.682_689_492_137_086).abs() < 1e-12);
        // E[c^2] from the textbook form erf(u) - sqrt(2/pi) e^{-1/2} + erfc(u)
        let c2 = erf(0.5f64.sqrt()) - (2.0 / PI).sqrt() * (-0.5f64).exp() + erfc(0.5f64.sqrt());
        assert!((m.c2 - c2).abs() < 1e-14);
        assert!((m.c2 - (m.alpha * m.alpha + m.d2)).abs() < 1e-15);
    }

    #[test]
    fn distortion_vanishes_at_the_ends() {
        assert_eq!(ado_dco_distortion(1.0, 0.0), 0.0);
        assert!(ado_dco_distortion(1.0, 12.0) < 1e-25);
    }

    #[test]
    fn distortion_unimodal_in_clip_level() {
        // zero at both ends, single peak near A = 0.85 sigma
        for sigma in [0.3, 1.0, 4.0] {
            let d2: Vec<f64> = (0..400).map(|i| symmetric_clip_moments(sigma, i as f64 * 0.02 * sigma).d2).collect();
            let peak = d2.iter().enumerate().fold(0, |b, (i, v)| if *v > d2[b] { i } else { b });
            assert!((peak as f64 * 0.02 - 0.85).abs() < 0.03, "sigma={sigma}");
            assert!(d2[..=peak].windows(2).all(|w| w[1] >= w[0] - 1e-16));
            assert!(d2[peak..].windows(2).all(|w| w[1] <= w[0] + 1e-16));
            assert!(d2[399] < 1e-12 * sigma * sigma);
        }
    }

    #[test]
    fn half_wave_stats() {
        assert_eq!(asymmetric_clip_stats(0.0), (0.0, 0.0));
        let (m, p) = asymmetric_clip_stats((2.0 * PI).sqrt());
        assert!((m - 1.0).abs() < 1e-15 && (p - PI).abs() < 1e-14);
        let (m, p) = asymmetric_clip_stats(2.0);
        assert!((m - 0.797_884_560_8).abs() < 1e-10 && p == 2.0);
    }
}
