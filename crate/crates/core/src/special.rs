//! Error function and its complement.
//!
//! Both are backed by `libm`, a port of the FreeBSD `s_erf.c` rational
//! approximations (accurate to within an ulp or two across the real line).

/// Error function `2/sqrt(pi) * integral_0^x exp(-t^2) dt`.
#[inline]
pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

/// Complementary error function `1 - erf(x)`, without cancellation for large `x`.
#[inline]
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Composite 20-point Gauss-Legendre quadrature of the Gaussian kernel on [0, x].
    fn erf_quadrature(x: f64) -> f64 {
        const NODES: [f64; 10] = [
            0.076_526_521_133_497_33,
            0.227_785_851_141_645_08,
            0.373_706_088_715_419_56,
            0.510_867_001_950_827_1,
            0.636_053_680_726_515,
            0.746_331_906_460_150_8,
            0.839_116_971_822_218_8,
            0.912_234_428_251_326,
            0.963_971_927_277_913_8,
            0.993_128_599_185_094_9,
        ];
        const WEIGHTS: [f64; 10] = [
            0.152_753_387_130_725_85,
            0.149_172_986_472_603_75,
            0.142_096_109_318_382_05,
            0.131_688_638_449_176_63,
            0.118_194_531_961_518_42,
            0.101_930_119_817_240_44,
            0.083_276_741_576_704_75,
            0.062_672_048_334_109_06,
            0.040_601_429_800_386_94,
            0.017_614_007_139_152_12,
        ];
        let panels = 64;
        let h = x / panels as f64;
        let mut acc = 0.0;
        for p in 0..panels {
            let mid = (p as f64 + 0.5) * h;
            for (t, w) in NODES.iter().zip(WEIGHTS.iter()) {
                for s in [-1.0, 1.0] {
                    let u = mid + s * t * h / 2.0;
                    acc += w * (-u * u).exp() * h / 2.0;
                }
            }
        }
        acc * 2.0 / std::f64::consts::PI.sqrt()
    }

    #[test]
    fn known_values() {
        assert_eq!(erf(0.0), 0.0);
        assert_eq!(erfc(0.0), 1.0);
        assert!((erf(1.0) - 0.842_700_792_9).abs() < 1e-10);
    }

    #[test]
    fn matches_quadrature_oracle() {
        let mut x = -6.0;
        while x <= 6.0 {
            let q = erf_quadrature(x);
            assert!((erf(x) - q).abs() < 1e-12, "x={x}: {} vs {q}", erf(x));
            assert!((erfc(x) - (1.0 - erf(x))).abs() < 1e-12);
            x += 0.05;
        }
    }

    #[test]
    fn odd_and_monotone() {
        let mut prev = erf(-7.0);
        for i in -699..=700 {
            let x = i as f64 / 100.0;
            assert_eq!(erf(-x), -erf(x));
            assert!(erf(x) >= prev);
            prev = erf(x);
        }
    }
}
