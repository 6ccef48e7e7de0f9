//! Quadrature oracles shared by the test suites. Nothing here calls erf.
#![allow(dead_code)]

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

/// Composite 20-point Gauss-Legendre rule on `[a, b]`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut acc = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        let mut panel = 0.0;
        for (t, w) in NODES.iter().zip(WEIGHTS.iter()) {
            panel += w * (f(mid - t * h / 2.0) + f(mid + t * h / 2.0));
        }
        acc += panel * h / 2.0;
    }
    acc
}

/// Standard normal density.
pub fn phi(u: f64) -> f64 {
    (-0.5 * u * u).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// `(alpha, d2)` of `clamp(x, -a, a)`, `x ~ N(0, sigma^2)`, from tail integrals:
/// `1 - alpha = 2/sigma^2 int_a^inf (x - a) x phi`,
/// `d2 = 2 int_a^inf (x - a)^2 phi - (1 - alpha)^2 sigma^2`.
pub fn clip_oracle(sigma: f64, a: f64) -> (f64, f64) {
    let r = a / sigma;
    let hi = r.max(0.0) + 40.0;
    let one_minus_alpha = 2.0 * integrate(|u| (u - r) * u * phi(u), r, hi, 400);
    let tail2 = 2.0 * sigma * sigma * integrate(|u| (u - r) * (u - r) * phi(u), r, hi, 400);
    let d2 = tail2 - one_minus_alpha * one_minus_alpha * sigma * sigma;
    (1.0 - one_minus_alpha, d2)
}

/// `1 - alpha` alone, for relative comparisons where `alpha` is near one.
pub fn clip_oracle_gap(sigma: f64, a: f64) -> f64 {
    let r = a / sigma;
    2.0 * integrate(|u| (u - r) * u * phi(u), r, r + 40.0, 400)
}

pub fn rel(a: f64, b: f64) -> f64 {
    if a == b { 0.0 } else { (a - b).abs() / b.abs().max(f64::MIN_POSITIVE) }
}
