//! Maximization of the closed-form rates over their free parameters.
//!
//! The power-split objectives are not concave in `lambda` (the optimum jumps
//! from zero to a finite split at a threshold SNR), so every search here starts
//! with a global grid and only then refines locally.

pub mod search;

use std::cell::Cell;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::channel::{ChannelSpec, Rate};
use crate::error::{param, Error, Result};
use crate::rates::{rate_aco_family, rate_ado, rate_dco, rate_haco, rate_multi, RateBreakdown};
use crate::scheme::{equal_allocation, geometric_allocation, halving_allocation, SchemeConfig, SchemeKind, MAX_OPT_LAYERS};

use search::{golden_section_max, grid_then_golden, linspace, project_simplex};

/// Half-width, in decades, of the `nu` grid around `1 / eps`.
pub const NU_DECADES: f64 = 3.0;
/// Points on the logarithmic `nu` grid.
pub const NU_POINTS: usize = 200;
/// Step of the `lambda` grid for ADO-OFDM.
pub const ADO_LAMBDA_STEP: f64 = 0.005;
/// Step of the `lambda` grid for HACO/ASCO-OFDM.
pub const DOUBLE_LAMBDA_STEP: f64 = 0.002;
/// `lambda*` above this value counts as "second component switched on".
pub const DEFAULT_JUMP_THRESHOLD: f64 = 0.05;

/// Optimized configuration of a scheme and the rate it reaches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptResult {
    pub config: SchemeConfig,
    pub rate: Rate,
    pub breakdown: RateBreakdown,
    /// Number of objective evaluations spent.
    pub evaluations: usize,
}

impl OptResult {
    pub fn nu(&self) -> Option<f64> {
        match self.config {
            SchemeConfig::Dco { nu } | SchemeConfig::Ado { nu, .. } => Some(nu),
            _ => None,
        }
    }

    pub fn lambda(&self) -> Option<f64> {
        match self.config {
            SchemeConfig::Ado { lambda, .. }
            | SchemeConfig::Haco { lambda }
            | SchemeConfig::Asco { lambda } => Some(lambda),
            _ => None,
        }
    }

    pub fn lambdas(&self) -> Option<&[f64]> {
        match &self.config {
            SchemeConfig::FdmUofdm { lambdas } | SchemeConfig::EuOfdm { lambdas } => Some(lambdas),
            _ => None,
        }
    }
}

/// Counts objective calls made through it.
struct Counted<F> {
    f: F,
    calls: Cell<usize>,
}

impl<F: Fn(f64, f64) -> f64> Counted<F> {
    fn new(f: F) -> Self {
        Self { f, calls: Cell::new(0) }
    }

    fn eval(&self, a: f64, b: f64) -> f64 {
        self.calls.set(self.calls.get() + 1);
        (self.f)(a, b)
    }
}

/// `log10(nu * eps)` grid.
fn nu_exponent_grid() -> Vec<f64> {
    linspace(-NU_DECADES, NU_DECADES, NU_POINTS)
}

fn nu_from_exponent(ch: &ChannelSpec, w: f64) -> f64 {
    10f64.powf(w) / ch.eps()
}

/// Maximizes the DCO-OFDM rate over `nu`.
pub fn optimize_dco(ch: &ChannelSpec) -> OptResult {
    let obj = Counted::new(|w: f64, _| {
        rate_dco(ch, nu_from_exponent(ch, w)).map(Rate::value).unwrap_or(f64::NEG_INFINITY)
    });
    let (w, _) = grid_then_golden(|w| obj.eval(w, 0.0), &nu_exponent_grid(), 1e-10);
    let nu = nu_from_exponent(ch, w);
    let rate = rate_dco(ch, nu).expect("grid nu is positive");
    OptResult {
        config: SchemeConfig::Dco { nu },
        rate,
        breakdown: RateBreakdown::single(rate),
        evaluations: obj.calls.get(),
    }
}

/// Maximizes the ADO-OFDM rate jointly over `(lambda, nu)`.
///
/// A `lambda` grid of step 0.005 crossed with the 200-point `nu` grid is scanned
/// first; the best cell is then refined by alternating golden-section searches.
/// The result never falls below the `lambda = 0` (ACO only) and `lambda = 1`
/// (DCO on even subcarriers only) specializations.
pub fn optimize_ado(ch: &ChannelSpec) -> OptResult {
    let obj = Counted::new(|lambda: f64, w: f64| {
        rate_ado(ch, lambda.clamp(0.0, 1.0), nu_from_exponent(ch, w))
            .map(|b| b.total.value())
            .unwrap_or(f64::NEG_INFINITY)
    });
    let lambdas = linspace(0.0, 1.0, (1.0 / ADO_LAMBDA_STEP).round() as usize + 1);
    let ws = nu_exponent_grid();

    let mut best = (0.0, ws[0], f64::NEG_INFINITY);
    let mut best_idx = (0, 0);
    for (i, &lambda) in lambdas.iter().enumerate() {
        for (j, &w) in ws.iter().enumerate() {
            let v = obj.eval(lambda, w);
            if v > best.2 {
                best = (lambda, w, v);
                best_idx = (i, j);
            }
        }
    }

    // coordinate-wise refinement inside the neighbouring grid cells
    let l_lo = lambdas[best_idx.0.saturating_sub(1)];
    let l_hi = lambdas[(best_idx.0 + 1).min(lambdas.len() - 1)];
    let w_lo = ws[best_idx.1.saturating_sub(1)];
    let w_hi = ws[(best_idx.1 + 1).min(ws.len() - 1)];
    let (mut lambda, mut w, mut value) = best;
    for _ in 0..60 {
        let before = value;
        let (nl, vl) = golden_section_max(|l| obj.eval(l, w), l_lo, l_hi, 1e-12);
        if vl > value {
            lambda = nl;
            value = vl;
        }
        let (nw, vw) = golden_section_max(|x| obj.eval(lambda, x), w_lo, w_hi, 1e-12);
        if vw > value {
            w = nw;
            value = vw;
        }
        if value - before <= 1e-15 {
            break;
        }
    }

    // boundary specializations
    let aco_only = rate_aco_family(ch).value();
    if aco_only > value {
        lambda = 0.0;
        value = aco_only;
    }
    let (w1, v1) = grid_then_golden(|x| obj.eval(1.0, x), &ws, 1e-10);
    if v1 > value {
        lambda = 1.0;
        w = w1;
    }

    let nu = nu_from_exponent(ch, w);
    let breakdown = rate_ado(ch, lambda, nu).expect("parameters inside bounds");
    OptResult {
        config: SchemeConfig::Ado { lambda, nu },
        rate: breakdown.total,
        breakdown,
        evaluations: obj.calls.get(),
    }
}

/// Maximizes the HACO/ASCO-OFDM rate over `lambda` (grid step 0.002, then
/// golden-section refinement around the best node).
pub fn optimize_double_lambda(ch: &ChannelSpec) -> OptResult {
    optimize_double_lambda_as(ch, SchemeKind::Haco)
}

fn optimize_double_lambda_as(ch: &ChannelSpec, kind: SchemeKind) -> OptResult {
    let obj = Counted::new(|lambda: f64, _| {
        rate_haco(ch, lambda.clamp(0.0, 1.0)).map(|b| b.total.value()).unwrap_or(f64::NEG_INFINITY)
    });
    let grid = linspace(0.0, 1.0, (1.0 / DOUBLE_LAMBDA_STEP).round() as usize + 1);
    let (lambda, _) = grid_then_golden(|l| obj.eval(l, 0.0), &grid, 1e-12);
    let lambda = lambda.clamp(0.0, 1.0);
    let breakdown = rate_haco(ch, lambda).expect("lambda inside bounds");
    let config = match kind {
        SchemeKind::Asco => SchemeConfig::Asco { lambda },
        _ => SchemeConfig::Haco { lambda },
    };
    OptResult { config, rate: breakdown.total, breakdown, evaluations: obj.calls.get() }
}

/// Seed of the random starts used by [`optimize_multi`].
const MULTI_START_SEED: u64 = 0x5eed_0fd3;
const MULTI_RANDOM_STARTS: usize = 6;

/// Maximizes the multi-component rate over allocations on the simplex by
/// projected gradient ascent from several starts: the geometric split, the
/// equal split, all power in layer one, the halving split renormalized, and
/// seeded random points.
pub fn optimize_multi(ch: &ChannelSpec, layers: usize) -> Result<OptResult> {
    optimize_multi_as(ch, layers, SchemeKind::FdmUofdm)
}

fn optimize_multi_as(ch: &ChannelSpec, layers: usize, kind: SchemeKind) -> Result<OptResult> {
    if layers == 0 || layers > MAX_OPT_LAYERS {
        return param(format!("layer count must be in 1..={MAX_OPT_LAYERS}, got {layers}"));
    }
    let calls = Cell::new(0usize);
    let objective = |x: &[f64]| {
        calls.set(calls.get() + 1);
        rate_multi(ch, x).map(|b| b.total.value()).unwrap_or(f64::NEG_INFINITY)
    };

    let mut starts = vec![geometric_allocation(layers), equal_allocation(layers)];
    let mut first = vec![0.0; layers];
    first[0] = 1.0;
    starts.push(first);
    starts.push(project_simplex(&halving_allocation(layers)));
    let mut rng = ChaCha8Rng::seed_from_u64(MULTI_START_SEED ^ layers as u64);
    for _ in 0..MULTI_RANDOM_STARTS {
        // uniform on the simplex via normalized exponentials
        let raw: Vec<f64> = (0..layers).map(|_| Exp1.sample(&mut rng)).collect::<Vec<f64>>();
        let total: f64 = raw.iter().sum();
        starts.push(raw.iter().map(|v| v / total).collect());
    }

    let mut best: Option<(Vec<f64>, f64)> = None;
    for start in starts {
        let (x, v) = projected_ascent(&objective, start);
        if best.as_ref().is_none_or(|b| v > b.1) {
            best = Some((x, v));
        }
    }
    let (lambdas, _) = best.expect("at least one start");
    let breakdown = rate_multi(ch, &lambdas)?;
    let config = match kind {
        SchemeKind::EuOfdm => SchemeConfig::EuOfdm { lambdas },
        _ => SchemeConfig::FdmUofdm { lambdas },
    };
    Ok(OptResult { config, rate: breakdown.total, breakdown, evaluations: calls.get() })
}

/// Projected gradient ascent with central-difference gradients and backtracking.
/// Never returns a point worse than `start`.
fn projected_ascent<F: Fn(&[f64]) -> f64>(f: &F, start: Vec<f64>) -> (Vec<f64>, f64) {
    let mut x = project_simplex(&start);
    let mut fx = f(&x);
    let mut step = 0.05;
    let h = 1e-7;
    for _ in 0..2000 {
        let grad: Vec<f64> = (0..x.len())
            .map(|i| {
                let mut up = x.clone();
                let mut down = x.clone();
                up[i] += h;
                down[i] = (down[i] - h).max(0.0);
                let span = up[i] - down[i];
                // evaluate off the simplex; rate_multi rejects sums > 1, so rescale
                let scale = |v: &mut Vec<f64>| {
                    let s: f64 = v.iter().sum();
                    if s > 1.0 {
                        v.iter_mut().for_each(|e| *e /= s);
                    }
                };
                scale(&mut up);
                scale(&mut down);
                (f(&up) - f(&down)) / span
            })
            .collect();
        let mut improved = false;
        while step > 1e-12 {
            let trial: Vec<f64> = x.iter().zip(&grad).map(|(a, g)| a + step * g).collect();
            let trial = project_simplex(&trial);
            let ft = f(&trial);
            if ft > fx + 1e-15 {
                x = trial;
                fx = ft;
                step *= 1.5;
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    (x, fx)
}

/// Optimizes the free parameters of `kind`; `layers` is required for the
/// multi-component schemes.
pub fn optimize_scheme(ch: &ChannelSpec, kind: SchemeKind, layers: Option<usize>) -> Result<OptResult> {
    match kind {
        SchemeKind::Dco => Ok(optimize_dco(ch)),
        SchemeKind::Ado => Ok(optimize_ado(ch)),
        SchemeKind::Haco | SchemeKind::Asco => Ok(optimize_double_lambda_as(ch, kind)),
        SchemeKind::FdmUofdm | SchemeKind::EuOfdm => {
            let layers = layers.ok_or_else(|| Error::Parameter(format!("{kind} needs a layer count")))?;
            optimize_multi_as(ch, layers, kind)
        }
        SchemeKind::Aco | SchemeKind::PamDmt | SchemeKind::Flip | SchemeKind::Pm => {
            param(format!("{kind} has no free parameters"))
        }
    }
}

/// Double-component scheme whose power-split discontinuity is located.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum JumpScheme {
    Ado,
    /// HACO-OFDM, which shares its rate and optimum with ASCO-OFDM.
    Haco,
}

/// SNR range scanned for the `lambda*` discontinuity.
pub const JUMP_SEARCH_RANGE_DB: (f64, f64) = (-10.0, 30.0);

fn optimal_lambda(scheme: JumpScheme, snr_db: f64) -> f64 {
    let ch = ChannelSpec::from_snr_db(snr_db);
    let res = match scheme {
        JumpScheme::Ado => optimize_ado(&ch),
        JumpScheme::Haco => optimize_double_lambda(&ch),
    };
    res.lambda().expect("double-component result carries lambda")
}

/// Bracket `(lo, hi)` in dB, at most `tol_db` wide, around the SNR where
/// `lambda*` first exceeds `threshold`.
pub fn find_lambda_jump_bracket(scheme: JumpScheme, tol_db: f64, threshold: f64) -> Result<(f64, f64)> {
    if !(tol_db > 0.0) {
        return param(format!("tolerance must be positive, got {tol_db}"));
    }
    let (mut lo, mut hi) = JUMP_SEARCH_RANGE_DB;
    let on = |db: f64| optimal_lambda(scheme, db) > threshold;
    if on(lo) || !on(hi) {
        return Err(Error::NotFound(format!(
            "no lambda* jump across {threshold} within [{lo}, {hi}] dB"
        )));
    }
    while hi - lo > tol_db {
        let mid = 0.5 * (lo + hi);
        if on(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok((lo, hi))
}

/// SNR in dB at which the optimal power split jumps away from zero, located by
/// bisection to within `tol_db` using the default threshold of 0.05.
pub fn find_lambda_jump(scheme: JumpScheme, tol_db: f64) -> Result<f64> {
    let (lo, hi) = find_lambda_jump_bracket(scheme, tol_db, DEFAULT_JUMP_THRESHOLD)?;
    Ok(0.5 * (lo + hi))
}

/// Resolution of [`find_crossover`] in dB.
pub const CROSSOVER_TOL_DB: f64 = 0.01;

/// SNR in `[lo, hi]` where `rate_a - rate_b` changes sign, located by bisection
/// to 0.01 dB.
pub fn find_crossover<A, B>(rate_a: A, rate_b: B, lo: f64, hi: f64) -> Result<f64>
where
    A: Fn(f64) -> f64,
    B: Fn(f64) -> f64,
{
    if !(lo < hi) {
        return param(format!("empty search interval [{lo}, {hi}]"));
    }
    let diff = |db: f64| rate_a(db) - rate_b(db);
    let (mut a, mut b) = (lo, hi);
    let (fa, fb) = (diff(a), diff(b));
    if !(fa * fb < 0.0) {
        return Err(Error::NotFound(format!("rate difference does not change sign on [{lo}, {hi}] dB")));
    }
    let lower_positive = fa > 0.0;
    while b - a > CROSSOVER_TOL_DB {
        let mid = 0.5 * (a + b);
        if (diff(mid) > 0.0) == lower_positive {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rates::{haco_asymptote, rate_ado};

    fn ch(db: f64) -> ChannelSpec {
        ChannelSpec::from_snr_db(db)
    }

    #[test]
    fn dco_optimum_is_self_consistent() {
        for db in [0.0, 10.0, 30.0] {
            let c = ch(db);
            let r = optimize_dco(&c);
            let nu = r.nu().unwrap();
            assert!(nu > 0.0);
            // 10x finer local grid around the optimum
            let w0 = (nu * c.eps()).log10();
            let cell = 2.0 * NU_DECADES / (NU_POINTS - 1) as f64;
            let finer = linspace(w0 - cell, w0 + cell, 21);
            let (best_w, best) = finer
                .iter()
                .map(|&w| (w, rate_dco(&c, 10f64.powf(w) / c.eps()).unwrap().value()))
                .fold((0.0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
            assert!(r.rate.value() >= best - 1e-6, "{db} dB");
            let _ = best_w;
        }
    }

    #[test]
    fn dco_optimum_stable_under_refinement() {
        let c = ch(30.0);
        let coarse = optimize_dco(&c).nu().unwrap();
        let w0 = (coarse * c.eps()).log10();
        let (w, _) = golden_section_max(|w| rate_dco(&c, 10f64.powf(w) / c.eps()).unwrap().value(), w0 - 0.1, w0 + 0.1, 1e-13);
        let fine = 10f64.powf(w) / c.eps();
        assert!((fine - coarse).abs() / coarse < 1e-3);
    }

    #[test]
    fn dco_rate_decreases_to_zero_with_snr() {
        let mut prev = f64::INFINITY;
        for db in (0..=8).map(|i| -5.0 * i as f64) {
            let r = optimize_dco(&ch(db)).rate.value();
            assert!(r <= prev);
            prev = r;
        }
        assert!(prev < 0.02);
    }

    #[test]
    fn ado_low_and_high_snr() {
        let low = optimize_ado(&ch(0.0));
        assert_eq!(low.lambda(), Some(0.0));
        let c = ch(40.0);
        let high = optimize_ado(&c);
        assert!(high.rate > rate_aco_family(&c));
        assert!(high.rate > optimize_dco(&c).rate);
        // dominates the lambda = 1 specialization for any nu on the grid
        for w in nu_exponent_grid() {
            let v = rate_ado(&c, 1.0, nu_from_exponent(&c, w)).unwrap().total;
            assert!(high.rate >= v);
        }
    }

    #[test]
    fn double_lambda_limits() {
        assert_eq!(optimize_double_lambda(&ch(0.0)).lambda(), Some(0.0));
        let c = ch(50.0);
        let r = optimize_double_lambda(&c);
        assert!((r.lambda().unwrap() - 1.0 / 3.0).abs() < 0.01);
        assert!((r.rate.value() - haco_asymptote(&c)).abs() < 0.02);
        let far = optimize_double_lambda(&ch(70.0)).lambda().unwrap();
        assert!((far - 1.0 / 3.0).abs() < 0.005);
    }

    #[test]
    fn multi_single_layer_and_dominance() {
        let c = ch(50.0);
        let one = optimize_multi(&c, 1).unwrap();
        assert_eq!(one.lambdas(), Some(&[1.0][..]));
        assert!((one.rate.value() - rate_aco_family(&c).value()).abs() < 1e-12);
        let four = optimize_multi(&c, 4).unwrap();
        for alloc in [halving_allocation(4), geometric_allocation(4), equal_allocation(4)] {
            assert!(four.rate >= rate_multi(&c, &alloc).unwrap().total);
        }
        let s: f64 = four.lambdas().unwrap().iter().sum();
        assert!(s <= 1.0 + 1e-12);
        assert!(optimize_multi(&c, 0).is_err());
        assert!(optimize_multi(&c, 13).is_err());
    }

    #[test]
    fn no_free_parameters() {
        assert!(optimize_scheme(&ch(3.0), SchemeKind::Aco, None).is_err());
        assert!(optimize_scheme(&ch(3.0), SchemeKind::EuOfdm, None).is_err());
        let asco = optimize_scheme(&ch(20.0), SchemeKind::Asco, None).unwrap();
        assert!(matches!(asco.config, SchemeConfig::Asco { .. }));
    }

    #[test]
    fn crossover_edge_cases() {
        let f = |db: f64| db;
        assert!(matches!(find_crossover(f, f, 0.0, 10.0), Err(Error::NotFound(_))));
        let x = find_crossover(|db| db - 3.3, |_| 0.0, 0.0, 10.0).unwrap();
        assert!((x - 3.3).abs() <= CROSSOVER_TOL_DB);
        let y = find_crossover(|_| 0.0, |db| db - 3.3, 0.0, 10.0).unwrap();
        assert!((y - 3.3).abs() <= CROSSOVER_TOL_DB);
    }

    #[test]
    fn jump_bracket_width() {
        let (lo, hi) = find_lambda_jump_bracket(JumpScheme::Haco, 0.01, DEFAULT_JUMP_THRESHOLD).unwrap();
        assert!(hi - lo <= 0.01);
        assert!(find_lambda_jump(JumpScheme::Haco, 0.0).is_err());
    }
}
