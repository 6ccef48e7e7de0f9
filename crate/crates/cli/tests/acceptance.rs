//! Acceptance criteria 1-14. Runs without the test harness so every line is
//! printed; exits nonzero when any criterion fails.

#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::f64::consts::SQRT_2;
use std::process::ExitCode;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use uofdm::clipstats::{ado_dco_distortion, symmetric_clip_moments};
use uofdm::optim::search::{grid_then_golden, linspace};
use uofdm::optim::{find_crossover, find_lambda_jump, optimize_dco, optimize_double_lambda, JumpScheme};
use uofdm::rates::{
    ado_distortion_term, capacity_bounds, haco_asymptote, rate_aco_family, rate_aco_finite_n, rate_dco,
    rate_dco_finite_n, rate_multi,
};
use uofdm::scheme::{geometric_allocation, halving_allocation};
use uofdm::sim::{check_autocorrelation, estimate_moments, predicted_snr_e, SimParams};
use uofdm::{ChannelSpec, SchemeConfig};
use uofdm_cli::output::Provenance;
use uofdm_cli::sweep::{cmd_rates, SchemeParams, SchemeSpec, SweepSpec};

use support::{clip_oracle, rel};

const C1_TARGET: f64 = 0.730;
const C1_TOL: f64 = 0.01;
const C2_TARGET_DB: f64 = 9.0;
const C2_TOL_DB: f64 = 0.5;
const C3_ADO_DB: f64 = 5.71;
const C3_HACO_DB: f64 = 3.36;
const C3_TOL_DB: f64 = 0.1;
const C3_BISECT_DB: f64 = 0.01;
const C4_LAMBDA_TOL: f64 = 0.01;
const C4_RATE_TOL: f64 = 0.02;
const C5_BAND: (f64, f64) = (0.064, 0.080);
const C6_MARGIN_DB: f64 = 1.0;
const C7_TOL: f64 = 0.015;
const C8_ORACLE_TOL: f64 = 1e-10;
const C8_MC_ALPHA_TOL: f64 = 0.003;
const C8_MC_D2_TOL: f64 = 0.01;
const C9_TOL: f64 = 0.02;
const C10_TOL: f64 = 1e-10;
const C11_POWER_TOL: f64 = 0.01;
const C11_Z: f64 = 5.0;
const C11_LEAKAGE: f64 = 1e-3;
const C13_TOL: f64 = 0.02;

type Outcome = (bool, String);
type Criterion = (u32, &'static str, fn() -> Outcome);

fn ch(db: f64) -> ChannelSpec {
    ChannelSpec::from_snr_db(db)
}

fn c1() -> Outcome {
    let c = ch(80.0);
    let r = rate_dco(&c, 1e-4 / c.eps()).unwrap().value();
    ((r - C1_TARGET).abs() <= C1_TOL, format!("rate = {r:.5} bits, want {C1_TARGET} +- {C1_TOL}"))
}

fn c2() -> Outcome {
    let x = find_crossover(
        |db| rate_aco_family(&ch(db)).value(),
        |db| optimize_dco(&ch(db)).rate.value(),
        0.0,
        30.0,
    );
    match x {
        Ok(db) => ((db - C2_TARGET_DB).abs() <= C2_TOL_DB, format!("crossover {db:.3} dB, want {C2_TARGET_DB} +- {C2_TOL_DB}")),
        Err(e) => (false, e.to_string()),
    }
}

fn c3() -> Outcome {
    let ado = find_lambda_jump(JumpScheme::Ado, C3_BISECT_DB);
    let haco = find_lambda_jump(JumpScheme::Haco, C3_BISECT_DB);
    match (ado, haco) {
        (Ok(a), Ok(h)) => (
            (a - C3_ADO_DB).abs() <= C3_TOL_DB && (h - C3_HACO_DB).abs() <= C3_TOL_DB,
            format!("ADO jump {a:.3} dB (want {C3_ADO_DB}), HACO jump {h:.3} dB (want {C3_HACO_DB}), tol {C3_TOL_DB}"),
        ),
        (a, h) => (false, format!("{a:?} / {h:?}")),
    }
}

fn c4() -> Outcome {
    let c = ch(50.0);
    let r = optimize_double_lambda(&c);
    let lambda = r.lambda().unwrap();
    let asym = haco_asymptote(&c);
    let gap = (r.rate.value() - asym).abs();
    (
        (lambda - 1.0 / 3.0).abs() <= C4_LAMBDA_TOL && gap <= C4_RATE_TOL,
        format!("lambda* = {lambda:.5}, rate {:.5} vs asymptote {asym:.5} (diff {gap:.5})", r.rate.value()),
    )
}

fn c5() -> Outcome {
    let c = ch(60.0);
    let ub = capacity_bounds(&c).1.value();
    let r = rate_multi(&c, &halving_allocation(20)).unwrap().total.value();
    let gap = ub - r;
    (
        (C5_BAND.0..=C5_BAND.1).contains(&gap),
        format!("upper bound - rate = {gap:.5} bits, want in [{}, {}]", C5_BAND.0, C5_BAND.1),
    )
}

fn c6() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for db in [40.0, 50.0, 60.0] {
        let r = rate_multi(&ch(db), &geometric_allocation(4)).unwrap().total.value();
        let lb = capacity_bounds(&ch(db - C6_MARGIN_DB)).0.value();
        ok &= r >= lb;
        parts.push(format!("{db} dB: {r:.4} vs LB(-1 dB) {lb:.4}"));
    }
    (ok, parts.join("; "))
}

fn c7() -> Outcome {
    let c = ch(10.0);
    let p = SimParams::new(256, 20_000, 7).unwrap();
    let asym = rate_aco_family(&c).value();
    let mut ok = true;
    let mut parts = Vec::new();
    for cfg in [SchemeConfig::Aco, SchemeConfig::PamDmt, SchemeConfig::Flip, SchemeConfig::Pm] {
        let e = estimate_moments(&cfg, &c, &p).unwrap();
        let pred = predicted_snr_e(&cfg, &c, 256).unwrap()[0];
        let s = rel(e.snr_e_hat[0].snr_e_hat, pred);
        let r = rel(e.rate_proxy(), asym);
        ok &= s < C7_TOL && r < C7_TOL;
        parts.push(format!("{}: SNR_e err {:.3}%, rate err {:.3}%", cfg.kind(), 100.0 * s, 100.0 * r));
    }
    (ok, parts.join("; "))
}

fn c8() -> Outcome {
    let mut worst = 0.0f64;
    for i in 0..20 {
        let sigma = 0.1 * 100f64.powf(i as f64 / 19.0);
        for j in 0..20 {
            let a = sigma * (0.05 + 7.95 * j as f64 / 19.0);
            let m = symmetric_clip_moments(sigma, a);
            let (alpha, d2) = clip_oracle(sigma, a);
            worst = worst.max(rel(m.alpha, alpha)).max(rel(m.d2, d2));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (sigma, a) = (1.0, 1.0);
    let normal = Normal::new(0.0, sigma).unwrap();
    let (mut cx, mut xx, mut cc) = (0.0, 0.0, 0.0);
    for _ in 0..1_000_000 {
        let x: f64 = normal.sample(&mut rng);
        let c = x.clamp(-a, a);
        cx += c * x;
        xx += x * x;
        cc += c * c;
    }
    let alpha_mc = cx / xx;
    let d2_mc = (cc - cx * cx / xx) / 1e6;
    let m = symmetric_clip_moments(sigma, a);
    let (ea, ed) = (rel(alpha_mc, m.alpha), rel(d2_mc, m.d2));
    (
        worst < C8_ORACLE_TOL && ea < C8_MC_ALPHA_TOL && ed < C8_MC_D2_TOL,
        format!("worst grid error {worst:.2e}; Monte Carlo alpha {:.3}%, d2 {:.3}%", 100.0 * ea, 100.0 * ed),
    )
}

fn c9() -> Outcome {
    let c = ch(10.0);
    let n = 256;
    let nf = n as f64;
    let mut ok = true;
    let mut parts = Vec::new();
    for (i, nue) in [0.5, 1.0, 2.0].into_iter().enumerate() {
        let nu = nue / c.eps();
        let e = estimate_moments(&SchemeConfig::Dco { nu }, &c, &SimParams::new(n, 20_000, 90 + i as u64).unwrap()).unwrap();
        let sigma_big = 1.0 / (SQRT_2 * nu);
        let m = symmetric_clip_moments(sigma_big * ((nf - 2.0) / nf).sqrt(), c.eps());
        let sndr = m.alpha * m.alpha * sigma_big * sigma_big / (m.d2 + c.sigma_z().powi(2));
        let measured = e.delta_hat / (1.0 - e.delta_hat);
        let err = rel(measured, sndr);
        let rate_err = rel((1.0 + measured).log2(), (1.0 + sndr).log2());
        ok &= err < C9_TOL && rate_err < C9_TOL;
        parts.push(format!("nu eps = {nue}: SNDR err {:.3}%, rate err {:.3}%", 100.0 * err, 100.0 * rate_err));
    }
    (ok, parts.join("; "))
}

fn c10() -> Outcome {
    let mut worst = 0.0f64;
    for db in [-5.0, 0.0, 10.0, 20.0, 40.0] {
        let c = ch(db);
        for lambda in linspace(0.05, 1.0, 20) {
            for w in linspace(-2.0, 2.0, 21) {
                let nu = 10f64.powf(w) / c.eps();
                let lhs = ado_distortion_term(&c, lambda, nu);
                let rhs = 2.0 * nu * nu * ado_dco_distortion(1.0 / (SQRT_2 * nu), lambda * c.eps());
                if rhs > 0.0 {
                    worst = worst.max(rel(lhs, rhs));
                }
            }
        }
    }
    (worst < C10_TOL, format!("worst relative difference {worst:.2e}"))
}

fn c11() -> Outcome {
    let c = ch(10.0);
    let p = SimParams::new(256, 1000, 11).unwrap();
    let schemes = vec![
        SchemeConfig::Dco { nu: 0.8 / c.eps() },
        SchemeConfig::Aco,
        SchemeConfig::PamDmt,
        SchemeConfig::Flip,
        SchemeConfig::Pm,
        SchemeConfig::Ado { lambda: 0.4, nu: 0.5 / c.eps() },
        SchemeConfig::Haco { lambda: 0.3 },
        SchemeConfig::Asco { lambda: 0.3 },
        SchemeConfig::FdmUofdm { lambdas: geometric_allocation(4) },
        SchemeConfig::EuOfdm { lambdas: geometric_allocation(3) },
    ];
    let mut failures = Vec::new();
    let (mut max_power, mut max_z, mut max_leak) = (0.0f64, 0.0f64, 0.0f64);
    for cfg in &schemes {
        let e = estimate_moments(cfg, &c, &p).unwrap();
        if !(e.all_nonneg && e.min_sample >= 0.0) {
            failures.push(format!("{} not unipolar", cfg.kind()));
        }
        let pe = rel(e.mean_power, c.eps());
        max_power = max_power.max(pe);
        if pe >= C11_POWER_TOL {
            failures.push(format!("{} power off by {:.3}%", cfg.kind(), 100.0 * pe));
        }
        for cl in &e.clippers {
            let z = cl.orth_time_z.abs().max(cl.orth_freq_z.abs());
            max_z = max_z.max(z);
            if z >= C11_Z {
                failures.push(format!("{} orthogonality z = {z:.2}", cfg.kind()));
            }
            if let Some(l) = cl.leakage {
                max_leak = max_leak.max(l);
                if l >= C11_LEAKAGE {
                    failures.push(format!("{} leakage {l:.2e}", cfg.kind()));
                }
            }
        }
    }
    let summary = format!("max power error {:.3}%, max |z| {max_z:.2}, max leakage {max_leak:.1e}", 100.0 * max_power);
    if failures.is_empty() {
        (true, summary)
    } else {
        (false, format!("{summary}; {}", failures.join(", ")))
    }
}

fn c12() -> Outcome {
    let r = check_autocorrelation(&SimParams::new(256, 100_000, 12).unwrap(), 1.0).unwrap();
    let worst = r.lags.iter().map(|l| l.z.abs()).fold(0.0, f64::max);
    (r.pass, format!("lags 0..{}: worst |z| = {worst:.2}", r.lags.len() - 1))
}

fn c13() -> Outcome {
    let c = ch(20.0);
    let aco_inf = rate_aco_family(&c).value();
    let aco_64 = rate_aco_finite_n(&c, 64).unwrap().value();
    let aco_err = rel(aco_64, aco_inf);
    let dco_inf = optimize_dco(&c).rate.value();
    let grid = linspace(-3.0, 3.0, 200);
    let (_, dco_64) = grid_then_golden(
        |w| rate_dco_finite_n(&c, 10f64.powf(w) / c.eps(), 64).unwrap().value(),
        &grid,
        1e-10,
    );
    let dco_err = rel(dco_64, dco_inf);
    (
        aco_err < C13_TOL && dco_err < C13_TOL,
        format!("ACO {:.3}%, DCO {:.3}% (N = 64 vs large N, each with its own optimal nu)", 100.0 * aco_err, 100.0 * dco_err),
    )
}

fn c14() -> Outcome {
    let params = SchemeParams { layers: Some(4), ..Default::default() };
    let schemes = ["aco", "dco-opt", "ado-opt", "haco-opt", "multi"]
        .iter()
        .map(|s| SchemeSpec::parse(s, &params, false, false).unwrap())
        .collect();
    let sweep = SweepSpec { snr_db_start: 0.0, snr_db_stop: 30.0, snr_db_step: 0.5, schemes, bounds: true };
    let prov = Provenance::new("uofdm rates --snr-db 0:30:0.5", 42);
    let run = |threads: usize| {
        let mut buf = Vec::new();
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| cmd_rates(&sweep, &prov, &mut buf))
            .unwrap();
        buf
    };
    let (a, b, c) = (run(4), run(4), run(1));
    (a == b && a == c, format!("{} bytes; repeat identical: {}, 1 vs 4 threads identical: {}", a.len(), a == b, a == c))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 14] = [
        (1, "DCO limit as nu eps -> 0 at 80 dB", c1),
        (2, "ACO/DCO crossover", c2),
        (3, "lambda* jumps", c3),
        (4, "HACO optimum at 50 dB", c4),
        (5, "many-layer gap to the upper bound", c5),
        (6, "L = 4 within 1 dB of the lower bound", c6),
        (7, "single-component equivalence (Monte Carlo)", c7),
        (8, "Bussgang moments vs quadrature and Monte Carlo", c8),
        (9, "GMI identity for DCO (Monte Carlo)", c9),
        (10, "ADO distortion term consistency", c10),
        (11, "structural invariants, all schemes", c11),
        (12, "autocorrelation three-case check", c12),
        (13, "finite-N rates at N = 64, 20 dB", c13),
        (14, "byte-identical rate sweeps", c14),
    ];
    let mut failed = 0;
    for (id, name, f) in criteria {
        let (pass, detail) = f();
        if !pass {
            failed += 1;
        }
        println!("criterion {id:>2} [{name}]: {}: {detail}", if pass { "PASS" } else { "FAIL" });
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
