//! Monte Carlo validation of one scheme against its analytic predictions.

use anyhow::Result;
use serde::Serialize;
use uofdm::rates::scheme_rate;
use uofdm::sim::{estimate_moments, predicted_snr_e, SimParams};
use uofdm::{ChannelSpec, SchemeConfig};

use crate::sweep::SchemeSpec;

pub const POWER_TOL: f64 = 0.01;
pub const ORTH_Z: f64 = 5.0;
pub const LEAKAGE_MAX: f64 = 1e-3;
pub const SNR_TOL: f64 = 0.02;
pub const RATE_TOL: f64 = 0.02;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub predicted: f64,
    pub estimated: f64,
    pub se: Option<f64>,
    pub criterion: String,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub scheme: String,
    pub snr_db: f64,
    pub config: SchemeConfig,
    pub n: usize,
    pub frames: usize,
    pub seed: u64,
    /// Large-N rate of the configuration.
    pub rate_bits: f64,
    /// Rate implied by the measured per-class SNRs at this `n`.
    pub measured_rate_bits: f64,
    pub checks: Vec<Check>,
    pub pass: bool,
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn relative(name: String, predicted: f64, estimated: f64, se: Option<f64>, tol: f64) -> Check {
    Check {
        name,
        predicted,
        estimated,
        se,
        criterion: format!("within {}% of predicted", tol * 100.0),
        pass: rel(estimated, predicted) < tol,
    }
}

/// Simulates `spec` (optimizing any free parameters first) and checks the
/// structural invariants, per-class SNRs and the implied rate.
pub fn cmd_validate(spec: &SchemeSpec, snr_db: f64, params: &SimParams) -> Result<ValidationReport> {
    let ch = ChannelSpec::from_snr_db(snr_db);
    let cfg = spec.evaluate(&ch)?.config;
    cfg.check_size(params.n)?;
    let est = estimate_moments(&cfg, &ch, params)?;
    let predicted = predicted_snr_e(&cfg, &ch, params.n)?;
    let rate = scheme_rate(&ch, &cfg)?.total.value();

    let mut checks = vec![
        Check {
            name: "unipolarity".into(),
            predicted: 0.0,
            estimated: est.min_sample,
            se: None,
            criterion: "min sample >= 0".into(),
            pass: est.all_nonneg && est.min_sample >= 0.0,
        },
        relative("mean_power".into(), ch.eps(), est.mean_power, Some(est.mean_power_se), POWER_TOL),
    ];
    for c in &est.clippers {
        for (domain, z) in [("time", c.orth_time_z), ("freq", c.orth_freq_z)] {
            checks.push(Check {
                name: format!("orthogonality_{domain}[{}]", c.component),
                predicted: 0.0,
                estimated: z,
                se: Some(1.0),
                criterion: format!("|z| < {ORTH_Z}"),
                pass: z.abs() < ORTH_Z,
            });
        }
        if let Some(leak) = c.leakage {
            checks.push(Check {
                name: format!("leakage[{}]", c.component),
                predicted: 0.0,
                estimated: leak,
                se: None,
                criterion: format!("< {LEAKAGE_MAX}"),
                pass: leak < LEAKAGE_MAX,
            });
        }
    }
    for (i, class) in est.snr_e_hat.iter().enumerate() {
        checks.push(relative(
            format!("snr_e[{i}] component {}", class.component),
            predicted[class.component],
            class.snr_e_hat,
            Some(class.snr_e_se),
            SNR_TOL,
        ));
    }
    let measured = est.rate_proxy();
    checks.push(relative("rate_vs_large_n".into(), rate, measured, None, RATE_TOL));

    let pass = checks.iter().all(|c| c.pass);
    Ok(ValidationReport {
        scheme: spec.label(),
        snr_db,
        config: cfg,
        n: params.n,
        frames: params.frames,
        seed: params.seed,
        rate_bits: rate,
        measured_rate_bits: measured,
        checks,
        pass,
    })
}
