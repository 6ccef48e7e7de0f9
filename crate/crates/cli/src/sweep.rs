//! Scheme templates and the `rates` sweep.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use anyhow::{anyhow, bail, ensure, Result};
use rayon::prelude::*;
use serde::Deserialize;
use uofdm::optim::optimize_scheme;
use uofdm::rates::{capacity_bounds, scheme_rate};
use uofdm::scheme::{equal_allocation, geometric_allocation, halving_allocation};
use uofdm::{ChannelSpec, RateBreakdown, SchemeConfig, SchemeKind};

use crate::output::{num, write_csv, Provenance};

pub const RATES_HEADER: [&str; 5] = ["snr_db", "scheme", "param_json", "rate_bits", "component_rates_json"];

/// Decimal places kept on generated SNR grid points.
const SNR_DECIMALS: i32 = 6;

/// Power split across the layers of a multi-component scheme.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(try_from = "String")]
pub enum Alloc {
    /// `2^-l` for `l < L`, last layer `2^-(L-1)`.
    Geometric,
    /// `2^-l` for every layer, leaving `2^-L` unused.
    Halving,
    Equal,
    Optimize,
    Custom(Vec<f64>),
}

impl Alloc {
    pub fn lambdas(&self, layers: usize) -> Option<Vec<f64>> {
        match self {
            Alloc::Geometric => Some(geometric_allocation(layers)),
            Alloc::Halving => Some(halving_allocation(layers)),
            Alloc::Equal => Some(equal_allocation(layers)),
            Alloc::Custom(v) => Some(v.clone()),
            Alloc::Optimize => None,
        }
    }
}

impl FromStr for Alloc {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(list) = s.strip_prefix("custom=") {
            let v = list
                .split(',')
                .map(|t| t.trim().parse::<f64>().map_err(|e| anyhow!("bad power fraction '{t}': {e}")))
                .collect::<Result<Vec<_>>>()?;
            return Ok(Alloc::Custom(v));
        }
        match s {
            "geometric" => Ok(Alloc::Geometric),
            "halving" => Ok(Alloc::Halving),
            "equal" => Ok(Alloc::Equal),
            "optimize" => Ok(Alloc::Optimize),
            _ => bail!("unknown allocation '{s}' (geometric, halving, equal, optimize, custom=a,b,...)"),
        }
    }
}

impl TryFrom<String> for Alloc {
    type Error = anyhow::Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Parameters shared by every scheme named on one command line.
#[derive(Debug, Clone, Default)]
pub struct SchemeParams {
    pub lambda: Option<f64>,
    pub nu: Option<f64>,
    pub layers: Option<usize>,
    pub alloc: Option<Alloc>,
}

/// A scheme with its parameters either pinned or left to the optimizer.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeSpec {
    pub kind: SchemeKind,
    /// Pinned configuration; `None` means optimize at every SNR.
    pub fixed: Option<SchemeConfig>,
    pub layers: Option<usize>,
}

impl SchemeSpec {
    /// Parses `NAME` or `NAME-opt`. Parameters missing for a pinned scheme are an
    /// error unless `optimize_missing` is set, in which case that scheme is optimized.
    pub fn parse(token: &str, params: &SchemeParams, force_optimize: bool, optimize_missing: bool) -> Result<Self> {
        let token = token.trim();
        let (name, suffix) = match token.strip_suffix("-opt") {
            Some(base) => (base, true),
            None => (token, false),
        };
        let kind: SchemeKind = name.parse()?;
        let want_opt = suffix || force_optimize;
        let layers = match kind {
            SchemeKind::FdmUofdm | SchemeKind::EuOfdm => {
                let custom_len = match &params.alloc {
                    Some(Alloc::Custom(v)) => Some(v.len()),
                    _ => None,
                };
                let layers = params
                    .layers
                    .or(custom_len)
                    .ok_or_else(|| anyhow!("{kind} needs --layers"))?;
                if let Some(len) = custom_len {
                    ensure!(len == layers, "custom allocation has {len} entries for {layers} layers");
                }
                Some(layers)
            }
            _ => None,
        };

        let pinned: Option<SchemeConfig> = match kind {
            SchemeKind::Aco | SchemeKind::PamDmt | SchemeKind::Flip | SchemeKind::Pm => {
                ensure!(!suffix, "{kind} has no free parameters");
                Some(match kind {
                    SchemeKind::Aco => SchemeConfig::Aco,
                    SchemeKind::PamDmt => SchemeConfig::PamDmt,
                    SchemeKind::Flip => SchemeConfig::Flip,
                    _ => SchemeConfig::Pm,
                })
            }
            _ if want_opt => None,
            SchemeKind::Dco => params.nu.map(|nu| SchemeConfig::Dco { nu }),
            SchemeKind::Ado => match (params.lambda, params.nu) {
                (Some(lambda), Some(nu)) => Some(SchemeConfig::Ado { lambda, nu }),
                _ => None,
            },
            SchemeKind::Haco => params.lambda.map(|lambda| SchemeConfig::Haco { lambda }),
            SchemeKind::Asco => params.lambda.map(|lambda| SchemeConfig::Asco { lambda }),
            SchemeKind::FdmUofdm | SchemeKind::EuOfdm => {
                let alloc = params.alloc.clone().unwrap_or(Alloc::Geometric);
                alloc.lambdas(layers.unwrap_or(0)).map(|lambdas| match kind {
                    SchemeKind::FdmUofdm => SchemeConfig::FdmUofdm { lambdas },
                    _ => SchemeConfig::EuOfdm { lambdas },
                })
            }
        };
        let layered = layers.is_some();
        if pinned.is_none() && !want_opt && !optimize_missing && !layered {
            let need = match kind {
                SchemeKind::Dco => "--nu",
                SchemeKind::Ado => "--lambda and --nu",
                _ => "--lambda",
            };
            bail!("{kind} needs {need} or the -opt suffix");
        }
        if let Some(cfg) = &pinned {
            cfg.validate()?;
        }
        if let Some(l) = layers {
            ensure!(
                (1..=uofdm::scheme::MAX_LAYERS).contains(&l),
                "layer count must be in 1..={}, got {l}",
                uofdm::scheme::MAX_LAYERS
            );
        }
        Ok(Self { kind, fixed: pinned, layers })
    }

    pub fn optimized(&self) -> bool {
        self.fixed.is_none()
    }

    /// Row label: canonical name, `-l<L>` for layered schemes, `-opt` when optimized.
    pub fn label(&self) -> String {
        let mut s = self.kind.name().to_string();
        if let Some(l) = self.layers {
            s.push_str(&format!("-l{l}"));
        }
        if self.optimized() {
            s.push_str("-opt");
        }
        s
    }

    pub fn evaluate(&self, ch: &ChannelSpec) -> Result<Evaluated> {
        match &self.fixed {
            Some(cfg) => Ok(Evaluated { breakdown: scheme_rate(ch, cfg)?, config: cfg.clone(), evaluations: 1 }),
            None => {
                let r = optimize_scheme(ch, self.kind, self.layers)?;
                Ok(Evaluated { config: r.config, breakdown: r.breakdown, evaluations: r.evaluations })
            }
        }
    }
}

impl fmt::Display for SchemeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

#[derive(Debug, Clone)]
pub struct Evaluated {
    pub config: SchemeConfig,
    pub breakdown: RateBreakdown,
    pub evaluations: usize,
}

/// Parses `A:B:S` (or a single value `A`) into `(start, stop, step)`.
pub fn parse_snr_range(s: &str) -> Result<(f64, f64, f64)> {
    let parts = s
        .split(':')
        .map(|t| t.trim().parse::<f64>().map_err(|e| anyhow!("bad SNR value '{t}': {e}")))
        .collect::<Result<Vec<_>>>()?;
    match parts.as_slice() {
        [a] => Ok((*a, *a, 1.0)),
        [a, b, s] => Ok((*a, *b, *s)),
        _ => bail!("SNR range must be A:B:S or a single value, got '{s}'"),
    }
}

/// Evenly spaced points from `start` to `stop` inclusive, rounded so that
/// accumulated float error never shows up in the output.
pub fn snr_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    ensure!(start.is_finite() && stop.is_finite(), "SNR bounds must be finite");
    ensure!(step > 0.0 && step.is_finite(), "SNR step must be positive, got {step}");
    ensure!(start <= stop, "SNR start {start} exceeds stop {stop}");
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    let scale = 10f64.powi(SNR_DECIMALS);
    Ok((0..count)
        .map(|i| {
            let v = ((start + i as f64 * step) * scale).round() / scale;
            if v == 0.0 { 0.0 } else { v }
        })
        .collect())
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub snr_db_start: f64,
    pub snr_db_stop: f64,
    pub snr_db_step: f64,
    pub schemes: Vec<SchemeSpec>,
    /// Adds the `cap_lb` / `cap_ub` pseudo-schemes.
    pub bounds: bool,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        ensure!(!self.schemes.is_empty(), "at least one scheme is required");
        let mut labels: Vec<String> = self.schemes.iter().map(SchemeSpec::label).collect();
        labels.sort();
        if let Some(w) = labels.windows(2).find(|w| w[0] == w[1]) {
            bail!("scheme '{}' listed twice", w[0]);
        }
        snr_grid(self.snr_db_start, self.snr_db_stop, self.snr_db_step).map(|_| ())
    }

    pub fn points(&self) -> Result<Vec<f64>> {
        snr_grid(self.snr_db_start, self.snr_db_stop, self.snr_db_step)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateRow {
    pub snr_db: f64,
    pub scheme: String,
    pub param_json: String,
    pub rate_bits: f64,
    pub component_rates_json: String,
}

impl RateRow {
    fn record(&self) -> Vec<String> {
        vec![
            num(self.snr_db),
            self.scheme.clone(),
            self.param_json.clone(),
            num(self.rate_bits),
            self.component_rates_json.clone(),
        ]
    }
}

/// Evaluates the sweep in parallel; rows come back sorted by `(snr_db, scheme)`.
pub fn sweep_rows(sweep: &SweepSpec) -> Result<Vec<RateRow>> {
    sweep.validate()?;
    let points = sweep.points()?;
    let mut jobs: Vec<(f64, Option<&SchemeSpec>)> = Vec::new();
    for &snr in &points {
        jobs.extend(sweep.schemes.iter().map(|s| (snr, Some(s))));
        if sweep.bounds {
            jobs.push((snr, None));
        }
    }
    let nested = jobs
        .par_iter()
        .map(|&(snr, spec)| -> Result<Vec<RateRow>> {
            let ch = ChannelSpec::from_snr_db(snr);
            match spec {
                Some(spec) => {
                    let e = spec.evaluate(&ch)?;
                    Ok(vec![RateRow {
                        snr_db: snr,
                        scheme: spec.label(),
                        param_json: serde_json::to_string(&e.config)?,
                        rate_bits: e.breakdown.total.value(),
                        component_rates_json: serde_json::to_string(&e.breakdown.per_component)?,
                    }])
                }
                None => {
                    let (lb, ub) = capacity_bounds(&ch);
                    Ok([("cap_lb", lb), ("cap_ub", ub)]
                        .into_iter()
                        .map(|(name, r)| RateRow {
                            snr_db: snr,
                            scheme: name.to_string(),
                            param_json: "{}".to_string(),
                            rate_bits: r.value(),
                            component_rates_json: "[]".to_string(),
                        })
                        .collect())
                }
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rows: Vec<RateRow> = nested.into_iter().flatten().collect();
    rows.sort_by(|a, b| a.snr_db.total_cmp(&b.snr_db).then_with(|| a.scheme.cmp(&b.scheme)));
    Ok(rows)
}

/// Writes the sweep as CSV: comment line, header, sorted rows.
pub fn cmd_rates<W: Write>(sweep: &SweepSpec, prov: &Provenance, out: W) -> Result<usize> {
    let rows = sweep_rows(sweep)?;
    let records: Vec<Vec<String>> = rows.iter().map(RateRow::record).collect();
    write_csv(out, prov, &RATES_HEADER, &records)?;
    Ok(rows.len())
}
