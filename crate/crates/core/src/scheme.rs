//! Scheme identities and their free parameters.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};

/// Largest layer count accepted for the multi-component schemes.
pub const MAX_LAYERS: usize = 64;

/// Largest layer count the allocation optimizer takes on.
pub const MAX_OPT_LAYERS: usize = 12;

/// Slack allowed on `sum(lambda_l) <= 1` before an allocation is rejected.
pub const SIMPLEX_SLACK: f64 = 1e-12;

/// One of the ten unipolar OFDM schemes together with its free parameters.
///
/// `nu` is the inverse clipping scale `1 / (sqrt(2) sigma)` of a DC-biased
/// component and `lambda` the fraction of the optical power budget given to the
/// non-ACO component of a double-component scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "snake_case")]
pub enum SchemeConfig {
    Dco { nu: f64 },
    Aco,
    PamDmt,
    Flip,
    Pm,
    Ado { lambda: f64, nu: f64 },
    Haco { lambda: f64 },
    Asco { lambda: f64 },
    FdmUofdm { lambdas: Vec<f64> },
    EuOfdm { lambdas: Vec<f64> },
}

/// Parameter-free identity of a scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeKind {
    Dco,
    Aco,
    PamDmt,
    Flip,
    Pm,
    Ado,
    Haco,
    Asco,
    FdmUofdm,
    EuOfdm,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 10] = [
        SchemeKind::Dco,
        SchemeKind::Aco,
        SchemeKind::PamDmt,
        SchemeKind::Flip,
        SchemeKind::Pm,
        SchemeKind::Ado,
        SchemeKind::Haco,
        SchemeKind::Asco,
        SchemeKind::FdmUofdm,
        SchemeKind::EuOfdm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::Dco => "dco",
            SchemeKind::Aco => "aco",
            SchemeKind::PamDmt => "pam-dmt",
            SchemeKind::Flip => "flip",
            SchemeKind::Pm => "pm",
            SchemeKind::Ado => "ado",
            SchemeKind::Haco => "haco",
            SchemeKind::Asco => "asco",
            SchemeKind::FdmUofdm => "fdm-uofdm",
            SchemeKind::EuOfdm => "eu-ofdm",
        }
    }

    pub fn is_multiplexed(self) -> bool {
        matches!(
            self,
            SchemeKind::Ado
                | SchemeKind::Haco
                | SchemeKind::Asco
                | SchemeKind::FdmUofdm
                | SchemeKind::EuOfdm
        )
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        let kind = match key.as_str() {
            "dco" | "dco-ofdm" => SchemeKind::Dco,
            "aco" | "aco-ofdm" => SchemeKind::Aco,
            "pam-dmt" | "pam" | "pamdmt" => SchemeKind::PamDmt,
            "flip" | "flip-ofdm" => SchemeKind::Flip,
            "pm" | "pm-ofdm" => SchemeKind::Pm,
            "ado" | "ado-ofdm" => SchemeKind::Ado,
            "haco" | "haco-ofdm" => SchemeKind::Haco,
            "asco" | "asco-ofdm" => SchemeKind::Asco,
            "fdm" | "fdm-uofdm" | "multi" | "laco" => SchemeKind::FdmUofdm,
            "eu" | "eu-ofdm" => SchemeKind::EuOfdm,
            _ => return Err(Error::Parameter(format!("unknown scheme '{s}'"))),
        };
        Ok(kind)
    }
}

impl SchemeConfig {
    pub fn kind(&self) -> SchemeKind {
        match self {
            SchemeConfig::Dco { .. } => SchemeKind::Dco,
            SchemeConfig::Aco => SchemeKind::Aco,
            SchemeConfig::PamDmt => SchemeKind::PamDmt,
            SchemeConfig::Flip => SchemeKind::Flip,
            SchemeConfig::Pm => SchemeKind::Pm,
            SchemeConfig::Ado { .. } => SchemeKind::Ado,
            SchemeConfig::Haco { .. } => SchemeKind::Haco,
            SchemeConfig::Asco { .. } => SchemeKind::Asco,
            SchemeConfig::FdmUofdm { .. } => SchemeKind::FdmUofdm,
            SchemeConfig::EuOfdm { .. } => SchemeKind::EuOfdm,
        }
    }

    /// Number of separately decoded components.
    pub fn components(&self) -> usize {
        match self {
            SchemeConfig::Ado { .. } | SchemeConfig::Haco { .. } | SchemeConfig::Asco { .. } => 2,
            SchemeConfig::FdmUofdm { lambdas } | SchemeConfig::EuOfdm { lambdas } => lambdas.len(),
            _ => 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SchemeConfig::Dco { nu } => check_nu(*nu),
            SchemeConfig::Ado { lambda, nu } => {
                check_lambda(*lambda)?;
                check_nu(*nu)
            }
            SchemeConfig::Haco { lambda } | SchemeConfig::Asco { lambda } => check_lambda(*lambda),
            SchemeConfig::FdmUofdm { lambdas } | SchemeConfig::EuOfdm { lambdas } => {
                check_allocation(lambdas)
            }
            SchemeConfig::Aco | SchemeConfig::PamDmt | SchemeConfig::Flip | SchemeConfig::Pm => {
                Ok(())
            }
        }
    }

    /// Checks the subcarrier-count constraints of a simulation of size `n`.
    pub fn check_size(&self, n: usize) -> Result<()> {
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::Divisibility(format!(
                "subcarrier count must be a power of two >= 8, got {n}"
            )));
        }
        match self {
            SchemeConfig::FdmUofdm { lambdas } => {
                let layers = lambdas.len() as u32;
                // layer L occupies odd multiples of 2^(L-1) below N/2
                let need = 1usize.checked_shl(layers + 1).unwrap_or(usize::MAX);
                if need > n || n % need != 0 {
                    return Err(Error::Divisibility(format!(
                        "{layers} layers need 2^{} | N, but N = {n}",
                        layers + 1
                    )));
                }
            }
            SchemeConfig::Ado { .. } | SchemeConfig::Haco { .. } | SchemeConfig::Asco { .. } => {
                if n % 4 != 0 {
                    return Err(Error::Divisibility(format!("4 must divide N = {n}")));
                }
            }
            _ => {}
        }
        Ok(())
    }
}

fn check_nu(nu: f64) -> Result<()> {
    if nu > 0.0 && nu.is_finite() {
        Ok(())
    } else {
        param(format!("nu must be positive and finite, got {nu}"))
    }
}

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    if (0.0..=1.0).contains(&lambda) {
        Ok(())
    } else {
        param(format!("lambda must lie in [0, 1], got {lambda}"))
    }
}

pub(crate) fn check_allocation(lambdas: &[f64]) -> Result<()> {
    if lambdas.is_empty() || lambdas.len() > MAX_LAYERS {
        return param(format!(
            "layer count must be in 1..={MAX_LAYERS}, got {}",
            lambdas.len()
        ));
    }
    if let Some(bad) = lambdas.iter().find(|l| !(**l >= 0.0 && l.is_finite())) {
        return param(format!("power fractions must be non-negative, got {bad}"));
    }
    let total: f64 = lambdas.iter().sum();
    if total > 1.0 + SIMPLEX_SLACK {
        return param(format!("power fractions sum to {total} > 1"));
    }
    Ok(())
}

/// `lambda_l = 2^-l` for `l = 1..=L`; leaves `2^-L` of the budget unused.
pub fn halving_allocation(layers: usize) -> Vec<f64> {
    (1..=layers).map(|l| 0.5f64.powi(l as i32)).collect()
}

/// `lambda_l = 2^-l` for `l < L` and `lambda_L = 2^-(L-1)`, which sums to one.
pub fn geometric_allocation(layers: usize) -> Vec<f64> {
    let mut lambdas = halving_allocation(layers);
    if let Some(last) = lambdas.last_mut() {
        *last *= 2.0;
    }
    lambdas
}

pub fn equal_allocation(layers: usize) -> Vec<f64> {
    vec![1.0 / layers as f64; layers]
}
