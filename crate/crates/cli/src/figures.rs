//! Plot-ready curve data, one CSV per curve plus a JSON manifest per figure.

use std::f64::consts::SQRT_2;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::Serialize;
use uofdm::optim::search::{grid_then_golden, linspace};
use uofdm::optim::{
    find_lambda_jump, optimize_ado, optimize_dco, optimize_double_lambda, optimize_multi, JumpScheme,
};
use uofdm::rates::{
    capacity_bounds, rate_aco_family, rate_aco_finite_n, rate_ado, rate_dco, rate_haco, rate_multi,
};
use uofdm::scheme::{equal_allocation, geometric_allocation, halving_allocation};
use uofdm::ChannelSpec;

use crate::output::{num, write_csv_file, Provenance};
use crate::sweep::snr_grid;

pub const FIGURE_IDS: std::ops::RangeInclusive<u8> = 1..=9;

/// Layers of the optimized multi-component curve in the overview.
const OVERVIEW_LAYERS: usize = 8;
const JUMP_TOL_DB: f64 = 0.01;

#[derive(Debug, Clone, Serialize)]
pub struct Curve {
    pub file: String,
    pub curve: String,
    pub columns: Vec<String>,
    #[serde(skip)]
    pub rows: Vec<Vec<f64>>,
    pub claim: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<serde_json::Value>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Figure {
    pub figure: u8,
    pub title: String,
    pub x_axis: String,
    pub y_axis: String,
    pub files: Vec<Curve>,
}

fn cols(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

/// `0.5 -> "0p5"`, for file names.
fn tag(x: f64) -> String {
    num(x).replace('.', "p").replace('-', "m")
}

/// Evaluates `f` at every SNR point in parallel; each row starts with the SNR.
fn tabulate<F>(grid: &[f64], f: F) -> Result<Vec<Vec<f64>>>
where
    F: Fn(&ChannelSpec) -> Result<Vec<f64>> + Sync,
{
    grid.par_iter()
        .map(|&db| {
            let mut row = vec![db];
            row.extend(f(&ChannelSpec::from_snr_db(db))?);
            Ok(row)
        })
        .collect()
}

fn curve(file: &str, curve: &str, columns: Vec<String>, rows: Vec<Vec<f64>>, claim: &str) -> Curve {
    Curve {
        file: format!("{file}.csv"),
        curve: curve.to_string(),
        columns,
        rows,
        claim: claim.to_string(),
        note: None,
    }
}

fn rate_only(grid: &[f64], file: &str, name: &str, claim: &str, f: impl Fn(&ChannelSpec) -> Result<f64> + Sync) -> Result<Curve> {
    let rows = tabulate(grid, |ch| Ok(vec![f(ch)?]))?;
    Ok(curve(file, name, cols(&["snr_db", "rate_bits"]), rows, claim))
}

fn bounds(grid: &[f64]) -> Result<Vec<Curve>> {
    Ok(vec![
        rate_only(grid, "cap_lb", "capacity lower bound", "exponential-input lower bound on capacity", |ch| {
            Ok(capacity_bounds(ch).0.value())
        })?,
        rate_only(grid, "cap_ub", "capacity upper bound", "sphere-packing upper bound on capacity", |ch| {
            Ok(capacity_bounds(ch).1.value())
        })?,
    ])
}

fn aco_family(grid: &[f64]) -> Result<Curve> {
    rate_only(
        grid,
        "aco_family",
        "ACO / PAM-DMT / Flip / PM",
        "the four single-component schemes share one rate, highest of all schemes at low SNR",
        |ch| Ok(rate_aco_family(ch).value()),
    )
}

fn dco_opt(grid: &[f64]) -> Result<Curve> {
    let rows = tabulate(grid, |ch| {
        let r = optimize_dco(ch);
        Ok(vec![r.nu().unwrap_or(f64::NAN), r.rate.value()])
    })?;
    Ok(curve(
        "dco_opt",
        "DCO, optimized nu",
        cols(&["snr_db", "nu", "rate_bits"]),
        rows,
        "optimized DCO overtakes the ACO family above roughly 9 dB",
    ))
}

fn ado_opt(grid: &[f64], file: &str, claim: &str) -> Result<Curve> {
    let rows = tabulate(grid, |ch| {
        let r = optimize_ado(ch);
        Ok(vec![r.lambda().unwrap_or(f64::NAN), r.nu().unwrap_or(f64::NAN), r.rate.value()])
    })?;
    Ok(curve(file, "ADO, optimized (lambda, nu)", cols(&["snr_db", "lambda", "nu", "rate_bits"]), rows, claim))
}

fn haco_opt(grid: &[f64], file: &str, claim: &str) -> Result<Curve> {
    let rows = tabulate(grid, |ch| {
        let r = optimize_double_lambda(ch);
        Ok(vec![r.lambda().unwrap_or(f64::NAN), r.rate.value()])
    })?;
    Ok(curve(file, "HACO / ASCO, optimized lambda", cols(&["snr_db", "lambda", "rate_bits"]), rows, claim))
}

fn multi_opt(grid: &[f64], layers: usize, file: &str, claim: &str) -> Result<Curve> {
    let rows = tabulate(grid, |ch| {
        let r = optimize_multi(ch, layers)?;
        let mut row = vec![r.rate.value()];
        row.extend_from_slice(r.lambdas().unwrap_or(&[]));
        Ok(row)
    })?;
    let mut columns = cols(&["snr_db", "rate_bits"]);
    columns.extend((1..=layers).map(|l| format!("lambda_{l}")));
    Ok(curve(file, &format!("FDM-UOFDM / eU-OFDM, L = {layers}, optimized allocation"), columns, rows, claim))
}

fn multi_fixed(grid: &[f64], lambdas: Vec<f64>, file: &str, name: &str, claim: &str) -> Result<Curve> {
    rate_only(grid, file, name, claim, move |ch| Ok(rate_multi(ch, &lambdas)?.total.value()))
}

/// Best `nu` for ADO at a pinned `lambda`, searched over `nu eps` in `[1e-3, 1e3]`.
fn ado_best_nu(ch: &ChannelSpec, lambda: f64) -> (f64, f64) {
    let grid = linspace(-3.0, 3.0, 200);
    let f = |w: f64| {
        rate_ado(ch, lambda, 10f64.powf(w) / ch.eps()).map(|b| b.total.value()).unwrap_or(f64::NEG_INFINITY)
    };
    let (w, v) = grid_then_golden(f, &grid, 1e-9);
    (10f64.powf(w) / ch.eps(), v)
}

/// Best `lambda` for ADO at a pinned `nu`.
fn ado_best_lambda(ch: &ChannelSpec, nu: f64) -> (f64, f64) {
    let grid = linspace(0.0, 1.0, 201);
    let f = |l: f64| rate_ado(ch, l, nu).map(|b| b.total.value()).unwrap_or(f64::NEG_INFINITY);
    grid_then_golden(f, &grid, 1e-9)
}

pub fn build_figure(id: u8) -> Result<Figure> {
    let wide = snr_grid(-10.0, 60.0, 0.5)?;
    let fig = match id {
        1 => {
            let mut files = vec![
                aco_family(&wide)?,
                dco_opt(&wide)?,
                ado_opt(&wide, "ado_opt", "double-component schemes beat single-component ones at high SNR")?,
                haco_opt(&wide, "haco_asco_opt", "HACO and ASCO share one rate; ahead of single-component schemes at high SNR")?,
                multi_opt(
                    &wide,
                    OVERVIEW_LAYERS,
                    &format!("multi_opt_l{OVERVIEW_LAYERS}"),
                    "multi-component schemes approach capacity at high SNR",
                )?,
            ];
            files.extend(bounds(&wide)?);
            Figure {
                figure: id,
                title: "Information rates of unipolar OFDM schemes".into(),
                x_axis: "optical SNR eps/sigma_z [dB]".into(),
                y_axis: "rate [bits/channel use]".into(),
                files,
            }
        }
        2 => {
            let grid = snr_grid(-10.0, 40.0, 0.5)?;
            let mut files = Vec::new();
            for n in [16usize, 64, 256] {
                files.push(rate_only(
                    &grid,
                    &format!("aco_n{n}"),
                    &format!("ACO, N = {n}"),
                    "finite-N rate stays close to the large-N rate for N >= 64",
                    move |ch| Ok(rate_aco_finite_n(ch, n)?.value()),
                )?);
            }
            files.push(rate_only(&grid, "aco_asymptote", "ACO, N -> infinity", "large-N rate", |ch| {
                Ok(rate_aco_family(ch).value())
            })?);
            Figure {
                figure: id,
                title: "ACO-OFDM rate versus the number of subcarriers".into(),
                x_axis: "optical SNR [dB]".into(),
                y_axis: "rate [bits/channel use]".into(),
                files,
            }
        }
        3 => {
            let rows = tabulate(&wide, |ch| {
                let r = optimize_dco(ch);
                let nu = r.nu().unwrap_or(f64::NAN);
                let sigma = 1.0 / (SQRT_2 * nu);
                Ok(vec![nu, sigma / ch.sigma_z(), sigma / ch.eps(), r.rate.value()])
            })?;
            Figure {
                figure: id,
                title: "Optimal signal deviation of DCO-OFDM".into(),
                x_axis: "optical SNR [dB]".into(),
                y_axis: "sigma_X* (relative to sigma_z and to eps)".into(),
                files: vec![curve(
                    "dco_sigma_opt",
                    "DCO, optimal sigma_X",
                    cols(&["snr_db", "nu", "sigma_x_over_sigma_z", "sigma_x_over_eps", "rate_bits"]),
                    rows,
                    "the optimal sigma_X grows more slowly than eps, so clipping becomes rarer as SNR grows",
                )],
            }
        }
        4 => {
            let grid = snr_grid(-10.0, 30.0, 0.1)?;
            let mut ado = ado_opt(&grid, "ado_lambda_opt", "lambda* jumps from 0 near 5.71 dB")?;
            ado.note = Some(serde_json::json!({ "jump_db": find_lambda_jump(JumpScheme::Ado, JUMP_TOL_DB)? }));
            let mut haco = haco_opt(&grid, "haco_asco_lambda_opt", "lambda* jumps from 0 near 3.36 dB and tends to 1/3")?;
            haco.note = Some(serde_json::json!({ "jump_db": find_lambda_jump(JumpScheme::Haco, JUMP_TOL_DB)? }));
            Figure {
                figure: id,
                title: "Optimal power allocation of double-component schemes".into(),
                x_axis: "optical SNR [dB]".into(),
                y_axis: "lambda*".into(),
                files: vec![ado, haco],
            }
        }
        5 => {
            let mut files = Vec::new();
            for k in [1.0, 10.0, 100.0, 1000.0] {
                let nu = 1.0 / (SQRT_2 * k);
                files.push(rate_only(
                    &wide,
                    &format!("dco_sigma_{}_sz", tag(k)),
                    &format!("DCO, sigma_X = {k} sigma_z"),
                    "a fixed sigma_X only suits a narrow SNR range",
                    move |ch| Ok(rate_dco(ch, nu / ch.sigma_z())?.value()),
                )?);
            }
            files.push(dco_opt(&wide)?);
            Figure {
                figure: id,
                title: "DCO-OFDM with sigma_X proportional to sigma_z".into(),
                x_axis: "optical SNR [dB]".into(),
                y_axis: "rate [bits/channel use]".into(),
                files,
            }
        }
        6 => {
            let grid = snr_grid(-10.0, 80.0, 0.5)?;
            let mut files = Vec::new();
            for r in [0.5, 1.0, 2.0, 5.0, 100.0] {
                files.push(rate_only(
                    &grid,
                    &format!("dco_sigma_{}_eps", tag(r)),
                    &format!("DCO, sigma_X = {r} eps"),
                    "with sigma_X proportional to eps the rate saturates; as sigma_X/eps grows the ceiling tends to 0.73 bits",
                    move |ch| Ok(rate_dco(ch, 1.0 / (SQRT_2 * r * ch.eps()))?.value()),
                )?);
            }
            files.push(dco_opt(&grid)?);
            Figure {
                figure: id,
                title: "DCO-OFDM with sigma_X proportional to eps".into(),
                x_axis: "optical SNR [dB]".into(),
                y_axis: "rate [bits/channel use]".into(),
                files,
            }
        }
        7 => {
            let mut files = vec![ado_opt(&wide, "ado_opt", "reference: both parameters optimized")?];
            let rows = tabulate(&wide, |ch| {
                let (nu, v) = ado_best_nu(ch, 0.5);
                Ok(vec![nu, v])
            })?;
            files.push(curve(
                "ado_lambda_0p5_nu_opt",
                "ADO, lambda = 0.5, optimized nu",
                cols(&["snr_db", "nu", "rate_bits"]),
                rows,
                "power allocation matters most at low SNR",
            ));
            let rows = tabulate(&wide, |ch| {
                let (lambda, v) = ado_best_lambda(ch, 1.0 / ch.eps());
                Ok(vec![lambda, v])
            })?;
            files.push(curve(
                "ado_lambda_opt_nu_eps_1",
                "ADO, optimized lambda, nu eps = 1",
                cols(&["snr_db", "lambda", "rate_bits"]),
                rows,
                "optimizing the DC-biased component matters most at high SNR",
            ));
            files.push(rate_only(&wide, "ado_fixed", "ADO, lambda = 0.5, nu eps = 1", "no parameter optimized", |ch| {
                Ok(rate_ado(ch, 0.5, 1.0 / ch.eps())?.total.value())
            })?);
            files.push(haco_opt(&wide, "haco_asco_opt", "reference: lambda optimized")?);
            for lambda in [1.0 / 3.0, 0.5] {
                let t = if lambda < 0.4 { "1_3".to_string() } else { tag(lambda) };
                files.push(rate_only(
                    &wide,
                    &format!("haco_asco_lambda_{t}"),
                    &format!("HACO / ASCO, lambda = {lambda:.4}"),
                    "lambda = 1/3 is optimal only asymptotically; a fixed split loses at low SNR",
                    move |ch| Ok(rate_haco(ch, lambda)?.total.value()),
                )?);
            }
            Figure {
                figure: id,
                title: "Double-component schemes with and without optimized parameters".into(),
                x_axis: "optical SNR [dB]".into(),
                y_axis: "rate [bits/channel use]".into(),
                files,
            }
        }
        8 => {
            let mut files = Vec::new();
            for layers in 1..=5 {
                files.push(multi_fixed(
                    &wide,
                    geometric_allocation(layers),
                    &format!("multi_l{layers}"),
                    &format!("FDM-UOFDM / eU-OFDM, L = {layers}, lambda_l = 2^-l, lambda_L = 2^-(L-1)"),
                    "more components close the gap to capacity at high SNR",
                )?);
            }
            files.extend(bounds(&wide)?);
            Figure {
                figure: id,
                title: "Multi-component schemes with L components".into(),
                x_axis: "optical SNR [dB]".into(),
                y_axis: "rate [bits/channel use]".into(),
                files,
            }
        }
        9 => {
            let layers = 4;
            let files = vec![
                multi_fixed(&wide, halving_allocation(layers), "multi_l4_halving", "L = 4, lambda_l = 2^-l", "halving leaves 2^-L of the power unused")?,
                multi_fixed(&wide, geometric_allocation(layers), "multi_l4_geometric", "L = 4, halving with the last layer doubled", "halving allocation")?,
                multi_fixed(&wide, equal_allocation(layers), "multi_l4_equal", "L = 4, lambda_l = 1/4", "equal allocation")?,
                multi_opt(&wide, layers, "multi_l4_opt", "optimized allocation dominates both fixed strategies")?,
            ];
            Figure {
                figure: id,
                title: "Power allocation strategies for multi-component schemes".into(),
                x_axis: "optical SNR [dB]".into(),
                y_axis: "rate [bits/channel use]".into(),
                files,
            }
        }
        _ => bail!("figure id must be in 1..=9, got {id}"),
    };
    Ok(fig)
}

/// Writes every curve of figure `id` into `out_dir`, plus `manifest.json`.
/// Returns the paths written.
pub fn cmd_figure(id: u8, out_dir: &Path, prov: &Provenance) -> Result<Vec<PathBuf>> {
    let fig = build_figure(id)?;
    fs::create_dir_all(out_dir).with_context(|| format!("cannot create {}", out_dir.display()))?;
    let mut written = Vec::new();
    for c in &fig.files {
        let path = out_dir.join(&c.file);
        let header: Vec<&str> = c.columns.iter().map(String::as_str).collect();
        let rows: Vec<Vec<String>> = c.rows.iter().map(|r| r.iter().copied().map(num).collect()).collect();
        write_csv_file(&path, prov, &header, &rows)?;
        written.push(path);
    }
    let manifest = out_dir.join("manifest.json");
    let mut text = serde_json::to_string_pretty(&fig)?;
    text.push('\n');
    fs::write(&manifest, text).with_context(|| format!("cannot write {}", manifest.display()))?;
    written.push(manifest);
    Ok(written)
}
