//! Command-line front end for the `uofdm` rate library: SNR sweeps, parameter
//! optimization, Monte Carlo validation and figure data.
//!
//! SNR values on the command line are optical SNRs in dB, `10 log10(eps / sigma_z)`,
//! with `sigma_z = 1`; `--nu` is therefore in units of `1 / sigma_z`.

pub mod figures;
pub mod output;
pub mod sweep;
pub mod validate;

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use uofdm::optim::optimize_scheme;
use uofdm::rates::asymptotic_constants;
use uofdm::sim::SimParams;
use uofdm::ChannelSpec;

use output::Provenance;
use sweep::{parse_snr_range, Alloc, SchemeParams, SchemeSpec, SweepSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_PARAM: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;

/// Environment variable capping the worker pool.
pub const THREADS_ENV: &str = "UOFDM_THREADS";

const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Parser)]
#[command(
    name = "uofdm",
    version,
    about = "Information rates of unipolar OFDM over the Gaussian optical intensity channel",
    after_help = "SNR is the optical SNR in dB, 10*log10(eps/sigma_z), with sigma_z = 1.\n\
                  Set UOFDM_THREADS to cap the number of worker threads.\n\
                  Exit codes: 0 ok, 1 I/O error, 2 parameter error, 3 validation failure."
)]
pub struct Cli {
    /// JSON file presetting n, frames, seed, snr_db, schemes, layers, alloc; flags override it.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sweep rates over an SNR grid and write CSV.
    Rates(RatesArgs),
    /// Optimize the free parameters of one scheme at one SNR.
    Optimize(OptimizeArgs),
    /// Monte Carlo validation of one scheme against the analytic predictions.
    Validate(ValidateArgs),
    /// Write the curve data of one figure.
    Figure(FigureArgs),
    /// Print the asymptotic constants.
    Constants,
}

#[derive(Debug, Clone, Args, Default)]
pub struct ParamArgs {
    /// Power fraction of the second component (ADO, HACO, ASCO).
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Inverse clipping scale 1/(sqrt(2) sigma) of the DC-biased component (DCO, ADO).
    #[arg(long)]
    pub nu: Option<f64>,
    /// Layer count of FDM-UOFDM / eU-OFDM.
    #[arg(long)]
    pub layers: Option<usize>,
    /// Layer power allocation: geometric, halving, equal, optimize, custom=a,b,...
    #[arg(long)]
    pub alloc: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct RatesArgs {
    /// SNR grid A:B:S in dB.
    #[arg(long, allow_hyphen_values = true)]
    pub snr_db: Option<String>,
    /// Comma-separated schemes; append -opt to optimize a scheme at every point.
    #[arg(long, value_delimiter = ',')]
    pub scheme: Vec<String>,
    #[command(flatten)]
    pub params: ParamArgs,
    /// Re-optimize every scheme that has free parameters.
    #[arg(long)]
    pub optimize: bool,
    /// Add the capacity bounds as pseudo-schemes cap_lb and cap_ub.
    #[arg(long)]
    pub bounds: bool,
    /// Recorded in the CSV comment line.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output CSV; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct OptimizeArgs {
    #[arg(long)]
    pub scheme: String,
    #[arg(long, allow_hyphen_values = true)]
    pub snr_db: f64,
    #[arg(long)]
    pub layers: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub scheme: String,
    #[arg(long, allow_hyphen_values = true)]
    pub snr_db: f64,
    #[command(flatten)]
    pub params: ParamArgs,
    /// Subcarriers per frame (power of two, >= 64).
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub frames: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also write the JSON report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct FigureArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=9))]
    pub id: u8,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Optional JSON presets.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub n: Option<usize>,
    pub frames: Option<usize>,
    pub seed: Option<u64>,
    pub snr_db: Option<String>,
    pub schemes: Option<Vec<String>>,
    pub layers: Option<usize>,
    pub alloc: Option<Alloc>,
}

impl Config {
    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| anyhow::anyhow!("invalid config {}: {e}", path.display()))
    }
}

fn scheme_params(p: &ParamArgs, cfg: &Config) -> Result<SchemeParams> {
    let alloc = match &p.alloc {
        Some(s) => Some(s.parse()?),
        None => cfg.alloc.clone(),
    };
    Ok(SchemeParams { lambda: p.lambda, nu: p.nu, layers: p.layers.or(cfg.layers), alloc })
}

/// Builds the sweep described by `rates` flags layered over the config.
pub fn sweep_from_args(args: &RatesArgs, cfg: &Config) -> Result<SweepSpec> {
    let range = args
        .snr_db
        .as_deref()
        .or(cfg.snr_db.as_deref())
        .context("--snr-db is required")?;
    let (start, stop, step) = parse_snr_range(range)?;
    let names = if args.scheme.is_empty() { cfg.schemes.clone().unwrap_or_default() } else { args.scheme.clone() };
    if names.is_empty() {
        bail!("--scheme is required");
    }
    let params = scheme_params(&args.params, cfg)?;
    let schemes = names
        .iter()
        .map(|s| SchemeSpec::parse(s, &params, args.optimize, false))
        .collect::<Result<Vec<_>>>()?;
    let sweep = SweepSpec { snr_db_start: start, snr_db_stop: stop, snr_db_step: step, schemes, bounds: args.bounds };
    sweep.validate()?;
    Ok(sweep)
}

fn constants_json() -> serde_json::Value {
    let c = asymptotic_constants();
    let sig = |x: f64| -> serde_json::Value {
        let rounded: f64 = format!("{x:.9e}").parse().expect("formatted float parses");
        serde_json::json!(rounded)
    };
    serde_json::json!({
        "dco_nu0_limit_bits": sig(c.dco_nu0_limit_bits),
        "gap_bits": sig(c.gap_bits),
        "gap_db": sig(c.gap_db),
        "haco_asym_coeff": sig(c.haco_asym_coeff),
        "multi_lb_coeff": sig(c.multi_lb_coeff),
    })
}

fn print_json<W: Write>(out: &mut W, value: &impl serde::Serialize) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    out.write_all(b"\n")?;
    Ok(())
}

/// Runs one parsed command, writing results to `stdout`. Returns the exit code
/// for outcomes that are not errors (0, or 3 for a failed validation).
pub fn run<W: Write>(cli: &Cli, command_line: &str, stdout: &mut W) -> Result<i32> {
    let cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    match &cli.command {
        Command::Rates(args) => {
            let sweep = sweep_from_args(args, &cfg)?;
            let prov = Provenance::new(command_line, args.seed.or(cfg.seed).unwrap_or(DEFAULT_SEED));
            match &args.out {
                Some(path) => {
                    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
                    sweep::cmd_rates(&sweep, &prov, BufWriter::new(file))?;
                }
                None => {
                    sweep::cmd_rates(&sweep, &prov, &mut *stdout)?;
                }
            }
            Ok(EXIT_OK)
        }
        Command::Optimize(args) => {
            let kind: uofdm::SchemeKind = args.scheme.trim().trim_end_matches("-opt").parse()?;
            let ch = ChannelSpec::from_snr_db(args.snr_db);
            let r = optimize_scheme(&ch, kind, args.layers.or(cfg.layers))?;
            let mut params = serde_json::to_value(&r.config)?;
            if let Some(obj) = params.as_object_mut() {
                obj.remove("scheme");
            }
            let report = serde_json::json!({
                "scheme": kind.name(),
                "snr_db": args.snr_db,
                "params": params,
                "rate_bits": r.rate.value(),
                "component_rates_bits": r.breakdown.per_component,
                "evaluations": r.evaluations,
            });
            print_json(stdout, &report)?;
            Ok(EXIT_OK)
        }
        Command::Validate(args) => {
            let params = scheme_params(&args.params, &cfg)?;
            let spec = SchemeSpec::parse(&args.scheme, &params, false, true)?;
            let defaults = SimParams::default();
            let sim = SimParams::new(
                args.n.or(cfg.n).unwrap_or(defaults.n),
                args.frames.or(cfg.frames).unwrap_or(defaults.frames),
                args.seed.or(cfg.seed).unwrap_or(defaults.seed),
            )?;
            let report = validate::cmd_validate(&spec, args.snr_db, &sim)?;
            print_json(stdout, &report)?;
            if let Some(path) = &args.out {
                let mut f = BufWriter::new(File::create(path).with_context(|| format!("cannot create {}", path.display()))?);
                print_json(&mut f, &report)?;
                f.flush()?;
            }
            Ok(if report.pass { EXIT_OK } else { EXIT_VALIDATION })
        }
        Command::Figure(args) => {
            let prov = Provenance::new(command_line, args.seed.or(cfg.seed).unwrap_or(DEFAULT_SEED));
            let written = figures::cmd_figure(args.id, &args.out, &prov)?;
            for p in written {
                writeln!(stdout, "{}", p.display())?;
            }
            Ok(EXIT_OK)
        }
        Command::Constants => {
            print_json(stdout, &constants_json())?;
            Ok(EXIT_OK)
        }
    }
}

/// Maps an error to its exit code: I/O failures 1, everything else 2.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if cause.is::<std::io::Error>() {
            return EXIT_IO;
        }
        if let Some(e) = cause.downcast_ref::<csv::Error>() {
            if e.is_io_error() {
                return EXIT_IO;
            }
        }
    }
    EXIT_PARAM
}

/// Caps the global worker pool from `UOFDM_THREADS` when set.
pub fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v.trim().parse().with_context(|| format!("{THREADS_ENV} must be a positive integer, got '{v}'"))?;
        if n == 0 {
            bail!("{THREADS_ENV} must be a positive integer, got 0");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_have_ten_digits() {
        let v = constants_json();
        assert_eq!(v["gap_bits"].as_f64().unwrap(), 0.06985139097);
        assert!((v["multi_lb_coeff"].as_f64().unwrap() - std::f64::consts::FRAC_PI_8).abs() < 1e-10);
    }

    #[test]
    fn io_errors_map_to_one() {
        let io = anyhow::Error::new(std::io::Error::other("disk")).context("writing");
        assert_eq!(exit_code(&io), EXIT_IO);
        assert_eq!(exit_code(&anyhow::anyhow!("bad lambda")), EXIT_PARAM);
    }
}
