#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod config;
mod error;
mod sweep;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use serde::Serialize;
use unimodal::analysis::{classify, invariant_density, lyapunov, mane_estimate, prop31_audit, summability};
use unimodal::cascade::{build_cascade, return_branches, Caps};
use unimodal::maps::{MapDescriptor, UnimodalMap};
use unimodal::telemann::{chain_rule_residual, decompose, signature_injectivity};

use args::{Cli, Command, Common, Format};
use error::CliError;

fn main() -> ExitCode {
    match run(std::env::args_os().collect()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(argv: Vec<std::ffi::OsString>) -> Result<(), CliError> {
    let argv = config::expand(argv)?;
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            print!("{e}");
            return Ok(());
        }
        Err(e) => return Err(CliError::Usage(e.to_string().trim_end().to_owned())),
    };
    match cli.command {
        Command::Cascade { common, caps, u1 } => {
            let map = build_map(&common)?;
            let cascade = build_cascade(&map, u1, &caps.apply(Caps::default()))?;
            emit_json(&common, &cascade)
        }
        Command::Branches { common, caps, level, u } => {
            let map = build_map(&common)?;
            let caps = caps.apply(Caps::default());
            let u = match u {
                Some(u) => u,
                None => {
                    let cascade = build_cascade(&map, None, &Caps { depth: level.max(1), ..caps })?;
                    cascade.u_level(level).ok_or_else(|| {
                        unimodal::Error::CascadeTooShallow(format!(
                            "level {level} requested, depth {}",
                            cascade.depth()
                        ))
                    })?
                }
            };
            emit_json(&common, &return_branches(&map, u, &caps)?)
        }
        Command::Telemann { common, caps, k, n0, injectivity } => {
            let map = build_map(&common)?;
            let cascade = build_cascade(&map, None, &caps.apply(Caps::default()))?;
            let decomposition = decompose(&map, &cascade, k, n0)?;
            let report = TelemannReport {
                chain_rule_residual: chain_rule_residual(&map, &decomposition)?,
                injectivity: if injectivity {
                    Some(signature_injectivity(&map, &cascade, k, n0)?)
                } else {
                    None
                },
                decomposition,
            };
            emit_json(&common, &report)
        }
        Command::Summability { common, kmax } => {
            let map = build_map(&common)?;
            emit_json(&common, &summability(&map, kmax)?)
        }
        Command::AuditProp31 { common, caps, level, samples, s_max } => {
            let map = build_map(&common)?;
            let cascade = build_cascade(&map, None, &caps.apply(Caps::default()))?;
            emit_json(&common, &prop31_audit(&map, &cascade, level, samples, s_max, common.seed)?)
        }
        Command::Mane { common, u, r_max, samples } => {
            let map = build_map(&common)?;
            let u = match u {
                Some(u) => u,
                None => map.fixed_point_positive()?,
            };
            emit_json(&common, &mane_estimate(&map, u, r_max, samples, common.seed)?)
        }
        Command::Density { common, iters, bins, burn_in, x0 } => {
            let map = build_map(&common)?;
            emit_json(&common, &invariant_density(&map, iters, bins, burn_in, x0)?)
        }
        Command::Lyapunov { common, iters, burn_in, x0 } => {
            let map = build_map(&common)?;
            let report = LyapunovReport {
                t: map.t(),
                alpha: map.alpha(),
                x0,
                iters,
                burn_in,
                lyapunov: lyapunov(&map, x0, iters, burn_in)?,
            };
            emit_json(&common, &report)
        }
        Command::Classify { common, budget } => {
            let map = build_map(&common)?;
            let class = classify(&map, &budget.budget(common.seed));
            match common.format.unwrap_or(Format::Json) {
                Format::Json => write_out(&common, &json(&class)?),
                Format::Csv => write_out(&common, &sweep::to_csv(&[sweep::SweepRow::from(&class)])?),
            }
        }
        Command::Sweep { common, budget, t_min, t_max, grid, jobs } => {
            if common.map.is_some() || common.t.is_some() {
                return Err(CliError::Usage("sweep takes --t-min/--t-max, not --t or --map".into()));
            }
            let ts = sweep::grid(t_min, t_max, grid)?;
            let jobs = match jobs {
                Some(0) => return Err(CliError::Usage("--jobs must be positive".into())),
                Some(j) => j,
                None => std::thread::available_parallelism().map_or(1, |n| n.get()),
            };
            let rows = sweep::run(&ts, common.alpha, &budget.budget(common.seed), jobs)?;
            match common.format.unwrap_or(Format::Csv) {
                Format::Csv => write_out(&common, &sweep::to_csv(&rows)?),
                Format::Json => write_out(&common, &json(&rows)?),
            }
        }
    }
}

#[derive(Serialize)]
struct TelemannReport {
    decomposition: unimodal::telemann::TelemannDecomposition,
    chain_rule_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    injectivity: Option<unimodal::telemann::InjectivityReport>,
}

#[derive(Serialize)]
struct LyapunovReport {
    t: Option<f64>,
    alpha: f64,
    x0: f64,
    iters: usize,
    burn_in: usize,
    lyapunov: f64,
}

fn build_map(common: &Common) -> Result<UnimodalMap, CliError> {
    match (&common.map, common.t) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read map {}: {e}", path.display())))?;
            let desc: MapDescriptor = serde_json::from_str(&text)
                .map_err(|e| CliError::Usage(format!("bad map descriptor {}: {e}", path.display())))?;
            Ok(UnimodalMap::from_descriptor(&desc)?)
        }
        (None, Some(t)) => Ok(UnimodalMap::quadratic_with_alpha(t, common.alpha)?),
        (None, None) => Err(CliError::Usage("one of --t or --map is required".into())),
    }
}

fn json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}

/// JSON is the only format for the per-parameter reports.
fn emit_json<T: Serialize>(common: &Common, value: &T) -> Result<(), CliError> {
    if common.format == Some(Format::Csv) {
        return Err(CliError::Usage("CSV output is only available for sweep and classify".into()));
    }
    write_out(common, &json(value)?)
}

fn write_out(common: &Common, text: &str) -> Result<(), CliError> {
    match &common.out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}
