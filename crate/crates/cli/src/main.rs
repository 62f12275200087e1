use std::path::PathBuf;
use std::process::ExitCode;

use blendcurv_cli::{emit, run, CliError, ExperimentConfig, Format, Overrides};
use clap::Parser;

/// Curvature variations along convex combinations of metrics.
///
/// Exit status: 0 when every consistency row passes, 1 when one fails or a
/// computation errors, 2 on usage errors.
#[derive(Debug, Parser)]
#[command(name = "blendcurv", version)]
struct Args {
    /// JSON experiment config; flags below override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Catalog entry: flat3torus, warped3torus, s2xs2, s3hopf, s3berger.
    #[arg(long)]
    geometry: Option<String>,
    /// conformal, canonical, warping, cheeger or custom-g1.
    #[arg(long)]
    deformation: Option<String>,
    #[arg(long)]
    rmax: Option<u32>,
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or json.
    #[arg(long)]
    format: Option<String>,
}

fn execute(args: Args) -> Result<i32, CliError> {
    let mut config = match &args.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?;
            ExperimentConfig::from_json(&text)?
        }
        None => ExperimentConfig::default(),
    };
    config.apply(&Overrides {
        geometry: args.geometry,
        deformation: args.deformation,
        r_max: args.rmax,
        grid_n: args.grid,
        seed: args.seed,
        out: args.out,
        format: args.format,
    })?;
    config.validate()?;
    let format: Format = config.format.parse().map_err(CliError::Usage)?;
    let outcome = run(&config)?;
    emit(&outcome.table, format, config.out.as_deref())?;
    for q in &outcome.failures {
        eprintln!("assertion failed: {q}");
    }
    Ok(outcome.exit_code())
}

fn main() -> ExitCode {
    match execute(Args::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("blendcurv: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
