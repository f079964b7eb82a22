use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::{PricingJobConfig, PricingOutcome, PricingResult, SweepRow, ValueState};
use crate::error::Result;
use crate::vqs::EvalMode;

pub const RESULTS_HEADER: &str = "method,price,std_error,t_ter,tau_ter,alpha,beta,swap_raw,swap_shots";
pub const SWEEP_HEADER: &str = "t,method,n_gr,layers,price,analytic,abs_error";

/// Files written by [`emit_report`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportPaths {
    pub results: PathBuf,
    pub trajectory: Option<PathBuf>,
    pub plan: PathBuf,
    pub manifest: PathBuf,
}

#[derive(Serialize)]
struct ResultRow<'a> {
    method: &'a str,
    price: f64,
    std_error: Option<f64>,
    t_ter: f64,
    tau_ter: f64,
    alpha: f64,
    beta: f64,
    swap_raw: Option<f64>,
    swap_shots: Option<u64>,
}

/// Propagated one-sigma error of a shot-mode price.
fn swap_price_error(r: &PricingResult) -> Option<f64> {
    let s = r.swap?;
    if s.clipped <= 0.0 {
        return None;
    }
    Some(r.v0 / s.clipped.sqrt() * s.std_error / (2.0 * s.clipped.sqrt()))
}

/// `algorithm1` first, then every reference method.
pub fn write_results_csv<W: Write>(result: &PricingResult, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let row = |method: &'static str, price, std_error| ResultRow {
        method,
        price,
        std_error,
        t_ter: result.t_ter,
        tau_ter: result.tau_ter,
        alpha: result.alpha,
        beta: result.beta,
        swap_raw: result.swap.map(|s| s.raw),
        swap_shots: result.swap.map(|s| s.shots),
    };
    out.serialize(row("algorithm1", result.v0, swap_price_error(result))).map_err(csv_err)?;
    for m in &result.methods {
        let mut r = row("", m.price, m.std_error);
        r.method = &m.method;
        out.serialize(r).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], w: W) -> Result<()> {
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    out.write_record(SWEEP_HEADER.split(',')).map_err(csv_err)?;
    for r in rows {
        out.serialize(r).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> crate::error::PricingError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => io.into(),
        other => std::io::Error::other(format!("{other:?}")).into(),
    }
}

#[derive(Serialize)]
struct Seeds {
    swap: Option<u64>,
    vqs: Option<u64>,
    value_state: Option<u64>,
    monte_carlo: Option<u64>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    config: &'a PricingJobConfig,
    seeds: Seeds,
    result: &'a PricingResult,
}

fn seed_of(mode: EvalMode) -> Option<u64> {
    match mode {
        EvalMode::Exact => None,
        EvalMode::Shots { seed, .. } => Some(seed),
    }
}

/// Write `results.csv`, `trajectory.csv` (VQS runs only), `plan.txt` and
/// `manifest.json` into `dir`, creating it if needed.
pub fn emit_report(config: &PricingJobConfig, outcome: &PricingOutcome, dir: &Path) -> Result<ReportPaths> {
    fs::create_dir_all(dir)?;
    let paths = ReportPaths {
        results: dir.join("results.csv"),
        trajectory: outcome.trajectory.as_ref().map(|_| dir.join("trajectory.csv")),
        plan: dir.join("plan.txt"),
        manifest: dir.join("manifest.json"),
    };
    write_results_csv(&outcome.result, File::create(&paths.results)?)?;
    if let (Some(traj), Some(p)) = (&outcome.trajectory, &paths.trajectory) {
        traj.write_csv(File::create(p)?)?;
    }
    fs::write(&paths.plan, outcome.plan.to_text())?;
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        config,
        seeds: Seeds {
            swap: seed_of(config.mode),
            vqs: seed_of(config.vqs_mode),
            value_state: match config.value_state {
                ValueState::Variational { seed, .. } => Some(seed),
                ValueState::Exact => None,
            },
            monte_carlo: config.compare.monte_carlo.map(|m| m.seed),
        },
        result: &outcome.result,
    };
    fs::write(&paths.manifest, serde_json::to_string_pretty(&manifest)?)?;
    Ok(paths)
}
