use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use vqpricer::fdm::{assemble_f, euler_solve, payoff_vector};
use vqpricer::lcu::{decompose_boundary_generator, decompose_f, reconstruct, resource_report};
use vqpricer::market::{analytic_double_barrier_price, discretized_probabilities, monte_carlo_price};
use vqpricer::pipeline::{
    analytic_supported, emit_report, plan_measurements, resolve_t_ter, run_algorithm1, sweep_prices, write_sweep_csv,
    Evolution, McConfig, PlanVectors, PricingJobConfig, ValueState,
};
use vqpricer::prep::{variational_fit, FitConfig};
use vqpricer::vqs::EvalMode;
use vqpricer::{PricingError, Result};

#[derive(Parser)]
#[command(name = "vqpricer", version, about = "Variational quantum pricing of barrier and basket derivatives")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Job config (JSON), or a run manifest from a previous run.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory. Overrides `output` in the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for every sampled stage.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    mode: Option<Mode>,
    /// Shots per SWAP test in shot mode.
    #[arg(long, global = true)]
    shots: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Exact,
    Shots,
}

#[derive(Subcommand)]
enum Command {
    /// Algorithm 1 with the configured evolution.
    Price,
    /// Algorithm 1 with the VQS step replaced by explicit Euler.
    PriceClassical,
    /// Closed-form double knock-out price.
    PriceAnalytic,
    /// Monte Carlo price.
    PriceMc,
    /// Prices over the config's `t_sweep` list.
    Sweep,
    /// SWAP-test measurement budget.
    Plan,
    /// Rebuild F and C(tau) from their unitary decompositions and compare.
    DecomposeCheck,
    /// Variational fit of the payoff state.
    PrepState,
}

const DEFAULT_SHOTS: u64 = 1_000_000;

fn load(cli: &Cli) -> Result<PricingJobConfig> {
    let path = cli.config.as_deref().ok_or_else(|| PricingError::Validation("--config is required".into()))?;
    let mut cfg = PricingJobConfig::load(path)?;
    if let Some(mode) = cli.mode {
        cfg.mode = match mode {
            Mode::Exact => EvalMode::Exact,
            Mode::Shots => {
                let (shots, seed) = match cfg.mode {
                    EvalMode::Shots { shots, seed } => (shots, seed),
                    EvalMode::Exact => (DEFAULT_SHOTS, 0),
                };
                EvalMode::Shots { shots, seed }
            }
        };
    }
    if let (Some(n), EvalMode::Shots { shots, .. }) = (cli.shots, &mut cfg.mode) {
        *shots = n;
    }
    if let Some(s) = cli.seed {
        if let EvalMode::Shots { seed, .. } = &mut cfg.mode {
            *seed = s;
        }
        if let EvalMode::Shots { seed, .. } = &mut cfg.vqs_mode {
            *seed = s;
        }
        if let ValueState::Variational { seed, .. } = &mut cfg.value_state {
            *seed = s;
        }
        if let Some(mc) = &mut cfg.compare.monte_carlo {
            mc.seed = s;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn out_dir(cli: &Cli, cfg: &PricingJobConfig) -> Option<PathBuf> {
    cli.out.clone().or_else(|| cfg.output.as_ref().map(PathBuf::from))
}

fn price(cli: &Cli, mut cfg: PricingJobConfig, classical: bool) -> Result<()> {
    if classical {
        cfg.evolution = Evolution::ClassicalEuler;
    }
    let outcome = run_algorithm1(&cfg)?;
    let r = &outcome.result;
    println!("v0 = {}", r.v0);
    println!(
        "t_ter = {}\ntau_ter = {}\nalpha = {}\nbeta = {}\noverlap = {}",
        r.t_ter, r.tau_ter, r.alpha, r.beta, r.overlap
    );
    if let Some(s) = r.swap {
        println!(
            "swap_raw = {}\nswap_clipped = {}\nswap_std_error = {}\nswap_shots = {}",
            s.raw, s.clipped, s.std_error, s.shots
        );
    }
    if let Some(f) = r.evolution_fidelity {
        println!("evolution_fidelity = {f}");
    }
    for m in &r.methods {
        match m.std_error {
            Some(se) => println!("{} = {} +- {}", m.method, m.price, se),
            None => println!("{} = {}", m.method, m.price),
        }
    }
    if let Some(w) = &r.stability_warning {
        eprintln!("warning: {w}");
    }
    if let Some(tau) = r.theta0_bound_exceeded {
        eprintln!("warning: |theta_0| left its bound at tau = {tau}");
    }
    if let Some(dir) = out_dir(cli, &cfg) {
        let paths = emit_report(&cfg, &outcome, &dir)?;
        println!("report = {}", paths.manifest.display());
    }
    Ok(())
}

fn price_analytic(cfg: &PricingJobConfig) -> Result<()> {
    if !analytic_supported(cfg) {
        return Err(PricingError::UnsupportedContract(
            "the closed form covers a single asset with two knock-out barriers".into(),
        ));
    }
    let a = analytic_double_barrier_price(&cfg.market, &cfg.contract, 1e-14)?;
    println!("analytic = {}\nrings = {}", a.price, a.rings);
    Ok(())
}

fn price_mc(cfg: &PricingJobConfig) -> Result<()> {
    let mc = cfg.compare.monte_carlo.unwrap_or(McConfig { paths: 100_000, steps: 1_000, seed: 0 });
    let est = monte_carlo_price(&cfg.market, &cfg.contract, mc.paths, mc.steps, mc.seed)?;
    println!(
        "monte_carlo = {}\nstd_error = {}\npaths = {}\nsteps = {}\nseed = {}",
        est.mean, est.std_error, est.paths, mc.steps, mc.seed
    );
    Ok(())
}

fn sweep(cli: &Cli, cfg: &PricingJobConfig) -> Result<()> {
    if cfg.t_sweep.is_empty() {
        return Err(PricingError::Validation("t_sweep is empty".into()));
    }
    let rows = sweep_prices(cfg, &cfg.t_sweep)?;
    match out_dir(cli, cfg) {
        Some(dir) => {
            std::fs::create_dir_all(&dir)?;
            let path = dir.join("sweep.csv");
            write_sweep_csv(&rows, File::create(&path)?)?;
            println!("sweep = {}", path.display());
        }
        None => write_sweep_csv(&rows, io::stdout().lock())?,
    }
    Ok(())
}

/// Planner with actual vectors from a classical Euler run.
fn plan(cli: &Cli, cfg: &PricingJobConfig) -> Result<()> {
    let grid = cfg.grid()?;
    let t_ter = resolve_t_ter(cfg)?;
    let p = discretized_probabilities(&cfg.market, t_ter, &grid)?;
    let payoff = payoff_vector(&cfg.contract, &grid)?;
    let bspde = assemble_f(&cfg.market, &cfg.contract, &grid)?;
    let v = euler_solve(&bspde, &payoff, cfg.dtau, cfg.contract.maturity - t_ter, &[])?.final_state;
    let plan = plan_measurements(cfg, Some(PlanVectors { p: &p, v: &v, payoff: &payoff }))?;
    write_text(cli, cfg, "plan.txt", &plan.to_text())
}

fn decompose_check(cli: &Cli, cfg: &PricingJobConfig) -> Result<()> {
    let grid = cfg.grid()?;
    let bspde = assemble_f(&cfg.market, &cfg.contract, &grid)?;
    let l = decompose_f(&cfg.market, &cfg.contract, &grid)?;
    let g = decompose_boundary_generator(&cfg.market, &cfg.contract, &grid)?;
    let mut text = String::new();
    let f_err = (reconstruct(&l, 0.0)? - bspde.f.to_dense()).amax();
    text.push_str(&format!("f.max_abs_error = {f_err:e}\n"));
    let t = cfg.contract.maturity;
    for tau in [0.0, t / 2.0, t] {
        let want = bspde.boundary_vector(tau);
        let err = if g.is_empty() {
            want.iter().fold(0.0f64, |m, x| m.max(x.abs()))
        } else {
            let col = reconstruct(&g, tau)?.column(0).into_owned();
            col.iter().zip(&want).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
        };
        text.push_str(&format!("boundary.max_abs_error.tau_{tau} = {err:e}\n"));
    }
    for (name, sum) in [("f", &l), ("boundary", &g)] {
        for line in resource_report(sum, cfg.epsilon).to_kv_text().lines() {
            text.push_str(&format!("{name}.{line}\n"));
        }
    }
    write_text(cli, cfg, "decompose.txt", &text)
}

fn prep_state(cli: &Cli, cfg: &PricingJobConfig) -> Result<()> {
    let grid = cfg.grid()?;
    let payoff = payoff_vector(&cfg.contract, &grid)?;
    let (fit, seed) = match &cfg.value_state {
        ValueState::Variational { fit, seed } => (fit.clone(), *seed),
        ValueState::Exact => (FitConfig::default(), cli.seed.unwrap_or(0)),
    };
    let ansatz = cfg.ansatz()?;
    let res = variational_fit(&payoff, &ansatz, &fit, seed)?;
    println!(
        "fidelity = {}\ndeficit = {:e}\nscale = {}\nbest_restart = {}\nseed = {seed}",
        res.state.fidelity,
        1.0 - res.state.fidelity,
        res.state.scale,
        res.best_restart
    );
    if let Some(dir) = out_dir(cli, cfg) {
        std::fs::create_dir_all(&dir)?;
        let mut w = csv::Writer::from_path(dir.join("prep_trace.csv")).map_err(io::Error::other)?;
        w.write_record(["iteration", "best_fidelity"]).map_err(io::Error::other)?;
        for (k, f) in res.trace.iter().enumerate() {
            w.write_record([k.to_string(), f.to_string()]).map_err(io::Error::other)?;
        }
        w.flush()?;
        std::fs::write(dir.join("prep_state.json"), serde_json::to_string_pretty(&res.state)?)?;
    }
    Ok(())
}

fn write_text(cli: &Cli, cfg: &PricingJobConfig, name: &str, text: &str) -> Result<()> {
    print!("{text}");
    if let Some(dir) = out_dir(cli, cfg) {
        std::fs::create_dir_all(&dir)?;
        std::fs::write(Path::new(&dir).join(name), text)?;
    }
    io::stdout().flush()?;
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    let cfg = load(cli)?;
    match cli.command {
        Command::Price => price(cli, cfg, false),
        Command::PriceClassical => price(cli, cfg, true),
        Command::PriceAnalytic => price_analytic(&cfg),
        Command::PriceMc => price_mc(&cfg),
        Command::Sweep => sweep(cli, &cfg),
        Command::Plan => plan(cli, &cfg),
        Command::DecomposeCheck => decompose_check(cli, &cfg),
        Command::PrepState => prep_state(cli, &cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
