mod common;

use std::path::Path;
use std::process::Command;

use vqpricer::fdm::{assemble_f, classical_price, euler_solve, payoff_vector};
use vqpricer::market::{discretized_probabilities, MarketModel};
use vqpricer::pipeline::{
    emit_report, plan_measurements, resolve_t_ter, run_algorithm1, sweep_prices, write_sweep_csv, Evolution,
    PlanVectors, PricingJobConfig, RESULTS_HEADER, SWEEP_HEADER,
};
use vqpricer::quantum::Entangler;
use vqpricer::vqs::EvalMode;
use vqpricer::PricingError;

fn small_config() -> PricingJobConfig {
    let mut cfg = PricingJobConfig::new(common::reference_model(), common::reference_contract(), 2, 1e-3);
    cfg.layers = 2;
    cfg.entangler = Entangler::Brick;
    cfg
}

fn classical_reference(cfg: &PricingJobConfig) -> f64 {
    let grid = cfg.grid().unwrap();
    let t_ter = resolve_t_ter(cfg).unwrap();
    let bspde = assemble_f(&cfg.market, &cfg.contract, &grid).unwrap();
    let payoff = payoff_vector(&cfg.contract, &grid).unwrap();
    let v = euler_solve(&bspde, &payoff, cfg.dtau, cfg.contract.maturity - t_ter, &[]).unwrap().final_state;
    classical_price(&bspde, &cfg.market, t_ter, &v).unwrap()
}

#[test]
fn classical_evolution_reproduces_classical_price() {
    for qubits in [2, 4] {
        let mut cfg = PricingJobConfig::new(common::reference_model(), common::reference_contract(), qubits, 1e-4);
        cfg.evolution = Evolution::ClassicalEuler;
        let out = run_algorithm1(&cfg).unwrap();
        let want = classical_reference(&cfg);
        assert!((out.result.v0 - want).abs() <= 1e-10, "{} vs {want}", out.result.v0);
        assert!((out.result.method("classical").unwrap().price - want).abs() <= 1e-12);
        assert!(out.trajectory.is_none());
        assert!(out.result.method("analytic").is_some());
    }
}

#[test]
fn zero_length_evolution_prices_the_payoff() {
    let mut cfg = small_config();
    let t = cfg.contract.maturity;
    cfg.t_ter = Some(t);
    let out = run_algorithm1(&cfg).unwrap();
    let grid = cfg.grid().unwrap();
    let p = discretized_probabilities(&cfg.market, t, &grid).unwrap();
    let payoff = payoff_vector(&cfg.contract, &grid).unwrap();
    let want = (-cfg.market.r * t).exp() * p.iter().zip(&payoff).map(|(a, b)| a * b).sum::<f64>();
    assert_eq!(out.result.tau_ter, 0.0);
    assert!((out.result.v0 - want).abs() < 1e-12);
    assert_eq!(out.trajectory.unwrap().taus.len(), 1);
}

#[test]
fn t_ter_never_exceeds_maturity() {
    let mut cfg = small_config();
    cfg.contract.maturity = 0.01;
    assert!(resolve_t_ter(&cfg).unwrap() <= 0.01);
    cfg.t_ter = Some(0.02);
    assert!(cfg.validate().is_err());
}

#[test]
fn single_row_sweep_matches_algorithm1() {
    let mut cfg = small_config();
    let t = 0.3;
    cfg.t_ter = Some(t);
    let rows = sweep_prices(&cfg, &[t]).unwrap();
    assert_eq!(rows.len(), 2);
    let vqs = run_algorithm1(&cfg).unwrap().result.v0;
    let classical = classical_reference(&cfg);
    for row in &rows {
        let want = if row.method == "vqs" { vqs } else { classical };
        assert!((row.price - want).abs() < 1e-12, "{row:?} vs {want}");
        assert_eq!((row.n_gr, row.layers), (4, 2));
        assert!((row.abs_error.unwrap() - (row.price - row.analytic.unwrap()).abs()).abs() < 1e-15);
    }
    assert!(sweep_prices(&cfg, &[1.5]).is_err());
}

#[test]
fn vqs_price_tracks_classical_on_small_grid() {
    let cfg = small_config();
    let r = run_algorithm1(&cfg).unwrap().result;
    let classical = r.method("classical").unwrap().price;
    assert!(r.evolution_fidelity.unwrap() > 0.99);
    assert!(((r.v0 - classical) / classical).abs() < 0.05, "{} vs {classical}", r.v0);
    assert!((r.v0 - (-cfg.market.r * r.t_ter).exp() * r.overlap).abs() < 1e-15);
}

#[test]
fn shot_price_follows_swap_estimate_and_reruns_identically() {
    let mut cfg = small_config();
    cfg.mode = EvalMode::Shots { shots: 10_000_000, seed: 7 };
    let a = run_algorithm1(&cfg).unwrap().result;
    let b = run_algorithm1(&cfg).unwrap().result;
    assert_eq!(a, b);
    let s = a.swap.unwrap();
    let want = (-cfg.market.r * a.t_ter).exp() * a.alpha * a.beta * s.clipped.sqrt();
    assert_eq!(a.v0, want);

    cfg.mode = EvalMode::Exact;
    let exact = run_algorithm1(&cfg).unwrap().result.v0;
    // one-sigma price error propagated from the swap estimate
    let sigma = a.v0 * s.std_error / (2.0 * s.clipped);
    assert!((a.v0 - exact).abs() <= 3.0 * sigma, "{} vs {exact} (sigma {sigma})", a.v0);
}

#[test]
fn discount_decreases_with_rate() {
    let mut prices = Vec::new();
    for r in [0.001, 0.01, 0.03] {
        let mut cfg = small_config();
        cfg.market = MarketModel::single(r, 0.3, 1.0).unwrap();
        cfg.t_ter = Some(0.2);
        cfg.evolution = Evolution::ClassicalEuler;
        let res = run_algorithm1(&cfg).unwrap().result;
        assert!((res.v0 / res.overlap - (-r * 0.2f64).exp()).abs() < 1e-15);
        prices.push((-r * 0.2f64).exp() * 1.0);
    }
    assert!(prices.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn report_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_config();
    cfg.t_ter = Some(0.5);
    let out = run_algorithm1(&cfg).unwrap();
    let paths = emit_report(&cfg, &out, dir.path()).unwrap();

    let results = std::fs::read_to_string(&paths.results).unwrap();
    let mut lines = results.lines();
    assert_eq!(lines.next().unwrap(), RESULTS_HEADER);
    assert!(lines.next().unwrap().starts_with("algorithm1,"));
    assert_eq!(results.lines().count(), 1 + 1 + out.result.methods.len());

    let traj = std::fs::read_to_string(paths.trajectory.as_ref().unwrap()).unwrap();
    let np = cfg.ansatz().unwrap().num_params();
    let mut want = vec!["tau".to_string()];
    want.extend((0..np).map(|k| format!("theta_{k}")));
    want.extend(["condition".to_string(), "residual".to_string()]);
    assert_eq!(traj.lines().next().unwrap(), want.join(","));

    let plan = std::fs::read_to_string(&paths.plan).unwrap();
    assert!(plan.lines().any(|l| l.starts_with("xi_upper = ")));

    let again = PricingJobConfig::load(&paths.manifest).unwrap();
    assert_eq!(again, cfg);
    assert_eq!(run_algorithm1(&again).unwrap().result, out.result);

    let mut buf = Vec::new();
    write_sweep_csv(&sweep_prices(&cfg, &[0.5]).unwrap(), &mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap().lines().next().unwrap(), SWEEP_HEADER);
}

#[test]
fn planner_bounds_are_ordered() {
    for d in 1..=3 {
        let model = MarketModel::new(
            0.001,
            vec![0.3; d],
            (0..d).map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.2 }).collect()).collect(),
            vec![1.0; d],
        )
        .unwrap();
        let mut contract = common::random_contract(d, 1, false);
        contract.weights = std::iter::once(-1.0).chain(std::iter::repeat_n(1.0 / d as f64, d)).collect();
        let cfg = PricingJobConfig::new(model, contract, 2, 1e-4);
        let plan = plan_measurements(&cfg, None).unwrap();
        assert!(plan.xi_lower_simple <= plan.xi_upper, "d={d}");
        // equal in exact arithmetic for a single asset with a symmetric corridor
        assert!(plan.xi_lower <= plan.xi_upper * (1.0 + 1e-12), "d={d}");
        assert!(plan.xi_lower > 0.0 && plan.n_swap > 0.0 && plan.t_ter > 0.0);
        assert!((plan.n_swap - (plan.xi_upper / plan.epsilon).powi(2)).abs() <= 1e-9 * plan.n_swap);
        assert!(plan.alpha2.is_none());
    }
}

#[test]
fn planner_with_vectors() {
    let cfg = PricingJobConfig::new(common::reference_model(), common::reference_contract(), 4, 1e-4);
    let grid = cfg.grid().unwrap();
    let bspde = assemble_f(&cfg.market, &cfg.contract, &grid).unwrap();
    let payoff = payoff_vector(&cfg.contract, &grid).unwrap();
    let t_ter = resolve_t_ter(&cfg).unwrap();
    let p = discretized_probabilities(&cfg.market, t_ter, &grid).unwrap();
    let v = euler_solve(&bspde, &payoff, cfg.dtau, 1.0 - t_ter, &[]).unwrap().final_state;
    let plan = plan_measurements(&cfg, Some(PlanVectors { p: &p, v: &v, payoff: &payoff })).unwrap();
    let ab = plan.alpha2_beta2.unwrap();
    assert!(ab <= plan.xi_upper);
    assert!(ab <= plan.point_mass_bound);
    assert!(plan.zeta_empirical.unwrap() <= 1.0);
    assert!((plan.n_swap_actual.unwrap() - (ab / cfg.epsilon).powi(2)).abs() <= 1e-9 * plan.n_swap_actual.unwrap());

    let mut bad = cfg.clone();
    bad.epsilon = 1.0;
    assert!(matches!(plan_measurements(&bad, None), Err(PricingError::Validation(_))));
}

fn cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_vqpricer")).args(args).output().unwrap()
}

fn write_config(dir: &Path, cfg: &PricingJobConfig) -> String {
    let path = dir.join("job.json");
    std::fs::write(&path, serde_json::to_string(cfg).unwrap()).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn cli_exit_codes_and_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let out_s = out.to_string_lossy().into_owned();
    let mut cfg = small_config();
    cfg.t_sweep = vec![0.2, 0.5];
    let job = write_config(dir.path(), &cfg);

    let run = cli(&["price", "--config", &job, "--out", &out_s]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let stdout = String::from_utf8(run.stdout).unwrap();
    assert!(stdout.lines().any(|l| l.starts_with("v0 = ")));
    for f in ["results.csv", "trajectory.csv", "plan.txt", "manifest.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
    // the manifest is a valid config
    let manifest = out.join("manifest.json").to_string_lossy().into_owned();
    assert!(cli(&["price-classical", "--config", &manifest]).status.success());

    let shots = cli(&["price", "--config", &job, "--mode", "shots", "--shots", "1000", "--seed", "3"]);
    assert!(String::from_utf8(shots.stdout).unwrap().contains("swap_shots = 1000"));

    for sub in ["price-analytic", "plan", "decompose-check", "sweep"] {
        let r = cli(&[sub, "--config", &job, "--out", &out_s]);
        assert!(r.status.success(), "{sub}: {}", String::from_utf8_lossy(&r.stderr));
    }
    assert!(out.join("sweep.csv").exists() && out.join("plan.txt").exists() && out.join("decompose.txt").exists());
    let decomp = std::fs::read_to_string(out.join("decompose.txt")).unwrap();
    let f_err: f64 = decomp.lines().next().unwrap().split(" = ").nth(1).unwrap().parse().unwrap();
    assert!(f_err <= 1e-10);

    assert_eq!(cli(&["price"]).status.code(), Some(2));
    assert_eq!(cli(&["price", "--config", "/nonexistent/job.json"]).status.code(), Some(1));

    let mut invalid = cfg.clone();
    invalid.epsilon = 2.0;
    let bad = write_config(dir.path(), &invalid);
    assert_eq!(cli(&["price", "--config", &bad]).status.code(), Some(2));

    let mut basket = PricingJobConfig::new(common::random_model(2, 1), common::random_contract(2, 1, false), 1, 1e-3);
    basket.layers = 1;
    let b = write_config(dir.path(), &basket);
    assert_eq!(cli(&["price-analytic", "--config", &b]).status.code(), Some(2));

    let mut unstable = PricingJobConfig::new(common::reference_model(), common::reference_contract(), 6, 0.1);
    unstable.evolution = Evolution::ClassicalEuler;
    let u = write_config(dir.path(), &unstable);
    assert_eq!(cli(&["price-classical", "--config", &u]).status.code(), Some(3));
}
