//! Algorithm 1 end to end: encode the density and the payoff, evolve the
//! price state to `tau_ter`, overlap the two and discount.

mod config;
mod plan;
mod report;

pub use config::{Comparisons, Evolution, McConfig, PricingJobConfig, ValueState};
pub use plan::{plan_measurements, MeasurementPlan, PlanVectors};
pub use report::{emit_report, write_results_csv, write_sweep_csv, ReportPaths, RESULTS_HEADER, SWEEP_HEADER};

use serde::Serialize;

use crate::error::{PricingError, Result};
use crate::fdm::{assemble_f, classical_price, euler_solve, payoff_vector, DiscretizedBspde};
use crate::lcu::{decompose_boundary_generator, decompose_f};
use crate::market::{analytic_double_barrier_price, compute_t_ter, discretized_probabilities, monte_carlo_price};
use crate::prep::{exact_encode, variational_fit, PreparedState};
use crate::quantum::{
    adjoint_sequence, ansatz_state, apply_sequence, inner_product, swap_test_sample, AnsatzCircuit, StateVector,
};
use crate::vqs::{run_vqs, EvalMode, VqsConfig, VqsTrajectory};

/// Series tolerance used for the closed-form comparison.
const ANALYTIC_TOL: f64 = 1e-14;

/// Sampled SWAP test behind a shot-mode price.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SwapRecord {
    pub raw: f64,
    pub clipped: f64,
    pub std_error: f64,
    pub shots: u64,
    pub seed: u64,
}

/// One reference price.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodPrice {
    pub method: String,
    pub price: f64,
    pub std_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PricingResult {
    pub v0: f64,
    pub t_ter: f64,
    pub tau_ter: f64,
    /// Norm of the discretized density, `|p(t_ter)|`.
    pub alpha: f64,
    /// Norm of the evolved price vector, `|v~(tau_ter)|`.
    pub beta: f64,
    /// `Re <psi_p|v~>` with both scales.
    pub overlap: f64,
    pub swap: Option<SwapRecord>,
    pub evolution: Evolution,
    pub n_gr: usize,
    pub layers: usize,
    /// Fidelity of the prepared `|psi_V>` against the normalized payoff.
    pub value_state_fidelity: f64,
    /// `|<V_euler|v~>|^2 / (|V_euler|^2 |v~|^2)` at `tau_ter`, when both were computed.
    pub evolution_fidelity: Option<f64>,
    pub theta0_bound_exceeded: Option<f64>,
    pub stability_warning: Option<String>,
    pub methods: Vec<MethodPrice>,
}

impl PricingResult {
    pub fn method(&self, name: &str) -> Option<&MethodPrice> {
        self.methods.iter().find(|m| m.method == name)
    }
}

/// Everything a run produces.
#[derive(Debug, Clone)]
pub struct PricingOutcome {
    pub result: PricingResult,
    pub trajectory: Option<VqsTrajectory>,
    pub plan: MeasurementPlan,
}

/// Terminal horizon, clamped to the maturity.
pub fn resolve_t_ter(config: &PricingJobConfig) -> Result<f64> {
    let t = match config.t_ter {
        Some(t) => t,
        None => compute_t_ter(&config.market, &config.contract, config.epsilon, config.a_tilde())?.t_ter,
    };
    Ok(t.min(config.contract.maturity))
}

fn prepare_value_state(config: &PricingJobConfig, payoff: &[f64]) -> Result<PreparedState> {
    match &config.value_state {
        ValueState::Exact => exact_encode(payoff),
        ValueState::Variational { fit, seed } => {
            let ansatz = config.ansatz()?;
            Ok(variational_fit(payoff, &ansatz, fit, *seed)?.state)
        }
    }
}

/// Ansatz, initial parameters and base state so that the ansatz at
/// `theta_init` reproduces `prepared`.
fn vqs_start(config: &PricingJobConfig, prepared: &PreparedState) -> Result<(AnsatzCircuit, Vec<f64>, StateVector)> {
    let ansatz = config.ansatz()?;
    let mut theta = vec![0.0; ansatz.num_params()];
    theta[0] = prepared.scale;
    let mut base = prepared.normalized()?;
    apply_sequence(&mut base, &adjoint_sequence(&ansatz.gates(&theta)?))?;
    Ok((ansatz, theta, base))
}

fn reference_prices(
    config: &PricingJobConfig,
    bspde: &DiscretizedBspde,
    t_ter: f64,
    euler_final: Option<&[f64]>,
) -> Result<Vec<MethodPrice>> {
    let (model, contract) = (&config.market, &config.contract);
    let mut out = Vec::new();
    if let Some(v) = euler_final {
        if config.compare.classical {
            let price = classical_price(bspde, model, t_ter, v)?;
            out.push(MethodPrice { method: "classical".into(), price, std_error: None });
        }
    }
    if config.compare.analytic && analytic_supported(config) {
        let a = analytic_double_barrier_price(model, contract, ANALYTIC_TOL)?;
        out.push(MethodPrice { method: "analytic".into(), price: a.price, std_error: None });
    }
    if let Some(mc) = config.compare.monte_carlo {
        let est = monte_carlo_price(model, contract, mc.paths, mc.steps, mc.seed)?;
        out.push(MethodPrice { method: "monte-carlo".into(), price: est.mean, std_error: Some(est.std_error) });
    }
    Ok(out)
}

/// The closed form covers one asset with two knock-out barriers.
pub fn analytic_supported(config: &PricingJobConfig) -> bool {
    config.market.d() == 1 && config.contract.all_knock_out()
}

/// Run Algorithm 1 for `config`.
pub fn run_algorithm1(config: &PricingJobConfig) -> Result<PricingOutcome> {
    config.validate()?;
    let (model, contract) = (&config.market, &config.contract);
    let grid = config.grid()?;
    let t_ter = resolve_t_ter(config)?;
    let tau_ter = contract.maturity - t_ter;
    let disc = (-model.r * t_ter).exp();

    // step 1
    let p = discretized_probabilities(model, t_ter, &grid)?;
    let psi_p = exact_encode(&p)?.state()?;
    // step 2
    let payoff = payoff_vector(contract, &grid)?;
    let prepared = prepare_value_state(config, &payoff)?;

    let bspde = assemble_f(model, contract, &grid)?;
    let need_euler = config.compare.classical || config.evolution == Evolution::ClassicalEuler;
    let euler = if need_euler { Some(euler_solve(&bspde, &payoff, config.dtau, tau_ter, &[])?) } else { None };

    // step 3
    let (v_tilde, trajectory) = match config.evolution {
        Evolution::ClassicalEuler => {
            let v = &euler.as_ref().expect("euler run").final_state;
            (StateVector::from_real(v)?, None)
        }
        Evolution::Vqs => {
            let (ansatz, theta, base) = vqs_start(config, &prepared)?;
            let l = decompose_f(model, contract, &grid)?;
            let u = decompose_boundary_generator(model, contract, &grid)?;
            let mut vc = VqsConfig::new(config.dtau, tau_ter);
            vc.lambda_reg = config.lambda_reg;
            vc.mode = config.vqs_mode;
            let traj = run_vqs(&ansatz, &theta, &base, &l, &u, &vc)?;
            (ansatz_state(&ansatz, traj.final_theta(), &base)?, Some(traj))
        }
    };

    // steps 4 and 5
    let alpha = psi_p.norm();
    let beta = v_tilde.norm();
    let overlap = inner_product(&psi_p, &v_tilde)?.re;
    let (v0, swap) = match config.mode {
        EvalMode::Exact => (disc * overlap, None),
        EvalMode::Shots { shots, seed } => {
            let est = swap_test_sample(&psi_p, &v_tilde, shots, seed)?;
            let rec = SwapRecord { raw: est.raw, clipped: est.clipped(), std_error: est.std_error, shots, seed };
            (disc * alpha * beta * rec.clipped.sqrt(), Some(rec))
        }
    };
    if !v0.is_finite() {
        return Err(PricingError::Divergence { tau: tau_ter, reason: "non-finite price".into() });
    }

    let euler_final = euler.as_ref().map(|e| e.final_state.as_slice());
    let evolution_fidelity = match (config.evolution, euler_final) {
        (Evolution::Vqs, Some(v)) => {
            let exact = StateVector::from_real(v)?;
            let ov = inner_product(&exact, &v_tilde)?.norm();
            Some((ov / (exact.norm() * beta)).powi(2))
        }
        _ => None,
    };
    let methods = reference_prices(config, &bspde, t_ter, euler_final)?;
    let v_for_plan = v_tilde.to_real();
    let plan = plan_measurements(config, Some(PlanVectors { p: &p, v: &v_for_plan, payoff: &payoff }))?;
    let result = PricingResult {
        v0,
        t_ter,
        tau_ter,
        alpha,
        beta,
        overlap,
        swap,
        evolution: config.evolution,
        n_gr: grid.n_gr(),
        layers: config.layers,
        value_state_fidelity: prepared.fidelity,
        evolution_fidelity,
        theta0_bound_exceeded: trajectory.as_ref().and_then(|t| t.theta0_bound_exceeded),
        stability_warning: euler.and_then(|e| e.stability_warning),
        methods,
    };
    Ok(PricingOutcome { result, trajectory, plan })
}

/// One line of a price sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub t: f64,
    pub method: String,
    pub n_gr: usize,
    pub layers: usize,
    pub price: f64,
    pub analytic: Option<f64>,
    pub abs_error: Option<f64>,
}

/// `e^{-rt} <p(t)|V(T - t)>` for each `t`, from one classical Euler run and,
/// when the evolution is VQS, one VQS run with snapshots at every `T - t`.
pub fn sweep_prices(config: &PricingJobConfig, ts: &[f64]) -> Result<Vec<SweepRow>> {
    config.validate()?;
    let (model, contract) = (&config.market, &config.contract);
    if let Some(t) = ts.iter().find(|t| !(**t > 0.0 && **t <= contract.maturity)) {
        return Err(PricingError::validation(format!("sweep time {t} outside (0, T]")));
    }
    if ts.is_empty() {
        return Ok(Vec::new());
    }
    let grid = config.grid()?;
    let taus: Vec<f64> = ts.iter().map(|t| contract.maturity - t).collect();
    let tau_max = taus.iter().copied().fold(0.0, f64::max);
    let payoff = payoff_vector(contract, &grid)?;
    let bspde = assemble_f(model, contract, &grid)?;
    let euler = euler_solve(&bspde, &payoff, config.dtau, tau_max, &taus)?;

    let vqs = match config.evolution {
        Evolution::Vqs => {
            let prepared = prepare_value_state(config, &payoff)?;
            let (ansatz, theta, base) = vqs_start(config, &prepared)?;
            let l = decompose_f(model, contract, &grid)?;
            let u = decompose_boundary_generator(model, contract, &grid)?;
            let mut vc = VqsConfig::new(config.dtau, tau_max);
            vc.lambda_reg = config.lambda_reg;
            vc.mode = config.vqs_mode;
            vc.snapshots = taus.clone();
            let traj = run_vqs(&ansatz, &theta, &base, &l, &u, &vc)?;
            Some((ansatz, base, traj))
        }
        Evolution::ClassicalEuler => None,
    };
    let analytic = if config.compare.analytic && analytic_supported(config) {
        Some(analytic_double_barrier_price(model, contract, ANALYTIC_TOL)?.price)
    } else {
        None
    };

    let mut rows = Vec::new();
    for (&t, &tau) in ts.iter().zip(&taus) {
        let disc = (-model.r * t).exp();
        let p = discretized_probabilities(model, t, &grid)?;
        let mut push = |method: &str, price: f64| {
            rows.push(SweepRow {
                t,
                method: method.into(),
                n_gr: grid.n_gr(),
                layers: config.layers,
                price,
                analytic,
                abs_error: analytic.map(|a| (price - a).abs()),
            })
        };
        let v = euler.at(tau).ok_or_else(|| missing_snapshot(tau))?;
        push("classical", disc * dot(&p, v));
        if let Some((ansatz, base, traj)) = &vqs {
            let theta = traj.snapshot(tau).ok_or_else(|| missing_snapshot(tau))?;
            let state = ansatz_state(ansatz, theta, base)?;
            let psi_p = StateVector::from_real(&p)?;
            push("vqs", disc * inner_product(&psi_p, &state)?.re);
        }
    }
    Ok(rows)
}

fn missing_snapshot(tau: f64) -> PricingError {
    PricingError::Divergence { tau, reason: "no snapshot recorded at this time".into() }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
