use std::f64::consts::PI;

use serde::Serialize;

use super::PricingJobConfig;
use crate::error::{PricingError, Result};
use crate::market::compute_t_ter;

/// Vectors behind an actual `alpha^2 beta^2`.
#[derive(Debug, Clone, Copy)]
pub struct PlanVectors<'a> {
    /// Discretized density at `t_ter`.
    pub p: &'a [f64],
    /// Price vector at `tau_ter`.
    pub v: &'a [f64],
    /// Payoff vector (price vector at `tau = 0`).
    pub payoff: &'a [f64],
}

/// SWAP-test measurement budget.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasurementPlan {
    pub d: usize,
    pub n_gr: usize,
    pub epsilon: f64,
    pub zeta: f64,
    pub payoff_bound: f64,
    pub a_tilde: f64,
    pub t_ter: f64,
    /// `ln(2 A d (d+1) / eps)`.
    pub log_term: f64,
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub chi_min: f64,
    pub xi_max: f64,
    /// `zeta B^2 (8 pi t_ter)^{-d/2} prod (u_i/l_i - 1) / sigma_i`.
    pub xi: f64,
    /// `xi` with `t_ter` replaced by its lower bound.
    pub xi_upper: f64,
    /// Lower bound with the `prod (xi_i - 1) / ln xi_i` factor.
    pub xi_lower: f64,
    /// Lower bound without that factor.
    pub xi_lower_simple: f64,
    /// `(xi_upper / eps)^2`.
    pub n_swap: f64,
    /// `(xi / eps)^2`.
    pub n_swap_at_t_ter: f64,
    pub alpha2: Option<f64>,
    pub beta2: Option<f64>,
    pub alpha2_beta2: Option<f64>,
    /// `(alpha^2 beta^2 / eps)^2`.
    pub n_swap_actual: Option<f64>,
    /// `sum V(tau_ter)^2 / sum f_pay^2`, the quantity `zeta` is meant to bound.
    pub zeta_empirical: Option<f64>,
    /// `zeta N_gr B^2`, the bound on `alpha^2 beta^2` as `t_ter -> 0`.
    pub point_mass_bound: f64,
}

impl MeasurementPlan {
    /// Flat `key = value` block.
    pub fn to_text(&self) -> String {
        let v = serde_json::to_value(self).expect("plan serializes");
        let mut s = String::new();
        if let serde_json::Value::Object(map) = v {
            for (k, x) in map {
                let shown = match x {
                    serde_json::Value::Null => "n/a".to_string(),
                    other => other.to_string(),
                };
                s.push_str(&format!("{k} = {shown}\n"));
            }
        }
        s
    }
}

/// Evaluate the measurement budget for `config`, using actual vectors when given.
pub fn plan_measurements(config: &PricingJobConfig, vectors: Option<PlanVectors>) -> Result<MeasurementPlan> {
    let eps = config.epsilon;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(PricingError::validation(format!("epsilon must lie in (0, 1), got {eps}")));
    }
    let (model, contract) = (&config.market, &config.contract);
    let d = model.d();
    let zeta = config.zeta;
    let b = config.payoff_bound();
    let a_tilde = config.a_tilde();
    if !(zeta > 0.0 && b > 0.0 && a_tilde > 0.0) {
        return Err(PricingError::validation("zeta, B and A must be > 0"));
    }
    let t_ter = match config.t_ter {
        Some(t) => t,
        None => compute_t_ter(model, contract, eps, a_tilde)?.t_ter,
    };
    let log_term = (2.0 * a_tilde * (d * (d + 1)) as f64 / eps).ln();
    let sigma_min = model.sigma.iter().copied().fold(f64::INFINITY, f64::min);
    let sigma_max = model.sigma.iter().copied().fold(0.0, f64::max);
    let chi_min = (0..d)
        .flat_map(|i| [contract.upper[i] / model.s0[i], model.s0[i] / contract.lower[i]])
        .fold(f64::INFINITY, f64::min);
    let ratios: Vec<f64> = (0..d).map(|i| contract.upper[i] / contract.lower[i]).collect();
    let xi_max = ratios.iter().copied().fold(0.0, f64::max);
    let zb2 = zeta * b * b;

    let xi = zb2
        * (8.0 * PI * t_ter).powf(-(d as f64) / 2.0)
        * (0..d).map(|i| (ratios[i] - 1.0) / model.sigma[i]).product::<f64>();
    let per_asset = 5.0 / (4.0 * PI.sqrt()) * (xi_max - 1.0) / chi_min.ln() * sigma_max / sigma_min;
    let xi_upper = zb2 * per_asset.powi(d as i32) * log_term.powf(d as f64 / 2.0);
    let xi_lower_simple = zb2 * (25.0 / (4.0 * PI) * log_term).powf(d as f64 / 2.0);
    let xi_lower = xi_lower_simple * ratios.iter().map(|z| (z - 1.0) / z.ln()).product::<f64>();

    let n_gr = 1usize << config.qubits_per_asset;
    let sq = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>();
    let (alpha2, beta2, zeta_empirical) = match vectors {
        Some(pv) => (Some(sq(pv.p)), Some(sq(pv.v)), Some(sq(pv.v) / sq(pv.payoff))),
        None => (None, None, None),
    };
    let alpha2_beta2 = alpha2.zip(beta2).map(|(a, b)| a * b);
    Ok(MeasurementPlan {
        d,
        n_gr,
        epsilon: eps,
        zeta,
        payoff_bound: b,
        a_tilde,
        t_ter,
        log_term,
        sigma_min,
        sigma_max,
        chi_min,
        xi_max,
        xi,
        xi_upper,
        xi_lower,
        xi_lower_simple,
        n_swap: (xi_upper / eps).powi(2),
        n_swap_at_t_ter: (xi / eps).powi(2),
        alpha2,
        beta2,
        alpha2_beta2,
        n_swap_actual: alpha2_beta2.map(|x| (x / eps).powi(2)),
        zeta_empirical,
        point_mass_bound: zeta * (n_gr.pow(d as u32)) as f64 * b * b,
    })
}
