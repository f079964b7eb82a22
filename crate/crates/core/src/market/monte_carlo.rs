use nalgebra::Cholesky;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{BoundaryKind, DerivativeContract, MarketModel};
use crate::error::{PricingError, Result};
use crate::rng;

const CHUNK: usize = 4096;

/// Sample mean of the discounted payoff and its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub paths: usize,
}

/// Monte Carlo price with exact log-space stepping on a uniform time grid.
///
/// Knock-out faces are monitored at grid times only; a path touching one
/// pays nothing. Linear faces are far-field truncations of the PDE domain
/// and are not monitored. Paths are drawn in fixed-size chunks, each on its
/// own ChaCha stream, so the estimate is a deterministic function of `seed`.
pub fn monte_carlo_price(
    model: &MarketModel,
    contract: &DerivativeContract,
    paths: usize,
    steps: usize,
    seed: u64,
) -> Result<McEstimate> {
    if paths == 0 || steps == 0 {
        return Err(PricingError::validation("paths and steps must be >= 1"));
    }
    contract.validate(model)?;
    let d = model.d();
    let dt = contract.maturity / steps as f64;
    let chol = Cholesky::new(model.correlation())
        .ok_or_else(|| PricingError::validation("correlation matrix must be positive definite for simulation"))?;
    let lower_tri = chol.l();
    let drift: Vec<f64> = model.sigma.iter().map(|s| (model.r - 0.5 * s * s) * dt).collect();
    let vol: Vec<f64> = model.sigma.iter().map(|s| s * dt.sqrt()).collect();
    let ln_s0: Vec<f64> = model.s0.iter().map(|s| s.ln()).collect();
    let ln_up: Vec<f64> = (0..d)
        .map(|i| match contract.upper_kind[i] {
            BoundaryKind::KnockOut => contract.upper[i].ln(),
            BoundaryKind::Linear => f64::INFINITY,
        })
        .collect();
    let ln_lo: Vec<f64> = (0..d)
        .map(|i| match contract.lower_kind[i] {
            BoundaryKind::KnockOut => contract.lower[i].ln(),
            BoundaryKind::Linear => f64::NEG_INFINITY,
        })
        .collect();
    let discount = (-model.r * contract.maturity).exp();

    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut x = vec![0.0; d];
    let mut z = vec![0.0; d];
    let mut s = vec![0.0; d];
    for (chunk, start) in (0..paths).step_by(CHUNK).enumerate() {
        let mut rng = rng::stream(seed, chunk as u64);
        for _ in start..(start + CHUNK).min(paths) {
            x.copy_from_slice(&ln_s0);
            // draws are consumed even after knock-out so that every path sees
            // the same normals regardless of the barrier set
            let mut alive = true;
            for _ in 0..steps {
                for zi in z.iter_mut() {
                    *zi = StandardNormal.sample(&mut rng);
                }
                for i in 0..d {
                    let shock: f64 = (0..=i).map(|j| lower_tri[(i, j)] * z[j]).sum();
                    x[i] += drift[i] + vol[i] * shock;
                    alive &= x[i] < ln_up[i] && x[i] > ln_lo[i];
                }
            }
            let payoff = if alive {
                for (si, xi) in s.iter_mut().zip(&x) {
                    *si = xi.exp();
                }
                discount * contract.linear_payoff(&s).max(0.0)
            } else {
                0.0
            };
            sum += payoff;
            sum_sq += payoff * payoff;
        }
    }
    let n = paths as f64;
    let mean = sum / n;
    let var = if paths > 1 { (sum_sq - n * mean * mean).max(0.0) / (n - 1.0) } else { 0.0 };
    Ok(McEstimate { mean, std_error: (var / n).sqrt(), paths })
}
