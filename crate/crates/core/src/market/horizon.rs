use serde::{Deserialize, Serialize};

use super::{DerivativeContract, MarketModel};
use crate::error::{PricingError, Result};

/// Which face of the domain binds the terminal-horizon rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundarySide {
    Upper,
    Lower,
}

/// Chosen pairing horizon and the term that achieved the minimum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TerminalHorizon {
    pub t_ter: f64,
    pub asset: usize,
    pub side: BoundarySide,
}

/// Largest horizon at which ignoring paths that leave the domain costs
/// `O(epsilon)`:
///
/// `min_i min( 2 ln(u_i/s0_i)^2, 2 ln(s0_i/l_i)^2 ) / (25 sigma_i^2 ln(2 A d (d+1) / epsilon))`.
///
/// Ties resolve to the upper face of the lowest asset index.
pub fn compute_t_ter(
    model: &MarketModel,
    contract: &DerivativeContract,
    epsilon: f64,
    a_tilde: f64,
) -> Result<TerminalHorizon> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(PricingError::domain(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    if !(a_tilde > 0.0) {
        return Err(PricingError::domain(format!("payoff bound constant must be > 0, got {a_tilde}")));
    }
    let d = model.d();
    let log_term = (2.0 * a_tilde * (d * (d + 1)) as f64 / epsilon).ln();
    if !(log_term > 0.0) {
        return Err(PricingError::domain("2 A d (d+1) / epsilon must exceed 1"));
    }
    let mut best: Option<TerminalHorizon> = None;
    for i in 0..d {
        let s0 = model.s0[i];
        let (l, u) = (contract.lower[i], contract.upper[i]);
        if !(l < s0 && s0 < u) {
            return Err(PricingError::domain(format!("asset {i}: spot {s0} must lie strictly inside ({l}, {u})")));
        }
        let denom = 25.0 * model.sigma[i] * model.sigma[i] * log_term;
        for (side, ratio) in [(BoundarySide::Upper, u / s0), (BoundarySide::Lower, s0 / l)] {
            let t = 2.0 * ratio.ln().powi(2) / denom;
            if best.map_or(true, |b| t < b.t_ter) {
                best = Some(TerminalHorizon { t_ter: t, asset: i, side });
            }
        }
    }
    Ok(best.expect("at least one asset"))
}
