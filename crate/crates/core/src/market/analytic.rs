use libm::erfc;
use serde::{Deserialize, Serialize};

use super::{BoundaryKind, DerivativeContract, MarketModel};
use crate::error::{PricingError, Result};

/// Standard normal CDF through the complementary error function, which keeps
/// full relative accuracy in the lower tail.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Closed-form price with the number of image rings used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticPrice {
    pub price: f64,
    pub rings: usize,
}

#[derive(Clone, Copy)]
struct Corridor {
    s: f64,
    strike: f64,
    lo: f64,
    l: f64,
    u: f64,
    r: f64,
    sigma: f64,
    tau: f64,
    scale: f64,
}

impl Corridor {
    /// Contribution of image index `n` (flat barriers, continuous monitoring).
    fn term(&self, n: i64) -> f64 {
        let Corridor { s, strike, lo, l, u, r, sigma, tau, scale } = *self;
        let sd = sigma * tau.sqrt();
        let drift = (r + 0.5 * sigma * sigma) * tau;
        let mu = 2.0 * r / (sigma * sigma) + 1.0;
        let nf = n as f64;
        let ln_ul = (u / l).ln();
        let d = |log_arg: f64| (log_arg + drift) / sd;
        let d1 = d(s.ln() + 2.0 * nf * ln_ul - lo.ln());
        let d2 = d(s.ln() + 2.0 * nf * ln_ul - u.ln());
        let d3 = d((2.0 * nf + 2.0) * l.ln() - lo.ln() - s.ln() - 2.0 * nf * u.ln());
        let d4 = d((2.0 * nf + 2.0) * l.ln() - u.ln() - s.ln() - 2.0 * nf * u.ln());
        let direct = nf * ln_ul;
        let image = (nf + 1.0) * l.ln() - nf * u.ln() - s.ln();
        let spot_leg =
            (mu * direct).exp() * (norm_cdf(d1) - norm_cdf(d2)) - (mu * image).exp() * (norm_cdf(d3) - norm_cdf(d4));
        let strike_leg = ((mu - 2.0) * direct).exp() * (norm_cdf(d1 - sd) - norm_cdf(d2 - sd))
            - ((mu - 2.0) * image).exp() * (norm_cdf(d3 - sd) - norm_cdf(d4 - sd));
        scale * (s * spot_leg - strike * (-r * tau).exp() * strike_leg)
    }
}

/// Single-asset double knock-out call, continuously monitored, priced by the
/// image-series expansion. Rings `|n| = N` are added until one contributes
/// less than `tolerance` in absolute value and `N >= 3`.
pub fn analytic_double_barrier_price(
    model: &MarketModel,
    contract: &DerivativeContract,
    tolerance: f64,
) -> Result<AnalyticPrice> {
    let corridor = corridor(model, contract)?;
    let Some(corridor) = corridor else {
        return Ok(AnalyticPrice { price: 0.0, rings: 0 });
    };
    let mut price = corridor.term(0);
    let mut n = 0usize;
    loop {
        n += 1;
        let ring = corridor.term(n as i64) + corridor.term(-(n as i64));
        price += ring;
        if (ring.abs() < tolerance && n >= 3) || n >= 10_000 {
            break;
        }
    }
    Ok(AnalyticPrice { price, rings: n })
}

/// Same series truncated at `|n| <= rings`.
pub fn analytic_double_barrier_truncated(
    model: &MarketModel,
    contract: &DerivativeContract,
    rings: usize,
) -> Result<f64> {
    Ok(match corridor(model, contract)? {
        None => 0.0,
        Some(c) => {
            let r = rings as i64;
            (-r..=r).map(|n| c.term(n)).sum()
        }
    })
}

fn corridor(model: &MarketModel, contract: &DerivativeContract) -> Result<Option<Corridor>> {
    if model.d() != 1 {
        return Err(PricingError::UnsupportedContract(format!("closed form needs one asset, got {}", model.d())));
    }
    contract.validate(model)?;
    if contract.lower_kind[0] != BoundaryKind::KnockOut || contract.upper_kind[0] != BoundaryKind::KnockOut {
        return Err(PricingError::UnsupportedContract("closed form needs knock-out barriers on both faces".into()));
    }
    let (a0, a1) = (contract.weights[0], contract.weights[1]);
    if !(a1 > 0.0) {
        return Err(PricingError::UnsupportedContract("closed form needs a call payoff (a_1 > 0)".into()));
    }
    // max(a0 + a1 s, 0) = a1 max(s - K, 0)
    let strike = -a0 / a1;
    let (l, u) = (contract.lower[0], contract.upper[0]);
    if strike >= u {
        return Ok(None);
    }
    Ok(Some(Corridor {
        s: model.s0[0],
        strike,
        lo: strike.max(l),
        l,
        u,
        r: model.r,
        sigma: model.sigma[0],
        tau: contract.maturity,
        scale: a1,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_accuracy() {
        assert!((norm_cdf(0.0) - 0.5).abs() < 1e-15);
        assert!((norm_cdf(1.959963984540054) - 0.975).abs() < 1e-15);
        assert!((norm_cdf(-1.0) - 0.158_655_253_931_457_05).abs() < 1e-15);
        // deep tail keeps relative accuracy
        let tail = norm_cdf(-10.0);
        assert!(((tail - 7.619853024160527e-24) / tail).abs() < 1e-12, "{tail:e}");
    }

    #[test]
    fn strike_above_corridor_is_worthless() {
        let m = MarketModel::single(0.001, 0.3, 1.0).unwrap();
        let c = DerivativeContract::double_barrier_call(2.5, 0.5, 2.0, 1.0);
        assert_eq!(analytic_double_barrier_price(&m, &c, 1e-12).unwrap().price, 0.0);
    }

    #[test]
    fn series_converges_geometrically() {
        let m = MarketModel::single(0.001, 0.3, 1.0).unwrap();
        let c = DerivativeContract::double_barrier_call(1.0, 0.5, 2.0, 1.0);
        let a = analytic_double_barrier_truncated(&m, &c, 5).unwrap();
        let b = analytic_double_barrier_truncated(&m, &c, 10).unwrap();
        assert!((a - b).abs() < 1e-10);
        let full = analytic_double_barrier_price(&m, &c, 1e-12).unwrap();
        assert!(full.rings >= 3);
        assert!((full.price - b).abs() < 1e-12);
    }

    #[test]
    fn wide_corridor_recovers_black_scholes() {
        let m = MarketModel::single(0.03, 0.2, 1.0).unwrap();
        let c = DerivativeContract::double_barrier_call(1.0, 1e-4, 1e4, 1.0);
        let p = analytic_double_barrier_price(&m, &c, 1e-14).unwrap().price;
        let sd = 0.2;
        let d1 = (0.03 + 0.02) / sd;
        let bs = norm_cdf(d1) - (-0.03f64).exp() * norm_cdf(d1 - sd);
        assert!((p - bs).abs() < 1e-10, "{p} vs {bs}");
    }

    #[test]
    fn rejects_unsupported() {
        let m = MarketModel::single(0.001, 0.3, 1.0).unwrap();
        let mut c = DerivativeContract::double_barrier_call(1.0, 0.5, 2.0, 1.0);
        c.upper_kind[0] = BoundaryKind::Linear;
        assert!(matches!(analytic_double_barrier_price(&m, &c, 1e-12), Err(PricingError::UnsupportedContract(_))));
    }
}
