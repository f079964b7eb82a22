//! Market and contract data, lognormal analytics and classical oracles.

mod analytic;
mod density;
mod horizon;
mod monte_carlo;

pub use analytic::{analytic_double_barrier_price, analytic_double_barrier_truncated, norm_cdf, AnalyticPrice};
pub use density::{discretized_probabilities, lognormal_pdf, LognormalDensity};
pub use horizon::{compute_t_ter, BoundarySide, TerminalHorizon};
pub use monte_carlo::{monte_carlo_price, McEstimate};

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{PricingError, Result};

/// Risk-neutral multi-asset geometric Brownian motion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketModel {
    /// Risk-free rate (1/year).
    pub r: f64,
    /// Per-asset volatilities.
    pub sigma: Vec<f64>,
    /// Correlation matrix, row-major `d x d`.
    pub rho: Vec<Vec<f64>>,
    /// Spot prices.
    pub s0: Vec<f64>,
}

impl MarketModel {
    /// Build and validate a model.
    pub fn new(r: f64, sigma: Vec<f64>, rho: Vec<Vec<f64>>, s0: Vec<f64>) -> Result<Self> {
        let model = Self { r, sigma, rho, s0 };
        model.validate()?;
        Ok(model)
    }

    /// Single asset model.
    pub fn single(r: f64, sigma: f64, s0: f64) -> Result<Self> {
        Self::new(r, vec![sigma], vec![vec![1.0]], vec![s0])
    }

    /// Number of assets.
    pub fn d(&self) -> usize {
        self.sigma.len()
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.sigma.len();
        if d == 0 {
            return Err(PricingError::validation("model needs at least one asset"));
        }
        if self.s0.len() != d {
            return Err(PricingError::DimensionMismatch { expected: d, actual: self.s0.len() });
        }
        if self.rho.len() != d || self.rho.iter().any(|row| row.len() != d) {
            return Err(PricingError::validation("correlation matrix must be d x d"));
        }
        if !(self.r > 0.0 && self.r.is_finite()) {
            return Err(PricingError::validation(format!("rate must be > 0, got {}", self.r)));
        }
        if let Some(s) = self.sigma.iter().find(|s| !(**s > 0.0 && s.is_finite())) {
            return Err(PricingError::validation(format!("volatility must be > 0, got {s}")));
        }
        if let Some(s) = self.s0.iter().find(|s| !(**s > 0.0 && s.is_finite())) {
            return Err(PricingError::validation(format!("spot must be > 0, got {s}")));
        }
        for i in 0..d {
            if self.rho[i][i] != 1.0 {
                return Err(PricingError::validation("correlation diagonal must be 1"));
            }
            for j in 0..i {
                let (a, b) = (self.rho[i][j], self.rho[j][i]);
                if a != b {
                    return Err(PricingError::validation("correlation matrix must be symmetric"));
                }
                if !(a > -1.0 && a < 1.0) {
                    return Err(PricingError::validation(format!(
                        "correlation ({i},{j}) = {a} must lie strictly inside (-1, 1)"
                    )));
                }
            }
        }
        let eig = SymmetricEigen::new(self.correlation());
        if eig.eigenvalues.min() < -1e-12 {
            return Err(PricingError::validation("correlation matrix is not positive semidefinite"));
        }
        Ok(())
    }

    /// Whether `0 < r < sigma_i^2 / 2` holds for every asset. Informational only.
    pub fn standing_assumption_holds(&self) -> bool {
        self.sigma.iter().all(|s| self.r < s * s / 2.0)
    }

    pub fn correlation(&self) -> DMatrix<f64> {
        let d = self.d();
        DMatrix::from_fn(d, d, |i, j| self.rho[i][j])
    }

    /// Log-price covariance per unit time, `sigma_i sigma_j rho_ij`.
    pub fn log_covariance(&self) -> DMatrix<f64> {
        let d = self.d();
        DMatrix::from_fn(d, d, |i, j| self.sigma[i] * self.sigma[j] * self.rho[i][j])
    }
}

/// Boundary treatment on one face of the pricing domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryKind {
    /// Barrier: touching the face voids the payoff, boundary value 0.
    KnockOut,
    /// Far-field linear value `e^{-r tau} a_0 + sum_j a_j s_j` on the face.
    Linear,
}

/// Basket payoff `max(a_0 + sum_i a_i s_i, 0)` on a box domain with
/// per-face boundary kinds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivativeContract {
    /// Maturity in years.
    pub maturity: f64,
    /// Payoff weights `a_0..a_d`.
    pub weights: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub lower_kind: Vec<BoundaryKind>,
    pub upper_kind: Vec<BoundaryKind>,
}

impl DerivativeContract {
    /// Single-asset double knock-out call with strike `strike`.
    pub fn double_barrier_call(strike: f64, lower: f64, upper: f64, maturity: f64) -> Self {
        Self {
            maturity,
            weights: vec![-strike, 1.0],
            lower: vec![lower],
            upper: vec![upper],
            lower_kind: vec![BoundaryKind::KnockOut],
            upper_kind: vec![BoundaryKind::KnockOut],
        }
    }

    pub fn d(&self) -> usize {
        self.lower.len()
    }

    /// Check shape and the strict ordering `0 < l_i < s0_i < u_i`.
    pub fn validate(&self, model: &MarketModel) -> Result<()> {
        let d = model.d();
        for (name, len) in [
            ("lower", self.lower.len()),
            ("upper", self.upper.len()),
            ("lower_kind", self.lower_kind.len()),
            ("upper_kind", self.upper_kind.len()),
        ] {
            if len != d {
                return Err(PricingError::validation(format!(
                    "contract field {name} has length {len}, model has {d} assets"
                )));
            }
        }
        if self.weights.len() != d + 1 {
            return Err(PricingError::DimensionMismatch { expected: d + 1, actual: self.weights.len() });
        }
        if !(self.maturity > 0.0 && self.maturity.is_finite()) {
            return Err(PricingError::validation("maturity must be > 0"));
        }
        for i in 0..d {
            let (l, s, u) = (self.lower[i], model.s0[i], self.upper[i]);
            if !(0.0 < l && l < s && s < u) {
                return Err(PricingError::validation(format!(
                    "asset {i}: need 0 < l < s0 < u, got l={l}, s0={s}, u={u}"
                )));
            }
        }
        Ok(())
    }

    /// True when every face is a knock-out barrier (boundary vector vanishes).
    pub fn all_knock_out(&self) -> bool {
        self.lower_kind.iter().chain(&self.upper_kind).all(|k| *k == BoundaryKind::KnockOut)
    }

    /// Linear part `a_0 + sum a_i s_i` without the floor.
    pub fn linear_payoff(&self, s: &[f64]) -> f64 {
        self.weights[0] + self.weights[1..].iter().zip(s).map(|(a, x)| a * x).sum::<f64>()
    }

    /// Payoff at maturity; `s` must lie in the closed box.
    pub fn payoff(&self, s: &[f64]) -> Result<f64> {
        if s.len() != self.d() {
            return Err(PricingError::DimensionMismatch { expected: self.d(), actual: s.len() });
        }
        for (i, x) in s.iter().enumerate() {
            if !(*x >= self.lower[i] && *x <= self.upper[i]) {
                return Err(PricingError::domain(format!(
                    "asset {i} price {x} outside [{}, {}]",
                    self.lower[i], self.upper[i]
                )));
            }
        }
        Ok(self.linear_payoff(s).max(0.0))
    }

    /// Value on a boundary face at time-to-maturity `tau`: zero on knock-out
    /// faces, otherwise the discounted linear far-field value. `s` carries the
    /// boundary coordinate already substituted.
    pub fn boundary_value(&self, tau: f64, r: f64, s: &[f64], on_knock_out: bool) -> f64 {
        if on_knock_out {
            0.0
        } else {
            (-r * tau).exp() * self.weights[0] + self.weights[1..].iter().zip(s).map(|(a, x)| a * x).sum::<f64>()
        }
    }

    /// Constants `(A_0, A_1..A_d)` with `f_pay(s) <= A_0 + sum A_i s_i` on the domain.
    pub fn payoff_linear_bound(&self) -> (f64, Vec<f64>) {
        (self.weights[0].max(0.0), self.weights[1..].iter().map(|a| a.max(0.0)).collect())
    }

    /// `max{A_i sqrt(u_i s0_i), A_0}` used by the terminal-horizon rule.
    pub fn a_tilde(&self, model: &MarketModel) -> f64 {
        let (a0, a) = self.payoff_linear_bound();
        a.iter().enumerate().map(|(i, ai)| ai * (self.upper[i] * model.s0[i]).sqrt()).fold(a0, f64::max)
    }

    /// Payoff upper bound on the domain, `a_0 + sum a_i u_i` for nonnegative
    /// weights; general weights take the maximising corner.
    pub fn payoff_bound(&self) -> f64 {
        let corner: f64 = self.weights[1..]
            .iter()
            .enumerate()
            .map(|(i, a)| if *a >= 0.0 { a * self.upper[i] } else { a * self.lower[i] })
            .sum();
        (self.weights[0] + corner).max(0.0)
    }
}
