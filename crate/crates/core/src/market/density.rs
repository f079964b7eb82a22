use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::MarketModel;
use crate::error::{PricingError, Result};
use crate::fdm::Grid;

/// Risk-neutral density of the asset vector at a fixed horizon `t`.
///
/// Log-prices are Gaussian with mean `ln s0_i + (r - sigma_i^2/2) t` and
/// covariance `sigma_i sigma_j rho_ij t`.
#[derive(Debug, Clone)]
pub struct LognormalDensity {
    mean: DVector<f64>,
    chol: Cholesky<f64, Dyn>,
    log_norm: f64,
}

impl LognormalDensity {
    pub fn new(model: &MarketModel, t: f64) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(PricingError::domain(format!("density horizon must be > 0, got {t}")));
        }
        let d = model.d();
        let mean = DVector::from_fn(d, |i, _| model.s0[i].ln() + (model.r - 0.5 * model.sigma[i] * model.sigma[i]) * t);
        let cov: DMatrix<f64> = model.log_covariance() * t;
        let chol =
            Cholesky::new(cov).ok_or_else(|| PricingError::domain("log-covariance is singular; density undefined"))?;
        let log_det_half: f64 = chol.l_dirty().diagonal().iter().map(|v| v.ln()).sum();
        let log_norm = -0.5 * d as f64 * (2.0 * std::f64::consts::PI).ln() - log_det_half;
        Ok(Self { mean, chol, log_norm })
    }

    pub fn pdf(&self, x: &[f64]) -> Result<f64> {
        let d = self.mean.len();
        if x.len() != d {
            return Err(PricingError::DimensionMismatch { expected: d, actual: x.len() });
        }
        if x.iter().any(|v| !(*v > 0.0)) {
            return Ok(0.0);
        }
        let z = DVector::from_fn(d, |i, _| x[i].ln() - self.mean[i]);
        let y = self.chol.l_dirty().solve_lower_triangular(&z).expect("cholesky factor has positive diagonal");
        let log_jac: f64 = x.iter().map(|v| v.ln()).sum();
        Ok((self.log_norm - 0.5 * y.norm_squared() - log_jac).exp())
    }
}

/// Density of the asset vector at horizon `t` evaluated at `x`.
pub fn lognormal_pdf(model: &MarketModel, t: f64, x: &[f64]) -> Result<f64> {
    LognormalDensity::new(model, t)?.pdf(x)
}

/// Grid weights `p_k(t) = p(t, x^(k)) * prod_i h_i` in flat grid order.
pub fn discretized_probabilities(model: &MarketModel, t: f64, grid: &Grid) -> Result<Vec<f64>> {
    if grid.d() != model.d() {
        return Err(PricingError::DimensionMismatch { expected: model.d(), actual: grid.d() });
    }
    let density = LognormalDensity::new(model, t)?;
    let cell = grid.cell_volume();
    let mut x = vec![0.0; grid.d()];
    (0..grid.len())
        .map(|k| {
            grid.point_into(k, &mut x);
            density.pdf(&x).map(|p| p * cell)
        })
        .collect()
}
