//! Finite-difference discretization of the Black-Scholes PDE in asset
//! coordinates, `dV/dtau = F V + C(tau)`, plus a classical explicit-Euler
//! reference solver.

mod grid;
mod sparse;

pub use grid::Grid;
pub use sparse::CsrMatrix;

use nalgebra::DMatrix;

use crate::error::{PricingError, Result};
use crate::market::{discretized_probabilities, BoundaryKind, DerivativeContract, MarketModel};

/// `2h * (s d/ds)` central difference on axis `axis`, exterior values dropped.
///
/// Row `j` carries `x^(j)`: entry `(j, j+1) = x^(j)`, `(j, j-1) = -x^(j)`.
pub fn build_d1st(grid: &Grid, axis: usize) -> DMatrix<f64> {
    let n = grid.n_gr();
    DMatrix::from_fn(n, n, |j, c| {
        let x = grid.coordinate(axis, j);
        if c == j + 1 {
            x
        } else if c + 1 == j {
            -x
        } else {
            0.0
        }
    })
}

/// `h^2 * (s^2 d2/ds2)` central difference on axis `axis`.
pub fn build_d2nd(grid: &Grid, axis: usize) -> DMatrix<f64> {
    let n = grid.n_gr();
    DMatrix::from_fn(n, n, |j, c| {
        let x2 = grid.coordinate(axis, j).powi(2);
        if c == j {
            -2.0 * x2
        } else if c == j + 1 || c + 1 == j {
            x2
        } else {
            0.0
        }
    })
}

/// Semi-discrete pricing problem on a grid.
#[derive(Debug, Clone)]
pub struct DiscretizedBspde {
    pub grid: Grid,
    pub f: CsrMatrix,
    pub r: f64,
    /// `C(tau) = c_const + e^{-r tau} c_disc`.
    c_const: Vec<f64>,
    c_disc: Vec<f64>,
    pub model: Option<MarketModel>,
    pub contract: Option<DerivativeContract>,
}

impl DiscretizedBspde {
    /// Hand-built system with an explicit generator and boundary parts.
    pub fn from_parts(grid: Grid, f: CsrMatrix, r: f64, c_const: Vec<f64>, c_disc: Vec<f64>) -> Result<Self> {
        let n = grid.len();
        for len in [f.rows(), f.cols(), c_const.len(), c_disc.len()] {
            if len != n {
                return Err(PricingError::DimensionMismatch { expected: n, actual: len });
            }
        }
        Ok(Self { grid, f, r, c_const, c_disc, model: None, contract: None })
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Boundary vector `C(tau)`.
    pub fn boundary_vector(&self, tau: f64) -> Vec<f64> {
        let disc = (-self.r * tau).exp();
        self.c_const.iter().zip(&self.c_disc).map(|(c, e)| c + disc * e).collect()
    }

    /// Largest stable explicit-Euler step, `2 / rho(F)` with a Gershgorin
    /// estimate of the spectral radius.
    pub fn stability_bound(&self) -> f64 {
        2.0 / self.f.gershgorin_radius().max(f64::MIN_POSITIVE)
    }
}

/// Payoff sampled on the grid points.
pub fn payoff_vector(contract: &DerivativeContract, grid: &Grid) -> Result<Vec<f64>> {
    let mut x = vec![0.0; grid.d()];
    (0..grid.len())
        .map(|k| {
            grid.point_into(k, &mut x);
            contract.payoff(&x)
        })
        .collect()
}

/// Triplets of `coef * (M_1 (x) ... )` with each factor placed on its axis
/// and the identity elsewhere.
fn kron_place(grid: &Grid, coef: f64, factors: &[(usize, &DMatrix<f64>)], out: &mut Vec<(usize, usize, f64)>) {
    let mut cols: Vec<(usize, f64)> = Vec::new();
    let mut next: Vec<(usize, f64)> = Vec::new();
    for k in 0..grid.len() {
        cols.clear();
        cols.push((k, coef));
        for &(axis, m) in factors {
            let stride = grid.stride(axis);
            let row = grid.axis_index(k, axis);
            next.clear();
            for &(col, v) in &cols {
                let base = col - row * stride;
                for c in 0..m.ncols() {
                    let e = m[(row, c)];
                    if e != 0.0 {
                        next.push((base + c * stride, v * e));
                    }
                }
            }
            std::mem::swap(&mut cols, &mut next);
        }
        out.extend(cols.iter().map(|&(c, v)| (k, c, v)));
    }
}

/// Assemble `F = F^1st + F^2nd - r I` and the boundary vector.
pub fn assemble_f(model: &MarketModel, contract: &DerivativeContract, grid: &Grid) -> Result<DiscretizedBspde> {
    let d = grid.d();
    for len in [model.d(), contract.d()] {
        if len != d {
            return Err(PricingError::DimensionMismatch { expected: d, actual: len });
        }
    }
    let d1: Vec<_> = (0..d).map(|i| build_d1st(grid, i)).collect();
    let d2: Vec<_> = (0..d).map(|i| build_d2nd(grid, i)).collect();
    let (r, sigma, h) = (model.r, &model.sigma, &grid.h);

    let mut trip = Vec::new();
    for i in 0..d {
        kron_place(grid, sigma[i].powi(2) / (2.0 * h[i] * h[i]), &[(i, &d2[i])], &mut trip);
        kron_place(grid, r / (2.0 * h[i]), &[(i, &d1[i])], &mut trip);
        for j in i + 1..d {
            let c = sigma[i] * sigma[j] * model.rho[i][j] / (4.0 * h[i] * h[j]);
            if c != 0.0 {
                kron_place(grid, c, &[(i, &d1[i]), (j, &d1[j])], &mut trip);
            }
        }
    }
    trip.extend((0..grid.len()).map(|k| (k, k, -r)));
    let f = CsrMatrix::from_triplets(grid.len(), grid.len(), trip);
    let (c_const, c_disc) = boundary_parts(model, contract, grid);
    Ok(DiscretizedBspde {
        grid: grid.clone(),
        f,
        r,
        c_const,
        c_disc,
        model: Some(model.clone()),
        contract: Some(contract.clone()),
    })
}

/// Value a ghost node would carry. `offset[i]` is the axis index, possibly
/// `-1` or `n_gr` (exterior). Returns `(constant, discounted)` parts.
fn ghost_value(contract: &DerivativeContract, grid: &Grid, idx: &[isize]) -> Option<(f64, f64)> {
    let n = grid.n_gr() as isize;
    let mut outside = false;
    let mut s = Vec::with_capacity(idx.len());
    for (i, &k) in idx.iter().enumerate() {
        if k < 0 || k >= n {
            outside = true;
            let kind = if k < 0 { contract.lower_kind[i] } else { contract.upper_kind[i] };
            if kind == BoundaryKind::KnockOut {
                return Some((0.0, 0.0));
            }
        }
        s.push(grid.lower[i] + (k + 1) as f64 * grid.h[i]);
    }
    if !outside {
        return None;
    }
    let lin: f64 = contract.weights[1..].iter().zip(&s).map(|(a, x)| a * x).sum();
    Some((lin, contract.weights[0]))
}

/// Contributions of exterior stencil neighbours, split into the undiscounted
/// and `e^{-r tau}` parts.
fn boundary_parts(model: &MarketModel, contract: &DerivativeContract, grid: &Grid) -> (Vec<f64>, Vec<f64>) {
    let (d, n) = (grid.d(), grid.len());
    let mut c_const = vec![0.0; n];
    let mut c_disc = vec![0.0; n];
    if contract.all_knock_out() {
        return (c_const, c_disc);
    }
    let (r, sigma, h) = (model.r, &model.sigma, &grid.h);
    let mut x = vec![0.0; d];
    let mut idx = vec![0isize; d];
    for k in 0..n {
        grid.point_into(k, &mut x);
        let mut add = |idx: &[isize], w: f64| {
            if let Some((c, e)) = ghost_value(contract, grid, idx) {
                c_const[k] += w * c;
                c_disc[k] += w * e;
            }
        };
        for (a, v) in idx.iter_mut().enumerate() {
            *v = grid.axis_index(k, a) as isize;
        }
        for i in 0..d {
            let second = sigma[i].powi(2) * x[i] * x[i] / (2.0 * h[i] * h[i]);
            let first = r * x[i] / (2.0 * h[i]);
            for s in [-1isize, 1] {
                let mut nb = idx.clone();
                nb[i] += s;
                add(&nb, second + s as f64 * first);
            }
            for j in i + 1..d {
                let c = sigma[i] * sigma[j] * model.rho[i][j] * x[i] * x[j] / (4.0 * h[i] * h[j]);
                if c == 0.0 {
                    continue;
                }
                for si in [-1isize, 1] {
                    for sj in [-1isize, 1] {
                        let mut nb = idx.clone();
                        nb[i] += si;
                        nb[j] += sj;
                        add(&nb, c * (si * sj) as f64);
                    }
                }
            }
        }
    }
    (c_const, c_disc)
}

/// Snapshots and diagnostics from [`euler_solve`].
#[derive(Debug, Clone)]
pub struct EulerTrajectory {
    /// `(tau, V(tau))` at each requested time, in increasing order.
    pub snapshots: Vec<(f64, Vec<f64>)>,
    pub final_tau: f64,
    pub final_state: Vec<f64>,
    pub steps: usize,
    /// Set when the step exceeds half the estimated stability bound.
    pub stability_warning: Option<String>,
}

impl EulerTrajectory {
    /// Snapshot recorded at `tau` (matched to 1e-12).
    pub fn at(&self, tau: f64) -> Option<&[f64]> {
        self.snapshots.iter().find(|(t, _)| (t - tau).abs() <= 1e-12).map(|(_, v)| v.as_slice())
    }
}

/// Explicit Euler `V <- V + dtau (F V + C(tau))` from 0 to `tau_end`.
///
/// Snapshot times inside `[0, tau_end]` are hit exactly by shortening the
/// step that would cross them.
pub fn euler_solve(
    bspde: &DiscretizedBspde,
    initial: &[f64],
    dtau: f64,
    tau_end: f64,
    snapshot_taus: &[f64],
) -> Result<EulerTrajectory> {
    if initial.len() != bspde.len() {
        return Err(PricingError::DimensionMismatch { expected: bspde.len(), actual: initial.len() });
    }
    if !(dtau > 0.0) || !(tau_end >= 0.0) {
        return Err(PricingError::domain("euler_solve needs dtau > 0 and tau_end >= 0"));
    }
    let mut stops: Vec<f64> = snapshot_taus.iter().copied().filter(|t| *t >= 0.0 && *t <= tau_end).collect();
    stops.push(tau_end);
    stops.sort_by(f64::total_cmp);
    stops.dedup();

    let bound = bspde.stability_bound();
    let stability_warning = (dtau > 0.5 * bound)
        .then(|| format!("dtau = {dtau:e} exceeds half the explicit-Euler stability bound {bound:e}"));

    let norm0 = initial.iter().map(|v| v * v).sum::<f64>().sqrt();
    let limit = 1e6 * norm0.max(f64::MIN_POSITIVE);
    let mut v = initial.to_vec();
    let mut fv = vec![0.0; v.len()];
    let mut tau = 0.0;
    let mut steps = 0usize;
    let mut snapshots = Vec::new();
    for &stop in &stops {
        while tau < stop - 1e-12 {
            // Regular nodes are multiples of dtau, so snapshots do not shift the grid.
            let next = (((tau / dtau) + 1e-9).floor() + 1.0) * dtau;
            let next = next.min(stop);
            let step = next - tau;
            bspde.f.mul_vec_into(&v, &mut fv);
            let c = bspde.boundary_vector(tau);
            let mut norm = 0.0;
            for k in 0..v.len() {
                v[k] += step * (fv[k] + c[k]);
                norm += v[k] * v[k];
            }
            tau = next;
            steps += 1;
            if !norm.is_finite() || norm.sqrt() > limit {
                return Err(PricingError::Divergence {
                    tau,
                    reason: format!(
                        "explicit Euler unstable: |V| grew beyond 1e6 x initial; dtau = {dtau:e}, \
                         stability bound 2/rho(F) ~ {bound:e}"
                    ),
                });
            }
        }
        if snapshot_taus.iter().any(|t| (t - stop).abs() <= 1e-12) {
            snapshots.push((stop, v.clone()));
        }
    }
    Ok(EulerTrajectory { snapshots, final_tau: tau, final_state: v, steps, stability_warning })
}

/// `e^{-r t_ter} sum_k p_k(t_ter) V_k(tau_ter)`.
pub fn classical_price(bspde: &DiscretizedBspde, model: &MarketModel, t_ter: f64, v_tau: &[f64]) -> Result<f64> {
    if v_tau.len() != bspde.len() {
        return Err(PricingError::DimensionMismatch { expected: bspde.len(), actual: v_tau.len() });
    }
    let p = discretized_probabilities(model, t_ter, &bspde.grid)?;
    Ok((-model.r * t_ter).exp() * p.iter().zip(v_tau).map(|(a, b)| a * b).sum::<f64>())
}
