//! McLachlan variational simulation of `d|v>/dtau = L |v> + |u(tau)>` on the
//! layered ansatz `theta_0 R(theta) |v_0>`.

mod trajectory;

pub use trajectory::{vqs_vs_exact_report, FidelityRow, VqsTrajectory};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{PricingError, Result};
use crate::lcu::WeightedUnitarySum;
use crate::quantum::{
    amp_overlap, apply_sequence, hadamard_test_exact, hadamard_test_sample, AnsatzCircuit, Component, GateOp,
    StateVector,
};
use crate::rng;

/// How overlaps are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum EvalMode {
    /// Statevector inner products.
    Exact,
    /// Sampled Hadamard tests with `shots` per entry.
    Shots { shots: u64, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VqsConfig {
    pub dtau: f64,
    pub tau_end: f64,
    #[serde(default = "default_lambda")]
    pub lambda_reg: f64,
    #[serde(default = "default_mode")]
    pub mode: EvalMode,
    #[serde(default)]
    pub snapshots: Vec<f64>,
    /// Flag raised once `|theta_0|` exceeds this; `None` means 1e3 x `|theta_0(0)|`.
    #[serde(default)]
    pub theta0_bound: Option<f64>,
}

fn default_lambda() -> f64 {
    1e-8
}

fn default_mode() -> EvalMode {
    EvalMode::Exact
}

impl VqsConfig {
    pub fn new(dtau: f64, tau_end: f64) -> Self {
        Self {
            dtau,
            tau_end,
            lambda_reg: default_lambda(),
            mode: EvalMode::Exact,
            snapshots: Vec::new(),
            theta0_bound: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dtau > 0.0) || !(self.tau_end >= 0.0) {
            return Err(PricingError::validation("VQS needs dtau > 0 and tau_end >= 0"));
        }
        if !(self.lambda_reg >= 0.0) {
            return Err(PricingError::validation("lambda_reg must be >= 0"));
        }
        if let EvalMode::Shots { shots: 0, .. } = self.mode {
            return Err(PricingError::validation("shots must be >= 1"));
        }
        Ok(())
    }
}

/// Prefactor `c_k` with `d|v>/d theta_k = c_k ops_k |v_0>`: 1 for `theta_0`,
/// `-i theta_0 / 2` for a rotation angle.
fn prefactor(theta: &[f64], k: usize) -> Complex64 {
    if k == 0 {
        Complex64::new(1.0, 0.0)
    } else {
        Complex64::new(0.0, -theta[0] / 2.0)
    }
}

fn derivative_ops(ansatz: &AnsatzCircuit, theta: &[f64], k: usize) -> Result<Vec<GateOp>> {
    if k == 0 {
        ansatz.gates(theta)
    } else {
        ansatz.gates_with_generator(theta, k)
    }
}

/// `d|v~>/d theta_k` as a scaled state.
pub fn derivative_state(ansatz: &AnsatzCircuit, theta: &[f64], base: &StateVector, k: usize) -> Result<StateVector> {
    if k >= ansatz.num_params() {
        return Err(PricingError::IndexOutOfRange { index: k, limit: ansatz.num_params() });
    }
    let ops = derivative_ops(ansatz, theta, k)?;
    let mut s = base.clone();
    apply_sequence(&mut s, &ops)?;
    s.scale *= prefactor(theta, k);
    Ok(s)
}

/// Where a Hadamard test's shot noise comes from.
#[derive(Debug, Clone, Copy)]
struct Noise {
    shots: u64,
    seed: u64,
    step: u64,
}

/// `Re(kappa <base| bra^dag ket |base>)` from Hadamard tests. `kappa` is real
/// or imaginary, so a single test suffices in practice.
fn re_scaled(
    kappa: Complex64,
    bra: &[GateOp],
    ket: &[GateOp],
    base: &StateVector,
    noise: Option<Noise>,
    entry: &[u64],
) -> Result<f64> {
    let mut total = 0.0;
    for (part, w) in [(Component::Real, kappa.re), (Component::Imag, -kappa.im)] {
        if w == 0.0 {
            continue;
        }
        let x = match noise {
            None => hadamard_test_exact(bra, ket, base, part)?,
            Some(nz) => {
                let mut ids = vec![nz.step, part as u64];
                ids.extend_from_slice(entry);
                hadamard_test_sample(bra, ket, base, part, nz.shots, nz.seed, rng::mix(&ids))?.raw
            }
        };
        total += w * x;
    }
    Ok(total)
}

fn noise_of(mode: EvalMode, step: u64) -> Option<Noise> {
    match mode {
        EvalMode::Exact => None,
        EvalMode::Shots { shots, seed } => Some(Noise { shots, seed, step }),
    }
}

/// `M_ij = Re <d_i v~ | d_j v~>`.
///
/// Exact mode takes the Gram matrix of derivative states; shot mode runs one
/// Hadamard test per upper-triangle entry. `step` selects the shot-noise
/// sub-streams.
pub fn compute_m(
    ansatz: &AnsatzCircuit,
    theta: &[f64],
    base: &StateVector,
    mode: EvalMode,
    step: u64,
) -> Result<DMatrix<f64>> {
    let np = ansatz.num_params();
    let mut m = DMatrix::zeros(np, np);
    match noise_of(mode, step) {
        None => {
            let states: Vec<_> = (0..np).map(|k| derivative_state(ansatz, theta, base, k)).collect::<Result<_>>()?;
            for i in 0..np {
                for j in i..np {
                    let z = states[i].scale.conj() * states[j].scale * amp_overlap(&states[i], &states[j])?;
                    m[(i, j)] = z.re;
                    m[(j, i)] = z.re;
                }
            }
        }
        Some(nz) => {
            let ops: Vec<_> = (0..np).map(|k| derivative_ops(ansatz, theta, k)).collect::<Result<_>>()?;
            for i in 0..np {
                for j in i..np {
                    let kappa = prefactor(theta, i).conj() * prefactor(theta, j);
                    let v = re_scaled(kappa, &ops[i], &ops[j], base, Some(nz), &[0, i as u64, j as u64])?;
                    m[(i, j)] = v;
                    m[(j, i)] = v;
                }
            }
        }
    }
    Ok(m)
}

/// `V_j = Re <d_j v~| (L |v~> + |u(tau)>)`.
pub fn compute_v(
    ansatz: &AnsatzCircuit,
    theta: &[f64],
    base: &StateVector,
    l: &WeightedUnitarySum,
    u: &WeightedUnitarySum,
    tau: f64,
    mode: EvalMode,
    step: u64,
) -> Result<DVector<f64>> {
    let np = ansatz.num_params();
    let mut v = DVector::zeros(np);
    match noise_of(mode, step) {
        None => {
            let psi = crate::quantum::ansatz_state(ansatz, theta, base)?;
            let mut w: Vec<Complex64> = l.apply(&psi, tau)?.into_iter().map(|a| a * psi.scale).collect();
            if !u.is_empty() {
                let uv = u.apply(&StateVector::zero(base.n()), tau)?;
                for (x, y) in w.iter_mut().zip(uv) {
                    *x += y;
                }
            }
            for j in 0..np {
                let dj = derivative_state(ansatz, theta, base, j)?;
                let z: Complex64 = dj.amps.iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
                v[j] = (dj.scale.conj() * z).re;
            }
        }
        Some(nz) => {
            let ops0 = ansatz.gates(theta)?;
            let lc = l.coefficients(tau);
            let uc = u.coefficients(tau);
            let zero = StateVector::zero(base.n());
            let prep = GateOp::Prepare(std::sync::Arc::new(base.amps.clone()));
            for j in 0..np {
                let opsj = derivative_ops(ansatz, theta, j)?;
                let cj = prefactor(theta, j).conj();
                let mut acc = 0.0;
                for (k, lam) in lc.iter().enumerate() {
                    let mut ket = ops0.clone();
                    ket.extend(l.term_gates(k));
                    let kappa = cj * theta[0] * *lam;
                    acc += re_scaled(kappa, &opsj, &ket, base, Some(nz), &[1, j as u64, k as u64])?;
                }
                if !u.is_empty() {
                    let mut bra = vec![prep.clone()];
                    bra.extend(opsj.iter().cloned());
                    for (k, eta) in uc.iter().enumerate() {
                        let kappa = cj * *eta;
                        acc += re_scaled(kappa, &bra, &u.term_gates(k), &zero, Some(nz), &[2, j as u64, k as u64])?;
                    }
                }
                v[j] = acc;
            }
        }
    }
    Ok(v)
}

/// Solution of one linear system with diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct StepSolution {
    pub theta_dot: DVector<f64>,
    /// `|M theta_dot - V|` with the unregularized `M`.
    pub residual: f64,
    /// `lambda_max / lambda_min` of `M` (infinite when singular).
    pub condition: f64,
    pub used_pseudoinverse: bool,
}

/// Solve `(M + lambda I) theta_dot = V` by Cholesky, falling back to an SVD
/// pseudoinverse with cutoff `1e-8 sigma_max`.
pub fn solve_step(m: &DMatrix<f64>, v: &DVector<f64>, lambda_reg: f64) -> Result<StepSolution> {
    if m.nrows() != m.ncols() || m.nrows() != v.len() {
        return Err(PricingError::DimensionMismatch { expected: m.nrows(), actual: v.len() });
    }
    if m.iter().chain(v.iter()).any(|x| !x.is_finite()) {
        return Err(PricingError::validation("non-finite entry in M or V"));
    }
    let n = m.nrows();
    let a = m + DMatrix::identity(n, n) * lambda_reg;
    let (theta_dot, used_pseudoinverse) = match a.clone().cholesky() {
        Some(ch) => (ch.solve(v), false),
        None => {
            let svd = a.svd(true, true);
            let smax = svd.singular_values.max();
            let pinv = svd.pseudo_inverse(1e-8 * smax).map_err(|e| PricingError::validation(e.to_string()))?;
            (pinv * v, true)
        }
    };
    let residual = (m * &theta_dot - v).norm();
    let eig = m.clone().symmetric_eigenvalues();
    let (lo, hi) = (eig.min(), eig.abs().max());
    let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    Ok(StepSolution { theta_dot, residual, condition, used_pseudoinverse })
}

/// Integrate `theta` with explicit Euler from 0 to `config.tau_end`.
pub fn run_vqs(
    ansatz: &AnsatzCircuit,
    theta_init: &[f64],
    base: &StateVector,
    l: &WeightedUnitarySum,
    u: &WeightedUnitarySum,
    config: &VqsConfig,
) -> Result<VqsTrajectory> {
    config.validate()?;
    if theta_init.len() != ansatz.num_params() {
        return Err(PricingError::DimensionMismatch { expected: ansatz.num_params(), actual: theta_init.len() });
    }
    let bound = config.theta0_bound.unwrap_or(1e3 * theta_init[0].abs());
    let mut stops: Vec<f64> = config.snapshots.iter().copied().filter(|t| *t >= 0.0 && *t <= config.tau_end).collect();
    stops.push(config.tau_end);
    stops.sort_by(f64::total_cmp);
    stops.dedup();

    let mut traj = VqsTrajectory::default();
    let mut theta = DVector::from_column_slice(theta_init);
    let mut tau = 0.0;
    let mut step = 0u64;
    let solve_at = |theta: &DVector<f64>, tau: f64, step: u64| -> Result<StepSolution> {
        let th = theta.as_slice();
        let m = compute_m(ansatz, th, base, config.mode, step)?;
        let v = compute_v(ansatz, th, base, l, u, tau, config.mode, step)?;
        solve_step(&m, &v, config.lambda_reg).map_err(|e| PricingError::Divergence { tau, reason: e.to_string() })
    };
    let record_snapshot = |traj: &mut VqsTrajectory, tau: f64, theta: &DVector<f64>| {
        if config.snapshots.iter().any(|t| (t - tau).abs() <= 1e-12) {
            traj.snapshots.push((tau, theta.as_slice().to_vec()));
        }
    };
    record_snapshot(&mut traj, 0.0, &theta);
    for &stop in &stops {
        while tau < stop - 1e-12 {
            let next = ((((tau / config.dtau) + 1e-9).floor() + 1.0) * config.dtau).min(stop);
            let sol = solve_at(&theta, tau, step)?;
            traj.push(tau, theta.as_slice(), sol.condition, sol.residual);
            let cand = &theta + &sol.theta_dot * (next - tau);
            if cand.iter().any(|x| !x.is_finite()) {
                return Err(PricingError::Divergence { tau, reason: "non-finite parameters after Euler step".into() });
            }
            theta = cand;
            tau = next;
            step += 1;
            if theta[0].abs() > bound && traj.theta0_bound_exceeded.is_none() {
                traj.theta0_bound_exceeded = Some(tau);
            }
        }
        if stop > 0.0 {
            record_snapshot(&mut traj, stop, &theta);
        }
    }
    let sol = solve_at(&theta, tau, step)?;
    traj.push(tau, theta.as_slice(), sol.condition, sol.residual);
    Ok(traj)
}
