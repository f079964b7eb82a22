//! Preparation of the initial price state and the density state: exact
//! amplitude encoding, or a variational fit of the layered ansatz.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{PricingError, Result};
use crate::quantum::{apply_sequence, AnsatzCircuit, StateVector};
use crate::rng;

/// How the normalized state is produced from `|0>`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Encoding {
    /// Amplitudes loaded directly (an oracle).
    Exact { amplitudes: Vec<f64> },
    /// `R(theta) |0>`; `theta[0]` is unused and kept at 1.
    Ansatz { ansatz: AnsatzCircuit, theta: Vec<f64> },
}

/// `scale * U |0>` approximating a target vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreparedState {
    /// Target norm, signed so the reported overlap is nonnegative.
    pub scale: f64,
    pub encoding: Encoding,
    /// `|<target/|target| | U|0>|^2`.
    pub fidelity: f64,
}

impl PreparedState {
    /// `U |0>` with unit scale.
    pub fn normalized(&self) -> Result<StateVector> {
        match &self.encoding {
            Encoding::Exact { amplitudes } => {
                StateVector::from_amplitudes(amplitudes.iter().map(|a| Complex64::new(*a, 0.0)).collect())
            }
            Encoding::Ansatz { ansatz, theta } => {
                let mut s = StateVector::zero(ansatz.n);
                apply_sequence(&mut s, &ansatz.gates(theta)?)?;
                Ok(s)
            }
        }
    }

    /// `scale * U |0>`.
    pub fn state(&self) -> Result<StateVector> {
        let mut s = self.normalized()?;
        s.scale = Complex64::new(self.scale, 0.0);
        Ok(s)
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Exact amplitude encoding of `target`.
pub fn exact_encode(target: &[f64]) -> Result<PreparedState> {
    if !target.len().is_power_of_two() {
        return Err(PricingError::validation(format!("target length {} is not a power of two", target.len())));
    }
    let n = norm(target);
    if !(n > 0.0) || !n.is_finite() {
        return Err(PricingError::domain("cannot encode a zero or non-finite target"));
    }
    Ok(PreparedState {
        scale: n,
        encoding: Encoding::Exact { amplitudes: target.iter().map(|x| x / n).collect() },
        fidelity: 1.0,
    })
}

/// `(f(theta + pi/2 e_k) - f(theta - pi/2 e_k)) / 2`, exact for an RY
/// parameter when `f` is an expectation value in the circuit output (a
/// squared overlap is one, with the projector on the target).
pub fn parameter_shift_gradient<F: Fn(&[f64]) -> f64>(f: F, theta: &[f64], k: usize) -> f64 {
    let mut t = theta.to_vec();
    t[k] = theta[k] + FRAC_PI_2;
    let plus = f(&t);
    t[k] = theta[k] - FRAC_PI_2;
    let minus = f(&t);
    (plus - minus) / 2.0
}

/// Real overlap `<target|R(theta)|0>` for a normalized real target.
pub fn overlap(ansatz: &AnsatzCircuit, theta: &[f64], target: &[f64]) -> Result<f64> {
    let mut s = StateVector::zero(ansatz.n);
    apply_sequence(&mut s, &ansatz.gates(theta)?)?;
    Ok(s.amps.iter().zip(target).map(|(a, t)| a.re * t).sum())
}

/// Squared overlap and its gradient over the circuit parameters (index 0
/// of the gradient, `theta_0`, is zero). The squared overlap is the
/// expectation of the target projector, so the shift rule applies to it
/// directly; on the bare amplitude the same rule is off by `sqrt 2`.
pub fn fidelity_and_gradient(ansatz: &AnsatzCircuit, theta: &[f64], target: &[f64]) -> Result<(f64, Vec<f64>)> {
    let a = overlap(ansatz, theta, target)?;
    let f = |t: &[f64]| overlap(ansatz, t, target).map(|x| x * x).unwrap_or(f64::NAN);
    let mut grad = vec![0.0; theta.len()];
    for (k, g) in grad.iter_mut().enumerate().skip(1) {
        *g = parameter_shift_gradient(f, theta, k);
    }
    Ok((a * a, grad))
}

/// Optimizer settings for [`variational_fit`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub restarts: usize,
    pub iterations: usize,
    pub learning_rate: f64,
    /// Stop a restart once `1 - fidelity` drops below this.
    pub tolerance: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self { restarts: 5, iterations: 2000, learning_rate: 0.05, tolerance: 1e-9 }
    }
}

/// Outcome of [`variational_fit`].
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub state: PreparedState,
    /// Best fidelity seen so far, one entry per iteration across restarts.
    pub trace: Vec<f64>,
    pub best_restart: usize,
}

/// Maximize `|<target|R(theta)|0>|^2` with Adam ascent on parameter-shift
/// gradients, keeping the best point over random restarts.
pub fn variational_fit(target: &[f64], ansatz: &AnsatzCircuit, config: &FitConfig, seed: u64) -> Result<FitResult> {
    if target.len() != 1 << ansatz.n {
        return Err(PricingError::DimensionMismatch { expected: 1 << ansatz.n, actual: target.len() });
    }
    let tn = norm(target);
    if !(tn > 0.0) {
        return Err(PricingError::domain("cannot fit a zero target"));
    }
    let t: Vec<f64> = target.iter().map(|x| x / tn).collect();
    let np = ansatz.num_params();
    let (b1, b2, eps) = (0.9, 0.999, 1e-12);

    let mut best = (f64::NEG_INFINITY, vec![1.0; np], 0usize);
    let mut trace = Vec::with_capacity(config.restarts * config.iterations);
    for restart in 0..config.restarts.max(1) {
        let mut g = rng::stream(seed, restart as u64);
        let mut theta: Vec<f64> = (0..np).map(|k| if k == 0 { 1.0 } else { g.random_range(-PI..PI) }).collect();
        let (mut m1, mut m2) = (vec![0.0; np], vec![0.0; np]);
        for it in 0..config.iterations {
            let (f, grad) = fidelity_and_gradient(ansatz, &theta, &t)?;
            if f > best.0 {
                best = (f, theta.clone(), restart);
            }
            trace.push(best.0);
            if 1.0 - f < config.tolerance {
                break;
            }
            let step = (it + 1) as i32;
            for k in 1..np {
                m1[k] = b1 * m1[k] + (1.0 - b1) * grad[k];
                m2[k] = b2 * m2[k] + (1.0 - b2) * grad[k] * grad[k];
                let mh = m1[k] / (1.0 - b1.powi(step));
                let vh = m2[k] / (1.0 - b2.powi(step));
                theta[k] += config.learning_rate * mh / (vh.sqrt() + eps);
            }
        }
        let f = overlap(ansatz, &theta, &t)?.powi(2);
        if f > best.0 {
            best = (f, theta.clone(), restart);
        }
    }
    let (_, theta, best_restart) = best;
    let a = overlap(ansatz, &theta, &t)?;
    let state = PreparedState {
        scale: if a < 0.0 { -tn } else { tn },
        encoding: Encoding::Ansatz { ansatz: *ansatz, theta },
        fidelity: (a * a).min(1.0),
    };
    Ok(FitResult { state, trace, best_restart })
}
