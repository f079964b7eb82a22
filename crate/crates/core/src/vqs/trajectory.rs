use std::io::Write;

use serde::Serialize;

use crate::error::{PricingError, Result};
use crate::fdm::EulerTrajectory;
use crate::quantum::{ansatz_state, inner_product, AnsatzCircuit, StateVector};

/// Parameter history of a VQS run. Row `k` holds `theta(tau_k)` and the
/// diagnostics of the linear solve performed at `tau_k`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct VqsTrajectory {
    pub taus: Vec<f64>,
    pub thetas: Vec<Vec<f64>>,
    pub condition: Vec<f64>,
    pub residual: Vec<f64>,
    /// `(tau, theta)` at the requested snapshot times.
    pub snapshots: Vec<(f64, Vec<f64>)>,
    /// First `tau` at which `|theta_0|` crossed the configured bound.
    pub theta0_bound_exceeded: Option<f64>,
}

impl VqsTrajectory {
    pub(crate) fn push(&mut self, tau: f64, theta: &[f64], condition: f64, residual: f64) {
        self.taus.push(tau);
        self.thetas.push(theta.to_vec());
        self.condition.push(condition);
        self.residual.push(residual);
    }

    pub fn final_theta(&self) -> &[f64] {
        self.thetas.last().map(|v| v.as_slice()).unwrap_or(&[])
    }

    pub fn snapshot(&self, tau: f64) -> Option<&[f64]> {
        self.snapshots.iter().find(|(t, _)| (t - tau).abs() <= 1e-12).map(|(_, v)| v.as_slice())
    }

    /// CSV with columns `tau,theta_0,..,theta_N,condition,residual`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let np = self.thetas.first().map_or(0, |t| t.len());
        let mut header = vec!["tau".to_string()];
        header.extend((0..np).map(|k| format!("theta_{k}")));
        header.push("condition".into());
        header.push("residual".into());
        writeln!(w, "{}", header.join(","))?;
        for k in 0..self.taus.len() {
            let mut row = vec![format!("{:e}", self.taus[k])];
            row.extend(self.thetas[k].iter().map(|x| format!("{x:e}")));
            row.push(format!("{:e}", self.condition[k]));
            row.push(format!("{:e}", self.residual[k]));
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// One line of [`vqs_vs_exact_report`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FidelityRow {
    pub tau: f64,
    /// `|<V|v~>| / (|V| |v~|)`.
    pub fidelity: f64,
    /// `theta_0(tau) / theta_0(0)`.
    pub theta0_ratio: f64,
    /// `|V(tau)| / |V(0)|` of the classical solution.
    pub norm_ratio: f64,
}

/// Compare VQS snapshots with classical Euler snapshots at the same times.
/// `v0` is the classical initial vector.
pub fn vqs_vs_exact_report(
    traj: &VqsTrajectory,
    euler: &EulerTrajectory,
    v0: &[f64],
    ansatz: &AnsatzCircuit,
    base: &StateVector,
) -> Result<Vec<FidelityRow>> {
    let theta_start = traj.thetas.first().ok_or_else(|| PricingError::validation("empty trajectory"))?;
    let norm0 = v0.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut rows = Vec::new();
    for (tau, theta) in &traj.snapshots {
        let classical: &[f64] = if *tau == 0.0 {
            v0
        } else {
            euler.at(*tau).ok_or_else(|| PricingError::validation(format!("no classical snapshot at tau = {tau}")))?
        };
        let vq = ansatz_state(ansatz, theta, base)?;
        let vc = StateVector::from_real(classical)?;
        let fidelity = inner_product(&vc, &vq)?.norm() / (vc.norm() * vq.norm());
        rows.push(FidelityRow {
            tau: *tau,
            fidelity,
            theta0_ratio: theta[0] / theta_start[0],
            norm_ratio: vc.norm() / norm0,
        });
    }
    Ok(rows)
}
