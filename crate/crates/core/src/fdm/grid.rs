use serde::{Deserialize, Serialize};

use crate::error::{PricingError, Result};

/// Tensor grid of strictly interior points, `n_gr` per axis.
///
/// Axis `i` has spacing `h_i = (u_i - l_i) / (n_gr + 1)` and coordinates
/// `x_i^(k) = l_i + (k + 1) h_i` for `k = 0..n_gr`. Flat indices are 0-based
/// and lexicographic with the first axis most significant,
/// `k = sum_i n_gr^(d-1-i) k_i`, which is the 1-based textbook index minus one
/// and matches the qubit layout (qubit 0 = most significant bit).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    d: usize,
    n_gr: usize,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub h: Vec<f64>,
}

impl Grid {
    pub fn new(d: usize, n_gr: usize, lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if d == 0 || lower.len() != d || upper.len() != d {
            return Err(PricingError::validation("grid bounds must have one entry per axis"));
        }
        if n_gr < 2 || !n_gr.is_power_of_two() {
            return Err(PricingError::validation(format!("points per axis must be a power of two >= 2, got {n_gr}")));
        }
        if lower.iter().zip(&upper).any(|(l, u)| !(l < u)) {
            return Err(PricingError::validation("grid needs lower < upper on every axis"));
        }
        let h = lower.iter().zip(&upper).map(|(l, u)| (u - l) / (n_gr as f64 + 1.0)).collect();
        Ok(Self { d, n_gr, lower, upper, h })
    }

    /// Grid with `qubits` qubits per axis spanning a contract's domain.
    pub fn for_contract(contract: &crate::market::DerivativeContract, qubits: usize) -> Result<Self> {
        Self::new(contract.d(), 1usize << qubits, contract.lower.clone(), contract.upper.clone())
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n_gr(&self) -> usize {
        self.n_gr
    }

    /// Qubits per axis.
    pub fn qubits_per_axis(&self) -> usize {
        self.n_gr.trailing_zeros() as usize
    }

    pub fn total_qubits(&self) -> usize {
        self.d * self.qubits_per_axis()
    }

    /// Number of grid points, `n_gr^d`.
    pub fn len(&self) -> usize {
        self.n_gr.pow(self.d as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cell_volume(&self) -> f64 {
        self.h.iter().product()
    }

    pub fn coordinate(&self, axis: usize, k: usize) -> f64 {
        self.lower[axis] + (k as f64 + 1.0) * self.h[axis]
    }

    /// Axis index of flat point `k` along `axis`.
    pub fn axis_index(&self, k: usize, axis: usize) -> usize {
        (k / self.stride(axis)) % self.n_gr
    }

    /// Flat-index stride of `axis`.
    pub fn stride(&self, axis: usize) -> usize {
        self.n_gr.pow((self.d - 1 - axis) as u32)
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &k| acc * self.n_gr + k)
    }

    pub fn point_into(&self, k: usize, out: &mut [f64]) {
        for (axis, x) in out.iter_mut().enumerate() {
            *x = self.coordinate(axis, self.axis_index(k, axis));
        }
    }

    pub fn point(&self, k: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.d];
        self.point_into(k, &mut x);
        x
    }
}
