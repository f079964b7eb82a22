use serde::{Deserialize, Serialize};

use super::{apply_sequence, GateOp, StateVector};
use crate::error::{PricingError, Result};

/// Placement of the CZ gates in each entangling layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Entangler {
    /// Nearest-neighbour ring `(0,1), (1,2), .., (n-1,0)` in every layer.
    #[default]
    Ring,
    /// The ring's pairs split in two halves used on alternate layers: even
    /// pairs `(0,1), (2,3), ..` on odd layers, the rest on even layers.
    ///
    /// For even `n >= 4` the ring commutes with `Y_S` for `S` the even
    /// qubits, the odd qubits, or all of them, so those three expectation
    /// values are frozen along any ring trajectory. The alternating layout
    /// has no such invariant.
    Brick,
}

/// Layered RY / CZ circuit with a classical scale parameter.
///
/// Layer 0 is a column of RY gates; each of the `m` further layers is a CZ
/// layer followed by an RY column. The full parameter vector is
/// `[theta_0, theta_(q, j)...]` with circuit parameter `(q, j)` at position
/// `1 + j n + q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnsatzCircuit {
    pub n: usize,
    pub m: usize,
    #[serde(default)]
    pub entangler: Entangler,
}

impl AnsatzCircuit {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        if n == 0 {
            return Err(PricingError::validation("ansatz needs at least one qubit"));
        }
        Ok(Self { n, m, entangler: Entangler::Ring })
    }

    pub fn with_entangler(self, entangler: Entangler) -> Self {
        Self { entangler, ..self }
    }

    /// Circuit parameters, `n (m + 1)`.
    pub fn circuit_params(&self) -> usize {
        self.n * (self.m + 1)
    }

    /// Circuit parameters plus `theta_0`.
    pub fn num_params(&self) -> usize {
        self.circuit_params() + 1
    }

    /// CZ pairs of the ring. Two qubits get a single CZ, since a closed ring
    /// would apply it twice.
    fn ring(&self) -> Vec<(usize, usize)> {
        let n = self.n;
        let mut pairs: Vec<_> = (0..n.saturating_sub(1)).map(|q| (q, q + 1)).collect();
        if n > 2 {
            pairs.push((n - 1, 0));
        }
        pairs
    }

    /// CZ pairs of entangling layer `j` (1-based).
    pub fn entangler_layer(&self, j: usize) -> Vec<(usize, usize)> {
        let ring = self.ring();
        match self.entangler {
            Entangler::Ring => ring,
            Entangler::Brick if self.n <= 2 => ring,
            Entangler::Brick => ring.into_iter().filter(|(a, _)| (a % 2 == 0) == (j % 2 == 1)).collect(),
        }
    }

    /// `(qubit, layer)` of full parameter index `k >= 1`.
    pub fn locate(&self, k: usize) -> Result<(usize, usize)> {
        if k == 0 || k >= self.num_params() {
            return Err(PricingError::IndexOutOfRange { index: k, limit: self.num_params() });
        }
        Ok(((k - 1) % self.n, (k - 1) / self.n))
    }

    fn check_len(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.num_params() {
            return Err(PricingError::DimensionMismatch { expected: self.num_params(), actual: theta.len() });
        }
        Ok(())
    }

    /// Gate list for `theta` (full vector; `theta_0` is not a gate), with
    /// `extra` inserted right after the RY carrying parameter `insert_at`.
    fn build(&self, theta: &[f64], insert_at: Option<usize>, extra: &dyn Fn(usize) -> GateOp) -> Vec<GateOp> {
        let n = self.n;
        let mut ops = Vec::with_capacity(self.circuit_params() + self.m * n + 1);
        for j in 0..=self.m {
            if j > 0 {
                ops.extend(self.entangler_layer(j).into_iter().map(|(a, b)| GateOp::CZ(a, b)));
            }
            for q in 0..n {
                let k = 1 + j * n + q;
                ops.push(GateOp::RY(q, theta[k]));
                if insert_at == Some(k) {
                    ops.push(extra(q));
                }
            }
        }
        ops
    }

    pub fn gates(&self, theta: &[f64]) -> Result<Vec<GateOp>> {
        self.check_len(theta)?;
        Ok(self.build(theta, None, &|q| GateOp::Y(q)))
    }

    /// Gates with a Pauli `Y` inserted after the rotation of parameter `k`,
    /// the generator of `RY(t) = exp(-i t Y / 2)`.
    pub fn gates_with_generator(&self, theta: &[f64], k: usize) -> Result<Vec<GateOp>> {
        self.check_len(theta)?;
        self.locate(k)?;
        Ok(self.build(theta, Some(k), &|q| GateOp::Y(q)))
    }
}

/// `theta_0 R(theta) |base>`.
pub fn ansatz_state(ansatz: &AnsatzCircuit, theta: &[f64], base: &StateVector) -> Result<StateVector> {
    if base.n() != ansatz.n {
        return Err(PricingError::DimensionMismatch { expected: ansatz.n, actual: base.n() });
    }
    let ops = ansatz.gates(theta)?;
    let mut s = base.clone();
    apply_sequence(&mut s, &ops)?;
    s.scale *= theta[0];
    Ok(s)
}
