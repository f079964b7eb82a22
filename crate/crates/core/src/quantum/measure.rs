use num_complex::Complex64;
use rand::distr::Distribution;
use rand_distr::Binomial;

use super::{amp_overlap, apply_gate, apply_sequence, GateOp, StateVector};
use crate::error::{PricingError, Result};
use crate::rng;

/// `P(ancilla = 0) = (1 + |<a|b>|^2) / 2` on the normalized parts.
pub fn swap_test_probability(a: &StateVector, b: &StateVector) -> Result<f64> {
    let ov = amp_overlap(a, b)?.norm_sqr() / (a.amp_norm().powi(2) * b.amp_norm().powi(2));
    Ok(((1.0 + ov) / 2.0).min(1.0))
}

/// Ancilla-zero probability from simulating the SWAP-test circuit itself
/// on `2n + 1` qubits. Used to validate [`swap_test_probability`].
pub fn swap_test_circuit_probability(a: &StateVector, b: &StateVector) -> Result<f64> {
    if a.n() != b.n() {
        return Err(PricingError::DimensionMismatch { expected: a.n(), actual: b.n() });
    }
    let n = a.n();
    let mut na = a.clone();
    let mut nb = b.clone();
    na.scale = Complex64::new(1.0, 0.0);
    nb.scale = Complex64::new(1.0, 0.0);
    let mut s = StateVector::zero(1).tensor(&na).tensor(&nb);
    apply_gate(&mut s, &GateOp::H(0))?;
    let swaps = (0..n).map(|q| GateOp::Swap(1 + q, 1 + n + q)).collect();
    apply_gate(&mut s, &GateOp::Controlled { control: 0, ops: swaps })?;
    apply_gate(&mut s, &GateOp::H(0))?;
    let half = s.dim() / 2;
    Ok(s.amps[..half].iter().map(|x| x.norm_sqr()).sum::<f64>() / s.amp_norm().powi(2))
}

/// Shot-sampled estimate of a quantity `2 P(0) - 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShotEstimate {
    /// `2 zeros / shots - 1`, unclipped.
    pub raw: f64,
    /// Binomial standard error of `raw`, from the observed frequency.
    pub std_error: f64,
    pub shots: u64,
    pub zeros: u64,
}

impl ShotEstimate {
    /// Estimate floored at zero, for squared magnitudes.
    pub fn clipped(&self) -> f64 {
        self.raw.max(0.0)
    }
}

/// Draw `shots` ancilla outcomes with `P(0) = p0`.
pub fn sample_ancilla(p0: f64, shots: u64, seed: u64, stream: u64) -> Result<ShotEstimate> {
    if shots == 0 {
        return Err(PricingError::validation("shots must be >= 1"));
    }
    let p0 = p0.clamp(0.0, 1.0);
    let dist = Binomial::new(shots, p0).map_err(|e| PricingError::domain(e.to_string()))?;
    let zeros = dist.sample(&mut rng::stream(seed, stream));
    let f = zeros as f64 / shots as f64;
    Ok(ShotEstimate { raw: 2.0 * f - 1.0, std_error: 2.0 * (f * (1.0 - f) / shots as f64).sqrt(), shots, zeros })
}

/// Sampled SWAP test; `clipped()` of the result estimates `|<a|b>|^2`.
pub fn swap_test_sample(a: &StateVector, b: &StateVector, shots: u64, seed: u64) -> Result<ShotEstimate> {
    sample_ancilla(swap_test_probability(a, b)?, shots, seed, 0)
}

/// Which part of `<base| bra^dag ket |base>` a Hadamard test reads out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    Real,
    Imag,
}

/// `<base| bra^dag ket |base>` from two statevector runs.
pub fn hadamard_overlap(bra: &[GateOp], ket: &[GateOp], base: &StateVector) -> Result<Complex64> {
    let mut a = base.clone();
    let mut b = base.clone();
    apply_sequence(&mut a, bra)?;
    apply_sequence(&mut b, ket)?;
    amp_overlap(&a, &b)
}

/// Exact-mode Hadamard test.
pub fn hadamard_test_exact(bra: &[GateOp], ket: &[GateOp], base: &StateVector, part: Component) -> Result<f64> {
    let z = hadamard_overlap(bra, ket, base)?;
    Ok(match part {
        Component::Real => z.re,
        Component::Imag => z.im,
    })
}

/// Ancilla-zero probability of the interference circuit: ancilla in `|+>`,
/// shared prefix applied unconditionally, the remaining `bra` tail under an
/// anti-control and the `ket` tail under a control, optional `S^dag`, then
/// `H` on the ancilla. `P(0) = (1 + Re or Im) / 2`.
pub fn hadamard_test_probability(bra: &[GateOp], ket: &[GateOp], base: &StateVector, part: Component) -> Result<f64> {
    let n = base.n();
    let anc = n;
    let common = bra.iter().zip(ket).take_while(|(x, y)| x == y).count();
    let mut s = base.with_ancilla();
    s.scale = Complex64::new(1.0, 0.0);
    apply_gate(&mut s, &GateOp::H(anc))?;
    apply_sequence(&mut s, &bra[..common])?;
    apply_gate(&mut s, &GateOp::X(anc))?;
    apply_gate(&mut s, &GateOp::Controlled { control: anc, ops: bra[common..].to_vec() })?;
    apply_gate(&mut s, &GateOp::X(anc))?;
    apply_gate(&mut s, &GateOp::Controlled { control: anc, ops: ket[common..].to_vec() })?;
    if part == Component::Imag {
        apply_gate(&mut s, &GateOp::Sdg(anc))?;
    }
    apply_gate(&mut s, &GateOp::H(anc))?;
    let norm = s.amp_norm().powi(2);
    Ok(s.amps.iter().step_by(2).map(|a| a.norm_sqr()).sum::<f64>() / norm)
}

/// Shot-mode Hadamard test on sub-stream `stream` of `seed`.
pub fn hadamard_test_sample(
    bra: &[GateOp],
    ket: &[GateOp],
    base: &StateVector,
    part: Component,
    shots: u64,
    seed: u64,
    stream: u64,
) -> Result<ShotEstimate> {
    sample_ancilla(hadamard_test_probability(bra, ket, base, part)?, shots, seed, stream)
}
